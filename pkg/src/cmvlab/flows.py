"""The finite Ablowitz-Ladik hierarchy.

A polynomial ``f`` defines the Hamiltonian ``phi(B) = Im tr f(B)``.  On CMV
matrices its flow is the Lax equation ``B' = -[B, pi_a(B f'(B))]`` and in
spectral variables it multiplies the masses by ``exp(t F(z_j))`` with
``F(z) = 2 Re z f'(z)``.  Three integrators are provided:

* :func:`flow_measure` evolves the masses in closed form (canonical);
* :func:`flow_qr` uses the factorization ``exp(t B f'(B)) = L Q^{-1}``;
* :func:`flow_ode` integrates the Lax equation with RK4.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .cmv import CMVMatrix, VerblunskyCoefficients, build_cmv, check_cmv_shape, extract_verblunsky
from .errors import NumericalError, SingularMatrixError, StepSizeError, ValidationError
from .linalg_core import as_matrix, eig_unitary, frozen, lq_unitary_factor, matrix_function, pi_a
from .reduction import _clean
from .spectral import SpectralMeasure, measure_of, subset_coefficients, verblunsky_of_measure

MASS_FLOOR = 1e-280
ODE_DRIFT_TOL = 1e-6
QR_SHAPE_TOL = 1e-8
SUBSET_MAX_N = 14
STABLE_MASS = 1e-6


@dataclass(frozen=True)
class HierarchyHamiltonian:
    """``phi(B) = Im tr f(B)`` for ``f(z) = sum_k c_k z^k``."""

    f_coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.f_coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
            raise ValidationError("f_coeffs must be a non-empty finite vector")
        object.__setattr__(self, "f_coeffs", frozen(c))

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.f_coeffs)
        return int(nz[-1]) if nz.size else 0

    @property
    def fprime_coeffs(self) -> np.ndarray:
        c = self.f_coeffs
        return c[1:] * np.arange(1, c.size)

    def f(self, z):
        return np.polynomial.polynomial.polyval(z, self.f_coeffs)

    def fprime(self, z):
        return np.polynomial.polynomial.polyval(z, self.fprime_coeffs) if self.f_coeffs.size > 1 else 0 * z

    def symbol(self, z):
        """``F(z) = 2 Re z f'(z)``."""
        return 2.0 * np.real(z * self.fprime(z))

    def phi(self, b: np.ndarray) -> float:
        return float(np.imag(np.trace(matrix_polynomial(self.f_coeffs, b))))

    def fprime_matrix(self, b: np.ndarray) -> np.ndarray:
        return matrix_polynomial(self.fprime_coeffs, b)

    def check_degree(self, n: int) -> None:
        if self.degree > 2 * n:
            raise ValidationError(f"polynomial degree {self.degree} exceeds 2n = {2 * n}")


def matrix_polynomial(coeffs, b: np.ndarray) -> np.ndarray:
    """Horner evaluation of ``sum_k c_k B^k``."""
    n = b.shape[0]
    out = np.zeros((n, n), dtype=complex)
    eye = np.eye(n, dtype=complex)
    for c in np.asarray(coeffs)[::-1]:
        out = out @ b + c * eye
    return out


def _as_cmv(c) -> CMVMatrix:
    if isinstance(c, CMVMatrix):
        return c
    if isinstance(c, VerblunskyCoefficients):
        return build_cmv(c)
    return CMVMatrix.from_matrix(c)


def _reproject(b: np.ndarray, shape_tol: float, clamp: bool, err=NumericalError) -> CMVMatrix:
    """Snap a matrix that should be CMV back onto the CMV manifold."""
    report = check_cmv_shape(b, zero_tol=shape_tol)
    if not report.is_cmv_shape:
        raise err(f"flow left the CMV manifold beyond {shape_tol:g}: {report.violations[:3]}")
    v = extract_verblunsky(_clean(b), clamp=clamp)
    return build_cmv(v)


def qr_conjugation(b: np.ndarray, h: HierarchyHamiltonian, t: float) -> np.ndarray:
    """``Q^{-1} B Q`` from ``exp(t B f'(B)) = L Q^{-1}``, before re-projection."""
    g = matrix_function(b, lambda z: np.exp(t * z * h.fprime(z)))
    try:
        _, q = lq_unitary_factor(g)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"{exc}; split the time interval into shorter steps") from exc
    return q.conj().T @ b @ q


def flow_qr(c, h: HierarchyHamiltonian, t: float) -> CMVMatrix:
    """Time-``t`` map by factorization: ``exp(t B f'(B)) = L Q^{-1}``, ``B(t) = Q^{-1} B Q``."""
    c = _as_cmv(c)
    h.check_degree(c.n)
    if t == 0 or c.n == 1:
        return c
    return _reproject(qr_conjugation(c.matrix, h, t), QR_SHAPE_TOL, clamp=False)


@dataclass(frozen=True)
class EvolvedMeasure:
    measure: SpectralMeasure
    log_masses: np.ndarray
    clamped: bool


def evolve_measure(m: SpectralMeasure, h: HierarchyHamiltonian, t: float) -> EvolvedMeasure:
    """``mu_j(t) = exp(t F(z_j)) mu_j / sum_l exp(t F(z_l)) mu_l`` in log space."""
    lam = h.symbol(m.z)
    logw = np.log(m.masses) + t * lam
    logmu = logw - logsumexp(logw)
    mu = np.exp(logmu)
    clamped = bool(np.any(mu < MASS_FLOOR))
    if clamped:
        mu = np.maximum(mu, MASS_FLOOR)
    return EvolvedMeasure(SpectralMeasure(m.thetas, mu / mu.sum()), frozen(logmu), clamped)


def flow_measure(c, h: HierarchyHamiltonian, t: float) -> CMVMatrix:
    """Exact time-``t`` map through the spectral measure.

    The Szego recursion loses accuracy once some mass is tiny (``rho_k``
    then underflows relative to rounding), so below ``STABLE_MASS`` and for
    ``n <= 14`` the coefficients come from the subset-sum inverse on the
    exact log masses, clamped just inside the disc.  Masses under
    ``MASS_FLOOR`` also raise a ``RuntimeWarning``.
    """
    c = _as_cmv(c)
    h.check_degree(c.n)
    if t == 0 or c.n == 1:
        return c
    m = measure_of(c)
    ev = evolve_measure(m, h, t)
    if ev.clamped:
        warnings.warn(f"masses clamped at {MASS_FLOOR:g} at t = {t}", RuntimeWarning, stacklevel=2)
    if ev.measure.masses.min() >= STABLE_MASS or m.n > SUBSET_MAX_N:
        return build_cmv(verblunsky_of_measure(ev.measure))
    sc = subset_coefficients(m.thetas, ev.log_masses)
    return build_cmv(VerblunskyCoefficients.clamped(sc.alphas))


def lax_field(b: np.ndarray, h: HierarchyHamiltonian) -> np.ndarray:
    """``-[B, pi_a(B f'(B))]``."""
    a = pi_a(b @ h.fprime_matrix(b))
    return a @ b - b @ a


def lax_rk4(b: np.ndarray, h: HierarchyHamiltonian, t: float, steps: int) -> np.ndarray:
    """Classical RK4 on the Lax equation, without re-projection."""
    b = np.array(b, dtype=complex)
    dt = t / steps
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            k1 = lax_field(b, h)
            k2 = lax_field(b + 0.5 * dt * k1, h)
            k3 = lax_field(b + 0.5 * dt * k2, h)
            k4 = lax_field(b + dt * k3, h)
            b = b + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(b)):
                break
    return b


def flow_ode(c, h: HierarchyHamiltonian, t: float, steps: int = 1000) -> CMVMatrix:
    """Classical RK4 on the Lax equation, then re-projection onto CMV shape.

    Raises
    ------
    StepSizeError
        If the integrated matrix drifted from the CMV pattern by more than
        ``1e-6`` (take more steps).
    """
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    c = _as_cmv(c)
    h.check_degree(c.n)
    if t == 0 or c.n == 1:
        return c
    b = lax_rk4(c.matrix, h, t, steps)
    if not np.all(np.isfinite(b)):
        raise StepSizeError(f"RK4 diverged with {steps} steps over t = {t}; take more steps")
    return _reproject(b, ODE_DRIFT_TOL, clamp=True, err=StepSizeError)


FLOWS = {"measure": flow_measure, "qr": flow_qr, "ode": flow_ode}


def al_vector_field(v: VerblunskyCoefficients) -> np.ndarray:
    """``alpha_j' = i rho_j^2 (alpha_{j-1} + alpha_{j+1})`` with ``alpha_{-1} = -1``.

    This is the defocusing Ablowitz-Ladik flow.  In the normalization of
    :class:`HierarchyHamiltonian` it is generated by ``f(z) = -i z``, i.e.
    ``phi(B) = -Re tr B``.
    """
    a = v.alphas
    n = v.n
    out = np.zeros(n, dtype=complex)
    if n == 1:
        return out
    ext = np.concatenate(([-1.0 + 0j], a))
    rho2 = 1.0 - np.abs(a[:-1]) ** 2
    out[:-1] = 1j * rho2 * (ext[:-2] + ext[2:])
    return out


AL_HAMILTONIAN = HierarchyHamiltonian([0, -1j])


def integrate_al(v: VerblunskyCoefficients, t: float, steps: int = 1000) -> VerblunskyCoefficients:
    """RK4 in coefficient space on :func:`al_vector_field`."""
    a = np.array(v.alphas)
    dt = t / steps

    def field(x):
        return al_vector_field(VerblunskyCoefficients.clamped(x))

    for _ in range(steps):
        k1 = field(a)
        k2 = field(a + 0.5 * dt * k1)
        k3 = field(a + 0.5 * dt * k2)
        k4 = field(a + dt * k3)
        a = a + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return VerblunskyCoefficients.clamped(a)


def dressing(c, lam) -> CMVMatrix:
    """Dressing action ``beta -> (beta^{-1} lam^{-1})_-``.

    ``(X)_-`` is the unitary ``Q`` in ``X = L Q^{-1}`` with ``L`` lower
    triangular with positive diagonal.  ``lam = I`` returns ``beta``.
    """
    c = _as_cmv(c)
    lam = as_matrix(lam)
    if np.any(np.abs(np.triu(lam, 1)) > 0) or np.any(np.diag(lam).real <= 0) or np.any(np.diag(lam).imag != 0):
        raise ValidationError("lam must be lower triangular with positive diagonal")
    x = c.matrix.conj().T @ np.linalg.solve(lam, np.eye(c.n))
    try:
        _, q = lq_unitary_factor(x)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"dressing factorization failed: {exc}") from exc
    return _reproject(q, QR_SHAPE_TOL, clamp=False)


@dataclass(frozen=True)
class FlowTrajectory:
    times: np.ndarray
    states: tuple
    eigenvalues: np.ndarray  # (len(times), n), sorted
    determinants: np.ndarray

    @property
    def eig_drift(self) -> np.ndarray:
        """Per time, the largest distance from an eigenvalue to the initial spectrum."""
        d = np.abs(self.eigenvalues[:, :, None] - self.eigenvalues[0][None, None, :])
        return d.min(axis=2).max(axis=1)

    @property
    def det_drift(self) -> np.ndarray:
        return np.abs(self.determinants - self.determinants[0])


def _sorted_eigs(b: np.ndarray) -> np.ndarray:
    return eig_unitary(b).eigenvalues


def flow_trajectory(c, h: HierarchyHamiltonian, times, method: str = "measure", steps: int = 100) -> FlowTrajectory:
    """States at each time of a strictly increasing grid.

    ``measure`` and ``qr`` are evaluated from the initial state directly;
    ``ode`` integrates successive intervals with ``steps`` RK4 steps each.
    """
    c = _as_cmv(c)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0):
        raise ValidationError("time grid must be strictly increasing")
    states = []
    if method == "ode":
        cur, t_prev = c, 0.0
        for t in times:
            cur = flow_ode(cur, h, t - t_prev, steps) if t != t_prev else cur
            t_prev = t
            states.append(cur)
    elif method in FLOWS:
        states = [FLOWS[method](c, h, t) for t in times]
    else:
        raise ValidationError(f"unknown integrator {method!r}")
    eigs = np.array([_sorted_eigs(s.matrix) for s in states])
    dets = np.array([s.determinant for s in states])
    return FlowTrajectory(frozen(times), tuple(states), frozen(eigs), frozen(dets))
