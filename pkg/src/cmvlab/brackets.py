"""Poisson brackets on matrices and on Verblunsky coefficients.

Gradients follow the pairing ``<X, Y> = Im tr(XY)``: ``grad phi`` is the
matrix with ``<grad phi, C> = d phi(B)[C]`` for every direction ``C``.  In
entries, ``[grad phi]_{kl} = d phi / d v_{lk} + i d phi / d u_{lk}`` where
``B_{lk} = u_{lk} + i v_{lk}`` (note the transposed index).

Complex-valued observables are handled by C-bilinear extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .cmv import VerblunskyCoefficients, _extract_raw, build_cmv, build_theta_factors, exposed_positions
from .errors import DegenerateSpectrumError, PoleError, ValidationError
from .linalg_core import eig_unitary, pairing, pi_a, pi_l, r_map
from .spectral import SpectralMeasure, angle_gaps, verblunsky_of_measure

MATRIX_STEP = 1e-5
ALPHA_STEP = 1e-6
JACOBIAN_STEP = 1e-6


# ---------------------------------------------------------------------------
# observables and the Gelfand-Dikij bracket
# ---------------------------------------------------------------------------


def fd_gradient(func: Callable[[np.ndarray], float], b: np.ndarray, step: float = MATRIX_STEP) -> np.ndarray:
    """Central-difference gradient over the ``2 n^2`` real coordinates."""
    b = np.asarray(b, dtype=complex)
    n = b.shape[0]
    g = np.zeros((n, n), dtype=complex)
    for k in range(n):
        for l in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[k, l] = step
            du = (func(b + e) - func(b - e)) / (2 * step)
            dv = (func(b + 1j * e) - func(b - 1j * e)) / (2 * step)
            g[l, k] = dv + 1j * du
    return g


@dataclass(frozen=True)
class Observable:
    """Real-valued function of a matrix, with an optional analytic gradient."""

    func: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""
    step: float = MATRIX_STEP

    def __call__(self, b: np.ndarray) -> float:
        return float(np.real(self.func(b)))

    def gradient(self, b: np.ndarray) -> np.ndarray:
        if self.grad is not None:
            return self.grad(b)
        return fd_gradient(self, b, self.step)

    def fd_only(self) -> "Observable":
        return Observable(self.func, None, self.name, self.step)

    def __mul__(self, other: "Observable") -> "Observable":
        return Observable(
            lambda b: self(b) * other(b),
            lambda b: self(b) * other.gradient(b) + other(b) * self.gradient(b),
            f"({self.name})*({other.name})",
        )


@dataclass(frozen=True)
class ComplexObservable:
    re: Observable
    im: Observable

    def __call__(self, b: np.ndarray) -> complex:
        return complex(self.re(b), self.im(b))

    def conj(self) -> "ComplexObservable":
        return ComplexObservable(self.re, Observable(lambda b: -self.im(b), _neg(self.im), f"-{self.im.name}"))


def _neg(o: Observable):
    if o.grad is None:
        return None
    return lambda b: -o.grad(b)


def trace_observable(f_coeffs, name: str = "Im tr f") -> Observable:
    """``Im tr f(B)`` with gradient ``f'(B)``."""
    from .flows import HierarchyHamiltonian

    h = HierarchyHamiltonian(f_coeffs)
    return Observable(h.phi, h.fprime_matrix, name)


def entry_re(k: int, l: int) -> Observable:
    """``Re B_{kl}`` (0-based), gradient ``i E_{lk}``."""

    def grad(b):
        g = np.zeros(b.shape, dtype=complex)
        g[l, k] = 1j
        return g

    return Observable(lambda b: b[k, l].real, grad, f"Re B[{k},{l}]")


def entry_im(k: int, l: int) -> Observable:
    """``Im B_{kl}`` (0-based), gradient ``E_{lk}``."""

    def grad(b):
        g = np.zeros(b.shape, dtype=complex)
        g[l, k] = 1.0
        return g

    return Observable(lambda b: b[k, l].imag, grad, f"Im B[{k},{l}]")


def entry(k: int, l: int) -> ComplexObservable:
    return ComplexObservable(entry_re(k, l), entry_im(k, l))


def det_phase_observable(theta: float = 0.0) -> Observable:
    """``Im[e^{i theta} log det B]``, a Casimir; gradient ``e^{i theta} B^{-1}``."""
    w = np.exp(1j * theta)

    def func(b):
        sign, logabs = np.linalg.slogdet(b)
        return (w * (logabs + 1j * np.angle(sign))).imag

    return Observable(func, lambda b: w * np.linalg.inv(b), f"Im e^(i{theta}) log det")


def linear_observable(a: np.ndarray, name: str = "linear") -> Observable:
    """``<A, B> = Im tr(AB)``; its gradient is the constant ``A``."""
    a = np.asarray(a, dtype=complex)
    return Observable(lambda b: pairing(a, b), lambda b: a, name)


def gd_bracket(phi: Observable, psi: Observable, b: np.ndarray) -> float:
    """``1/2 <R(XB), YB> - 1/2 <R(BX), BY>`` with ``X, Y`` the gradients."""
    b = np.asarray(b, dtype=complex)
    x = phi.gradient(b)
    y = psi.gradient(b)
    return 0.5 * pairing(r_map(x @ b), y @ b) - 0.5 * pairing(r_map(b @ x), b @ y)


def gd_bracket_complex(f: ComplexObservable, g: ComplexObservable, b: np.ndarray) -> complex:
    rr = gd_bracket(f.re, g.re, b)
    ii = gd_bracket(f.im, g.im, b)
    ri = gd_bracket(f.re, g.im, b)
    ir = gd_bracket(f.im, g.re, b)
    return complex(rr - ii, ri + ir)


def bracket_observable(phi: Observable, psi: Observable) -> Observable:
    """``B -> {phi, psi}(B)`` as an observable with a finite-difference gradient."""
    return Observable(lambda b: gd_bracket(phi, psi, b), None, f"{{{phi.name},{psi.name}}}")


def jacobi_residual(phi: Observable, psi: Observable, chi: Observable, b: np.ndarray) -> float:
    terms = [
        gd_bracket(phi, bracket_observable(psi, chi), b),
        gd_bracket(psi, bracket_observable(chi, phi), b),
        gd_bracket(chi, bracket_observable(phi, psi), b),
    ]
    return float(abs(sum(terms)))


def hamiltonian_field(phi: Observable, b: np.ndarray, unitary_tol: Optional[float] = 1e-10) -> np.ndarray:
    """``B' = B pi_l(XB) - pi_l(BX) B``.

    For unitary ``B`` this also equals ``-B pi_a(B^{-1} L B)`` with
    ``L = pi_l(BX)``; the two forms are compared and a mismatch above
    ``unitary_tol`` raises.
    """
    b = np.asarray(b, dtype=complex)
    x = phi.gradient(b)
    field = b @ pi_l(x @ b) - pi_l(b @ x) @ b
    if unitary_tol is not None and np.abs(b.conj().T @ b - np.eye(b.shape[0])).max() <= 1e-10:
        lpart = pi_l(b @ x)
        alt = -b @ pi_a(b.conj().T @ lpart @ b)
        err = np.abs(alt - field).max()
        if err > unitary_tol * max(1.0, np.abs(field).max()):
            raise ValidationError(f"unitary form of the Hamiltonian field disagrees by {err:.2e}")
    return field


def exposed_flow_closed_form(c: np.ndarray, k: int, l: int) -> np.ndarray:
    """``C'`` for the Hamiltonian ``Re C_{kl}`` at an exposed entry (0-based ``k, l``).

    ``i C' = (-1)^{k+1} Re(C_{kl}) [E_{kk} C - C E_{ll}]``, the sign being
    ``(-1)^k`` for the 1-based row index.
    """
    n = c.shape[0]
    ekk = np.zeros((n, n))
    ekk[k, k] = 1.0
    ell = np.zeros((n, n))
    ell[l, l] = 1.0
    return -1j * (-1) ** (k + 1) * c[k, l].real * (ekk @ c - c @ ell)


# ---------------------------------------------------------------------------
# the Ablowitz-Ladik bracket
# ---------------------------------------------------------------------------


def wirtinger(fun: Callable[[np.ndarray], np.ndarray], alphas: np.ndarray, step: float = ALPHA_STEP):
    """Central-difference Wirtinger derivatives with respect to interior coefficients.

    ``fun`` maps the full coefficient vector to a scalar or vector.  Returns
    ``(d/d alpha, d/d conj(alpha))`` with shape ``(m, n-1)`` (``m`` outputs).
    """
    a = np.asarray(alphas, dtype=complex)
    cols_a, cols_b = [], []
    for j in range(a.size - 1):
        e = np.zeros_like(a)
        e[j] = step
        dx = (np.atleast_1d(fun(a + e)) - np.atleast_1d(fun(a - e))) / (2 * step)
        dy = (np.atleast_1d(fun(a + 1j * e)) - np.atleast_1d(fun(a - 1j * e))) / (2 * step)
        cols_a.append(0.5 * (dx - 1j * dy))
        cols_b.append(0.5 * (dx + 1j * dy))
    return np.array(cols_a).T, np.array(cols_b).T


def al_bracket_from_partials(fa, fb, ga, gb, rho2: np.ndarray) -> np.ndarray:
    """``2i sum_j rho_j^2 (df/d conj(a_j) dg/d a_j - df/d a_j dg/d conj(a_j))`` for all output pairs."""
    return 2j * ((fb * rho2) @ ga.T - (fa * rho2) @ gb.T)


def al_bracket(f, g, v: VerblunskyCoefficients, step: float = ALPHA_STEP):
    """Ablowitz-Ladik bracket of functions of the coefficient vector.

    ``f`` and ``g`` take the complex vector ``alpha`` (length ``n``) and
    return a scalar or a vector; the result is a scalar or the matrix of all
    pairwise brackets.
    """
    a = v.alphas
    rho2 = 1.0 - np.abs(a[:-1]) ** 2
    fa, fb = wirtinger(f, a, step)
    ga, gb = (fa, fb) if g is f else wirtinger(g, a, step)
    out = al_bracket_from_partials(fa, fb, ga, gb, rho2)
    return complex(out[0, 0]) if out.size == 1 else out


def alpha_observable(k: int, n: int) -> ComplexObservable:
    """``alpha_k`` as a function on all ``n x n`` matrices.

    The extraction formulas divide entries by products of exposed entries;
    applied to arbitrary matrices near a CMV matrix they give a smooth
    extension, and brackets on a symplectic leaf do not depend on the
    extension chosen.
    """

    def re(b):
        return np.conj(_extract_raw(np.asarray(b))[0][k]).real

    def im(b):
        return np.conj(_extract_raw(np.asarray(b))[0][k]).imag

    return ComplexObservable(Observable(re, None, f"Re a{k}"), Observable(im, None, f"Im a{k}"))


@dataclass(frozen=True)
class BracketEqualityReport:
    gd_alpha_conj: np.ndarray  # {alpha_k, conj(alpha_l)} from the matrix bracket
    gd_alpha_alpha: np.ndarray  # {alpha_k, alpha_l}
    expected: np.ndarray  # -2i delta_kl rho_k^2
    diag_brackets: np.ndarray  # {C_jj, conj(C_jj)}, j = 1..n
    diag_expected: np.ndarray  # 2i (rho_{j-1}^2 - rho_{j-2}^2)
    diag_neighbour: np.ndarray  # {C_jj, conj(C_{j-1,j-1})}, j = 2..n

    @property
    def max_residual(self) -> float:
        return float(
            max(
                np.abs(self.gd_alpha_conj - self.expected).max(),
                np.abs(self.gd_alpha_alpha).max(),
                np.abs(self.diag_brackets - self.diag_expected).max(),
                np.abs(self.diag_neighbour).max() if self.diag_neighbour.size else 0.0,
            )
        )


def verify_bracket_equality(v: VerblunskyCoefficients) -> BracketEqualityReport:
    """Compare matrix-bracket values of coefficient functions with the AL bracket."""
    c = build_cmv(v).matrix
    n = v.n
    m = n - 1
    obs = [alpha_observable(k, n) for k in range(m)]
    # gradients are the expensive part: compute each once
    grads = [(o.re.gradient(c), o.im.gradient(c)) for o in obs]

    def pre(gr):
        return Observable(lambda b: 0.0, lambda b, g=gr: g)

    cobs = [ComplexObservable(pre(gr), pre(gi)) for gr, gi in grads]
    ac = np.zeros((m, m), dtype=complex)
    aa = np.zeros((m, m), dtype=complex)
    for k in range(m):
        for l in range(m):
            ac[k, l] = gd_bracket_complex(cobs[k], cobs[l].conj(), c)
            aa[k, l] = gd_bracket_complex(cobs[k], cobs[l], c)
    rho2 = 1.0 - np.abs(v.alphas[:-1]) ** 2
    expected = np.diag(-2j * rho2)
    rho2_ext = np.concatenate(([0.0], rho2, [0.0]))  # rho_{-1}, rho_0..rho_{n-2}, rho_{n-1}
    diag = np.array([gd_bracket_complex(entry(j, j), entry(j, j).conj(), c) for j in range(n)])
    # 1-based j: 2i (rho_{j-1}^2 - rho_{j-2}^2)
    diag_exp = np.array([2j * (rho2_ext[j + 1] - rho2_ext[j]) for j in range(n)])
    neigh = np.array([gd_bracket_complex(entry(j, j), entry(j - 1, j - 1).conj(), c) for j in range(1, n)])
    return BracketEqualityReport(ac, aa, expected, diag, diag_exp, neigh)


# ---------------------------------------------------------------------------
# spectral coordinates as functions of the coefficients
# ---------------------------------------------------------------------------


def spectral_coordinates(alphas: np.ndarray, ref_thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalue angles and masses of the CMV matrix of ``alphas``.

    Atoms are matched to ``ref_thetas`` by nearest eigenvalue and angles are
    unwrapped around the reference, so the result is smooth in ``alphas``.
    """
    lfac, mfac = build_theta_factors(_unchecked(alphas))
    dec = eig_unitary(lfac @ mfac)
    z = dec.eigenvalues
    ref = np.exp(1j * ref_thetas)
    perm = np.argmin(np.abs(ref[:, None] - z[None, :]), axis=1)
    if np.unique(perm).size != perm.size:
        raise DegenerateSpectrumError("eigenvalue tracking failed; eigenvalues too close")
    z = z[perm]
    th = ref_thetas + np.angle(z * np.conj(ref))
    mu = np.abs(dec.eigenvectors[0, perm]) ** 2
    return th, mu


class _unchecked:
    """Duck-typed coefficient holder for finite-difference probes."""

    def __init__(self, alphas):
        self.alphas = np.asarray(alphas, dtype=complex)
        self.n = self.alphas.size


def _base_spectrum(v: VerblunskyCoefficients) -> np.ndarray:
    dec = eig_unitary(build_cmv(v).matrix)
    th = np.angle(dec.eigenvalues)
    if angle_gaps(th).min() < 1e-6:
        raise DegenerateSpectrumError("eigenvalues too close for finite differences")
    return th


def theta_logmu_partials(v: VerblunskyCoefficients, step: float = ALPHA_STEP):
    """Wirtinger partials of ``(theta_1..theta_n, log mu_1..log mu_n)``."""
    ref = _base_spectrum(v)

    def fun(a):
        th, mu = spectral_coordinates(a, ref)
        return np.concatenate((th, np.log(mu)))

    fa, fb = wirtinger(fun, v.alphas, step)
    th, mu = spectral_coordinates(v.alphas, ref)
    return th, mu, fa, fb


@dataclass(frozen=True)
class ThetaMuReport:
    thetas: np.ndarray
    masses: np.ndarray
    theta_theta: np.ndarray  # {theta_l, theta_k}
    theta_logmu: np.ndarray  # {theta_l, log mu_j}
    logmu_logmu: np.ndarray  # {log mu_q, log mu_r}

    @property
    def theta_half_log_ratio(self) -> np.ndarray:
        """``{theta_l, 1/2 log(mu_j / mu_n)}`` for ``l, j < n``."""
        t = self.theta_logmu
        return 0.5 * (t[:-1, :-1] - t[:-1, -1:])

    @property
    def canonical_residual(self) -> float:
        n = self.thetas.size
        return float(np.abs(self.theta_half_log_ratio - np.eye(n - 1)).max())

    @property
    def commuting_residual(self) -> float:
        return float(np.abs(self.theta_theta).max())

    @property
    def theta_logmu_residual(self) -> float:
        n = self.thetas.size
        expected = 2 * np.eye(n) - 2 * self.masses[:, None]
        return float(np.abs(self.theta_logmu - expected).max())


def theta_mu_brackets(v: VerblunskyCoefficients, step: float = ALPHA_STEP) -> ThetaMuReport:
    """All brackets among ``theta_l`` and ``log mu_j`` through the AL bracket."""
    th, mu, fa, fb = theta_logmu_partials(v, step)
    n = v.n
    rho2 = 1.0 - np.abs(v.alphas[:-1]) ** 2
    full = al_bracket_from_partials(fa, fb, fa, fb, rho2).real
    return ThetaMuReport(th, mu, full[:n, :n], full[:n, n:], full[n:, n:])


# ---------------------------------------------------------------------------
# cotangent identities
# ---------------------------------------------------------------------------


def _cot(x: float) -> float:
    return 1.0 / np.tan(x)


def psi_qrs(thetas, tol: float = 1e-12) -> float:
    """``2cot((t_q-t_r)/2) + 2cot((t_r-t_s)/2) + 2cot((t_s-t_q)/2)``."""
    tq, tr, ts = (float(x) for x in thetas)
    for d in (tq - tr, tr - ts, ts - tq):
        if abs(np.sin(d / 2)) < tol:
            raise PoleError("two of the angles coincide")
    return 2 * _cot((tq - tr) / 2) + 2 * _cot((tr - ts) / 2) + 2 * _cot((ts - tq) / 2)


def psi_indexed(thetas, q: int, r: int, s: int) -> float:
    """``Psi_{q,r,s}`` for indices into ``thetas``; zero if two indices coincide."""
    if q == r or r == s or s == q:
        return 0.0
    return psi_qrs((thetas[q], thetas[r], thetas[s]))


def mass_bracket_closed_form(thetas, masses, q: int, r: int) -> float:
    """``sum_k mu_k Psi_{q,r,k}``."""
    return float(sum(masses[k] * psi_indexed(thetas, q, r, k) for k in range(len(masses))))


@dataclass(frozen=True)
class MassBracketReport:
    numeric: float
    closed_form: float

    @property
    def residual(self) -> float:
        return abs(self.numeric - self.closed_form)


def mass_brackets(v: VerblunskyCoefficients, q: int, r: int, report: Optional[ThetaMuReport] = None) -> MassBracketReport:
    """``{log mu_q, log mu_r}`` by finite differences against the cotangent sum (0-based q, r).

    Atoms are labelled by increasing eigenvalue angle.
    """
    rep = report if report is not None else theta_mu_brackets(v)
    return MassBracketReport(float(rep.logmu_logmu[q, r]), mass_bracket_closed_form(rep.thetas, rep.masses, q, r))


def log_ratio_bracket(report: ThetaMuReport, a: int, b: int, s: int) -> float:
    """``{log(mu_a/mu_s), log(mu_b/mu_s)}`` from the full log-mass bracket matrix."""
    m = report.logmu_logmu
    return float(m[a, b] - m[a, s] - m[s, b] + m[s, s])


# ---------------------------------------------------------------------------
# angle-shift functions
# ---------------------------------------------------------------------------


def _g_integrand(t: float, x: float) -> float:
    if t == 0.0:
        return 2.0 / x
    return t / np.tan(x * t / 2)


def shift_kernel(x: float, pole_tol: float = 1e-8) -> float:
    """``G(x) = 2 int_0^1 t cot(xt/2) dt`` for ``0 < |x| < 2 pi``, by adaptive quadrature."""
    x = float(x)
    if abs(x) < pole_tol or abs(x) > 2 * np.pi - pole_tol:
        raise PoleError(f"G is singular at x = {x!r} (needs 0 < |x| < 2 pi)")
    val, _ = quad(_g_integrand, 0.0, 1.0, args=(x,), epsabs=1e-13, epsrel=1e-13, limit=200)
    return 2.0 * val


def shift_kernel_derivative(x: float, h: float = 1e-3) -> float:
    """Five-point central difference of :func:`shift_kernel`."""
    g = shift_kernel
    return (8 * (g(x + h) - g(x - h)) - (g(x + 2 * h) - g(x - 2 * h))) / (12 * h)


def canonical_shift(thetas, det_phase: float, centered: bool = True) -> np.ndarray:
    """``f_l`` for ``l = 1..n-1`` from ``theta_1..theta_{n-1}`` and ``eta``.

    ``theta_n = eta - sum theta_k`` (so ``e^{i eta}`` is the determinant).
    The literal form

        f_l = sum_{k != l} theta_k [G(theta_k - theta_l) + G(theta_l + eta - theta_n) + G(theta_n - eta - theta_k)]

    has curl ``Psi_{k,l,n}`` only when ``eta = 0``.  With ``centered=True``
    (default) the same expression is evaluated at the centered angles
    ``theta_j - eta/n``, which sum to zero; differences of angles and
    derivatives are unchanged, so the curl is ``Psi_{k,l,n}`` for every
    ``eta``.  The two forms agree at ``eta = 0``.
    """
    th = np.asarray(thetas, dtype=float)
    eta = float(det_phase)
    m = th.size
    if centered:
        th = th - eta / (m + 1)
        eta = 0.0
    tn = eta - th.sum()
    out = np.zeros(m)
    for l in range(m):
        s = 0.0
        for k in range(m):
            if k == l:
                continue
            s += th[k] * (
                shift_kernel(th[k] - th[l]) + shift_kernel(th[l] + eta - tn) + shift_kernel(tn - eta - th[k])
            )
        out[l] = s
    return out


def poincare_residual(thetas, det_phase: float, h: float = 1e-4, centered: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Curl of ``f`` by central differences and the cotangent right side.

    Returns ``(curl, psi)`` with ``curl[k, l] = df_l/dtheta_k - df_k/dtheta_l``
    and ``psi[k, l] = Psi_{k,l,n}`` at ``theta_n = eta - sum theta``.
    """
    th = np.asarray(thetas, dtype=float)
    m = th.size
    jac = np.zeros((m, m))  # jac[l, k] = df_l / dtheta_k
    for k in range(m):
        e = np.zeros(m)
        e[k] = h
        f = [canonical_shift(th + j * e, det_phase, centered) for j in (-2, -1, 1, 2)]
        jac[:, k] = (8 * (f[2] - f[1]) - (f[3] - f[0])) / (12 * h)
    curl = jac.T - jac
    full = np.append(th, det_phase - th.sum())
    psi = np.array([[psi_indexed(full, k, l, m) for l in range(m)] for k in range(m)])
    return curl, psi


# ---------------------------------------------------------------------------
# Jacobian of the spectral change of variables
# ---------------------------------------------------------------------------


def _coefficient_coordinates(x: np.ndarray, n: int, phi_ref: float) -> np.ndarray:
    th = np.empty(n)
    mu = np.empty(n)
    th[: n - 1] = x[0 : 2 * (n - 1) : 2]
    mu[: n - 1] = x[1 : 2 * (n - 1) : 2]
    th[n - 1] = x[-1]
    mu[n - 1] = 1.0 - mu[: n - 1].sum()
    a = verblunsky_of_measure(SpectralMeasure(th, mu)).alphas
    y = np.empty(2 * n - 1)
    y[0 : 2 * (n - 1) : 2] = a[:-1].real
    y[1 : 2 * (n - 1) : 2] = a[:-1].imag
    y[-1] = phi_ref + np.angle(a[-1] * np.exp(-1j * phi_ref))
    return y


def jacobian_check(v: VerblunskyCoefficients, step: float = JACOBIAN_STEP) -> tuple[float, float]:
    """Numeric Jacobian determinant of ``(theta_1, mu_1, ..., theta_n) -> (u_0, v_0, ..., phi)``
    and the closed form ``-2^{1-n} prod rho_k^2 / prod mu_j``.

    Atoms are labelled by increasing angle; ``alpha_{n-1} = e^{i phi}``.
    """
    from .spectral import measure_of

    n = v.n
    m = measure_of(build_cmv(v))
    if m.masses.min() < 10 * step:
        step = m.masses.min() / 10
        if step < 1e-9:
            raise ValidationError("a mass is too small for a finite-difference Jacobian")
    x0 = np.empty(2 * n - 1)
    x0[0 : 2 * (n - 1) : 2] = m.thetas[:-1]
    x0[1 : 2 * (n - 1) : 2] = m.masses[:-1]
    x0[-1] = m.thetas[-1]
    phi_ref = float(np.angle(v.alphas[-1]))
    jac = np.empty((2 * n - 1, 2 * n - 1))
    for i in range(2 * n - 1):
        e = np.zeros_like(x0)
        e[i] = step
        jac[:, i] = (_coefficient_coordinates(x0 + e, n, phi_ref) - _coefficient_coordinates(x0 - e, n, phi_ref)) / (2 * step)
    rho2 = 1.0 - np.abs(v.alphas[:-1]) ** 2
    closed = -(2.0 ** (1 - n)) * np.prod(rho2) / np.prod(m.masses)
    return float(np.linalg.det(jac)), float(closed)


def exposed_entries(n: int) -> list[tuple[int, int]]:
    return exposed_positions(n)
