"""Spectral measures and the two inverse maps back to Verblunsky coefficients.

Moments follow ``mu_hat(p) = sum_j mu_j z_j^p`` so that ``mu_hat(-1)`` is the
first entry of the ``d1`` Toeplitz matrix and ``alpha_0 = mu_hat(-1)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .cmv import CMVMatrix, VerblunskyCoefficients, build_cmv
from .errors import DegenerateSpectrumError, NotCyclicError, RankError, UnderflowError, ValidationError
from .linalg_core import eig_unitary, frozen

MASS_SUM_TOL = 1e-12
ANGLE_GAP_TOL = 1e-10
TWO_PI = 2 * np.pi


def angle_gaps(thetas: np.ndarray) -> np.ndarray:
    """Circular distances between consecutive sorted angles."""
    s = np.sort(np.mod(thetas, TWO_PI))
    if s.size < 2:
        return np.array([TWO_PI])
    return np.diff(np.append(s, s[0] + TWO_PI))


@dataclass(frozen=True)
class SpectralMeasure:
    """Finitely many atoms ``(theta_j, mu_j)`` on the circle, masses summing to one."""

    thetas: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        th = np.mod(np.asarray(self.thetas, dtype=float).reshape(-1), TWO_PI)
        mu = np.asarray(self.masses, dtype=float).reshape(-1)
        if th.size == 0 or th.size != mu.size:
            raise ValidationError("thetas and masses must be non-empty and of equal length")
        if not (np.all(np.isfinite(th)) and np.all(np.isfinite(mu))):
            raise ValidationError("non-finite atom")
        if np.any(mu <= 0):
            raise ValidationError("masses must be positive")
        if abs(mu.sum() - 1.0) > MASS_SUM_TOL:
            raise ValidationError(f"masses sum to {float(mu.sum())!r}, not 1")
        if angle_gaps(th).min() <= ANGLE_GAP_TOL:
            raise DegenerateSpectrumError("two atoms coincide within the angular gap tolerance")
        object.__setattr__(self, "thetas", frozen(th))
        object.__setattr__(self, "masses", frozen(mu))

    @classmethod
    def normalized(cls, thetas, masses) -> "SpectralMeasure":
        mu = np.asarray(masses, dtype=float)
        return cls(thetas, mu / mu.sum())

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "SpectralMeasure":
        """Jittered-grid angles (well separated) and masses in [0.5, 1.5], normalized."""
        th = TWO_PI * (np.arange(n) + 0.8 * rng.uniform(size=n)) / n
        return cls.normalized(th, rng.uniform(0.5, 1.5, size=n))

    @property
    def n(self) -> int:
        return self.thetas.size

    @property
    def z(self) -> np.ndarray:
        return np.exp(1j * self.thetas)

    def moment(self, p: int) -> complex:
        return complex(np.sum(self.masses * self.z**p))

    def moments(self, ps) -> np.ndarray:
        ps = np.asarray(ps)
        return (self.masses[None, :] * self.z[None, :] ** ps.reshape(-1)[:, None]).sum(axis=1).reshape(ps.shape)

    def integrate(self, g) -> complex:
        return complex(np.sum(self.masses * g(self.z)))

    def sorted(self) -> "SpectralMeasure":
        idx = np.argsort(self.thetas, kind="stable")
        return SpectralMeasure(self.thetas[idx], self.masses[idx])


def measure_of(c: CMVMatrix | np.ndarray, min_mass: float = 0.0) -> SpectralMeasure:
    """Spectral measure of ``(C, e_1)`` from the eigendecomposition."""
    mat = c.matrix if isinstance(c, CMVMatrix) else np.asarray(c, dtype=complex)
    if mat.shape[0] == 1:
        return SpectralMeasure([np.angle(mat[0, 0])], [1.0])
    dec = eig_unitary(mat)
    th = np.mod(np.angle(dec.eigenvalues), TWO_PI)
    if angle_gaps(th).min() <= ANGLE_GAP_TOL:
        raise DegenerateSpectrumError("repeated eigenvalue: e_1 cannot be cyclic")
    mu = np.abs(dec.eigenvectors[0, :]) ** 2
    if mu.min() <= min_mass:
        raise NotCyclicError(f"e_1 has mass {mu.min():.3e} on some eigenvector")
    return SpectralMeasure(th, mu / mu.sum())


@dataclass(frozen=True)
class SzegoResult:
    coefficients: VerblunskyCoefficients
    rhos: np.ndarray  # rho_0..rho_{n-2}, from residual norms
    norms: np.ndarray  # ||Phi_k||, k = 0..n-1
    polys: np.ndarray  # row k: monomial coefficients of the monic Phi_k (ascending)
    circle_defect: float  # | |alpha_{n-1}| - 1 | before renormalization


def szego_recursion(m: SpectralMeasure, rank_tol: float = 1e-13) -> SzegoResult:
    """Monic Szego recursion ``Phi_{k+1} = z Phi_k - conj(alpha_k) Phi_k^*`` against ``m``.

    The polynomials are carried both as values on the atoms (where the inner
    products are taken) and as coefficient vectors.  Values are kept
    normalized, ``phi_k = Phi_k / ||Phi_k||``, and ``rho_k`` is the norm of
    the unnormalized update rather than ``sqrt(1 - |alpha_k|^2)``, which
    keeps full relative accuracy when ``|alpha_k|`` is close to 1.
    """
    n = m.n
    z = m.z
    mu = m.masses
    phi = np.ones(n, dtype=complex)
    coef = np.zeros(n + 1, dtype=complex)
    coef[0] = 1.0
    alphas = np.empty(n, dtype=complex)
    rhos = np.empty(n - 1)
    norms = np.empty(n)
    polys = np.zeros((n, n + 1), dtype=complex)
    norm = 1.0
    circle_defect = 0.0
    for k in range(n):
        norms[k] = norm
        polys[k] = coef * norm
        zk = z**k
        phistar = zk * np.conj(phi)
        zphi = z * phi
        abar = np.sum(mu * np.conj(phistar) * zphi)
        alphas[k] = np.conj(abar)
        if k == n - 1:
            circle_defect = abs(abs(abar) - 1.0)
            break
        nxt = zphi - abar * phistar
        rho = np.sqrt(np.sum(mu * np.abs(nxt) ** 2))
        if not rho > rank_tol:
            raise RankError(f"norm collapse at step {k}: measure has fewer than {n} effective atoms")
        rhos[k] = rho
        cstar = np.zeros_like(coef)
        cstar[: k + 1] = np.conj(coef[k::-1])
        coef = (np.roll(coef, 1) - abar * cstar) / rho
        phi = nxt / rho
        norm *= rho
    a = alphas.copy()
    a[-1] /= abs(a[-1])
    return SzegoResult(VerblunskyCoefficients(a), frozen(rhos), frozen(norms), frozen(polys), circle_defect)


def verblunsky_of_measure(m: SpectralMeasure) -> VerblunskyCoefficients:
    return szego_recursion(m).coefficients


def cmv_of_measure(m: SpectralMeasure) -> CMVMatrix:
    return build_cmv(verblunsky_of_measure(m))


def gram_schmidt_norms(m: SpectralMeasure) -> np.ndarray:
    """``||Phi_k||`` for k < n from a QR of the weighted Vandermonde matrix.

    The monic orthogonal polynomial of degree k is ``z^k`` minus its
    projection onto lower degrees, whose norm is ``|R_kk|``.
    """
    v = np.sqrt(m.masses)[:, None] * m.z[:, None] ** np.arange(m.n)[None, :]
    r = np.linalg.qr(v, mode="r")
    return np.abs(np.diag(r))


def _toeplitz(m: SpectralMeasure, order: int, shift: int) -> np.ndarray:
    k = np.arange(order)
    return m.moments(k[:, None] - k[None, :] - shift)


def toeplitz_dets(m: SpectralMeasure, order: int) -> tuple[complex, complex]:
    """``d0 = det[mu_hat(k-l)]`` and ``d1 = det[mu_hat(k-l-1)]``, size ``order``."""
    if not 1 <= order <= m.n:
        raise ValidationError(f"order must be in [1, {m.n}]")
    return complex(np.linalg.det(_toeplitz(m, order, 0))), complex(np.linalg.det(_toeplitz(m, order, 1)))


def heine_alpha(m: SpectralMeasure, order: int, floor: float = 1e-300) -> complex:
    """``alpha_{order-1} = (-1)^{order-1} d1 / d0`` via log-determinants."""
    if not 1 <= order <= m.n:
        raise ValidationError(f"order must be in [1, {m.n}]")
    s0, l0 = np.linalg.slogdet(_toeplitz(m, order, 0))
    s1, l1 = np.linalg.slogdet(_toeplitz(m, order, 1))
    if l0 < np.log(floor):
        raise UnderflowError(f"Toeplitz determinant of order {order} underflows (log d0 = {l0:.1f}); use a smaller order")
    return complex((-1) ** (order - 1) * (s1 / s0) * np.exp(l1 - l0))


def vandermonde(z: np.ndarray) -> complex:
    """``prod_{j<k} (z_k - z_j)``."""
    out = 1.0 + 0j
    for j in range(z.size):
        for k in range(j + 1, z.size):
            out *= z[k] - z[j]
    return out


def cauchy_binet_oracle(m: SpectralMeasure, order: int, max_n: int = 12) -> tuple[complex, complex]:
    """Toeplitz determinants as explicit sums over index subsets."""
    if m.n > max_n:
        raise ValidationError(f"oracle limited to n <= {max_n} ({comb(m.n, order)} terms requested)")
    if not 1 <= order <= m.n:
        raise ValidationError(f"order must be in [1, {m.n}]")
    z, mu = m.z, m.masses
    d0 = d1 = 0j
    for idx in itertools.combinations(range(m.n), order):
        i = list(idx)
        w = abs(vandermonde(z[i])) ** 2 * np.prod(mu[i])
        d0 += w
        d1 += w * np.prod(np.conj(z[i]))
    return d0, d1


def match_atoms(a: SpectralMeasure, b: SpectralMeasure, gap_tol: float = 1e-6) -> np.ndarray:
    """Greedy nearest-angle matching; returns ``perm`` with ``b[perm[j]] ~ a[j]``."""
    if a.n != b.n:
        raise ValidationError("measures have different numbers of atoms")
    dist = np.abs(np.angle(np.exp(1j * (a.thetas[:, None] - b.thetas[None, :]))))
    perm = -np.ones(a.n, dtype=int)
    taken = np.zeros(b.n, dtype=bool)
    for flat in np.argsort(dist, axis=None):
        j, k = divmod(int(flat), b.n)
        if perm[j] < 0 and not taken[k]:
            perm[j] = k
            taken[k] = True
    worst = dist[np.arange(a.n), perm].max()
    if worst >= gap_tol:
        raise ValidationError(f"atoms could not be matched (worst gap {worst:.2e})")
    return perm


def measure_distance(a: SpectralMeasure, b: SpectralMeasure) -> float:
    """Max over matched atoms of the angle and mass differences."""
    perm = match_atoms(a, b)
    dth = np.abs(np.angle(np.exp(1j * (a.thetas - b.thetas[perm]))))
    dmu = np.abs(a.masses - b.masses[perm])
    return float(max(dth.max(), dmu.max()))


@dataclass(frozen=True)
class SubsetCoefficients:
    """Coefficients from the subset sums, accurate at extreme mass ratios."""

    alphas: np.ndarray  # alpha_0..alpha_{n-1}, not renormalized
    log_rho2: np.ndarray  # log rho_k^2, k = 0..n-2


def _subset_terms(z: np.ndarray, log_mu: np.ndarray, order: int):
    """Log weights ``log(|Delta_I|^2 mu_I)`` and ``conj(z_I)`` over all ``order``-subsets."""
    n = z.size
    with np.errstate(divide="ignore"):
        logdist = 2.0 * np.log(np.abs(z[:, None] - z[None, :]))
    subsets = np.array(list(itertools.combinations(range(n), order)))
    lw = log_mu[subsets].sum(axis=1)
    for a in range(order):
        for b in range(a + 1, order):
            lw += logdist[subsets[:, a], subsets[:, b]]
    zbar = np.prod(np.conj(z[subsets]), axis=1)
    return lw, zbar, subsets


def subset_coefficients(thetas, log_masses, max_n: int = 14) -> SubsetCoefficients:
    """Verblunsky coefficients as ratios of Toeplitz determinants expanded
    into subset sums, evaluated in log space.

    ``d0`` is a sum of positive terms, so nothing cancels even when the
    masses span hundreds of orders of magnitude.  ``rho_{m-1}^2`` is the
    ratio ``d0(m+1) d0(m-1) / d0(m)^2``.  Masses need not be normalized.
    """
    z = np.exp(1j * np.asarray(thetas, dtype=float))
    log_mu = np.asarray(log_masses, dtype=float)
    n = z.size
    if n > max_n:
        raise ValidationError(f"subset sums limited to n <= {max_n}")
    log_d0 = np.zeros(n + 1)  # log_d0[m] for order m, log_d0[0] = 0 (empty determinant)
    alphas = np.empty(n, dtype=complex)
    for m in range(1, n + 1):
        lw, zbar, _ = _subset_terms(z, log_mu, m)
        top = lw.max()
        w = np.exp(lw - top)
        s0 = w.sum()
        log_d0[m] = top + np.log(s0)
        alphas[m - 1] = (-1) ** (m - 1) * np.sum(w * zbar) / s0
    # normalizing mu rescales d0(m) by c^m, which cancels in the rho ratio
    log_rho2 = log_d0[2:] + log_d0[:-2] - 2 * log_d0[1:-1]
    return SubsetCoefficients(alphas, log_rho2[: n - 1])
