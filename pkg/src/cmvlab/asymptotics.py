"""Long-time behaviour of the hierarchy flows and the scattering map.

Atoms are relabelled so that ``lambda_1 >= lambda_2 >= ...`` with
``lambda_k = F(z_k)``.  Indices ``k`` in this module are 1-based positions in
that order, matching the statement ``alpha_{k-1}(t) -> ...``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import OrderingError, ValidationError
from .flows import HierarchyHamiltonian, evolve_measure
from .spectral import SpectralMeasure, subset_coefficients, vandermonde

DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class AsymptoticOrdering:
    perm: np.ndarray  # perm[k-1] = original index of the k-th atom
    lambdas: np.ndarray  # sorted, descending
    blocks: tuple  # tuple of tuples of 1-based sorted positions

    @property
    def n(self) -> int:
        return self.perm.size

    @property
    def distinct(self) -> bool:
        return len(self.blocks) == self.n

    def block_of(self, k: int) -> tuple:
        for b in self.blocks:
            if k in b:
                return b
        raise ValidationError(f"index {k} out of range")

    def s(self, k: int) -> int:
        """Number of atoms strictly above the block of ``k``."""
        return min(self.block_of(k)) - 1

    def gaps(self) -> np.ndarray:
        return -np.diff(self.lambdas)


def ordering(m: SpectralMeasure, h: HierarchyHamiltonian, tol: float = DEGENERACY_TOL) -> AsymptoticOrdering:
    lam = h.symbol(m.z)
    perm = np.argsort(-lam, kind="stable")
    ls = lam[perm]
    scale = max(1.0, float(np.abs(ls).max()))
    blocks, cur = [], [1]
    for k in range(2, m.n + 1):
        if ls[cur[0] - 1] - ls[k - 1] <= tol * scale:
            cur.append(k)
        else:
            blocks.append(tuple(cur))
            cur = [k]
    blocks.append(tuple(cur))
    return AsymptoticOrdering(perm, ls, tuple(blocks))


def _sorted_atoms(m: SpectralMeasure, o: AsymptoticOrdering):
    return m.z[o.perm], m.masses[o.perm]


def predict_log_mass(m: SpectralMeasure, h: HierarchyHamiltonian, k: int) -> tuple[float, float]:
    """Slope and intercept of ``log mu_k(t)`` for large ``t``."""
    o = ordering(m, h)
    _, mu = _sorted_atoms(m, o)
    top = o.blocks[0]
    slope = -(o.lambdas[0] - o.lambdas[k - 1])
    intercept = np.log(mu[k - 1] / mu[[j - 1 for j in top]].sum())
    return float(slope), float(intercept)


def predict_alpha_limit(m: SpectralMeasure, h: HierarchyHamiltonian, k: int) -> complex:
    """Limit of ``alpha_{k-1}(t)`` as ``t -> +infinity`` (``1 <= k <= n``).

    With ``J = (1..s(k))`` and ``I`` running over the ``k - s(k)``-subsets of
    the block of ``k``, the limit is the weighted average
    ``(-1)^{k-1} conj(z_J) sum |Delta_{J+I}|^2 mu_I conj(z_I) / sum |Delta_{J+I}|^2 mu_I``.
    """
    o = ordering(m, h)
    if not 1 <= k <= o.n:
        raise ValidationError(f"k must be in [1, {o.n}]")
    z, mu = _sorted_atoms(m, o)
    s = o.s(k)
    jset = list(range(s))
    block = [b - 1 for b in o.block_of(k)]
    num = den = 0j
    for idx in itertools.combinations(block, k - s):
        i = list(idx)
        w = abs(vandermonde(z[jset + i])) ** 2 * np.prod(mu[i])
        num += w * np.prod(np.conj(z[i]))
        den += w
    return complex((-1) ** (k - 1) * np.prod(np.conj(z[jset])) * num / den)


def _xi(z: np.ndarray, mu: np.ndarray, k: int) -> complex:
    zk, zk1 = z[k - 1], z[k]
    prod = np.prod([abs((zk1 - z[l]) / (zk - z[l])) ** 2 for l in range(k - 1)])
    return complex((zk * np.conj(zk1) - 1.0) * (mu[k] / mu[k - 1]) * prod)


def predict_xi(m: SpectralMeasure, h: HierarchyHamiltonian, k: int) -> tuple[complex, float]:
    """First-order correction ``xi_{k-1}`` and the ``rho_{k-1}^2`` prefactor.

    ``alpha_{k-1}(t) = alpha_{k-1}(inf) (1 + xi e^{-(lambda_k - lambda_{k+1}) t} + ...)``
    and ``rho_{k-1}(t)^2 ~ -2 Re(xi) e^{-(lambda_k - lambda_{k+1}) t}``.
    """
    o = ordering(m, h)
    if not o.distinct:
        raise OrderingError("xi needs pairwise distinct lambda values")
    if not 1 <= k <= o.n - 1:
        raise ValidationError(f"k must be in [1, {o.n - 1}]")
    z, mu = _sorted_atoms(m, o)
    xi = _xi(z, mu, k)
    return xi, float(-2.0 * xi.real)


def reversed_measure_data(m: SpectralMeasure, h: HierarchyHamiltonian):
    """Sorted atoms for ``t -> -infinity``: ``z_k -> z_{n-k+1}``, ``mu_k -> mu_{n-k+1}``."""
    o = ordering(m, h)
    z, mu = _sorted_atoms(m, o)
    return z[::-1], mu[::-1], -o.lambdas[::-1]


@dataclass(frozen=True)
class ScatteringReport:
    alpha_plus: np.ndarray  # alpha_{k-1}(+inf), k = 1..n
    alpha_minus: np.ndarray  # alpha_{k-1}(-inf)
    xi: np.ndarray  # xi_{k-1}, k = 1..n-1
    zeta: np.ndarray  # zeta_{k-1}
    alpha_last: complex
    product_residuals: np.ndarray  # |alpha_{k-1}(+) alpha_{n-k-1}(-) + alpha_{n-1}|
    xi_zeta: np.ndarray  # xi_{k-1} zeta_{n-k-1}
    recovered_z: np.ndarray  # z_j for j = 2..n
    recovery_residuals: np.ndarray

    def as_dict(self) -> dict:
        def c(x):
            return [[float(np.real(v)), float(np.imag(v))] for v in np.atleast_1d(x)]

        return {
            "alpha_plus": c(self.alpha_plus),
            "alpha_minus": c(self.alpha_minus),
            "xi": c(self.xi),
            "zeta": c(self.zeta),
            "alpha_last": c(self.alpha_last)[0],
            "product_residuals": [float(r) for r in self.product_residuals],
            "xi_zeta": c(self.xi_zeta),
            "recovered_z": c(self.recovered_z),
            "recovery_residuals": [float(r) for r in self.recovery_residuals],
            "max_residual": float(max(self.product_residuals.max(), self.recovery_residuals.max(), self.xi_zeta_imag)),
        }

    @property
    def xi_zeta_imag(self) -> float:
        return float(np.abs(self.xi_zeta.imag).max()) if self.xi_zeta.size else 0.0


def _distinct_limits(z: np.ndarray) -> np.ndarray:
    n = z.size
    return np.array([(-1) ** (k - 1) * np.prod(np.conj(z[:k])) for k in range(1, n + 1)])


def scattering_invariants(m: SpectralMeasure, h: HierarchyHamiltonian) -> ScatteringReport:
    """Both asymptotic states and the identities linking them."""
    o = ordering(m, h)
    if not o.distinct:
        raise OrderingError("scattering needs pairwise distinct lambda values")
    n = o.n
    z, mu = _sorted_atoms(m, o)
    zr, mur, _ = reversed_measure_data(m, h)
    plus = _distinct_limits(z)
    minus = _distinct_limits(zr)
    xi = np.array([_xi(z, mu, k) for k in range(1, n)])
    zeta = np.array([_xi(zr, mur, k) for k in range(1, n)])
    last = complex((-1) ** (n - 1) * np.prod(np.conj(m.z)))
    prod_res = np.array([abs(plus[k - 1] * minus[n - k - 1] + last) for k in range(1, n)])
    xz = np.array([xi[k - 1] * zeta[n - k - 1] for k in range(1, n)])
    rec = np.array([-plus[j - 2] / plus[j - 1] for j in range(2, n + 1)])
    rec_res = np.abs(rec - z[1:])
    return ScatteringReport(plus, minus, xi, zeta, last, prod_res, xz, rec, rec_res)


def log_masses_at(m: SpectralMeasure, h: HierarchyHamiltonian, t: float) -> np.ndarray:
    """Unnormalized ``log mu_j + t F(z_j)``; never underflows."""
    return np.log(m.masses) + t * h.symbol(m.z)


def alpha_path(m: SpectralMeasure, h: HierarchyHamiltonian, times) -> np.ndarray:
    """``alpha(t)`` along the exact flow, shape ``(len(times), n)``.

    Uses the subset-sum form of the inverse map, which stays accurate when
    ``|alpha_k|`` is within ``e^{-t}`` of the circle (where the coefficients
    are no longer representable as a validated coefficient list).
    """
    return np.array([subset_coefficients(m.thetas, log_masses_at(m, h, float(t))).alphas for t in np.atleast_1d(times)])


def log_rho2_path(m: SpectralMeasure, h: HierarchyHamiltonian, times) -> np.ndarray:
    return np.array([subset_coefficients(m.thetas, log_masses_at(m, h, float(t))).log_rho2 for t in np.atleast_1d(times)])


def fit_log_mass(m: SpectralMeasure, h: HierarchyHamiltonian, k: int, times, log_masses=None) -> tuple[float, float]:
    """Least-squares line through ``log mu_k(t)``.

    ``log_masses`` may be supplied (shape ``(len(times), n)`` in original
    atom order); otherwise the closed-form evolution is sampled.
    """
    o = ordering(m, h)
    times = np.asarray(times, dtype=float)
    if log_masses is None:
        log_masses = np.array([evolve_measure(m, h, t).log_masses for t in times])
    y = np.asarray(log_masses)[:, o.perm[k - 1]]
    slope, intercept = np.polyfit(times, y, 1)
    return float(slope), float(intercept)


def fit_xi(m: SpectralMeasure, h: HierarchyHamiltonian, k: int, times, alphas=None) -> complex:
    """Fit ``alpha_{k-1}(t) / alpha_{k-1}(inf) - 1 = xi e^{-g t}`` with ``g`` fitted too.

    The fit is linear in ``log`` of the deviation (phase unwrapped); the
    returned value is the intercept ``xi``.
    """
    o = ordering(m, h)
    times = np.asarray(times, dtype=float)
    if alphas is None:
        alphas = alpha_path(m, h, times)
    z, _ = _sorted_atoms(m, o)
    limit = (-1) ** (k - 1) * np.prod(np.conj(z[:k]))
    dev = alphas[:, k - 1] / limit - 1.0
    logabs = np.polyfit(times, np.log(np.abs(dev)), 1)
    phase = np.polyfit(times, np.unwrap(np.angle(dev)), 1)
    return complex(np.exp(logabs[1] + 1j * phase[1]))


def default_window(m: SpectralMeasure, h: HierarchyHamiltonian, k: int) -> tuple[float, float]:
    """Fit window ``[15/g, 20/g]`` for ``xi_{k-1}``, ``g`` the smallest gap next to ``k``.

    Second-order terms decay relative to the first at the neighbouring gaps
    ``lambda_{k-1} - lambda_k`` and ``lambda_{k+1} - lambda_{k+2}`` as well, so
    the window is scaled by the smallest of the three.  Later windows lose
    the deviation to rounding.
    """
    o = ordering(m, h)
    if not o.distinct:
        raise OrderingError("the fit window needs pairwise distinct lambda values")
    if not 1 <= k <= o.n - 1:
        raise ValidationError(f"k must be in [1, {o.n - 1}]")
    g = o.gaps()[max(k - 2, 0) : k + 1].min()
    return 15.0 / g, 20.0 / g
