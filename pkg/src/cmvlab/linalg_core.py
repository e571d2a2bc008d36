"""Dense complex linear algebra used throughout the package.

Contents
--------
* Householder reflections at a given level, including the diagonal phase
  rotation that makes the surviving entry real and non-negative.
* QR with positive diagonal, and the ``A = L Q^{-1}`` factorization into
  lower-triangular (positive diagonal) times unitary.
* An eigensolver for normal matrices: Hessenberg reduction followed by
  implicitly shifted QR iteration with Wilkinson shifts.
* Matrix functions of normal matrices.
* The splitting of ``gl(n, C)`` into lower-triangular-with-real-diagonal
  matrices and anti-Hermitian matrices, the associated R-map and the
  pairing ``<X, Y> = Im tr(XY)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, SingularMatrixError, ValidationError

UNITARY_TOL = 1e-10
FACTOR_TOL = 1e-12
DEFLATION_TOL = 1e-14


def as_matrix(a, square: bool = True) -> np.ndarray:
    """Return ``a`` as a complex128 2-D array, checking for NaN/Inf."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


def unitarity_defect(u: np.ndarray) -> float:
    n = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(n))))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) <= tol


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


# ---------------------------------------------------------------------------
# Householder reflections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reflector:
    """The unitary ``D R`` acting on coordinates ``level..n-1`` (0-based).

    ``R = I - 2 v v^dagger / |v|^2`` is a Householder reflection whose first
    ``level`` entries of ``v`` vanish, and ``D`` multiplies coordinate
    ``level`` by ``phase``.  ``v = 0`` encodes ``R = I``.
    """

    v: np.ndarray
    level: int
    phase: complex

    @property
    def n(self) -> int:
        return self.v.shape[0]

    @property
    def is_identity(self) -> bool:
        return not np.any(self.v) and self.phase == 1

    def _reflect(self, x: np.ndarray) -> np.ndarray:
        vv = np.vdot(self.v, self.v).real
        if vv == 0.0:
            return x.copy()
        if x.ndim == 1:
            return x - (2.0 * np.vdot(self.v, x) / vv) * self.v
        return x - np.outer(self.v, (2.0 / vv) * (self.v.conj() @ x))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return ``(D R) x`` for a vector or the columns of a matrix."""
        y = self._reflect(np.asarray(x, dtype=complex))
        y[self.level] *= self.phase
        return y

    def apply_adjoint(self, x: np.ndarray) -> np.ndarray:
        """Return ``(D R)^dagger x = R conj(D) x``."""
        y = np.array(x, dtype=complex)
        y[self.level] *= np.conj(self.phase)
        return self._reflect(y)

    def apply_right_adjoint(self, x: np.ndarray) -> np.ndarray:
        """Return ``x (D R)^dagger`` for a matrix ``x``."""
        return self.apply(x.conj().T).conj().T

    def matrix(self) -> np.ndarray:
        return self.apply(np.eye(self.n, dtype=complex))

    def conjugate(self, u: np.ndarray) -> np.ndarray:
        """Return ``(D R) u (D R)^dagger``."""
        return self.apply_right_adjoint(self.apply(u))


def householder_reflector(u, m: int) -> Reflector:
    """Reflection at level ``m`` for ``u`` (``0 <= m < n``).

    The returned unitary fixes ``e_1..e_m`` and maps ``u`` to
    ``[u_1, ..., u_m, s, 0, ..., 0]`` with ``s = |(u_{m+1}, ..., u_n)|``.
    When the entries below position ``m+1`` already vanish only the phase
    rotation remains (and it is the identity if ``u_{m+1} >= 0``).

    The reflection vector uses the sign that avoids cancellation, i.e.
    ``u_{m+1} + phase * s``; the phase rotation then absorbs the extra
    minus sign.
    """
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    if not 0 <= m < n:
        raise ValidationError(f"level {m} out of range for vector of length {n}")
    head = u[m]
    sign = head / abs(head) if head != 0 else 1.0 + 0.0j
    v = np.zeros(n, dtype=complex)
    if not np.any(u[m + 1 :]):
        phase = np.conj(sign) if head != 0 else 1.0 + 0.0j
        return Reflector(frozen(v), m, complex(phase))
    s = np.linalg.norm(u[m:])
    v[m] = head + sign * s
    v[m + 1 :] = u[m + 1 :]
    # R u = -sign * s e_{m+1}
    return Reflector(frozen(v), m, complex(-np.conj(sign)))


# ---------------------------------------------------------------------------
# QR / LQ
# ---------------------------------------------------------------------------


def qr_positive(a, tol: float = FACTOR_TOL) -> tuple[np.ndarray, np.ndarray]:
    """QR factorization with strictly positive real diagonal in ``R``.

    Raises
    ------
    SingularMatrixError
        If a pivot (the norm of the remaining part of a column) is below
        ``tol`` times the largest column norm of ``a``.
    """
    a = as_matrix(a)
    n = a.shape[0]
    r = a.copy()
    scale = max(float(np.max(np.linalg.norm(a, axis=0))), np.finfo(float).tiny)
    q = np.eye(n, dtype=complex)
    for k in range(n):
        refl = householder_reflector(r[:, k], k)
        r = refl.apply(r)
        q = refl.apply_right_adjoint(q)
        if r[k, k].real < tol * scale:
            raise SingularMatrixError(
                f"matrix is numerically singular: pivot {k} is {abs(r[k, k]):.3e}"
            )
        r[k + 1 :, k] = 0.0
        r[k, k] = r[k, k].real
    return q, r


def lq_unitary_factor(a, tol: float = FACTOR_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Factor ``a = L Q^{-1}`` with ``L`` lower triangular (positive diagonal)
    and ``Q`` unitary.  Computed from the QR factorization of ``a^dagger``."""
    a = as_matrix(a)
    q, r = qr_positive(dagger(a), tol=tol)
    return dagger(r), q


# ---------------------------------------------------------------------------
# Eigensolver for normal matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)

    @property
    def angles(self) -> np.ndarray:
        return np.mod(np.angle(self.eigenvalues), 2 * np.pi)


def hessenberg(a) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(H, Z)`` with ``a = Z H Z^dagger``, ``H`` upper Hessenberg
    with real non-negative subdiagonal."""
    h = as_matrix(a).copy()
    n = h.shape[0]
    z = np.eye(n, dtype=complex)
    for k in range(n - 2):
        refl = householder_reflector(h[:, k], k + 1)
        if refl.is_identity:
            continue
        h = refl.conjugate(h)
        z = refl.apply_right_adjoint(z)
        h[k + 2 :, k] = 0.0
    return h, z


def _givens(x: complex, y: complex) -> tuple[float, complex]:
    """``(c, s)`` such that ``[[c, s], [-conj(s), c]] @ [x, y] = [r, 0]``."""
    ax, ay = abs(x), abs(y)
    if ay == 0.0:
        return 1.0, 0.0j
    if ax == 0.0:
        return 0.0, np.conj(y) / ay
    r = np.hypot(ax, ay)
    return ax / r, (x / ax) * np.conj(y) / r


def _wilkinson_shift(a: complex, b: complex, c: complex, d: complex) -> complex:
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = d - b * c / (half + disc) if half + disc != 0 else d
    mu2 = d - b * c / (half - disc) if half - disc != 0 else d
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def schur_normal(a, max_sweeps_per_eig: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form ``a = Z T Z^dagger`` by single-shift implicit QR.

    For a normal matrix ``T`` is diagonal up to rounding and the columns of
    ``Z`` are eigenvectors.
    """
    h, z = hessenberg(a)
    n = h.shape[0]
    hi = n - 1
    its = 0
    total = 0
    budget = max_sweeps_per_eig * max(n, 1)
    while hi > 0:
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            if sub <= DEFLATION_TOL * (abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])) or sub < 1e-300:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        its += 1
        total += 1
        if total > budget:
            raise ConvergenceError(
                f"QR iteration did not converge after {total} sweeps",
                sweeps=total,
                residuals=np.abs(np.diag(h, -1)),
            )
        if its % 11 == 0:
            # exceptional shift to break cycles
            shift = h[hi, hi] + 0.75 * abs(h[hi, hi - 1]) * np.exp(1j * its)
        else:
            shift = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        x = h[lo, lo] - shift
        y = h[lo + 1, lo]
        for k in range(lo, hi):
            if k > lo:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            c, s = _givens(x, y)
            g = np.array([[c, s], [-np.conj(s), c]])
            h[k : k + 2, :] = g @ h[k : k + 2, :]
            gh = dagger(g)
            h[:, k : k + 2] = h[:, k : k + 2] @ gh
            z[:, k : k + 2] = z[:, k : k + 2] @ gh
            if k > lo:
                h[k + 1, k - 1] = 0.0
    return h, z


def _normalize_phases(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        p = 0 if abs(col[0]) > 1e-8 else int(np.argmax(np.abs(col)))
        if col[p] != 0:
            v[:, j] = col * (abs(col[p]) / col[p])
    return v


def eig_normal(a) -> EigenDecomposition:
    """Eigendecomposition of a normal matrix, ordered by increasing
    principal argument in ``[0, 2 pi)`` (ties: larger ``|v_1|`` first)."""
    t, z = schur_normal(a)
    vals = np.diag(t).copy()
    vecs = _normalize_phases(z)
    ang = np.mod(np.angle(vals), 2 * np.pi)
    ang[ang >= 2 * np.pi] = 0.0
    order = np.lexsort((-np.abs(vecs[0]), ang))
    return EigenDecomposition(frozen(vals[order]), frozen(vecs[:, order]))


def eig_unitary(u, tol: float = UNITARY_TOL) -> EigenDecomposition:
    u = as_matrix(u)
    defect = unitarity_defect(u)
    if defect > tol:
        raise ValidationError(f"matrix is not unitary (defect {defect:.2e})")
    return eig_normal(u)


def matrix_function(u, g: Callable[[np.ndarray], np.ndarray], tol: float = UNITARY_TOL) -> np.ndarray:
    """Evaluate ``g(U) = V diag(g(z)) V^dagger`` for a normal matrix ``U``.

    ``g`` is applied elementwise to the array of eigenvalues.
    """
    u = as_matrix(u)
    nd = float(np.max(np.abs(u @ dagger(u) - dagger(u) @ u), initial=0.0))
    if nd > tol * max(1.0, float(np.max(np.abs(u), initial=0.0))) ** 2:
        raise ValidationError(f"matrix is not normal (defect {nd:.2e})")
    dec = eig_normal(u)
    vals = np.asarray(g(dec.eigenvalues), dtype=complex)
    v = dec.eigenvectors
    return (v * vals) @ dagger(v)


# ---------------------------------------------------------------------------
# The l + a splitting
# ---------------------------------------------------------------------------


def pi_a(x: np.ndarray) -> np.ndarray:
    """Anti-Hermitian part in the ``l + a`` splitting."""
    up = np.triu(x, 1)
    return up - dagger(up) + np.diag(1j * np.diag(x).imag)


def pi_l(x: np.ndarray) -> np.ndarray:
    return x - pi_a(x)


def project_la(x) -> tuple[np.ndarray, np.ndarray]:
    """Split ``x = L + A``; ``L`` lower triangular with real diagonal, ``A``
    anti-Hermitian."""
    x = as_matrix(x)
    a = pi_a(x)
    return x - a, a


def r_map(x) -> np.ndarray:
    """``R(L + A) = L - A``."""
    x = np.asarray(x, dtype=complex)
    return x - 2.0 * pi_a(x)


def pairing(x, y) -> float:
    """``<X, Y> = Im tr(X Y)``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return float(np.sum(x * y.T).imag)


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x
