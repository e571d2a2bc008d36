"""Verblunsky coefficients and CMV matrices.

A CMV matrix is the product ``C = L M`` of two block-diagonal unitaries built
from the 2x2 blocks ``[[conj(a), rho], [rho, -a]]``.  All positions below are
1-based in docstrings and 0-based in code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DecoupledError, ShapeError, ValidationError
from .linalg_core import UNITARY_TOL, as_matrix, frozen, unitarity_defect

INTERIOR_MARGIN = 1e-14
CIRCLE_TOL = 1e-12
SHAPE_TOL = 1e-10
EXPOSED_TOL = 1e-12


@dataclass(frozen=True)
class VerblunskyCoefficients:
    """``alpha_0..alpha_{n-1}``: interior ones in the open disc, last on the circle."""

    alphas: np.ndarray

    def __post_init__(self):
        a = np.array(self.alphas, dtype=complex).reshape(-1)
        if a.size == 0:
            raise ValidationError("need at least one Verblunsky coefficient")
        if not np.all(np.isfinite(a)):
            raise ValidationError("non-finite Verblunsky coefficient")
        mod = np.abs(a)
        bad = np.flatnonzero(mod[:-1] >= 1.0 - INTERIOR_MARGIN)
        if bad.size:
            k = int(bad[0])
            raise ValidationError(f"|alpha_{k}| = {float(mod[k])!r} is not inside the unit disc")
        if abs(mod[-1] - 1.0) > CIRCLE_TOL:
            raise ValidationError(
                f"last coefficient must lie on the unit circle, |alpha_{a.size - 1}| = {float(mod[-1])!r}"
            )
        object.__setattr__(self, "alphas", frozen(a))

    @property
    def n(self) -> int:
        return self.alphas.size

    @property
    def rhos(self) -> np.ndarray:
        """``rho_k = sqrt(1 - |alpha_k|^2)`` for the interior coefficients."""
        return np.sqrt(1.0 - np.abs(self.alphas[:-1]) ** 2)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, radius: float = 0.9) -> "VerblunskyCoefficients":
        """Interior coefficients uniform on the disc of given radius, last uniform on the circle."""
        r = radius * np.sqrt(rng.uniform(size=n - 1))
        phi = rng.uniform(0, 2 * np.pi, size=n)
        a = np.empty(n, dtype=complex)
        a[:-1] = r * np.exp(1j * phi[:-1])
        a[-1] = np.exp(1j * phi[-1])
        return cls(a)

    @classmethod
    def clamped(cls, alphas, margin: float = INTERIOR_MARGIN) -> "VerblunskyCoefficients":
        """Pull interior coefficients inside ``|a| <= 1 - margin`` and put the
        last one on the circle."""
        a = np.array(alphas, dtype=complex)
        mod = np.abs(a[:-1])
        lim = 1.0 - 2 * margin
        over = mod > lim
        a[:-1][over] *= lim / mod[over]
        a[-1] /= abs(a[-1])
        return cls(a)


def xi_block(alpha: complex) -> np.ndarray:
    rho = np.sqrt(1.0 - abs(alpha) ** 2)
    return np.array([[np.conj(alpha), rho], [rho, -alpha]], dtype=complex)


def build_theta_factors(v: VerblunskyCoefficients) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(L, M)`` with ``L = diag(Xi_0, Xi_2, ...)`` and
    ``M = diag(Xi_{-1}, Xi_1, Xi_3, ...)``."""
    a = v.alphas
    n = v.n
    lfac = np.zeros((n, n), dtype=complex)
    mfac = np.zeros((n, n), dtype=complex)
    mfac[0, 0] = 1.0
    for k in range(n):
        target = lfac if k % 2 == 0 else mfac
        if k == n - 1:
            target[k, k] = np.conj(a[k])
        else:
            target[k : k + 2, k : k + 2] = xi_block(a[k])
    return lfac, mfac


@dataclass(frozen=True)
class CMVMatrix:
    matrix: np.ndarray
    coefficients: Optional[VerblunskyCoefficients] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix", frozen(as_matrix(self.matrix)))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def alphas(self) -> np.ndarray:
        if self.coefficients is None:
            object.__setattr__(self, "coefficients", extract_verblunsky(self.matrix))
        return self.coefficients.alphas

    @property
    def determinant(self) -> complex:
        a = self.alphas
        return complex((-1) ** (self.n - 1) * np.conj(a[-1]))

    @classmethod
    def from_matrix(cls, m, tol: float = UNITARY_TOL) -> "CMVMatrix":
        """Validate unitarity and shape, then extract coefficients."""
        m = as_matrix(m)
        defect = unitarity_defect(m)
        if defect > tol:
            raise ValidationError(f"matrix is not unitary (defect {defect:.2e})")
        return cls(m, extract_verblunsky(m))


def build_cmv(v: VerblunskyCoefficients) -> CMVMatrix:
    lfac, mfac = build_theta_factors(v)
    return CMVMatrix(lfac @ mfac, v)


# ---------------------------------------------------------------------------
# shape
# ---------------------------------------------------------------------------


def support_mask(n: int) -> np.ndarray:
    """Boolean mask of the positions allowed to be non-zero in CMV shape.

    Rows ``2j-1, 2j`` (1-based) may be non-zero in columns ``2j-2..2j+1``.
    """
    mask = np.zeros((n, n), dtype=bool)
    for r in range(n):
        j = r // 2  # 0-based pair index; rows 2j, 2j+1
        lo = max(2 * j - 1, 0)
        hi = min(2 * j + 2, n - 1)
        mask[r, lo : hi + 1] = True
    return mask


def exposed_positions(n: int) -> list[tuple[int, int]]:
    """0-based exposed positions ordered by the index of the ``rho`` product
    they carry: entry ``k`` equals ``rho_{k-1} rho_k`` (``rho_{-1} := 1``)."""
    out = []
    if n >= 2:
        out.append((1, 0))
    for k in range(1, n - 1):
        # k odd: (k, k+2) 1-based -> (k-1, k+1); k even: (k+2, k) -> (k+1, k-1)
        out.append((k - 1, k + 1) if k % 2 == 1 else (k + 1, k - 1))
    return out


@dataclass(frozen=True)
class ShapeReport:
    is_cmv_shape: bool
    violations: tuple = ()

    def as_dict(self) -> dict:
        return {
            "is_cmv_shape": self.is_cmv_shape,
            "violations": [{"row": r + 1, "col": c + 1, "kind": k} for r, c, k in self.violations],
        }


def check_cmv_shape(m, zero_tol: float = SHAPE_TOL, exposed_tol: float = EXPOSED_TOL) -> ShapeReport:
    """Check the staircase zero pattern and positivity of exposed entries.

    Violation kinds are ``nonzero-above-staircase``, ``nonzero-below-staircase``
    and ``nonpositive-exposed``.  Positions in ``violations`` are 0-based;
    :meth:`ShapeReport.as_dict` reports them 1-based.
    """
    m = as_matrix(m)
    n = m.shape[0]
    if n < 2:
        raise ValidationError("shape check needs n >= 2")
    mask = support_mask(n)
    violations = []
    rows, cols = np.nonzero((~mask) & (np.abs(m) > zero_tol))
    for r, c in zip(rows.tolist(), cols.tolist()):
        kind = "nonzero-above-staircase" if c > r else "nonzero-below-staircase"
        violations.append((r, c, kind))
    for r, c in exposed_positions(n):
        x = m[r, c]
        if not (x.real > exposed_tol and abs(x.imag) <= zero_tol):
            violations.append((r, c, "nonpositive-exposed"))
    violations.sort()
    return ShapeReport(not violations, tuple(violations))


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------


def _extract_raw(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Read ``conj(alpha_k)`` and ``rho_k`` from entries, no checks.

    Works on any square matrix, which makes the coefficient maps smooth
    functions on a neighbourhood of the CMV manifold (used for brackets).
    ``rho_k`` is read from exposed entries as ``E_k / rho_{k-1}``.
    """
    n = m.shape[0]
    abar = np.empty(n, dtype=complex)
    rho = np.empty(max(n - 1, 0), dtype=complex)
    abar[0] = m[0, 0]
    prev = 1.0
    pos = exposed_positions(n)
    for k in range(1, n):
        rho[k - 1] = m[pos[k - 1]] / prev
        prev = rho[k - 1]
        # row 2j-1 (1-based): col 2j carries rho_{2j-2} conj(alpha_{2j-1}),
        #                     col 2j-2 carries rho_{2j-3} conj(alpha_{2j-2})
        entry = m[k - 1, k] if k % 2 == 1 else m[k, k - 1]
        abar[k] = entry / prev
    return abar, rho


def extract_verblunsky(m, exposed_tol: float = EXPOSED_TOL, clamp: bool = False) -> VerblunskyCoefficients:
    """Read the Verblunsky coefficients off a unitary CMV-shaped matrix.

    Raises
    ------
    ShapeError
        If the zero pattern is violated.
    DecoupledError
        If an exposed entry is below ``exposed_tol``: the matrix is
        numerically a direct sum and has no single coefficient list.
    """
    m = as_matrix(m)
    n = m.shape[0]
    if n == 1:
        a = np.conj(m[0, 0])
        return VerblunskyCoefficients(np.array([a / abs(a)]))
    for k, (r, c) in enumerate(exposed_positions(n)):
        if m[r, c].real <= exposed_tol:
            raise DecoupledError(
                f"exposed entry ({r + 1},{c + 1}) = {m[r, c]:.3e} is numerically zero", index=k
            )
    report = check_cmv_shape(m, exposed_tol=exposed_tol)
    if not report.is_cmv_shape:
        raise ShapeError(f"matrix is not in CMV shape: {report.violations[:3]}...", report)
    abar, _ = _extract_raw(m)
    a = np.conj(abar)
    if clamp:
        return VerblunskyCoefficients.clamped(a)
    a[-1] /= abs(a[-1])
    return VerblunskyCoefficients(a)


def entry_closed_form(v: VerblunskyCoefficients, row: int, col: int) -> complex:
    """Entry ``(row, col)`` (0-based) of the CMV matrix in terms of the coefficients.

    Uses ``alpha_{-1} = -1``, ``rho_{-1} = 0`` and ``rho_{n-1} = 0``.
    """
    n = v.n
    a = v.alphas

    def al(k):
        return -1.0 if k == -1 else a[k]

    def rh(k):
        return 0.0 if k in (-1, n - 1) else np.sqrt(1 - abs(a[k]) ** 2)

    j = row // 2 + 1  # 1-based pair index
    c = col + 1
    if row % 2 == 0:  # 1-based row 2j-1
        table = {
            2 * j - 2: np.conj(al(2 * j - 2)) * rh(2 * j - 3),
            2 * j - 1: -np.conj(al(2 * j - 2)) * al(2 * j - 3),
            2 * j: rh(2 * j - 2) * np.conj(al(2 * j - 1)) if 2 * j - 1 < n else 0.0,
            2 * j + 1: rh(2 * j - 2) * rh(2 * j - 1) if 2 * j - 1 < n else 0.0,
        }
    else:  # 1-based row 2j
        table = {
            2 * j - 2: rh(2 * j - 2) * rh(2 * j - 3),
            2 * j - 1: -rh(2 * j - 2) * al(2 * j - 3),
            2 * j: -al(2 * j - 2) * np.conj(al(2 * j - 1)) if 2 * j - 1 < n else 0.0,
            2 * j + 1: -al(2 * j - 2) * rh(2 * j - 1) if 2 * j - 1 < n else 0.0,
        }
    return complex(table.get(c, 0.0))
