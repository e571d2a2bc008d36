"""Reduction of a unitary matrix to CMV shape by Householder conjugations.

Step ``s`` (1-based, ``s = 1..n-1``) makes the ``s``-th exposed entry real
positive and clears everything beyond it in the same column or row:

* ``s = 1``: column 1, entries 3..n cleared, entry (2,1) made positive;
* odd ``s >= 3``: column ``s-1``, entry ``(s+1, s-1)`` made positive;
* even ``s``: row ``s-1``, entry ``(s-1, s+1)`` made positive (the column
  procedure applied to the adjoint).

Each reflector fixes ``e_1..e_s`` and is applied on both sides, so a full
run performs ``n-1`` conjugations, i.e. ``2n-2`` one-sided reflector
applications.  The last conjugation only touches coordinate ``n`` and is a
diagonal phase rotation.  Unitarity forces the remaining staircase zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cmv import CMVMatrix, exposed_positions, extract_verblunsky, support_mask
from .errors import NotCyclicError, ValidationError
from .linalg_core import UNITARY_TOL, as_matrix, eig_unitary, householder_reflector, unitarity_defect
from .spectral import angle_gaps

CYCLIC_MASS_TOL = 1e-12
EXPOSED_TOL = 1e-12
SPLIT_TOL = 1e-10


@dataclass(frozen=True)
class ReductionStep:
    index: int  # 1-based step number
    kind: str  # "column" or "row"
    target: int  # 0-based column (or row) being cleared
    level: int  # reflector fixes coordinates 0..level-1
    exposed: float  # value placed in the exposed slot


@dataclass(frozen=True)
class Reduction:
    cmv: CMVMatrix
    conjugator: np.ndarray
    steps: tuple = field(default=())

    @property
    def reflector_applications(self) -> int:
        """One-sided reflector applications (two per conjugation)."""
        return 2 * len(self.steps)


def _step_plan(s: int) -> tuple[str, int, int]:
    """(kind, target, level) for 1-based step ``s``, 0-based indices."""
    if s == 1:
        return "column", 0, 1
    if s % 2 == 1:
        return "column", s - 2, s
    return "row", s - 2, s


def _clean(c: np.ndarray) -> np.ndarray:
    """Zero entries outside the CMV pattern and drop imaginary dust on exposed entries."""
    c = np.where(support_mask(c.shape[0]), c, 0.0)
    for r, k in exposed_positions(c.shape[0]):
        c[r, k] = c[r, k].real
    return c


def _run(u: np.ndarray, stop_tol: float, relative: bool, raise_on_stop: bool):
    """Run the schedule until done or an exposed candidate vanishes.

    Returns ``(matrix, conjugator, steps, stopped_at)`` where ``stopped_at``
    is the step index at which the tail vanished (``None`` if completed).
    """
    n = u.shape[0]
    w = np.eye(n, dtype=complex)
    steps = []
    for s in range(1, n):
        kind, target, level = _step_plan(s)
        vec = u[:, target] if kind == "column" else np.conj(u[target, :])
        tail = float(np.linalg.norm(vec[level:]))
        scale = float(np.linalg.norm(vec)) if relative else 1.0
        if tail <= stop_tol * scale:
            if raise_on_stop:
                raise NotCyclicError(
                    f"step {s}: exposed candidate {tail:.3e} vanished; e_1 is not cyclic", step=s
                )
            return u, w, steps, s
        refl = householder_reflector(vec, level)
        u = refl.conjugate(u)
        w = refl.apply_right_adjoint(w)
        steps.append(ReductionStep(s, kind, target, level, tail))
    return u, w, steps, None


def _check_unitary(u: np.ndarray, tol: float) -> None:
    d = unitarity_defect(u)
    if d > tol:
        raise ValidationError(f"input is not unitary (defect {d:.2e})")


def cyclic_masses(u: np.ndarray) -> np.ndarray:
    """Masses ``|<e_1, v_j>|^2`` of the spectral measure at ``e_1``."""
    return np.abs(eig_unitary(u).eigenvectors[0, :]) ** 2


def reduce_unitary(u, tol: float = UNITARY_TOL, mass_tol: float = CYCLIC_MASS_TOL) -> Reduction:
    """Full reduction with step diagnostics; see :func:`cmvify`."""
    u = as_matrix(u)
    _check_unitary(u, tol)
    n = u.shape[0]
    if n == 1:
        return Reduction(CMVMatrix(u), np.eye(1, dtype=complex), ())
    dec = eig_unitary(u)
    if angle_gaps(np.angle(dec.eigenvalues)).min() <= 1e-10:
        raise NotCyclicError("repeated eigenvalue: e_1 cannot be cyclic", step=0)
    mass = np.abs(dec.eigenvectors[0, :]) ** 2
    if mass.min() < mass_tol:
        raise NotCyclicError(f"e_1 has mass {mass.min():.3e} on an eigenvector", step=0)
    c, w, steps, _ = _run(u, EXPOSED_TOL, relative=False, raise_on_stop=True)
    c = _clean(c)
    w[:, 0] = 0.0
    w[0, :] = 0.0
    w[0, 0] = 1.0
    return Reduction(CMVMatrix(c, extract_verblunsky(c)), w, tuple(steps))


def cmvify(u, tol: float = UNITARY_TOL) -> tuple[CMVMatrix, np.ndarray]:
    """Conjugate a unitary ``u`` into CMV shape without moving ``e_1``.

    Returns ``(C, W)`` with ``C = W^dagger u W`` and ``W e_1 = e_1``.

    Raises
    ------
    NotCyclicError
        If ``e_1`` is not cyclic; ``step`` is 0 for the eigenvalue
        pre-check, otherwise the reduction step at which it was detected.
    """
    r = reduce_unitary(u, tol)
    return r.cmv, r.conjugator


def cmvify_split(u, tol: float = UNITARY_TOL, split_tol: float = SPLIT_TOL) -> list[tuple[CMVMatrix, range]]:
    """Reduce ``u`` to a direct sum of CMV blocks.

    When the candidate for an exposed entry is below ``split_tol`` times the
    norm of its row (column), the cyclic subspace of the current first basis
    vector is exhausted: the leading block is closed and the procedure
    restarts on the trailing principal submatrix.

    Returns a list of ``(block, index_range)`` in basis order.
    """
    u = as_matrix(u)
    _check_unitary(u, tol)
    blocks = []
    offset = 0
    rest = u
    while rest.shape[0] > 0:
        m = rest.shape[0]
        c, _, _, stop = _run(rest, split_tol, relative=True, raise_on_stop=False)
        size = m if stop is None else stop
        head = _clean(c[:size, :size]) if size > 1 else c[:1, :1].copy()
        blocks.append((CMVMatrix(head, extract_verblunsky(head)), range(offset, offset + size)))
        offset += size
        rest = c[size:, size:]
    return blocks


def direct_sum(mats) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    k = 0
    for m in mats:
        d = m.shape[0]
        out[k : k + d, k : k + d] = m
        k += d
    return out
