"""JSON and CSV formats.

* complex scalar: ``[re, im]``
* matrix: ``{"rows": n, "cols": n, "entries": [[re, im], ...]}`` (row-major)
* coefficients: ``{"alphas": [[re, im], ...]}``
* measure: ``{"atoms": [{"theta": t, "mass": m}, ...]}``
* trajectory CSV: ``t, re_alpha_0, im_alpha_0, ..., eig_drift, det_drift``
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .cmv import CMVMatrix, VerblunskyCoefficients, build_cmv
from .errors import FormatError, ValidationError
from .spectral import SpectralMeasure


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(x, where: str = "") -> complex:
    if not (isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x)):
        raise ValidationError(f"{where}: expected [re, im], got {x!r}")
    return complex(float(x[0]), float(x[1]))


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"rows": m.shape[0], "cols": m.shape[1], "entries": [complex_to_json(z) for z in m.reshape(-1)]}


def matrix_from_json(d: dict) -> np.ndarray:
    try:
        rows, cols, entries = int(d["rows"]), int(d["cols"]), d["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"matrix object needs rows, cols, entries: {exc}") from exc
    if len(entries) != rows * cols:
        raise ValidationError(f"matrix has {len(entries)} entries, expected {rows * cols}")
    vals = [complex_from_json(e, f"entries[{i}]") for i, e in enumerate(entries)]
    out = np.array(vals, dtype=complex).reshape(rows, cols)
    if not np.all(np.isfinite(out)):
        raise ValidationError("matrix has non-finite entries")
    return out


def coefficients_to_json(v: VerblunskyCoefficients) -> dict:
    return {"alphas": [complex_to_json(a) for a in v.alphas]}


def coefficients_from_json(d: dict) -> VerblunskyCoefficients:
    if "alphas" not in d:
        raise ValidationError("coefficient object needs an 'alphas' list")
    return VerblunskyCoefficients([complex_from_json(a, f"alphas[{i}]") for i, a in enumerate(d["alphas"])])


def measure_to_json(m: SpectralMeasure) -> dict:
    return {"atoms": [{"theta": float(t), "mass": float(w)} for t, w in zip(m.thetas, m.masses)]}


def measure_from_json(d: dict) -> SpectralMeasure:
    try:
        atoms = d["atoms"]
        th = [float(a["theta"]) for a in atoms]
        mu = [float(a["mass"]) for a in atoms]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"measure object needs atoms with theta and mass: {exc}") from exc
    return SpectralMeasure(th, mu)


def cmv_to_json(c: CMVMatrix) -> dict:
    d = matrix_to_json(c.matrix)
    d.update(coefficients_to_json(c.coefficients or VerblunskyCoefficients(c.alphas)))
    return d


def cmv_from_json(d: dict) -> CMVMatrix:
    """Accepts a coefficient object or a matrix object (validated as CMV)."""
    if "entries" in d:
        return CMVMatrix.from_matrix(matrix_from_json(d))
    if "alphas" in d:
        return build_cmv(coefficients_from_json(d))
    raise ValidationError("expected a matrix ('entries') or coefficient ('alphas') object")


def read_json(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {p}: {exc.strerror}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{p}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(d, dict):
        raise ValidationError(f"{p}: top-level JSON value must be an object")
    return d


def dumps(d) -> str:
    return json.dumps(d, indent=2) + "\n"


def write_text(path, text: str) -> None:
    p = Path(path)
    try:
        p.write_text(text)
    except OSError as exc:
        raise FormatError(f"cannot write {p}: {exc.strerror}") from exc


def write_json(path, d) -> None:
    write_text(path, dumps(d))


def trajectory_csv(traj) -> str:
    """CSV text for a :class:`~cmvlab.flows.FlowTrajectory` (17 significant digits)."""
    n = traj.states[0].n
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["t"]
    for k in range(n):
        header += [f"re_alpha_{k}", f"im_alpha_{k}"]
    w.writerow(header + ["eig_drift", "det_drift"])
    for t, s, ed, dd in zip(traj.times, traj.states, traj.eig_drift, traj.det_drift):
        row = [t]
        for a in s.alphas:
            row += [a.real, a.imag]
        w.writerow([f"{x:.17g}" for x in row + [ed, dd]])
    return buf.getvalue()


def read_trajectory_csv(text: str) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows:
        raise ValidationError("empty trajectory")
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])
