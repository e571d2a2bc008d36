"""Seeded acceptance checks shared by the test suite and ``cmvlab --self-test``.

Each criterion returns a :class:`CriterionResult` holding named metrics
``(value, tolerance)``; it passes when every value is at most its tolerance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from . import asymptotics as asy
from .brackets import (
    entry_im,
    entry_re,
    exposed_entries,
    exposed_flow_closed_form,
    hamiltonian_field,
    jacobian_check,
    log_ratio_bracket,
    psi_qrs,
    theta_mu_brackets,
    verify_bracket_equality,
)
from .cmv import VerblunskyCoefficients, build_cmv, check_cmv_shape, entry_closed_form, support_mask
from .flows import (
    HierarchyHamiltonian,
    dressing,
    flow_measure,
    flow_ode,
    flow_qr,
    flow_trajectory,
    lax_rk4,
    qr_conjugation,
)
from .linalg_core import commutator, pairing, pi_a, r_map, unitarity_defect
from .reduction import cmvify, reduce_unitary
from .spectral import (
    SpectralMeasure,
    cauchy_binet_oracle,
    heine_alpha,
    measure_distance,
    measure_of,
    toeplitz_dets,
    verblunsky_of_measure,
)

SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    name: str
    metrics: dict = field(default_factory=dict)  # label -> (value, tol)
    seconds: float = 0.0

    def record(self, label: str, value: float, tol: float) -> None:
        old = self.metrics.get(label)
        value = float(value)
        if old is None or value > old[0] or not np.isfinite(value):
            self.metrics[label] = (value, tol)

    @property
    def passed(self) -> bool:
        return bool(self.metrics) and all(np.isfinite(v) and v <= t for v, t in self.metrics.values())

    def line(self) -> str:
        parts = ", ".join(f"{k}={v:.2e}/{t:.0e}" for k, (v, t) in self.metrics.items())
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {parts} ({self.seconds:.1f}s)"

    def as_dict(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "metrics": {k: {"value": v, "tol": t} for k, (v, t) in self.metrics.items()},
        }


def _rng(k: int) -> np.random.Generator:
    return np.random.default_rng([SEED, k])


def separated_measure(n: int, rng: np.random.Generator, min_gap: float = 0.3) -> SpectralMeasure:
    """Random measure with angle gaps >= ``min_gap`` and masses in [0.5, 1.5]."""
    base = np.sort(rng.uniform(0, 2 * np.pi - n * min_gap, n))
    th = base + min_gap * np.arange(n)
    return SpectralMeasure.normalized(th, rng.uniform(0.5, 1.5, n))


# ---------------------------------------------------------------------------


def criterion_1() -> CriterionResult:
    r = CriterionResult(1, "CMV construction fidelity")
    rng = _rng(1)
    n = 8
    for _ in range(100):
        v = VerblunskyCoefficients.random(n, rng)
        c = build_cmv(v)
        closed = np.array([[entry_closed_form(v, i, j) for j in range(n)] for i in range(n)])
        r.record("entry", np.abs(c.matrix - closed).max(), 1e-14)
        r.record("unitary", unitarity_defect(c.matrix), 1e-12)
        r.record("det", abs(np.linalg.det(c.matrix) - (-1) ** (n - 1) * np.conj(v.alphas[-1])), 1e-10)
    return r


def criterion_2() -> CriterionResult:
    r = CriterionResult(2, "round-trip bijection")
    rng = _rng(2)
    for n in range(2, 13):
        for _ in range(50):
            v = VerblunskyCoefficients.random(n, rng)
            back = verblunsky_of_measure(measure_of(build_cmv(v))).alphas
            r.record("alpha->measure->alpha", np.abs(back - v.alphas).max(), 1e-9)
            m = SpectralMeasure.random(n, rng)
            r.record("measure->alpha->measure", measure_distance(m, measure_of(build_cmv(verblunsky_of_measure(m)))), 1e-9)
    return r


def criterion_3() -> CriterionResult:
    r = CriterionResult(3, "CMV-ification")
    rng = _rng(3)
    n = 8
    for _ in range(50):
        u = unitary_group.rvs(n, random_state=rng)
        red = reduce_unitary(u)
        c, w = red.cmv.matrix, red.conjugator
        rep = check_cmv_shape(c)
        r.record("shape violations", len(rep.violations), 0)
        r.record("conjugation", np.abs(w.conj().T @ u @ w - c).max(), 1e-12)
        r.record("step count error", abs(red.reflector_applications - (2 * n - 2)), 0)
        r.record("measure", measure_distance(measure_of(u), measure_of(c)), 1e-9)
        c2, w2 = cmvify(c)
        r.record("reapply", max(np.abs(c2.matrix - c).max(), np.abs(w2 - np.eye(n)).max()), 1e-12)
    return r


def criterion_4() -> CriterionResult:
    r = CriterionResult(4, "dual inverse paths")
    rng = _rng(4)
    for n in range(2, 11):
        for _ in range(5):
            m = separated_measure(n, rng, 0.25)
            a = verblunsky_of_measure(m).alphas
            for order in range(1, n + 1):
                r.record("heine vs szego", abs(heine_alpha(m, order) - a[order - 1]), 1e-9)
            for order in range(1, min(n, 4) + 1):
                d = np.array(toeplitz_dets(m, order))
                o = np.array(cauchy_binet_oracle(m, order))
                r.record("toeplitz vs cauchy-binet", np.abs(d - o).max(), 1e-10)
    return r


FLOW_POLYS = {"z": [0, 1], "z^2/2": [0, 0, 0.5], "iz": [0, 1j]}


def criterion_5() -> CriterionResult:
    r = CriterionResult(5, "triple-integrator agreement")
    rng = _rng(5)
    for n in range(3, 7):
        v = VerblunskyCoefficients.random(n, rng)
        for coeffs in FLOW_POLYS.values():
            h = HierarchyHamiltonian(coeffs)
            a = flow_measure(v, h, 1.0).alphas
            b = flow_qr(v, h, 1.0).alphas
            c = flow_ode(v, h, 1.0, steps=4000).alphas
            r.record("measure-qr", np.abs(a - b).max(), 1e-7)
            r.record("measure-ode", np.abs(a - c).max(), 1e-7)
            r.record("qr-ode", np.abs(b - c).max(), 1e-7)
    return r


def _shape_defect(m: np.ndarray) -> float:
    return float(np.abs(m[~support_mask(m.shape[0])]).max())


def criterion_6() -> CriterionResult:
    r = CriterionResult(6, "conservation laws")
    rng = _rng(6)
    times = np.linspace(0.0, 2.0, 5)
    for n in (3, 5):
        v = VerblunskyCoefficients.random(n, rng)
        c = build_cmv(v)
        for coeffs in FLOW_POLYS.values():
            h = HierarchyHamiltonian(coeffs)
            for method in ("measure", "qr", "ode"):
                tr = flow_trajectory(c, h, times, method, steps=1000)
                r.record("eig drift", tr.eig_drift.max(), 1e-8)
                r.record("det drift", tr.det_drift.max(), 1e-10)
                r.record("unitarity", max(unitarity_defect(s.matrix) for s in tr.states), 1e-9)
            raw = [qr_conjugation(c.matrix, h, t) for t in times[1:]]
            b = c.matrix
            for dt in np.diff(times):
                b = lax_rk4(b, h, dt, 1000)
                raw.append(b)
            r.record("raw shape defect", max(_shape_defect(x) for x in raw), 1e-9)
            r.record("raw unitarity", max(unitarity_defect(x) for x in raw), 1e-9)
    return r


def criterion_7() -> CriterionResult:
    r = CriterionResult(7, "structural algebra")
    rng = _rng(7)
    for k in range(120):
        n = 2 + k % 7
        x, y = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(2))
        lhs = commutator(r_map(x), r_map(y)) - r_map(commutator(r_map(x), y) + commutator(x, r_map(y)))
        r.record("mCYB", np.abs(lhs + commutator(x, y)).max(), 1e-12)
        r.record("R antisymmetry", abs(pairing(x, r_map(y)) + pairing(r_map(x), y)), 1e-12)
        a1, a2 = pi_a(x), pi_a(y)
        l1, l2 = x - a1, y - a2
        r.record("isotropy", max(abs(pairing(a1, a2)), abs(pairing(l1, l2))), 1e-12)
        up = np.triu(x, 1) + 0.5 * np.diag(np.diag(x))
        explicit = up - up.conj().T
        r.record("pi_a explicit", np.abs(pi_a(x) - explicit).max(), 0.0)
    return r


def criterion_8() -> CriterionResult:
    r = CriterionResult(8, "bracket equality")
    rng = _rng(8)
    for n in (3, 4, 5):
        for _ in range(2):
            r.record("GD vs AL", verify_bracket_equality(VerblunskyCoefficients.random(n, rng)).max_residual, 1e-6)
    return r


def criterion_9() -> CriterionResult:
    r = CriterionResult(9, "canonical relations")
    rng = _rng(9)
    for n in (2, 3, 4, 5):
        for _ in range(2):
            v = verblunsky_of_measure(separated_measure(n, rng))
            rep = theta_mu_brackets(v)
            r.record("{theta, log ratio / 2}", rep.canonical_residual, 1e-5)
            r.record("{theta, theta}", rep.commuting_residual, 1e-6)
    return r


def criterion_10() -> CriterionResult:
    r = CriterionResult(10, "cotangent identity")
    rng = _rng(10)
    h = HierarchyHamiltonian([0, 1, 0.25j])
    for _ in range(20):
        m = separated_measure(4, rng)
        v = verblunsky_of_measure(m)
        rep = theta_mu_brackets(v)
        num = log_ratio_bracket(rep, 1, 2, 0)
        closed = psi_qrs(rep.thetas[[0, 1, 2]])
        r.record("FD vs Psi", abs(num - closed), 1e-4)
        rep_t = theta_mu_brackets(flow_measure(v, h, 1.0).coefficients)
        r.record("Psi drift along flow", abs(log_ratio_bracket(rep_t, 1, 2, 0) - num), 1e-5)
    return r


def criterion_11() -> CriterionResult:
    r = CriterionResult(11, "Jacobian")
    rng = _rng(11)
    for n in range(2, 6):
        for _ in range(4):
            v = verblunsky_of_measure(separated_measure(n, rng))
            num, closed = jacobian_check(v)
            r.record("relative error", abs(num - closed) / abs(closed), 1e-5)
            r.record("sign", 0.0 if num < 0 else 1.0, 0.0)
    return r


def _scattering_instance(n: int, rng: np.random.Generator) -> SpectralMeasure:
    """Angles whose values of ``2 cos`` are distinct with gaps near 2/(n-1)."""
    c = np.linspace(0.9, -0.9, n) + rng.uniform(-0.05, 0.05, n)
    th = np.arccos(c) * rng.choice([-1.0, 1.0], size=n)
    p = rng.permutation(n)
    return SpectralMeasure.normalized(th[p], rng.uniform(0.5, 1.5, n))


def criterion_12() -> CriterionResult:
    r = CriterionResult(12, "asymptotics and scattering")
    rng = _rng(12)
    h = HierarchyHamiltonian([0, 1])
    for n in (3, 4, 5):
        for _ in range(2):
            m = _scattering_instance(n, rng)
            o = asy.ordering(m, h)
            gaps = o.gaps()
            g = gaps.min()
            t_lim = 30.0 / g
            ts = np.linspace(t_lim, 2 * t_lim, 11)
            for k in range(1, n + 1):
                slope, _ = asy.fit_log_mass(m, h, k, ts)
                r.record("mass slope", abs(slope + (o.lambdas[0] - o.lambdas[k - 1])), 1e-6)
            a = asy.alpha_path(m, h, [t_lim])[0]
            r.record("alpha limit", max(abs(a[k - 1] - asy.predict_alpha_limit(m, h, k)) for k in range(1, n + 1)), 1e-6)
            for k in range(1, n):
                tk = np.linspace(*asy.default_window(m, h, k), 11)
                xi, _ = asy.predict_xi(m, h, k)
                r.record("xi relative", abs(asy.fit_xi(m, h, k, tk) - xi) / abs(xi), 1e-3)
            rep = asy.scattering_invariants(m, h)
            r.record("product identity", rep.product_residuals.max(), 1e-6)
            a_minus = asy.alpha_path(m, h, [-t_lim])[0]
            r.record("alpha(-inf)", np.abs(a_minus - rep.alpha_minus).max(), 1e-6)
    return r


def criterion_13() -> CriterionResult:
    r = CriterionResult(13, "exposed-entry flow")
    rng = _rng(13)
    for k in range(10):
        n = 3 + k % 4
        c = build_cmv(VerblunskyCoefficients.random(n, rng)).matrix
        for i, j in exposed_entries(n):
            closed = exposed_flow_closed_form(c, i, j)
            r.record("closed vs field", np.abs(hamiltonian_field(entry_re(i, j), c) - closed).max(), 1e-9)
            r.record("Im entry field", np.abs(hamiltonian_field(entry_im(i, j), c)).max(), 1e-9)
    return r


def criterion_14() -> CriterionResult:
    r = CriterionResult(14, "dressing")
    rng = _rng(14)
    for n in (3, 5):
        c = build_cmv(VerblunskyCoefficients.random(n, rng))
        b = c.matrix
        gen = np.tril(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)), -1) + np.diag(rng.normal(size=n))
        first = -b @ pi_a(b.conj().T @ gen @ b)
        errs = [np.abs(dressing(c, expm(-s * gen)).matrix - b - s * first).max() for s in (1e-2, 5e-3, 2.5e-3)]
        for e0, e1 in zip(errs, errs[1:]):
            r.record("|ratio - 4|", abs(e0 / e1 - 4.0), 0.2)
        for s in (0.1, 0.5, 1.0):
            out = dressing(c, expm(-s * gen))
            r.record("orbit det drift", abs(out.determinant - c.determinant), 1e-10)
            r.record("orbit unitarity", unitarity_defect(out.matrix), 1e-10)
    return r


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
    criterion_12,
    criterion_13,
    criterion_14,
]


def run_criterion(fn) -> CriterionResult:
    t0 = time.perf_counter()
    res = fn()
    res.seconds = time.perf_counter() - t0
    return res


def run_all(echo=None) -> list[CriterionResult]:
    out = []
    for fn in CRITERIA:
        res = run_criterion(fn)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
