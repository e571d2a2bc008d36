import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvlab.cmv import VerblunskyCoefficients, build_cmv, check_cmv_shape
from cmvlab.errors import StepSizeError, ValidationError
from cmvlab.flows import (
    AL_HAMILTONIAN,
    HierarchyHamiltonian,
    al_vector_field,
    dressing,
    evolve_measure,
    flow_measure,
    flow_ode,
    flow_qr,
    flow_trajectory,
    integrate_al,
    lax_field,
    matrix_polynomial,
)
from cmvlab.linalg_core import pi_a, unitarity_defect
from cmvlab.spectral import SpectralMeasure, measure_of

from conftest import random_cmv, random_matrix

Z = HierarchyHamiltonian([0, 1])
Z2 = HierarchyHamiltonian([0, 0, 0.5])
IZ = HierarchyHamiltonian([0, 1j])


def constant_symbol_hamiltonian(z, value=1.0):
    """``f`` with ``z f'(z) = value + i * (anything)`` at every ``z_j``."""
    n = z.size
    rng = np.random.default_rng(0)
    target = value + 1j * rng.normal(size=n)
    # z f'(z) = sum_{k=1}^n b_k z^k interpolates target
    b = np.linalg.solve(z[:, None] ** np.arange(1, n + 1)[None, :], target)
    return HierarchyHamiltonian(np.r_[0, b / np.arange(1, n + 1)])


def test_hamiltonian_basics(rng):
    h = HierarchyHamiltonian([1, 2 - 1j, 0.5j])
    assert h.degree == 2
    assert np.allclose(h.fprime_coeffs, [2 - 1j, 1j])
    z = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
    assert np.allclose(h.symbol(z).imag, 0) and h.symbol(z).dtype == float
    b = random_matrix(rng, 3)
    assert np.allclose(matrix_polynomial([1, 2, 3], b), np.eye(3) + 2 * b + 3 * b @ b)
    assert np.isclose(h.phi(b), np.trace(np.eye(3) + (2 - 1j) * b + 0.5j * b @ b).imag)
    with pytest.raises(ValidationError):
        HierarchyHamiltonian([])
    with pytest.raises(ValidationError):
        flow_qr(random_cmv(rng, 2), HierarchyHamiltonian([0, 0, 0, 0, 0, 1]), 0.1)


@pytest.mark.parametrize("flow", [flow_measure, flow_qr, flow_ode])
def test_trivial_times(flow, rng):
    c = random_cmv(rng, 4)
    assert flow(c, Z, 0.0) is c
    one = build_cmv(VerblunskyCoefficients([np.exp(0.3j)]))
    assert np.allclose(flow(one, Z, 0.7).matrix, one.matrix)


def test_qr_vs_measure(rng):
    c = random_cmv(rng, 4)
    assert np.abs(flow_qr(c, Z, 0.5).alphas - flow_measure(c, Z, 0.5).alphas).max() < 1e-8
    c = random_cmv(rng, 5)
    assert np.abs(flow_qr(c, Z2, 1.0).alphas - flow_measure(c, Z2, 1.0).alphas).max() < 1e-8


def test_ode_vs_qr_and_order(rng):
    c = random_cmv(rng, 4)
    ref = flow_qr(c, Z, 0.5).alphas
    assert np.abs(flow_ode(c, Z, 0.5, 2000).alphas - ref).max() < 1e-7
    errs = [np.abs(flow_ode(c, Z, 0.5, s).alphas - ref).max() for s in (10, 20, 40)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(13 < r < 19 for r in ratios), ratios


def test_ode_step_size_error(rng):
    c = random_cmv(rng, 4)
    with pytest.raises(StepSizeError):
        flow_ode(c, HierarchyHamiltonian([0, 3, 2]), 5.0, steps=2)


def test_constant_symbol_freezes_measure(rng):
    c = random_cmv(rng, 5)
    h = constant_symbol_hamiltonian(measure_of(c).z)
    assert np.ptp(h.symbol(measure_of(c).z)) < 1e-12
    for flow in (flow_measure, flow_qr):
        assert np.abs(flow(c, h, 1.3).matrix - c.matrix).max() < 1e-10


def test_group_property_and_negative_time(rng):
    c = random_cmv(rng, 5)
    for h in (Z, Z2, IZ):
        two = flow_qr(flow_qr(c, h, 0.4), h, 0.7)
        assert np.abs(two.alphas - flow_qr(c, h, 1.1).alphas).max() < 1e-10
        back = flow_measure(flow_measure(c, h, 0.8), h, -0.8)
        assert np.abs(back.alphas - c.alphas).max() < 1e-10
        assert np.abs(flow_qr(c, h, -0.6).alphas - flow_measure(c, h, -0.6).alphas).max() < 1e-9
        assert np.abs(flow_ode(c, h, -0.6, 600).alphas - flow_measure(c, h, -0.6).alphas).max() < 1e-9


def test_flows_commute(rng):
    c = random_cmv(rng, 5)
    a = flow_qr(flow_qr(c, Z, 0.3), Z2, 0.4).alphas
    b = flow_qr(flow_qr(c, Z2, 0.4), Z, 0.3).alphas
    assert np.abs(a - b).max() < 1e-10


def test_measure_evolution_consistency(rng):
    m = SpectralMeasure.random(6, rng)
    h = HierarchyHamiltonian([0, 1, 0.3 - 0.2j])
    coeffs = rng.normal(size=7) + 1j * rng.normal(size=7)

    def g(z):
        # random real trigonometric polynomial
        return np.real(sum(c * z**k for k, c in enumerate(coeffs)))

    F = h.symbol(m.z)
    for t in (0.0, 0.7):
        mu = evolve_measure(m, h, t).measure.masses
        step = 1e-4
        ip = evolve_measure(m, h, t + step).measure.masses @ g(m.z)
        im = evolve_measure(m, h, t - step).measure.masses @ g(m.z)
        lhs = (ip - im) / (2 * step)
        rhs = mu @ (F * g(m.z)) - (mu @ F) * (mu @ g(m.z))
        assert abs(lhs - rhs) < 1e-6


def test_flow_measure_clamps(rng):
    m = SpectralMeasure.random(4, rng)
    ev = evolve_measure(m, Z, 400.0)
    assert ev.clamped and np.all(ev.measure.masses > 0)
    assert np.all(np.isfinite(ev.log_masses))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        flow_measure(build_cmv(VerblunskyCoefficients([0.1, 0.2, 0.3, 1.0])), Z, 400.0)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_al_vector_field_zero():
    v = VerblunskyCoefficients([0, 0, 0, 0, np.exp(0.5j)])
    d = al_vector_field(v)
    assert np.isclose(d[0], -1j)
    assert np.allclose(d[1:3], 0)
    assert np.isclose(d[3], 1j * np.exp(0.5j))
    assert d[4] == 0


def test_al_vector_field_boundary():
    v = VerblunskyCoefficients([0.3, 1 - 1e-12, 0.2, 1.0])
    assert abs(al_vector_field(v)[1]) < 1e-11


def test_al_flow_matches_hierarchy(rng):
    v = VerblunskyCoefficients.random(5, rng)
    ref = integrate_al(v, 0.2, 2000).alphas
    assert np.abs(flow_qr(v, AL_HAMILTONIAN, 0.2).alphas - ref).max() < 1e-7
    assert np.abs(flow_measure(v, AL_HAMILTONIAN, 0.2).alphas - ref).max() < 1e-7


def test_lax_field_tangent(rng):
    c = random_cmv(rng, 5).matrix
    x = lax_field(c, Z2)
    # tangent to the unitary group: C^dagger X is anti-Hermitian
    y = c.conj().T @ x
    assert np.abs(y + y.conj().T).max() < 1e-13
    assert abs(np.trace(y)) < 1e-13


def test_dressing_identity(rng):
    c = random_cmv(rng, 5)
    out = dressing(c, np.eye(5))
    assert np.abs(out.matrix - c.matrix).max() < 1e-13
    assert abs(out.determinant - c.determinant) < 1e-14


def test_dressing_first_order(rng):
    from scipy.linalg import expm

    c = random_cmv(rng, 5)
    b = c.matrix
    gen = np.tril(random_matrix(rng, 5), -1) + np.diag(rng.normal(size=5))
    first = -b @ pi_a(b.conj().T @ gen @ b)
    errs = [np.abs(dressing(c, expm(-s * gen)).matrix - b - s * first).max() for s in (1e-2, 5e-3, 2.5e-3)]
    assert all(abs(errs[i] / errs[i + 1] - 4) < 0.2 for i in range(2))


def test_dressing_random(rng):
    c = random_cmv(rng, 6)
    lam = np.tril(random_matrix(rng, 6), -1) * 0.5 + np.diag(rng.uniform(0.5, 2, 6))
    out = dressing(c, lam)
    assert check_cmv_shape(out.matrix).is_cmv_shape
    assert abs(out.determinant - c.determinant) < 1e-9
    with pytest.raises(ValidationError):
        dressing(c, random_matrix(rng, 6))


def test_trajectory_conservation(rng):
    c = random_cmv(rng, 4)
    times = np.linspace(0, 1.5, 4)
    for method in ("measure", "qr", "ode"):
        tr = flow_trajectory(c, Z2, times, method, steps=300)
        assert tr.eig_drift.max() < 1e-8 and tr.det_drift.max() < 1e-10
        assert max(unitarity_defect(s.matrix) for s in tr.states) < 1e-12
    with pytest.raises(ValidationError):
        flow_trajectory(c, Z, [0.0, 0.0])
    with pytest.raises(ValidationError):
        flow_trajectory(c, Z, [0.0, 1.0], method="euler")


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.floats(-1.5, 1.5))
def test_measure_and_qr_agree(n, seed, t):
    rng = np.random.default_rng(seed)
    c = build_cmv(VerblunskyCoefficients.random(n, rng, radius=0.8))
    h = HierarchyHamiltonian(rng.normal(size=3) + 1j * rng.normal(size=3))
    a = flow_measure(c, h, t)
    b = flow_qr(c, h, t)
    assert np.abs(a.alphas - b.alphas).max() < 1e-8
    assert abs(a.determinant - c.determinant) < 1e-10
