import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvlab.cmv import (
    CMVMatrix,
    VerblunskyCoefficients,
    build_cmv,
    build_theta_factors,
    check_cmv_shape,
    entry_closed_form,
    exposed_positions,
    extract_verblunsky,
    support_mask,
)
from cmvlab.errors import DecoupledError, ShapeError, ValidationError
from cmvlab.linalg_core import qr_positive, unitarity_defect

from conftest import random_matrix


def test_coefficient_validation():
    with pytest.raises(ValidationError):
        VerblunskyCoefficients([1.0, 1.0])
    with pytest.raises(ValidationError):
        VerblunskyCoefficients([0.5, 0.9])
    with pytest.raises(ValidationError):
        VerblunskyCoefficients([])
    with pytest.raises(ValidationError):
        VerblunskyCoefficients([np.nan, 1.0])
    v = VerblunskyCoefficients([0.6, 1j])
    assert np.allclose(v.rhos, [0.8])


def test_coefficients_are_immutable():
    v = VerblunskyCoefficients([0.1, 1.0])
    with pytest.raises(ValueError):
        v.alphas[0] = 0.5


def test_theta_factors_n2():
    l, m = build_theta_factors(VerblunskyCoefficients([0, 1]))
    assert np.allclose(l, [[0, 1], [1, 0]]) and np.allclose(m, np.eye(2))


def test_theta_factors_n3_blocks(rng):
    v = VerblunskyCoefficients.random(3, rng)
    a, rho = v.alphas, v.rhos
    l, m = build_theta_factors(v)
    xi0 = [[np.conj(a[0]), rho[0]], [rho[0], -a[0]]]
    xi1 = [[np.conj(a[1]), rho[1]], [rho[1], -a[1]]]
    assert np.allclose(l[:2, :2], xi0) and np.isclose(l[2, 2], np.conj(a[2]))
    assert np.isclose(m[0, 0], 1) and np.allclose(m[1:, 1:], xi1)


def test_theta_factors_unitary(rng):
    l, m = build_theta_factors(VerblunskyCoefficients.random(8, rng))
    assert unitarity_defect(l) < 1e-14 and unitarity_defect(m) < 1e-14


def test_build_n2(rng):
    v = VerblunskyCoefficients.random(2, rng)
    a0, a1 = v.alphas
    r0 = v.rhos[0]
    expected = [[np.conj(a0), r0 * np.conj(a1)], [r0, -a0 * np.conj(a1)]]
    assert np.abs(build_cmv(v).matrix - expected).max() < 1e-15


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_build_shift_like(n):
    c = build_cmv(VerblunskyCoefficients(np.r_[np.zeros(n - 1), 1.0]))
    assert c.matrix[1, 0] == 1
    # C_12 = rho_0 conj(alpha_1), which is 1 for n = 2
    assert c.matrix[0, 1] == (1 if n == 2 else 0)
    assert all(c.matrix[p] == 1 for p in exposed_positions(n))
    assert abs(np.linalg.det(c.matrix) - (-1) ** (n - 1)) < 1e-14
    assert check_cmv_shape(c.matrix).is_cmv_shape


def test_build_matches_closed_forms(rng):
    v = VerblunskyCoefficients.random(8, rng)
    c = build_cmv(v).matrix
    closed = np.array([[entry_closed_form(v, i, j) for j in range(8)] for i in range(8)])
    assert np.abs(c - closed).max() < 1e-14
    assert np.all(closed[~support_mask(8)] == 0)


def test_shape_report_identity():
    rep = check_cmv_shape(np.eye(4))
    assert not rep.is_cmv_shape
    assert (1, 0, "nonpositive-exposed") in rep.violations
    assert {"row": 2, "col": 1, "kind": "nonpositive-exposed"} in rep.as_dict()["violations"]


def test_shape_report_hessenberg(rng):
    q, _ = qr_positive(random_matrix(rng, 6))
    from scipy.linalg import hessenberg

    h = hessenberg(q)
    rep = check_cmv_shape(h)
    assert not rep.is_cmv_shape
    assert any(k == "nonzero-above-staircase" for _, _, k in rep.violations)


def test_shape_report_below(rng):
    m = build_cmv(VerblunskyCoefficients.random(5, rng)).matrix.copy()
    m[4, 0] = 1e-3
    rep = check_cmv_shape(m)
    assert rep.violations == ((4, 0, "nonzero-below-staircase"),)


def test_extract_round_trip(rng):
    v = VerblunskyCoefficients.random(10, rng)
    assert np.abs(extract_verblunsky(build_cmv(v).matrix).alphas - v.alphas).max() < 1e-12


def test_extract_n2_block(rng):
    a0, a1 = 0.3 - 0.4j, np.exp(0.9j)
    r0 = np.sqrt(1 - abs(a0) ** 2)
    m = np.array([[np.conj(a0), r0 * np.conj(a1)], [r0, -a0 * np.conj(a1)]])
    assert np.allclose(extract_verblunsky(m).alphas, [a0, a1], atol=1e-15)


def test_extract_shift_like():
    c = build_cmv(VerblunskyCoefficients([0, 0, 0, 1]))
    out = extract_verblunsky(c.matrix).alphas
    assert np.allclose(out, [0, 0, 0, 1])


def test_extract_errors(rng):
    m = build_cmv(VerblunskyCoefficients.random(4, rng)).matrix.copy()
    bad = m.copy()
    bad[3, 0] = 0.1
    with pytest.raises(ShapeError) as exc:
        extract_verblunsky(bad)
    assert not exc.value.report.is_cmv_shape
    dec = build_cmv(VerblunskyCoefficients([0.2, 1 - 1e-13, 0.1, 1.0]))
    # rho_1 ~ 4.5e-7 makes exposed entries 2 and 3 small but still positive
    assert extract_verblunsky(dec.matrix).n == 4
    zero = m.copy()
    zero[exposed_positions(4)[1]] = 0.0
    with pytest.raises(DecoupledError) as exc:
        extract_verblunsky(zero)
    assert exc.value.index == 1


def test_n1_convention():
    c = build_cmv(VerblunskyCoefficients([np.exp(0.4j)]))
    assert np.allclose(c.matrix, [[np.exp(-0.4j)]])
    assert np.allclose(extract_verblunsky(c.matrix).alphas, [np.exp(0.4j)])


def test_cmv_matrix_from_matrix(rng):
    v = VerblunskyCoefficients.random(5, rng)
    c = CMVMatrix.from_matrix(build_cmv(v).matrix)
    assert np.allclose(c.alphas, v.alphas)
    with pytest.raises(ValidationError):
        CMVMatrix.from_matrix(random_matrix(rng, 5))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_cmv_properties(n, seed):
    v = VerblunskyCoefficients.random(n, np.random.default_rng(seed))
    c = build_cmv(v)
    assert unitarity_defect(c.matrix) < 1e-12
    assert abs(np.linalg.det(c.matrix) - (-1) ** (n - 1) * np.conj(v.alphas[-1])) < 1e-10
    if n >= 2:
        assert check_cmv_shape(c.matrix).is_cmv_shape
        rho = v.rhos
        for k, p in enumerate(exposed_positions(n)):
            expected = rho[0] if k == 0 else rho[k - 1] * rho[k]
            assert abs(c.matrix[p] - expected) < 1e-15
    assert np.abs(extract_verblunsky(c.matrix).alphas - v.alphas).max() < 1e-12
