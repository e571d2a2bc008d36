import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvlab.errors import SingularMatrixError, ValidationError
from cmvlab.flows import HierarchyHamiltonian
from cmvlab.linalg_core import (
    commutator,
    eig_unitary,
    householder_reflector,
    lq_unitary_factor,
    matrix_function,
    pairing,
    pi_a,
    project_la,
    qr_positive,
    r_map,
    unitarity_defect,
)

from conftest import random_cmv, random_matrix


def lower_real_diag(rng, n):
    x = np.tril(random_matrix(rng, n), -1)
    return x + np.diag(rng.normal(size=n))


def anti_hermitian(rng, n):
    x = random_matrix(rng, n)
    return x - x.conj().T


# reflectors ------------------------------------------------------------------


def test_reflector_canonical_tail_is_identity():
    refl = householder_reflector([1, 0, 0], 1)
    assert refl.is_identity
    assert np.array_equal(refl.apply(np.array([1, 0, 0], dtype=complex)), [1, 0, 0])


def test_reflector_phase_rotation_only():
    u = np.array([0.3 - 0.2j, 2.0 * np.exp(0.7j), 0])
    out = householder_reflector(u, 1).apply(u)
    assert np.allclose(out, [0.3 - 0.2j, 2.0, 0], atol=1e-15)


def test_reflector_random_level_two(rng):
    u = random_matrix(rng, 5)[0]
    refl = householder_reflector(u, 2)
    out = refl.apply(u)
    assert np.allclose(out[:2], u[:2], atol=1e-15)
    assert np.allclose(out[3:], 0, atol=1e-14)
    assert abs(out[2] - np.linalg.norm(u[2:])) < 1e-14
    assert abs(np.linalg.norm(out) - np.linalg.norm(u)) < 1e-13
    m = refl.matrix()
    assert unitarity_defect(m) < 1e-14
    assert np.allclose(refl.apply_adjoint(out), u, atol=1e-14)
    assert np.allclose(m[:2, :2], np.eye(2)) and np.allclose(m[:2, 2:], 0)


def test_reflector_level_out_of_range():
    with pytest.raises(ValidationError):
        householder_reflector([1, 2], 2)


# QR / LQ -----------------------------------------------------------------------


def test_qr_identity_and_unitary(rng):
    q, r = qr_positive(np.eye(4))
    assert np.allclose(q, np.eye(4)) and np.allclose(r, np.eye(4))
    u = random_cmv(rng, 5).matrix
    q, r = qr_positive(u)
    assert np.abs(q - u).max() < 1e-13 and np.abs(r - np.eye(5)).max() < 1e-13


def test_qr_random(rng):
    a = random_matrix(rng, 6)
    q, r = qr_positive(a)
    assert np.abs(a - q @ r).max() < 1e-12
    assert np.all(np.diag(r).real > 0) and np.allclose(np.diag(r).imag, 0)
    assert np.allclose(np.tril(r, -1), 0)
    assert unitarity_defect(q) < 1e-13


def test_qr_singular():
    a = np.ones((3, 3))
    with pytest.raises(SingularMatrixError):
        qr_positive(a)


def test_lq_trivial_cases(rng):
    l, q = lq_unitary_factor(np.eye(3))
    assert np.allclose(l, np.eye(3)) and np.allclose(q, np.eye(3))
    a = np.tril(random_matrix(rng, 4), -1) + np.diag(rng.uniform(0.5, 2, 4))
    l, q = lq_unitary_factor(a)
    assert np.abs(l - a).max() < 1e-13 and np.abs(q - np.eye(4)).max() < 1e-13


def test_lq_of_flow_exponential(rng):
    b = random_cmv(rng, 5).matrix
    h = HierarchyHamiltonian([0, 1])
    a = matrix_function(b, lambda z: np.exp(0.3 * z * h.fprime(z)))
    l, q = lq_unitary_factor(a)
    assert np.abs(a - l @ q.conj().T).max() < 1e-10
    assert np.allclose(np.triu(l, 1), 0) and np.all(np.diag(l).real > 0)


# eigensolver -------------------------------------------------------------------


def test_eig_diagonal():
    d = eig_unitary(np.diag([1, 1j, -1]))
    assert np.allclose(d.eigenvalues, [1, 1j, -1])
    assert np.allclose(np.abs(d.eigenvectors), np.eye(3))


def test_eig_swap():
    d = eig_unitary(np.array([[0, 1], [1, 0]]))
    assert np.allclose(d.eigenvalues, [1, -1])


def test_eig_random_cmv_residual(rng):
    u = random_cmv(rng, 8).matrix
    d = eig_unitary(u)
    v, z = d.eigenvectors, d.eigenvalues
    assert np.abs(u @ v - v * z).max() < 1e-9
    assert unitarity_defect(v) < 1e-12
    assert np.all(np.diff(np.mod(np.angle(z), 2 * np.pi)) > 0)
    # numpy is only an oracle here
    ref = np.sort(np.mod(np.angle(np.linalg.eigvals(u)), 2 * np.pi))
    assert np.abs(np.mod(np.angle(z), 2 * np.pi) - ref).max() < 1e-12


def test_eig_rejects_non_unitary(rng):
    with pytest.raises(ValidationError):
        eig_unitary(random_matrix(rng, 3))


def test_matrix_function_examples(rng):
    u = random_cmv(rng, 6).matrix
    assert np.abs(matrix_function(u, lambda z: z) - u).max() < 1e-12
    assert np.abs(matrix_function(u, np.conj) - u.conj().T).max() < 1e-12
    s = np.array([[0, 1], [1, 0]], dtype=complex)
    series = np.zeros((2, 2), dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(30):
        series += term
        term = term @ s / (k + 1)
    assert np.abs(matrix_function(s, np.exp) - series).max() < 1e-10


# l + a splitting ---------------------------------------------------------------


def test_project_la_trivial(rng):
    a = anti_hermitian(rng, 4)
    l_, a_ = project_la(a)
    assert np.allclose(l_, 0, atol=1e-15) and np.allclose(a_, a)
    x = lower_real_diag(rng, 4)
    l_, a_ = project_la(x)
    assert np.allclose(l_, x) and np.allclose(a_, 0)


def test_project_la_half_diagonal(rng):
    x = random_matrix(rng, 5)
    l_, a_ = project_la(x)
    plus = np.triu(x, 1) + 0.5 * np.diag(np.diag(x))
    assert np.array_equal(a_, plus - plus.conj().T)
    # L = X - A then L + A: equal up to one rounding per entry
    assert np.abs(l_ + a_ - x).max() <= 4 * np.finfo(float).eps * np.abs(x).max()
    assert np.allclose(np.triu(l_, 1), 0) and np.allclose(np.diag(l_).imag, 0)
    assert np.allclose(a_, -a_.conj().T)


def test_r_map(rng):
    x = lower_real_diag(rng, 4)
    assert np.allclose(r_map(x), x)
    a = anti_hermitian(rng, 4)
    assert np.allclose(r_map(a), -a)
    y = random_matrix(rng, 4)
    l_, a_ = project_la(y)
    assert np.abs(r_map(y) - (2 * l_ - y)).max() < 1e-14


def test_pairing_examples(rng):
    assert pairing(np.eye(3), np.eye(3)) == 0
    assert abs(pairing(1j * np.eye(3), np.eye(3)) - 3) < 1e-15
    x = random_matrix(rng, 4)
    assert abs(pairing(x, 1j * x.conj().T) - np.sum(np.abs(x) ** 2)) < 1e-12


def test_pairing_ad_invariant(rng):
    x, y, z = (random_matrix(rng, 4) for _ in range(3))
    assert abs(pairing(commutator(x, y), z) - pairing(x, commutator(y, z))) < 1e-11


matrices = st.integers(2, 8).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, 2**32 - 1))
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_structure_properties(arg):
    n, seed = arg
    rng = np.random.default_rng(seed)
    x, y = random_matrix(rng, n), random_matrix(rng, n)
    mcyb = commutator(r_map(x), r_map(y)) - r_map(commutator(r_map(x), y) + commutator(x, r_map(y))) + commutator(x, y)
    assert np.abs(mcyb).max() <= 1e-12 * max(1.0, np.abs(x).max() * np.abs(y).max() * n)
    assert abs(pairing(x, r_map(y)) + pairing(r_map(x), y)) < 1e-12 * n * n
    assert abs(pairing(pi_a(x), pi_a(y))) < 1e-12 * n * n
    assert abs(pairing(x - pi_a(x), y - pi_a(y))) < 1e-12 * n * n
    assert abs(pairing(x, y) - pairing(y, x)) < 1e-12 * n * n
