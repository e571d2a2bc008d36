import json

import numpy as np
import pytest

from cmvlab import io
from cmvlab.cmv import VerblunskyCoefficients, build_cmv
from cmvlab.errors import FormatError, ValidationError
from cmvlab.flows import HierarchyHamiltonian, flow_trajectory
from cmvlab.spectral import measure_of

from conftest import random_cmv, random_matrix


def roundtrip(d):
    return json.loads(io.dumps(d))


def test_complex_roundtrip():
    for z in (0j, 1 + 2j, -1e-300 + 3e200j):
        assert io.complex_from_json(roundtrip(io.complex_to_json(z))) == z
    with pytest.raises(ValidationError):
        io.complex_from_json([1.0])
    with pytest.raises(ValidationError):
        io.complex_from_json("1+2j")


def test_matrix_roundtrip(rng):
    m = random_matrix(rng, 3)
    assert np.array_equal(io.matrix_from_json(roundtrip(io.matrix_to_json(m))), m)
    bad = io.matrix_to_json(m)
    bad["entries"].pop()
    with pytest.raises(ValidationError):
        io.matrix_from_json(bad)
    with pytest.raises(ValidationError):
        io.matrix_from_json({"rows": 2})


def test_coefficients_and_cmv_roundtrip(rng):
    c = random_cmv(rng, 5)
    v = io.coefficients_from_json(roundtrip(io.coefficients_to_json(c.coefficients)))
    assert np.array_equal(v.alphas, c.alphas)
    d = roundtrip(io.cmv_to_json(c))
    back = io.cmv_from_json(d)
    assert np.array_equal(back.matrix, c.matrix)
    assert np.abs(io.cmv_from_json({"entries": d["entries"], "rows": 5, "cols": 5}).alphas - c.alphas).max() < 1e-12
    with pytest.raises(ValidationError):
        io.cmv_from_json({"something": 1})
    with pytest.raises(ValidationError):
        io.coefficients_from_json({"alphas": [[2.0, 0.0]]})


def test_measure_roundtrip(rng):
    m = measure_of(random_cmv(rng, 4))
    back = io.measure_from_json(roundtrip(io.measure_to_json(m)))
    assert np.array_equal(back.thetas, m.thetas) and np.array_equal(back.masses, m.masses)
    with pytest.raises(ValidationError):
        io.measure_from_json({"atoms": [{"theta": 0.0}]})


def test_read_json_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "alphas": [1, 2\n')
    with pytest.raises(FormatError, match="line 3"):
        io.read_json(p)
    with pytest.raises(FormatError):
        io.read_json(tmp_path / "missing.json")
    p.write_text("[1, 2]")
    with pytest.raises(ValidationError):
        io.read_json(p)


def test_trajectory_csv_roundtrip(rng):
    c = build_cmv(VerblunskyCoefficients.random(3, rng))
    tr = flow_trajectory(c, HierarchyHamiltonian([0, 1]), np.linspace(0, 1, 4), "measure")
    header, data = io.read_trajectory_csv(io.trajectory_csv(tr))
    assert header == ["t", "re_alpha_0", "im_alpha_0", "re_alpha_1", "im_alpha_1", "re_alpha_2", "im_alpha_2", "eig_drift", "det_drift"]
    assert np.array_equal(data[:, 0], tr.times)
    alphas = data[:, 1:7:2] + 1j * data[:, 2:7:2]
    assert np.array_equal(alphas, np.array([s.alphas for s in tr.states]))
    assert np.array_equal(data[:, -2], tr.eig_drift)
