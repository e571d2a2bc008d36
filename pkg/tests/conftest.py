import numpy as np
import pytest

from cmvlab.acceptance import separated_measure
from cmvlab.cmv import VerblunskyCoefficients, build_cmv


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_cmv(rng, n):
    return build_cmv(VerblunskyCoefficients.random(n, rng))


def separated_coefficients(rng, n, min_gap=0.3):
    from cmvlab.spectral import verblunsky_of_measure

    return verblunsky_of_measure(separated_measure(n, rng, min_gap))
