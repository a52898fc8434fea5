import math

import numpy as np
import pytest

from nclp import FunctionalSpec
from nclp.errors import QuadratureUnderflow
from nclp.regularize import gaussian_regularization, regularization_closed_form
from nclp.sampling import random_algebra, random_diagonal, random_element, random_state

from conftest import M2, unit

E12 = unit(M2, 0, 1)


def test_diagonal_is_fixed(rho_state):
    d = M2.diag(2, -1j)
    for n in (0.5, 1, 100):
        assert gaussian_regularization(rho_state, d, n).allclose(d, atol=1e-12)


def test_matrix_unit_damping(rho_state):
    for n, factor in ((1, 0.7397), (100, 0.9970)):
        exact = math.exp(-math.log(3) ** 2 / (4 * n))
        # the quoted figures are rounded approximations of the closed form
        assert exact == pytest.approx(factor, abs=5e-4)
        an = gaussian_regularization(rho_state, E12, n)
        assert an.allclose(E12 * exact, atol=1e-10)


def test_quadrature_matches_closed_form(rng):
    for _ in range(20):
        alg = random_algebra(rng)
        f = random_state(alg, rng)
        a = random_element(alg, rng)
        for n in (1, 10, 100):
            an = gaussian_regularization(f, a, n, 64)
            assert (an - regularization_closed_form(f, a, n)).norm() <= 1e-6


def test_shifted_quadrature_matches_closed_form(rho_state, rng):
    a = random_element(M2, rng)
    an = gaussian_regularization(rho_state, a, 2.0, y=0.7)
    assert an.allclose(regularization_closed_form(rho_state, a, 2.0, z=0.7), atol=1e-9)


def test_distance_decreases(rng):
    for _ in range(10):
        alg = random_algebra(rng)
        f = random_state(alg, rng)
        a = random_element(alg, rng)
        dist = [(gaussian_regularization(f, a, n) - a).norm() for n in (1, 10, 100, 1000)]
        assert all(x >= y for x, y in zip(dist, dist[1:]))


def test_closed_form_analytic_continuation(rho_state):
    # A_n(z) = sigma_z applied to A_n(0) on a matrix unit
    an = regularization_closed_form(rho_state, E12, 1.0, z=1j)
    assert an.allclose(E12 * math.exp(-math.log(3) ** 2 / 4) * 3.0)


def test_underflow_is_reported():
    f = FunctionalSpec(M2.diag(1 - 1e-6, 1e-6))
    with pytest.raises(QuadratureUnderflow):
        gaussian_regularization(f, E12, 0.01)
    with pytest.raises(QuadratureUnderflow):
        gaussian_regularization(f, E12, 1, quadrature_points=8)


def test_invalid_n(rho_state):
    with pytest.raises(ValueError):
        gaussian_regularization(rho_state, E12, 0)


def test_diagonal_random_is_fixed(rng):
    alg = random_algebra(rng)
    v = random_diagonal(alg, rng)
    f = FunctionalSpec(v @ v.H + alg.identity() * 0.1)
    d = random_diagonal(alg, rng)
    assert np.allclose(gaussian_regularization(f, d, 3).vector(), d.vector(), atol=1e-12)
