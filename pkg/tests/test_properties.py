"""Hypothesis-driven invariants over small random algebras."""

import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nclp import AlgebraSpec, Element, FunctionalSpec
from nclp.algebra import is_positive, operator_norm, polar_decomposition, positive_power
from nclp.gns import kms_check
from nclp.lp import conjugate_exponent, dual_norm_witness, holder_bound, minkowski_gap, schatten
from nclp.measure import DNeighborhood, adjoint_symmetry_check, brute_force_membership, d_membership
from nclp.radon_nikodym import sakai_residual, sakai_rn

settings.register_profile("nclp", max_examples=40, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("nclp")

ENTRY = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
EXPONENT = st.one_of(st.floats(1, 8), st.just(math.inf))


@st.composite
def algebras(draw, max_dim=3):
    dims = draw(st.lists(st.integers(1, max_dim), min_size=1, max_size=3))
    weights = draw(st.lists(st.floats(0.25, 3), min_size=len(dims), max_size=len(dims)))
    return AlgebraSpec(dims, weights)


@st.composite
def elements(draw, alg):
    blocks = []
    for n in alg.block_dims:
        re = draw(arrays(np.float64, (n, n), elements=ENTRY))
        im = draw(arrays(np.float64, (n, n), elements=ENTRY))
        blocks.append(re + 1j * im)
    return Element(alg, blocks)


@st.composite
def algebra_and(draw, count, max_dim=3):
    alg = draw(algebras(max_dim))
    return alg, [draw(elements(alg)) for _ in range(count)]


@st.composite
def faithful_states(draw, alg):
    x = draw(elements(alg))
    rho = x.H @ x + alg.identity() * draw(st.floats(0.05, 1))
    total = sum(c * np.trace(b).real for c, b in zip(alg.trace_weights, rho.blocks))
    return FunctionalSpec(rho / total)


@given(algebra_and(2), EXPONENT)
def test_holder_pair(data, p):
    _, (a, b) = data
    assert holder_bound([(a, p), (b, conjugate_exponent(p))]).holds


@given(algebra_and(3), st.floats(1, 6), st.floats(1, 6))
def test_holder_three_factors(data, p1, p2):
    _, (a, b, c) = data
    rest = 1 - 1 / p1 - 1 / p2
    assume(rest > 1e-3)
    assert holder_bound([(a, p1), (b, p2), (c, 1 / rest)]).holds


@given(algebra_and(2), EXPONENT)
def test_minkowski(data, p):
    _, (a, b) = data
    assert minkowski_gap(a, b, p) >= -1e-9 * (1 + schatten(a + b, p))


@given(algebra_and(1), st.floats(1, 8))
def test_dual_witness(data, p):
    _, (a,) = data
    assume(operator_norm(a) > 1e-6)
    b, pairing = dual_norm_witness(a, p)
    norm = schatten(a, p)
    assert abs(schatten(b, conjugate_exponent(p)) - 1) <= 1e-9
    assert abs(pairing - norm) <= 1e-9 * (1 + norm)


@given(algebra_and(1))
def test_c_star_identity(data):
    _, (a,) = data
    assert math.isclose(operator_norm(a.H @ a), operator_norm(a) ** 2, rel_tol=1e-12, abs_tol=1e-12)


@given(algebra_and(1))
def test_polar(data):
    _, (a,) = data
    u, m = polar_decomposition(a)
    assert (u @ m).allclose(a, atol=1e-10)
    assert is_positive(m)


@given(algebra_and(1, max_dim=2), st.floats(0.05, 4), st.floats(0, 4))
def test_d_membership_against_search(data, eps, delta):
    alg, (a,) = data
    n = DNeighborhood(eps, delta, alg)
    assert d_membership(a, n)[0] == brute_force_membership(a, n)
    assert adjoint_symmetry_check(a, n)


@given(st.data())
def test_kms(data):
    alg = data.draw(algebras())
    f = data.draw(faithful_states(alg))
    a, b = data.draw(elements(alg)), data.draw(elements(alg))
    resid, _ = kms_check(f, a, b, [-2, -1, 0, 1, 2])
    assert resid <= 1e-8 * (1 + operator_norm(a) * operator_norm(b))


@given(st.data())
def test_sakai(data):
    alg = data.draw(algebras())
    f = data.draw(faithful_states(alg))
    y = data.draw(elements(alg))
    k = y.H @ y
    assume(operator_norm(k) > 1e-6)
    half = positive_power(f.density, 0.5)
    g = FunctionalSpec(half @ (k / (operator_norm(k) * 1.01)) @ half)
    h = sakai_rn(f, g)
    assert sakai_residual(f, g, h) <= 1e-8
