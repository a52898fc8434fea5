import math

import numpy as np
import pytest

from nclp import FunctionalSpec
from nclp.algebra import commutator, is_positive, operator_norm, positive_power
from nclp.errors import DominationFailed, NotCommuting, NotFaithful, NotInvariant, NotPositive
from nclp.gns import full_gram
from nclp.radon_nikodym import (
    cap_sequence,
    commutant_rn,
    dominates,
    flow_commutation_check,
    order_preserving_check,
    pt_residual,
    pt_rn,
    sakai_residual,
    sakai_rn,
    sakai_rn_newton,
    spectral_cap,
    weight_from_density,
)
from nclp.sampling import random_algebra, random_density, random_positive, random_state, random_unitary

from conftest import M2, unit

E11, E22 = unit(M2, 0, 0), unit(M2, 1, 1)
TRACE_STATE = FunctionalSpec.normalized_trace(M2)


def dominated_pair(rng, alg):
    f = random_state(alg, rng)
    # sigma = rho^(1/2) K rho^(1/2) with 0 <= K <= 1 gives psi <= phi
    k = random_positive(alg, rng)
    k = k / (operator_norm(k) * rng.uniform(1.0, 2.0))
    half = positive_power(f.density, 0.5)
    return f, FunctionalSpec(half @ k @ half)


def test_commutant_scaling(rho_state):
    res = commutant_rn(rho_state, FunctionalSpec(rho_state.density * 0.3))
    assert np.allclose(res.operator, 0.3 * np.eye(4), atol=1e-12)
    res = commutant_rn(rho_state, rho_state)
    assert np.allclose(res.operator, np.eye(4), atol=1e-12)


def test_commutant_trace_state_is_right_multiplication():
    sigma = M2.diag(0.5, 0.3) * 0.5
    g = FunctionalSpec(sigma)
    res = commutant_rn(TRACE_STATE, g)
    assert res.multiplier.allclose(sigma * 2)
    # oracle: solve G_phi X = G_psi in matrix-unit coordinates; with row-major
    # vectorization right multiplication by M is kron(I, M^T)
    x = np.linalg.solve(full_gram(TRACE_STATE), full_gram(g))
    assert np.allclose(x, np.kron(np.eye(2), (2 * sigma.blocks[0]).T), atol=1e-12)
    assert res.residual < 1e-12 and res.commutation < 1e-12


def test_commutant_random(rng):
    for _ in range(15):
        alg = random_algebra(rng, max_dim=3)
        f, g = dominated_pair(rng, alg)
        res = commutant_rn(f, g)
        assert res.residual < 1e-9
        assert res.residual_positive < 1e-9
        assert res.commutation < 1e-9
        lo, hi = res.spectrum
        assert -1e-9 <= lo and hi <= 1 + 1e-9


def test_commutant_sesquilinear_convention(rng):
    # psi(A) = <H' pi(A) xi, xi>; the A* form agrees only on self-adjoint A
    f, g = dominated_pair(rng, M2)
    res = commutant_rn(f, g)
    if not (commutator(f.density, g.density).norm() < 1e-9):
        assert res.residual_adjoint_form > 1e-6


def test_domination_required(rho_state):
    with pytest.raises(DominationFailed):
        sakai_rn(rho_state, FunctionalSpec(M2.diag(0.8, 0.1)))
    with pytest.raises(NotPositive):
        sakai_rn(rho_state, FunctionalSpec(M2.diag(0.1, -0.1)))
    with pytest.raises(NotFaithful):
        sakai_rn(FunctionalSpec(M2.diag(1, 0)), FunctionalSpec(M2.diag(0.5, 0)))
    assert dominates(rho_state, FunctionalSpec(M2.diag(0.5, 0.1)))


def test_sakai_examples(rho_state):
    h = sakai_rn(rho_state, FunctionalSpec(rho_state.density * 0.49))
    assert h.allclose(M2.identity() * 0.7)
    h = sakai_rn(rho_state, FunctionalSpec(M2.diag(0.5, 0.1)))
    assert h.allclose(M2.diag(math.sqrt(0.5 / 0.75), math.sqrt(0.1 / 0.25)))


def test_sakai_random_against_newton(rng):
    for _ in range(20):
        alg = random_algebra(rng, max_dim=3)
        f, g = dominated_pair(rng, alg)
        h = sakai_rn(f, g)
        assert sakai_residual(f, g, h) < 1e-9
        assert is_positive(h) and is_positive(alg.identity() - h)
        h2 = sakai_rn_newton(f, g, alg.identity())
        assert h2.allclose(h, atol=1e-8)


def test_pt_examples(rho_state):
    h = pt_rn(rho_state, FunctionalSpec(M2.diag(0.3, 0.2)))
    assert h.allclose(M2.diag(0.3 / 0.75, 0.2 / 0.25))
    assert pt_rn(rho_state, rho_state).allclose(M2.identity())
    h = pt_rn(rho_state, FunctionalSpec(rho_state.density * 3))
    assert h.allclose(M2.identity() * 3) and operator_norm(h) > 1


def test_pt_random(rng):
    for _ in range(20):
        alg = random_algebra(rng)
        f = random_state(alg, rng)
        # sigma is a positive function of rho, hence invariant
        sigma = f.density @ f.density * rng.uniform(0.1, 3)
        g = FunctionalSpec(sigma)
        h = pt_rn(f, g)
        assert pt_residual(f, g, h) < 1e-9
        assert commutator(h, f.density).norm() < 1e-9


def test_pt_rejects_non_invariant(rng):
    for _ in range(20):
        f = random_state(M2, rng)
        g = FunctionalSpec(random_density(M2, rng))
        if commutator(f.density, g.density).norm() > 1e-6:
            with pytest.raises(NotInvariant):
                pt_rn(f, g)


def test_weight_from_density_examples(rho_state):
    assert weight_from_density(rho_state, M2.identity()).density.allclose(rho_state.density)
    tr = FunctionalSpec.trace(M2)
    w = weight_from_density(tr, M2.diag(2, 0))
    assert w(E11) == pytest.approx(2) and w(E22) == 0
    assert not w.is_faithful
    assert weight_from_density(tr, M2.diag(2, 1)).is_faithful


def test_weight_from_density_errors(rho_state):
    with pytest.raises(NotPositive):
        weight_from_density(rho_state, M2.diag(1, -1))
    with pytest.raises(NotCommuting):
        weight_from_density(rho_state, M2.element([[1, 0.5], [0.5, 1]]))


def test_weight_from_density_keeps_infinite_part():
    f = FunctionalSpec(M2.diag(1, 0), M2.diag(0, 1))
    w = weight_from_density(f, M2.diag(3, 2))
    assert w.infinite_part.allclose(M2.diag(0, 1))
    w = weight_from_density(f, M2.diag(3, 0))
    assert w.is_bounded


def test_cap_sequence_stabilizes():
    tr = FunctionalSpec.trace(M2)
    h = M2.diag(1, 2)
    assert spectral_cap(h, 2).allclose(M2.diag(1, 0))
    devs = dict(cap_sequence(tr, h, [1, 2, 3]))
    assert devs[1] >= devs[2] > 0
    assert devs[3] == 0


def test_order_preserving(rng, rho_state):
    tests = [random_positive(M2, rng) for _ in range(20)]
    assert order_preserving_check(rho_state, M2.diag(0.5, 1), M2.diag(2, 3), tests)
    with pytest.raises(ValueError):
        order_preserving_check(rho_state, M2.diag(3, 1), M2.diag(2, 3), tests)


def test_flow_commutation_examples(rng, rho_state):
    g = FunctionalSpec(M2.diag(0.6, 0.4))
    assert tuple(flow_commutation_check(rho_state, g)) == (True, True, True)
    assert tuple(flow_commutation_check(rho_state, rho_state)) == (True, True, True)

    c, s = math.cos(0.4), math.sin(0.4)
    rot = M2.element([[c, -s], [s, c]])
    res = flow_commutation_check(rho_state, FunctionalSpec(rot @ M2.diag(0.6, 0.4) @ rot.H))
    assert tuple(res) == (False, False, False)
    assert min(res.defects) > 1e-3


def test_flow_commutation_equivalence_random(rng):
    for _ in range(10):
        alg = random_algebra(rng, max_dim=3)
        f = random_state(alg, rng)
        if rng.random() < 0.5:
            g = FunctionalSpec((f.density @ f.density) * (1 / f(f.density).real))
        else:
            u = random_unitary(alg, rng)
            g = FunctionalSpec(u @ f.density @ u.H)
        assert len(set(flow_commutation_check(f, g))) == 1
