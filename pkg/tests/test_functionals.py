import numpy as np
import pytest

from nclp import AlgebraSpec, FunctionalSpec
from nclp.algebra import operator_norm
from nclp.errors import InvariantError, PreconditionFailed, UndefinedEvaluation, UnboundedWeight
from nclp.functionals import (
    INF,
    balanced_weight,
    cauchy_schwarz_gap,
    corner_embed,
    dominated_bound_check,
    functional_eval,
    functional_norm,
    functional_polar,
    is_infinite,
    polar_residual,
    trace_eval,
    weight_domains,
)
from nclp.sampling import random_algebra, random_density, random_element, random_state

from conftest import M2, unit

E11, E12, E21, E22 = unit(M2, 0, 0), unit(M2, 0, 1), unit(M2, 1, 0), unit(M2, 1, 1)
HALF_INF = FunctionalSpec(M2.diag(1, 0), M2.diag(0, 1))


def test_infinity_marker():
    assert INF * 0 == 0
    assert INF * 2.5 is INF
    assert INF + 1 is INF
    assert is_infinite(INF) and not is_infinite(1e300)
    with pytest.raises(UndefinedEvaluation):
        INF * -1


def test_trace_eval_examples():
    alg = AlgebraSpec([2, 3], [1, 2])
    assert trace_eval(alg, alg.identity()) == pytest.approx(1 * 2 + 2 * 3)
    assert trace_eval(M2, E12) == 0
    assert trace_eval(M2, E12 @ E21) == pytest.approx(1)


def test_functional_eval_examples(rho_state):
    assert functional_eval(rho_state, E11) == pytest.approx(0.75)
    assert functional_eval(rho_state, M2.zeros()) == 0
    assert functional_eval(HALF_INF, M2.zeros()) == 0
    assert functional_eval(HALF_INF, M2.identity()) is INF
    # finite on the corner P_inf^perp M P_inf^perp
    assert functional_eval(HALF_INF, E11) == pytest.approx(1)


def test_functional_eval_undefined_off_cone():
    with pytest.raises(UndefinedEvaluation):
        functional_eval(HALF_INF, E12)


def test_functional_spec_validation():
    with pytest.raises(InvariantError) as exc:
        FunctionalSpec(M2.diag(1, 0), M2.diag(0.5, 0))
    assert exc.value.invariant == "infinite_part_projection"
    with pytest.raises(InvariantError) as exc:
        FunctionalSpec(M2.diag(1, 1), M2.diag(0, 1))
    assert exc.value.invariant == "density_orthogonal"


def test_classification_flags(rho_state):
    assert rho_state.is_state and rho_state.is_faithful and rho_state.is_positive_functional
    assert not rho_state.is_trace_compatible
    tr = FunctionalSpec.trace(M2)
    assert tr.is_trace_compatible and not tr.is_state
    assert FunctionalSpec.normalized_trace(M2).is_state
    assert not HALF_INF.is_bounded and not HALF_INF.is_state
    assert not FunctionalSpec(E12).is_positive_functional
    with pytest.raises(UnboundedWeight):
        HALF_INF.require_bounded()


def test_functional_norm_examples(rho_state):
    assert functional_norm(rho_state) == pytest.approx(1.0)
    assert functional_norm(rho_state) == pytest.approx(rho_state(M2.identity()).real)
    assert functional_norm(FunctionalSpec(E12)) == pytest.approx(1.0)
    assert functional_norm(FunctionalSpec(M2.zeros())) == 0


def test_functional_norm_is_a_supremum(rng):
    # |phi(A)| <= ||phi|| ||A|| on random A, with equality at A = U*
    for _ in range(20):
        alg = random_algebra(rng)
        f = FunctionalSpec(random_element(alg, rng))
        n = functional_norm(f)
        for _ in range(5):
            a = random_element(alg, rng)
            assert abs(f(a)) <= n * operator_norm(a) + 1e-9
        u, _ = functional_polar(f)
        assert abs(f(u.H)) == pytest.approx(n, rel=1e-10)


def test_weight_domains_examples():
    d = weight_domains(HALF_INF)
    assert d.dims["N_phi"] == 2 and d.dims["M_phi"] == 1
    assert all(d.checks.values())
    # N_phi is the set of matrices with vanishing second column
    for b in d.n_phi_basis:
        assert np.allclose(b.blocks[0][:, 1], 0)

    d = weight_domains(FunctionalSpec(M2.diag(0.3, 0.7)))
    assert d.dims["N_phi"] == 4 and d.dims["null_ideal"] == 0

    d = weight_domains(FunctionalSpec(M2.diag(1, 0)))
    assert d.dims["null_ideal"] == 2
    for b in d.null_ideal_basis:
        assert np.allclose(b.blocks[0][:, 0], 0)


def test_functional_polar_examples():
    f = FunctionalSpec(E12)
    u, mod = functional_polar(f)
    assert u.allclose(E12)
    assert mod.density.allclose(M2.diag(0, 1))
    for e in M2.matrix_units():
        # phi(A) = tau(F A) = A_21
        assert f(e) == pytest.approx(e.blocks[0][1, 0])
        assert f(e) == pytest.approx(mod(e @ u))

    f = FunctionalSpec(M2.diag(0.2, 0.8))
    u, mod = functional_polar(f)
    assert u.allclose(M2.identity()) and mod.density.allclose(f.density)

    u, mod = functional_polar(FunctionalSpec(-M2.diag(1, 0)))
    assert u.allclose(-E11) and mod.density.allclose(M2.diag(1, 0))


def test_functional_polar_random(rng):
    for _ in range(30):
        alg = random_algebra(rng)
        f = FunctionalSpec(random_element(alg, rng))
        u, mod = functional_polar(f)
        assert polar_residual(f, u, mod) < 1e-10
        assert functional_norm(f) == pytest.approx(mod(alg.identity()).real, rel=1e-10)


def test_dominated_bound_examples():
    f = FunctionalSpec(M2.diag(0.5, 0.5))
    assert dominated_bound_check(f, M2.identity())
    assert dominated_bound_check(f, M2.diag(0.5, 2))
    assert dominated_bound_check(f, M2.zeros())


def test_dominated_bound_precondition():
    f = FunctionalSpec(M2.diag(0.75, 0.25))
    with pytest.raises(PreconditionFailed):
        dominated_bound_check(f, E12 + E21)


def test_balanced_weight_examples(rng):
    tr = FunctionalSpec.trace(M2)
    theta = balanced_weight(tr, tr)
    assert theta(theta.algebra.identity()) == pytest.approx(4)

    g = FunctionalSpec(M2.diag(1, 0))
    assert tr.is_faithful and not balanced_weight(tr, g).is_faithful
    for _ in range(10):
        a = random_element(M2, rng)
        assert theta(corner_embed(a, 0, 0)) == pytest.approx(tr(a))
        assert balanced_weight(tr, g)(corner_embed(a, 1, 1)) == pytest.approx(g(a))


def test_cauchy_schwarz(rng):
    for _ in range(30):
        alg = random_algebra(rng)
        f = random_state(alg, rng, faithful=rng.random() < 0.5)
        a, b = random_element(alg, rng), random_element(alg, rng)
        assert cauchy_schwarz_gap(f, a, b) >= -1e-12


def test_random_density_is_normalized(rng):
    for _ in range(10):
        alg = random_algebra(rng)
        rho = random_density(alg, rng, faithful=False)
        assert trace_eval(alg, rho).real == pytest.approx(1.0)
