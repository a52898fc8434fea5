"""Randomized property suites behind the ``sweep`` command.

Each trial draws from its own generator seeded by ``(seed, suite, trial)``,
so results do not depend on scheduling and merge deterministically.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

from . import algebra as alg_mod
from .algebra import AlgebraSpec, is_positive, operator_norm, polar_decomposition, spectral_decomposition, trace
from .errors import NotInvariant
from .functionals import FunctionalSpec, cauchy_schwarz_gap, functional_eval, functional_norm
from .gns import ModularFlow, gns_construct, kms_check
from .lp import conjugate_exponent, dual_norm_witness, holder_bound, schatten, weighted_lp
from .measure import DNeighborhood, brute_force_membership, d_arithmetic_check, d_membership, minimal_epsilon
from .radon_nikodym import pt_residual, pt_rn, sakai_residual, sakai_rn, sakai_rn_newton
from .regularize import gaussian_regularization, regularization_closed_form
from .sampling import (
    random_algebra,
    random_density,
    random_diagonal,
    random_element,
    random_hermitian,
    random_positive,
    random_projection,
    random_state,
    random_unitary,
)

Trial = Callable[[np.random.Generator, AlgebraSpec | None], tuple[bool, float]]
P_VALUES = (1.0, 1.5, 2.0, 3.0, math.inf)


def _algebra(rng, fixed, max_dim=4):
    return fixed if fixed is not None else random_algebra(rng, max_dim=max_dim)


def c_star_identity(rng, fixed):
    a = random_element(_algebra(rng, fixed), rng, scale=rng.uniform(0.1, 5))
    n = operator_norm(a)
    r = abs(operator_norm(a.H @ a) - n * n)
    return r <= 1e-9 * (1 + n * n), r


def spectral_reconstruction(rng, fixed):
    a = random_hermitian(_algebra(rng, fixed), rng)
    r = (a - spectral_decomposition(a).reconstruct()).norm()
    return r <= 1e-9 * (1 + a.norm()), r


def polar(rng, fixed):
    a = random_element(_algebra(rng, fixed), rng)
    u, m = polar_decomposition(a)
    r = max((a - u @ m).norm(), (u @ u.H @ u - u).norm())
    return r <= 1e-9 * (1 + a.norm()) and is_positive(m), r


def positivity_agreement(rng, fixed):
    alg = _algebra(rng, fixed)
    kind = rng.integers(3)
    a = [random_positive, random_hermitian, random_element][kind](alg, rng)
    return is_positive(a, "spectral") == is_positive(a, "norm-distance"), 0.0


def lattice_bounds(rng, fixed):
    alg = _algebra(rng, fixed)
    p, q = random_projection(alg, rng), random_projection(alg, rng)
    m, j = alg_mod.meet(p, q), alg_mod.join(p, q)
    ok = all(is_positive(x - y) for x, y in ((p, m), (q, m), (j, p), (j, q)))
    return ok, 0.0


def trace_property(rng, fixed):
    alg = _algebra(rng, fixed)
    a, b = random_element(alg, rng), random_element(alg, rng)
    r = abs(trace(a @ b) - trace(b @ a))
    return r <= 1e-9 * (1 + a.norm() * b.norm()), r


def cauchy_schwarz(rng, fixed):
    alg = _algebra(rng, fixed)
    f = FunctionalSpec(random_positive(alg, rng))
    a, b = random_element(alg, rng), random_element(alg, rng)
    gap = cauchy_schwarz_gap(f, a, b)
    herm = abs(f(a.H @ b) - np.conj(f(b.H @ a)))
    return gap >= -1e-9 and herm <= 1e-9, max(-gap, herm, 0.0)


def norm_attainment(rng, fixed):
    alg = _algebra(rng, fixed)
    f = FunctionalSpec(random_positive(alg, rng))
    r = abs(functional_norm(f) - functional_eval(f, alg.identity()))
    return r <= 1e-9 * (1 + f.density.norm()), float(r)


def _random_exponent(rng):
    return float(rng.choice([1.0 + rng.uniform(0.05, 4.0), 2.0, 3.0, math.inf]))


def holder_pair(rng, fixed):
    alg = _algebra(rng, fixed)
    p = _random_exponent(rng)
    q = conjugate_exponent(p)
    res = holder_bound([(random_element(alg, rng), p), (random_element(alg, rng), q)])
    return res.holds, max(res.lhs - res.rhs, 0.0)


def holder_r(rng, fixed):
    alg = _algebra(rng, fixed)
    r = rng.uniform(1.0, 3.0)
    p = rng.uniform(r * 1.05, r * 6.0)
    q = 1.0 / (1.0 / r - 1.0 / p)
    res = holder_bound([(random_element(alg, rng), p), (random_element(alg, rng), q)], r=r)
    return res.holds, max(res.lhs - res.rhs, 0.0)


def holder_three(rng, fixed):
    alg = _algebra(rng, fixed)
    w = rng.dirichlet([1.0, 1.0, 1.0])
    exps = list(1.0 / w)
    exps[2] = 1.0 / (1.0 - 1.0 / exps[0] - 1.0 / exps[1])
    res = holder_bound([(random_element(alg, rng), p) for p in exps])
    return res.holds, max(res.lhs - res.rhs, 0.0)


def minkowski(rng, fixed):
    alg = _algebra(rng, fixed)
    a, b = random_element(alg, rng), random_element(alg, rng)
    worst = max(schatten(a + b, p) - schatten(a, p) - schatten(b, p) for p in P_VALUES)
    return worst <= 1e-9, max(worst, 0.0)


def dual_witness(rng, fixed):
    alg = _algebra(rng, fixed)
    a = random_element(alg, rng)
    p = float(rng.uniform(1.0, 5.0))
    b, pairing = dual_norm_witness(a, p)
    norm = schatten(a, p)
    r = max(abs(schatten(b, conjugate_exponent(p)) - 1.0), abs(pairing - norm) / (1 + norm))
    return r <= 1e-9, r


def commutative_reduction(rng, fixed):
    alg = _algebra(rng, fixed)
    d = random_diagonal(alg, rng)
    vals = np.concatenate([np.diag(b) for b in d.blocks])
    weights = np.concatenate([[c] * n for c, n in zip(alg.trace_weights, alg.block_dims)])
    r = max(abs(schatten(d, p) - weighted_lp(vals, weights, p)) for p in P_VALUES)
    return r <= 1e-12, r


def unitary_invariance(rng, fixed):
    alg = _algebra(rng, fixed)
    a = random_element(alg, rng)
    u, v = random_unitary(alg, rng), random_unitary(alg, rng)
    lam = complex(rng.normal(), rng.normal())
    r = max(max(abs(schatten(u @ a @ v, p) - schatten(a, p)),
                abs(schatten(a * lam, p) - abs(lam) * schatten(a, p))) for p in P_VALUES)
    return r <= 1e-9 * (1 + abs(lam)) * (1 + a.norm()), r


def d_bruteforce(rng, fixed):
    alg = fixed if fixed is not None and sum(fixed.block_dims) <= 6 else AlgebraSpec(
        [int(n) for n in rng.integers(1, 4, size=rng.integers(1, 3))])
    a = random_element(alg, rng, scale=2.0)
    nb = DNeighborhood(float(rng.uniform(0.05, 2.0)), float(rng.uniform(0.0, 3.0)), alg)
    return d_membership(a, nb)[0] == brute_force_membership(a, nb), 0.0


def d_arithmetic(rng, fixed):
    alg = _algebra(rng, fixed)
    a, b = random_element(alg, rng, 2.0), random_element(alg, rng, 2.0)
    total = sum(c * n for c, n in zip(alg.trace_weights, alg.block_dims))
    d1, d2 = rng.uniform(0, total, size=2)
    e1 = max(minimal_epsilon(a, d1), 1e-6) * (1 + 1e-6)
    e2 = max(minimal_epsilon(b, d2), 1e-6) * (1 + 1e-6)
    s_ok, p_ok = d_arithmetic_check(a, b, e1, d1, e2, d2)
    return s_ok and p_ok, 0.0


def adjoint_symmetry(rng, fixed):
    alg = _algebra(rng, fixed)
    a = random_element(alg, rng, 2.0)
    nb = DNeighborhood(float(rng.uniform(0.05, 2.0)), float(rng.uniform(0.0, 3.0)), alg)
    return d_membership(a, nb)[0] == d_membership(a.H, nb)[0], 0.0


def gns_fidelity(rng, fixed):
    alg = _algebra(rng, fixed)
    f = random_state(alg, rng, faithful=bool(rng.integers(2)))
    g = gns_construct(f, rng)
    r = g.residuals
    ok = r["fidelity"] <= 1e-10 * (1 + f.density.norm()) and r["homomorphism"] <= 1e-9 and r["cyclic"]
    return ok, max(r["fidelity"], r["homomorphism"])


def modular_invariance(rng, fixed):
    alg = _algebra(rng, fixed)
    f = random_state(alg, rng)
    flow = ModularFlow(f)
    a = random_element(alg, rng)
    s, t = rng.uniform(-5, 5, size=2)
    r = max(abs(f(flow(a, t)) - f(a)), (flow(flow(a, t), s) - flow(a, s + t)).norm())
    return r <= 1e-9, float(r)


def kms(rng, fixed):
    alg = _algebra(rng, fixed)
    f = random_state(alg, rng)
    a, b = random_element(alg, rng), random_element(alg, rng)
    res, ok = kms_check(f, a, b, [-2, -1, 0, 1, 2])
    return ok, res


def _dominated_pair(rng, alg):
    f = random_state(alg, rng)
    x = random_density(alg, rng)
    # scale a random density until it fits under phi
    lam = float(min(np.linalg.eigvalsh(fb).min() / np.linalg.eigvalsh(xb).max()
                    for fb, xb in zip(f.density.blocks, x.blocks)))
    g = FunctionalSpec(x * (lam * float(rng.uniform(0.1, 0.99))))
    return f, g


def sakai(rng, fixed):
    alg = _algebra(rng, fixed)
    f, g = _dominated_pair(rng, alg)
    h = sakai_rn(f, g)
    newton = sakai_rn_newton(f, g, h + random_hermitian(alg, rng) * 1e-3)
    r = max(sakai_residual(f, g, h), (newton - h).norm())
    ok = r <= 1e-8 and is_positive(h) and operator_norm(h) <= 1 + 1e-9
    return ok, r


def pedersen_takesaki(rng, fixed):
    alg = _algebra(rng, fixed)
    f = random_state(alg, rng)
    u = random_unitary(alg, rng)
    rho = f.density
    # a density commuting with rho: a function of rho plus a scalar
    w = float(rng.uniform(0.1, 3.0))
    sigma = alg_mod.hermitian_apply(rho, lambda x: x ** w) + alg.identity() * float(rng.uniform(0, 1))
    g = FunctionalSpec(sigma)
    h = pt_rn(f, g)
    r = max(pt_residual(f, g, h), (h @ rho - rho @ h).norm())
    bad = FunctionalSpec(u @ sigma @ u.H)
    raised = False
    if (bad.density @ rho - rho @ bad.density).norm() > 1e-6:
        try:
            pt_rn(f, bad)
        except NotInvariant:
            raised = True
    else:
        raised = True
    return r <= 1e-8 and raised, r


def regularization(rng, fixed):
    alg = _algebra(rng, fixed)
    f = random_state(alg, rng)
    a = random_element(alg, rng)
    n = float(10 ** rng.uniform(0, 3))
    r = (gaussian_regularization(f, a, n) - regularization_closed_form(f, a, n)).norm()
    return r <= 1e-6, r


SUITES: dict[str, Trial] = {
    "c_star_identity": c_star_identity,
    "spectral_reconstruction": spectral_reconstruction,
    "polar": polar,
    "positivity_agreement": positivity_agreement,
    "lattice_bounds": lattice_bounds,
    "trace_property": trace_property,
    "cauchy_schwarz": cauchy_schwarz,
    "norm_attainment": norm_attainment,
    "holder_pair": holder_pair,
    "holder_r": holder_r,
    "holder_three": holder_three,
    "minkowski": minkowski,
    "dual_witness": dual_witness,
    "commutative_reduction": commutative_reduction,
    "unitary_invariance": unitary_invariance,
    "d_bruteforce": d_bruteforce,
    "d_arithmetic": d_arithmetic,
    "adjoint_symmetry": adjoint_symmetry,
    "gns_fidelity": gns_fidelity,
    "modular_invariance": modular_invariance,
    "kms": kms,
    "sakai": sakai,
    "pedersen_takesaki": pedersen_takesaki,
    "regularization": regularization,
}


def _run_trial(args) -> tuple[bool, float, str | None]:
    name, seed, index, fixed = args
    rng = np.random.default_rng([seed, list(SUITES).index(name), index])
    try:
        ok, resid = SUITES[name](rng, fixed)
        return bool(ok), float(resid), None
    except Exception as exc:  # a crashing trial is a failed trial, reported by name
        return False, math.nan, type(exc).__name__


def run_sweep(seed: int = 0, trials: int = 100, suites=None, fixed: AlgebraSpec | None = None,
              workers: int = 1) -> dict:
    names = list(SUITES) if suites is None else list(suites)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites: {', '.join(unknown)}")
    jobs = [(name, seed, i, fixed) for name in names for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_trial, jobs, chunksize=16))
    else:
        results = [_run_trial(job) for job in jobs]
    report = {}
    for k, name in enumerate(names):
        chunk = results[k * trials:(k + 1) * trials]
        failures = [i for i, (ok, _, _) in enumerate(chunk) if not ok]
        resid = [r for _, r, _ in chunk if not math.isnan(r)]
        report[name] = {
            "trials": trials,
            "failures": len(failures),
            "first_failures": failures[:5],
            "errors": sorted({e for _, _, e in chunk if e}),
            "max_residual": max(resid, default=0.0),
            "pass": not failures,
        }
    return report
