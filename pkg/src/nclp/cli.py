"""``nclp`` command-line interface.

Every subcommand reads a manifest, runs one check and prints a JSON report.
Exit status: 0 when every check passes, 1 when a check fails or a
mathematical hypothesis is violated, 2 on input or usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import algebra as core
from .errors import InputError, NclpError, SchemaError, UnknownCommand
from .functionals import (
    FunctionalSpec,
    functional_norm,
    functional_polar,
    polar_residual,
    weight_domains,
)
from .gns import (
    ModularFlow,
    centralizer,
    gns_construct,
    kms_check,
    modular_flow,
)
from .io import AlgebraSpec, Manifest, element_to_json, load_manifest
from .lp import (
    conjugate_exponent,
    dual_norm_witness,
    holder_bound,
    modulus_power_trace,
    schatten,
)
from .measure import DNeighborhood, brute_force_membership, d_membership, minimal_epsilon
from .radon_nikodym import (
    commutant_rn,
    dominates,
    flow_commutation_check,
    pt_residual,
    pt_rn,
    sakai_residual,
    sakai_rn,
)
from .regularize import gaussian_regularization, regularization_closed_form
from .sweep import run_sweep

COMMANDS: dict[str, tuple] = {}


def command(name: str, theorem: str, tol: float):
    def register(fn):
        COMMANDS[name] = (fn, theorem, tol)
        return fn
    return register


def _jsonable(x):
    if isinstance(x, core.Element):
        return element_to_json(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _pick(table: dict, name: str, kind: str):
    if name in table:
        return table[name]
    raise SchemaError(f"/{kind}s/{name}", f"no {kind} named {name!r} in the manifest")


class Context:
    def __init__(self, manifest: Manifest | None, args: argparse.Namespace, tol: float):
        self.manifest = manifest
        self.args = args
        self.tol = tol

    def _require(self) -> Manifest:
        if self.manifest is None:
            raise InputError("this command needs --manifest")
        return self.manifest

    def element(self, which: str = "a") -> core.Element:
        return _pick(self._require().elements, getattr(self.args, which), "element")

    def functional(self, which: str = "phi") -> FunctionalSpec:
        return _pick(self._require().functionals, getattr(self.args, which), "functional")

    def need(self, flag: str):
        value = getattr(self.args, flag)
        if value is None:
            raise InputError(f"--{flag.replace('_', '-')} is required for this command")
        return value


@command("norm", "L_p norm tau(|A|^p)^(1/p)", 1e-9)
def _norm(ctx: Context):
    a, p = ctx.element(), ctx.need("p")
    value = schatten(a, p)
    if math.isinf(p):
        check = core.operator_norm(a)
    else:
        check = modulus_power_trace(a, p) ** (1.0 / p)
    resid = abs(value - check)
    return {"p": p, "value": value, "cross_check_residual": resid}, resid <= ctx.tol * (1 + value)


@command("holder", "Hoelder inequality ||A_1...A_n||_r <= prod ||A_i||_{p_i}", 1e-9)
def _holder(ctx: Context):
    r = ctx.args.r if ctx.args.r is not None else 1.0
    if ctx.args.factor:
        factors = []
        for spec in ctx.args.factor:
            name, _, exp = spec.rpartition(":")
            factors.append((_pick(ctx._require().elements, name, "element"), float(exp)))
    else:
        p = ctx.need("p")
        q = ctx.args.q if ctx.args.q is not None else (
            conjugate_exponent(p) if r == 1.0 else 1.0 / (1.0 / r - 1.0 / p))
        factors = [(ctx.element("a"), p), (ctx.element("b"), q)]
    res = holder_bound(factors, r=r, tol=ctx.tol)
    return {"r": r, "exponents": [p for _, p in factors], "lhs": res.lhs, "rhs": res.rhs}, res.holds


@command("minkowski", "Minkowski inequality and the dual supremum formula", 1e-9)
def _minkowski(ctx: Context):
    a, b, p = ctx.element("a"), ctx.element("b"), ctx.need("p")
    lhs, rhs = schatten(a + b, p), schatten(a, p) + schatten(b, p)
    out = {"p": p, "lhs": lhs, "rhs": rhs}
    ok = lhs <= rhs + ctx.tol * (1 + rhs)
    if not math.isinf(p) and (a + b).norm() > 0:
        _, pairing = dual_norm_witness(a + b, p)
        out["dual_sup_residual"] = abs(pairing - lhs)
        ok &= out["dual_sup_residual"] <= ctx.tol * (1 + lhs)
    return out, ok


@command("dual-witness", "norming element B = |A|^(p-1) u* / ||A||_p^(p-1)", 1e-9)
def _dual_witness(ctx: Context):
    a, p = ctx.element(), ctx.need("p")
    b, pairing = dual_norm_witness(a, p)
    norm = schatten(a, p)
    q_norm = schatten(b, conjugate_exponent(p))
    ok = abs(q_norm - 1) <= ctx.tol and abs(pairing - norm) <= ctx.tol * (1 + norm)
    return {"p": p, "witness": b, "pairing": pairing, "lp_norm": norm, "witness_q_norm": q_norm}, ok


@command("d-membership", "A in D(eps, delta) iff tau(E_(eps,inf)(|A|)) <= delta", 0.0)
def _d_membership(ctx: Context):
    a = ctx.element()
    nb = DNeighborhood(ctx.need("epsilon"), ctx.need("delta"), a.algebra)
    member, witness = d_membership(a, nb)
    adjoint = d_membership(a.H, nb)[0]
    brute = brute_force_membership(a, nb) if sum(a.algebra.block_dims) <= 8 else None
    ok = member == adjoint and (brute is None or brute == member)
    return {"member": member, "witness": witness, "adjoint_member": adjoint, "brute_force": brute}, ok


@command("min-epsilon", "distribution function lambda -> tau(E_(lambda,inf)(|A|))", 1e-9)
def _min_epsilon(ctx: Context):
    a, delta = ctx.element(), ctx.need("delta")
    eps = minimal_epsilon(a, delta)
    slack = 10 * core.rel_tol(a.norm(), ctx.tol)
    attained = eps == 0.0 or d_membership(a, DNeighborhood(eps, delta, a.algebra))[0]
    sharp = eps - slack <= 0 or not d_membership(a, DNeighborhood(eps - slack, delta, a.algebra))[0]
    return {"delta": delta, "epsilon": eps, "attained": attained, "sharp": sharp}, attained and sharp


@command("gns", "GNS representation omega(A) = <pi(A) xi, xi>", 1e-10)
def _gns(ctx: Context):
    f = ctx.functional()
    g = gns_construct(f, np.random.default_rng(ctx.args.seed))
    r = g.residuals
    ok = (r["fidelity"] <= ctx.tol * (1 + f.density.norm()) and r["homomorphism"] <= 1e-9 and r["cyclic"])
    return {"dim": g.dim, "residuals": r, "cyclic_vector": list(g.cyclic_vector)}, ok


def _times(ctx: Context, default):
    return list(ctx.args.t) if ctx.args.t else list(default)


@command("modular-flow", "modular automorphism group sigma_t(A) = rho^(-it) A rho^(it)", 1e-9)
def _modular_flow(ctx: Context):
    f, a = ctx.functional(), ctx.element()
    ts = _times(ctx, [0.0, 1.0])
    flowed = [modular_flow(f, a, t) for t in ts]
    invariance = max(abs(f(x) - f(a)) for x in flowed)
    flow = ModularFlow(f)
    group = max((flow(flow(a, s), t) - flow(a, s + t)).norm() for s in ts for t in ts)
    ok = invariance <= ctx.tol and group <= ctx.tol
    return {"t": ts, "flowed": flowed, "invariance_residual": invariance, "group_law_residual": group}, ok


@command("kms", "modular (KMS) condition on the strip 0 < Im z < 1", 1e-8)
def _kms(ctx: Context):
    f, a, b = ctx.functional(), ctx.element("a"), ctx.element("b")
    ts = _times(ctx, [-2.0, -1.0, 0.0, 1.0, 2.0])
    resid, ok = kms_check(f, a, b, ts, tol=ctx.tol)
    return {"t": ts, "max_residual": resid}, ok


@command("centralizer", "centralizer: phi(AB) = phi(BA) for all B", 1e-9)
def _centralizer(ctx: Context):
    data = centralizer(ctx.functional(), np.random.default_rng(ctx.args.seed), tol=ctx.tol)
    return {"dimension": data.dimension, "basis": data.basis}, True


@command("rn-sakai", "Sakai Radon-Nikodym theorem psi = phi(H . H)", 1e-8)
def _rn_sakai(ctx: Context):
    f, g = ctx.functional("phi"), ctx.functional("psi")
    h = sakai_rn(f, g)
    resid = sakai_residual(f, g, h)
    w = np.concatenate([np.linalg.eigvalsh(b) for b in h.blocks])
    ok = resid <= ctx.tol and w.min() >= -1e-9 and w.max() <= 1 + 1e-9
    return {"H": h, "residual": resid, "spectrum": [float(w.min()), float(w.max())]}, ok


@command("rn-pt", "Pedersen-Takesaki Radon-Nikodym theorem psi = phi(H .)", 1e-8)
def _rn_pt(ctx: Context):
    f, g = ctx.functional("phi"), ctx.functional("psi")
    h = pt_rn(f, g)
    resid = pt_residual(f, g, h)
    comm = core.commutator(h, f.density).norm()
    bounded = dominates(f, g)
    ok = resid <= ctx.tol and comm <= 1e-9 and (not bounded or h.norm() <= 1 + 1e-9)
    return {"H": h, "residual": resid, "commutator": comm, "norm": h.norm(), "dominated": bounded}, ok


@command("rn-commutant", "commutant Radon-Nikodym: psi(A) = <H' pi(A) xi, xi>", 1e-8)
def _rn_commutant(ctx: Context):
    f, g = ctx.functional("phi"), ctx.functional("psi")
    res = commutant_rn(f, g)
    lo, hi = res.spectrum
    ok = res.residual <= ctx.tol and res.commutation <= 1e-9 and lo >= -1e-9 and hi <= 1 + 1e-9
    return {"multiplier": res.multiplier, "residual": res.residual,
            "residual_adjoint_form": res.residual_adjoint_form, "residual_positive": res.residual_positive,
            "commutation": res.commutation, "spectrum": [lo, hi]}, ok


@command("polar-functional", "polar decomposition of functionals phi = psi(. U)", 1e-9)
def _polar_functional(ctx: Context):
    f = ctx.functional()
    u, mod = functional_polar(f)
    resid = polar_residual(f, u, mod)
    norm_gap = abs(functional_norm(f) - mod(mod.algebra.identity()))
    ok = resid <= ctx.tol * (1 + f.density.norm()) and norm_gap <= ctx.tol * (1 + f.density.norm())
    return {"U": u, "modulus_density": mod.density, "residual": resid, "norm_gap": norm_gap}, ok


@command("regularize", "Gaussian smoothing along the modular flow", 1e-6)
def _regularize(ctx: Context):
    f, a = ctx.functional(), ctx.element()
    n = ctx.need("n")
    an = gaussian_regularization(f, a, n, ctx.args.points, tol=ctx.tol)
    resid = (an - regularization_closed_form(f, a, n)).norm()
    return {"n": n, "points": ctx.args.points, "A_n": an, "closed_form_residual": resid,
            "distance_to_A": (an - a).norm()}, resid <= ctx.tol


@command("weight-domains", "domains N_phi, M_phi and the null ideal of a weight", 0.0)
def _weight_domains(ctx: Context):
    d = weight_domains(ctx.functional(), np.random.default_rng(ctx.args.seed))
    return {"dims": d.dims, "checks": d.checks}, all(d.checks.values())


@command("flow-commute", "invariance and commutation of modular flows", 1e-9)
def _flow_commute(ctx: Context):
    res = flow_commutation_check(ctx.functional("phi"), ctx.functional("psi"),
                                 _times(ctx, [-1.7, -0.5, 0.8, 2.3]), tol=ctx.tol)
    out = {"invariance_fg": res.invariance_fg, "invariance_gf": res.invariance_gf,
           "flows_commute": res.flows_commute, "defects": list(res.defects)}
    return out, len({res.invariance_fg, res.invariance_gf, res.flows_commute}) == 1


@command("sweep", "randomized property suites", 0.0)
def _sweep(ctx: Context):
    fixed: AlgebraSpec | None = ctx.manifest.algebra if ctx.manifest is not None else None
    report = run_sweep(ctx.args.seed, ctx.args.trials, fixed=fixed, workers=ctx.args.workers)
    return {"trials": ctx.args.trials, "suites": report}, all(s["pass"] for s in report.values())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nclp", description=__doc__.splitlines()[0])
    ap.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("--manifest", help="JSON manifest file")
    ap.add_argument("--p", type=float)
    ap.add_argument("--q", type=float)
    ap.add_argument("--r", type=float)
    ap.add_argument("--epsilon", type=float)
    ap.add_argument("--delta", type=float)
    ap.add_argument("--t", type=float, nargs="+", action="extend")
    ap.add_argument("--n", type=float)
    ap.add_argument("--points", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--out")
    ap.add_argument("--a", default="a", help="element name (default: a)")
    ap.add_argument("--b", default="b", help="second element name (default: b)")
    ap.add_argument("--phi", default="phi", help="functional name (default: phi)")
    ap.add_argument("--psi", default="psi", help="second functional name (default: psi)")
    ap.add_argument("--factor", action="append", metavar="NAME:EXP", help="Hoelder factor (repeatable)")
    ap.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")
    return ap


def run_command(name: str, manifest: Manifest | None, args: argparse.Namespace) -> tuple[dict, int]:
    """Run one subcommand and return ``(report, exit_code)``."""
    if name not in COMMANDS:
        raise UnknownCommand(f"unknown command {name!r}; expected one of {', '.join(COMMANDS)}")
    fn, theorem, default_tol = COMMANDS[name]
    tol = args.tol if args.tol is not None else default_tol
    if not tol >= 0:
        raise InputError(f"--tol must be nonnegative, got {tol}")
    report = {"command": name, "theorem": theorem, "tolerance": tol,
              "inputs": {k: v for k, v in sorted(vars(args).items())
                         if v is not None and k not in ("command", "out", "timing", "workers")}}
    start = time.perf_counter()
    try:
        outputs, ok = fn(Context(manifest, args, tol))
    except InputError:
        raise
    except NclpError as exc:
        report.update({"error": type(exc).__name__, "message": str(exc), "pass": False})
        return report, 1
    report.update(outputs)
    report["pass"] = bool(ok)
    if args.timing:
        report["wall_clock_s"] = time.perf_counter() - start
    return report, 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        manifest = load_manifest(args.manifest) if args.manifest else None
        report, code = run_command(args.command, manifest, args)
    except (InputError, OSError, ValueError) as exc:
        report = {"command": args.command, "error": type(exc).__name__, "message": str(exc), "pass": False}
        for attr in ("path", "invariant"):
            if hasattr(exc, attr):
                report[attr] = getattr(exc, attr)
        code = 2
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
