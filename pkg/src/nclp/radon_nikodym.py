"""Radon-Nikodym derivatives between positive functionals.

Three flavours:

* commutant: ``psi(A) = <H' pi(A) xi, xi>`` with ``H'`` in ``pi(M)'``;
* Sakai: ``psi(A) = phi(H A H)`` with ``0 <= H <= 1`` when ``psi <= phi``;
* Pedersen-Takesaki: ``psi(A) = phi(H A)`` with ``H`` in the centralizer,
  requiring ``psi`` to be invariant under the modular flow of ``phi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .algebra import (
    Element,
    commutator,
    hermitian_apply,
    is_positive,
    operator_norm,
    positive_power,
    spectral_decomposition,
    support_projection,
)
from .errors import DominationFailed, NotCommuting, NotInvariant, NotPositive, UnboundedWeight
from .functionals import FunctionalSpec
from .gns import GnsData, ModularFlow, full_gram, gns_construct, require_faithful

INVARIANCE_TOL = 1e-9
DEFAULT_T_SAMPLES = (-1.7, -0.5, 0.8, 2.3)


def dominates(f: FunctionalSpec, g: FunctionalSpec) -> bool:
    """``g <= f`` as positive functionals."""
    return f.is_bounded and g.is_bounded and is_positive(f.density - g.density)


def _require_dominated(f: FunctionalSpec, g: FunctionalSpec) -> None:
    g.require_bounded()
    if not g.is_positive_functional:
        raise NotPositive("psi must be positive")
    if not dominates(f, g):
        raise DominationFailed("psi <= phi does not hold")


@dataclass(frozen=True, eq=False)
class CommutantRN:
    operator: np.ndarray     # H' on the GNS space of phi
    multiplier: Element      # H' [A] = [A m]
    gns: GnsData
    residual: float          # psi(A) vs <H' pi(A) xi, xi> over matrix units
    residual_adjoint_form: float  # psi(A) vs <H' pi(A*) xi, xi>
    residual_positive: float      # both forms on positive test elements
    commutation: float
    spectrum: tuple[float, float]


def commutant_rn(f: FunctionalSpec, g: FunctionalSpec) -> CommutantRN:
    """Riesz operator of the form ``([A], [B]) -> psi(B* A)`` on the GNS space of ``phi``.

    In GNS coordinates ``H' = R* G_psi R`` where ``R`` maps GNS coordinates
    back to algebra coordinates and ``G_psi`` is the Gram matrix of ``psi``.
    """
    require_faithful(f)
    _require_dominated(f, g)
    gd = gns_construct(f)
    r = gd.from_gns
    h = r.conj().T @ full_gram(g) @ r
    h = 0.5 * (h + h.conj().T)
    alg = f.algebra
    xi = gd.cyclic_vector
    multiplier = alg.from_vector(r @ (h @ xi))

    units = alg.matrix_units()
    reps = {id(e): gd.rep(e) for e in units}
    commutation = max(np.linalg.norm(h @ reps[id(e)] - reps[id(e)] @ h, 2) for e in units)
    residual = max(abs(g(e) - np.vdot(xi, h @ reps[id(e)] @ xi)) for e in units)
    adj = max(abs(g(e) - np.vdot(xi, h @ gd.rep(e.H) @ xi)) for e in units)
    positives = [p for e in units for p in spectral_decomposition(e + e.H).projections]
    pos = max(max(abs(g(a) - np.vdot(xi, h @ gd.rep(a) @ xi)),
                  abs(g(a) - np.vdot(xi, h @ gd.rep(a.H) @ xi))) for a in positives)
    w = np.linalg.eigvalsh(h)
    return CommutantRN(h, multiplier, gd, float(residual), float(adj), float(pos),
                       float(commutation), (float(w[0]), float(w[-1])))


def sakai_rn(f: FunctionalSpec, g: FunctionalSpec) -> Element:
    """Positive ``H`` with ``H rho H = sigma``, so that ``psi = phi(H . H)``.

    ``H = rho^(-1/2) (rho^(1/2) sigma rho^(1/2))^(1/2) rho^(-1/2)``.
    """
    require_faithful(f)
    _require_dominated(f, g)
    rho_half = positive_power(f.density, 0.5)
    rho_inv_half = hermitian_apply(f.density, lambda w: w ** -0.5)
    inner = positive_power(rho_half @ g.density @ rho_half, 0.5)
    h = rho_inv_half @ inner @ rho_inv_half
    return (h + h.H) * 0.5


def sakai_rn_newton(f: FunctionalSpec, g: FunctionalSpec, start: Element,
                    max_iter: int = 100, tol: float = 1e-14) -> Element:
    """Newton iteration for ``H rho H = sigma`` from ``start``.

    Each step solves the Sylvester equation
    ``D (rho H) + (H rho) D = sigma - H rho H``; independent of the closed form.
    """
    rho, sigma = f.density, g.density
    blocks = []
    for rb, sb, hb in zip(rho.blocks, sigma.blocks, start.blocks):
        h = np.array(hb)
        for _ in range(max_iter):
            resid = sb - h @ rb @ h
            if np.linalg.norm(resid) <= tol * (1.0 + np.linalg.norm(sb)):
                break
            d = scipy.linalg.solve_sylvester(h @ rb, rb @ h, resid)
            h = h + 0.5 * (d + d.conj().T)
        blocks.append(h)
    return Element(f.algebra, blocks)


def sakai_residual(f: FunctionalSpec, g: FunctionalSpec, h: Element) -> float:
    return max(abs(g(e) - f(h @ e @ h)) for e in f.algebra.matrix_units())


def _invariance_defect(f: FunctionalSpec, g: FunctionalSpec, t_samples: Iterable[float]) -> float:
    """``max |psi(sigma^phi_t(E)) - psi(E)|`` over matrix units and sample times."""
    flow = ModularFlow(f)
    units = f.algebra.matrix_units()
    return max(abs(g(flow(e, t)) - g(e)) for t in t_samples for e in units)


def pt_rn(f: FunctionalSpec, g: FunctionalSpec, t_samples: Sequence[float] = DEFAULT_T_SAMPLES,
          tol: float = INVARIANCE_TOL) -> Element:
    """Centralizer element ``H`` with ``psi(A) = phi(H A)``.

    ``psi`` must be invariant under the modular flow of ``phi``; this is
    checked as ``[sigma, rho] = 0`` and, redundantly, at ``t_samples``.
    ``psi <= phi`` is not required, so ``||H||`` may exceed 1.
    """
    require_faithful(f)
    g.require_bounded()
    if not g.is_positive_functional:
        raise NotPositive("psi must be positive")
    rho, sigma = f.density, g.density
    defect = commutator(sigma, rho).norm()
    if defect > tol * (1.0 + operator_norm(sigma) * operator_norm(rho)):
        raise NotInvariant(f"||[sigma, rho]|| = {defect:.3e}")
    if _invariance_defect(f, g, t_samples) > tol * (1.0 + operator_norm(sigma)):
        raise NotInvariant("psi is not invariant under the modular flow of phi")
    rho_inv_half = hermitian_apply(rho, lambda w: w ** -0.5)
    h = rho_inv_half @ sigma @ rho_inv_half
    return (h + h.H) * 0.5


def pt_residual(f: FunctionalSpec, g: FunctionalSpec, h: Element) -> float:
    return max(abs(g(e) - f(h @ e)) for e in f.algebra.matrix_units())


def weight_from_density(f: FunctionalSpec, h: Element, tol: float = 1e-9) -> FunctionalSpec:
    """The weight ``phi_H = phi(H^(1/2) . H^(1/2))`` for positive ``H`` commuting with ``rho``.

    On the infinite part, ``phi_H`` stays infinite exactly where ``H`` is
    non-zero (the convention ``inf * 0 = 0``).
    """
    if not is_positive(h):
        raise NotPositive("H must be positive")
    rho, p = f.density, f.infinite_part
    scale = 1.0 + operator_norm(h) * (1.0 + operator_norm(rho))
    if commutator(h, rho).norm() > tol * scale or commutator(h, p).norm() > tol * scale:
        raise NotCommuting("H must commute with the density (and the infinite part)")
    root = positive_power(h, 0.5)
    density = root @ rho @ root
    new_p = p @ support_projection(h) if not f.is_bounded else None
    if new_p is not None:
        new_p = (new_p + new_p.H) * 0.5
    return FunctionalSpec((density + density.H) * 0.5, new_p)


def spectral_cap(h: Element, n: float) -> Element:
    """``E_[0,n)(H) H E_[0,n)(H)``."""
    spec = spectral_decomposition(h)
    out = h.algebra.zeros()
    for lam, p in zip(spec.eigenvalues, spec.projections):
        if lam < n:
            out = out + p * lam
    return out


def cap_sequence(f: FunctionalSpec, h: Element, caps: Sequence[float]) -> list[tuple[float, float]]:
    """``(n, max_E |phi_{H_n}(E) - phi_H(E)|)`` along the truncations ``H_n``."""
    target = weight_from_density(f, h)
    out = []
    for n in caps:
        approx = weight_from_density(f, spectral_cap(h, n))
        dev = max(abs(approx(e) - target(e)) for e in f.algebra.matrix_units())
        out.append((float(n), float(dev)))
    return out


def order_preserving_check(f: FunctionalSpec, k: Element, h: Element, tests: Sequence[Element],
                           tol: float = 1e-9) -> bool:
    """``K <= H`` implies ``phi_K(A) <= phi_H(A)`` on the positive ``tests``."""
    if not is_positive(h - k):
        raise ValueError("K <= H is required")
    fk, fh = weight_from_density(f, k), weight_from_density(f, h)
    return all(fk(a).real <= fh(a).real + tol * (1.0 + abs(fh(a))) for a in tests)


@dataclass(frozen=True)
class FlowCommutation:
    invariance_fg: bool
    invariance_gf: bool
    flows_commute: bool
    defects: tuple[float, float, float]

    def __iter__(self):
        return iter((self.invariance_fg, self.invariance_gf, self.flows_commute))


def flow_commutation_check(f: FunctionalSpec, g: FunctionalSpec, t_samples: Sequence[float] = DEFAULT_T_SAMPLES,
                           tol: float = 1e-9) -> FlowCommutation:
    """``psi o sigma^phi = psi``, ``phi o sigma^psi = phi`` and ``[sigma^phi_t, sigma^psi_s] = 0``.

    For faithful states the three conditions are equivalent.
    """
    for x in (f, g):
        require_faithful(x)
        if not x.is_bounded:
            raise UnboundedWeight("faithful states are required")
    flow_f, flow_g = ModularFlow(f), ModularFlow(g)
    units = f.algebra.matrix_units()
    d_fg = _invariance_defect(f, g, t_samples)
    d_gf = _invariance_defect(g, f, t_samples)
    d_comm = max((flow_f(flow_g(e, s), t) - flow_g(flow_f(e, t), s)).norm()
                 for t in t_samples for s in t_samples for e in units)
    return FlowCommutation(d_fg <= tol, d_gf <= tol, d_comm <= tol, (d_fg, d_gf, d_comm))
