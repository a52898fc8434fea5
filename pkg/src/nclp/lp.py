"""Non-commutative L_p norms ``||A||_p = tau(|A|^p)^(1/p)`` and Hölder-type checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import Element, modulus, operator_norm, polar_decomposition, positive_power, singular_values, trace
from .errors import AlgebraMismatch, BadExponent, ExponentMismatch, ZeroElement

EXPONENT_TOL = 1e-12


@dataclass(frozen=True)
class LpValue:
    p: float
    value: float
    element: Element

    def __float__(self) -> float:
        return self.value


def _check_exponent(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise BadExponent(f"exponent must satisfy p >= 1, got {p}")
    return p


def schatten(a: Element, p: float) -> float:
    """Float-valued ``||a||_p`` from the weighted singular values of ``a``."""
    p = _check_exponent(p)
    svals = singular_values(a)
    if math.isinf(p):
        return max(float(s.max()) for s in svals)
    top = max(float(s.max(initial=0.0)) for s in svals)
    if top == 0.0:
        return 0.0
    # scaled by the largest singular value so that large p cannot overflow
    total = sum(c * float(np.sum((s / top) ** p)) for c, s in zip(a.algebra.trace_weights, svals))
    return top * total ** (1.0 / p)


def lp_norm(a: Element, p: float) -> LpValue:
    return LpValue(float(p), schatten(a, p), a)


def conjugate_exponent(p: float) -> float:
    p = float(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _reciprocal(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


@dataclass(frozen=True)
class HolderResult:
    lhs: float
    rhs: float
    holds: bool

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.holds))


def holder_bound(factors: Sequence[tuple[Element, float]], r: float = 1.0, tol: float = 1e-9) -> HolderResult:
    """``||A_1 ... A_n||_r <= prod ||A_i||_{p_i}`` when ``sum 1/p_i = 1/r``."""
    if not factors:
        raise ValueError("need at least one factor")
    r = _check_exponent(r)
    exps = [_check_exponent(p) for _, p in factors]
    total = sum(_reciprocal(p) for p in exps)
    if abs(total - _reciprocal(r)) > EXPONENT_TOL:
        raise ExponentMismatch(f"sum of 1/p_i = {total!r} but 1/r = {_reciprocal(r)!r}")
    product = factors[0][0]
    for a, _ in factors[1:]:
        product = product @ a
    lhs = schatten(product, r)
    rhs = math.prod(schatten(a, p) for a, p in factors)
    return HolderResult(lhs, rhs, lhs <= rhs + tol * (1.0 + rhs))


def minkowski_gap(a: Element, b: Element, p: float) -> float:
    """``||A||_p + ||B||_p - ||A + B||_p`` (nonnegative)."""
    return schatten(a, p) + schatten(b, p) - schatten(a + b, p)


def dual_norm_witness(a: Element, p: float) -> tuple[Element, complex]:
    """Extremal ``B`` with ``||B||_q = 1`` and ``tau(A B) = ||A||_p``.

    ``B = |A|^(p-1) u* / ||A||_p^(p-1)`` from the polar decomposition
    ``A = u|A|``; for ``p = 1`` this degenerates to ``B = u*``.
    """
    p = _check_exponent(p)
    if math.isinf(p):
        raise BadExponent("the witness formula needs a finite exponent")
    if operator_norm(a) == 0.0:
        raise ZeroElement("the zero element has no norming functional")
    u, mod = polar_decomposition(a)
    if p == 1.0:
        b = u.H
    else:
        norm = schatten(a, p)
        b = positive_power(mod, p - 1.0) @ u.H / norm ** (p - 1.0)
    return b, trace(a @ b)


def duality_pairing(a: Element, b: Element) -> complex:
    """The bilinear form ``(A, B) -> tau(A B)``."""
    if a.algebra != b.algebra:
        raise AlgebraMismatch(f"{a.algebra} vs {b.algebra}")
    return trace(a @ b)


def trace_norm_bound_check(a: Element, b: Element, tol: float = 1e-9) -> tuple[float, float, float, bool]:
    """``|tau(AB)| <= tau(|AB|) <= ||A|| tau(|B|)``."""
    if a.algebra != b.algebra:
        raise AlgebraMismatch(f"{a.algebra} vs {b.algebra}")
    lhs1 = abs(trace(a @ b))
    lhs2 = schatten(a @ b, 1.0)
    rhs = operator_norm(a) * schatten(b, 1.0)
    scale = 1.0 + rhs
    return lhs1, lhs2, rhs, (lhs1 <= lhs2 + tol * scale and lhs2 <= rhs + tol * scale)


def weighted_lp(values, weights, p: float) -> float:
    """Classical weighted l_p norm; the commutative oracle for diagonal elements."""
    values = np.abs(np.asarray(values, dtype=complex))
    if math.isinf(p):
        return float(values.max())
    return float(np.sum(np.asarray(weights) * values ** p) ** (1.0 / p))


def modulus_power_trace(a: Element, p: float) -> float:
    """``tau(|A|^p)`` via functional calculus; cross-check for :func:`schatten`."""
    return trace(positive_power(modulus(a), p)).real
