"""Normal functionals and semifinite weights given by density data.

A functional is ``phi(A) = tau(F A)`` for a density ``F``. A genuinely
semifinite weight additionally carries an infinite-part projection ``P``
orthogonal to ``F``: positive elements that do not vanish on ``P`` get the
value :data:`INF`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .algebra import (
    AlgebraSpec,
    Element,
    is_positive,
    is_projection,
    operator_norm,
    polar_decomposition,
    rel_tol,
    singular_values,
    solution_space,
    span_rank,
    spectral_decomposition,
    trace,
)
from .errors import (
    AlgebraMismatch,
    InvariantError,
    NotPositive,
    PreconditionFailed,
    UnboundedWeight,
    UndefinedEvaluation,
)

FAITHFUL_TOL = 1e-10


class _Infinity:
    """The value +inf of a weight, kept apart from float infinity.

    Multiplication follows the measure-theory convention ``inf * 0 = 0``.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __mul__(self, c):
        c = complex(c)
        if c == 0:
            return 0.0
        if c.imag == 0 and c.real > 0:
            return self
        raise UndefinedEvaluation(f"INF * {c} is undefined for a weight")

    __rmul__ = __mul__

    def __add__(self, other):
        if other is self or np.isfinite(complex(other)):
            return self
        raise UndefinedEvaluation(f"INF + {other}")

    __radd__ = __add__

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_infinite(value) -> bool:
    return value is INF


def trace_eval(spec: AlgebraSpec, a: Element) -> complex:
    """The canonical trace ``sum_k c_k Tr(a_k)``."""
    if a.algebra != spec:
        raise AlgebraMismatch(f"{a.algebra} vs {spec}")
    return trace(a)


@dataclass(frozen=True, eq=False)
class FunctionalSpec:
    density: Element
    infinite_part: Element | None = field(default=None)

    def __post_init__(self):
        if self.infinite_part is None:
            object.__setattr__(self, "infinite_part", self.density.algebra.zeros())
        p, f = self.infinite_part, self.density
        if p.algebra != f.algebra:
            raise AlgebraMismatch("density and infinite part live in different algebras")
        if not is_projection(p):
            raise InvariantError("infinite_part_projection", "P_inf must be a projection")
        tol = rel_tol(operator_norm(f))
        if (f @ p).norm() > tol or (p @ f).norm() > tol:
            raise InvariantError("density_orthogonal", "F P_inf = P_inf F = 0 is required")

    @classmethod
    def trace(cls, algebra: AlgebraSpec) -> FunctionalSpec:
        """The canonical trace itself (density 1)."""
        return cls(algebra.identity())

    @classmethod
    def normalized_trace(cls, algebra: AlgebraSpec) -> FunctionalSpec:
        return cls(algebra.identity() / trace(algebra.identity()).real)

    @property
    def algebra(self) -> AlgebraSpec:
        return self.density.algebra

    def __call__(self, a: Element):
        return functional_eval(self, a)

    @cached_property
    def is_bounded(self) -> bool:
        return operator_norm(self.infinite_part) < 0.5

    @cached_property
    def is_positive_functional(self) -> bool:
        return is_positive(self.density)

    @cached_property
    def is_faithful(self) -> bool:
        if not self.is_positive_functional:
            return False
        total = self.density + self.infinite_part
        lo = min(np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0] for b in total.blocks)
        return bool(lo > FAITHFUL_TOL * (1.0 + operator_norm(self.density)))

    @cached_property
    def is_state(self) -> bool:
        return (self.is_bounded and self.is_positive_functional
                and abs(trace(self.density) - 1.0) <= 1e-9)

    @cached_property
    def is_trace_compatible(self) -> bool:
        """True when the functional is itself a trace (density and P_inf central)."""
        for el in (self.density, self.infinite_part):
            for b in el.blocks:
                if np.max(np.abs(b - b[0, 0] * np.eye(len(b)))) > 1e-9 * (1.0 + np.max(np.abs(b))):
                    return False
        return True

    def require_bounded(self) -> None:
        if not self.is_bounded:
            raise UnboundedWeight("the weight has a nonzero infinite part")

    def require_positive(self) -> None:
        if not self.is_positive_functional:
            raise NotPositive("the density is not positive")


def functional_eval(f: FunctionalSpec, a: Element):
    """``tau(F a)``, or :data:`INF` when a positive ``a`` reaches the infinite part."""
    if a.algebra != f.algebra:
        raise AlgebraMismatch(f"{a.algebra} vs {f.algebra}")
    if not f.is_bounded:
        p = f.infinite_part
        tol = rel_tol(operator_norm(a))
        if (a @ p).norm() > tol or (p @ a).norm() > tol:
            if is_positive(a):
                return INF
            raise UndefinedEvaluation("a non-positive element touches the infinite part")
    return trace(f.density @ a)


def functional_norm(f: FunctionalSpec) -> float:
    """Dual norm ``sup_{||A||<=1} |tau(F A)|``, i.e. the weighted trace norm of F."""
    f.require_bounded()
    return float(sum(c * s.sum() for c, s in zip(f.algebra.trace_weights, singular_values(f.density))))


@dataclass(frozen=True)
class WeightDomains:
    n_phi_basis: list[Element]
    f_phi_description: tuple[Element, Element]
    m_phi_basis: list[Element]
    null_ideal_basis: list[Element]
    checks: dict[str, bool]

    @property
    def dims(self) -> dict[str, int]:
        return {"N_phi": len(self.n_phi_basis), "M_phi": len(self.m_phi_basis),
                "null_ideal": len(self.null_ideal_basis)}


def weight_domains(f: FunctionalSpec, rng: np.random.Generator | None = None, samples: int = 20) -> WeightDomains:
    """Bases of the square-integrable domain, definition span and null ideal.

    The returned ``checks`` record the structural facts verified on these
    bases: the finite cone sits in ``N & N*``, ``N`` and the null ideal are
    left ideals, and ``M_phi`` is spanned by products ``A* B`` with A, B in N.
    """
    f.require_positive()
    alg = f.algebra
    p, F = f.infinite_part, f.density
    q = alg.identity() - p
    n_phi = solution_space(alg, lambda a: [a @ p])
    null = solution_space(alg, lambda a: [a @ F, a @ p])
    m_phi = solution_space(alg, lambda a: [a @ p, p @ a])

    rng = np.random.default_rng(0) if rng is None else rng
    from .sampling import random_element, random_positive  # sampling imports this module

    def in_span(x: Element, basis: list[Element]) -> bool:
        return span_rank(basis + [x]) == len(basis)

    def combo(basis):
        coeffs = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
        out = alg.zeros()
        for c, b in zip(coeffs, basis):
            out = out + b * complex(c)
        return out

    checks = {"finite_cone_in_N_and_N_star": True, "N_left_ideal": True,
              "null_left_ideal": True, "N_sums_finite": True}
    for _ in range(samples):
        pos = q @ random_positive(alg, rng) @ q
        checks["finite_cone_in_N_and_N_star"] &= in_span(pos, n_phi) and in_span(pos.H, n_phi)
        c = random_element(alg, rng)
        if n_phi:
            a, b = combo(n_phi), combo(n_phi)
            checks["N_left_ideal"] &= in_span(c @ a, n_phi)
            checks["N_sums_finite"] &= not is_infinite(functional_eval(f, (a + b).H @ (a + b)))
        if null:
            checks["null_left_ideal"] &= in_span(c @ combo(null), null)
    products = [x.H @ y for x in n_phi for y in n_phi]
    checks["M_phi_is_span_N_star_N"] = (span_rank(products) == len(m_phi)
                                        and all(in_span(x, m_phi) for x in products[:: max(1, len(products) // 50)]))
    return WeightDomains(n_phi, (q, q), m_phi, null, checks)


def functional_polar(f: FunctionalSpec) -> tuple[Element, FunctionalSpec]:
    """``phi = psi(. U)`` with ``psi`` the modulus of ``phi``.

    Blockwise matrix polar decomposition of the density, ``F = U |F|``.
    """
    f.require_bounded()
    u, mod = polar_decomposition(f.density)
    return u, FunctionalSpec(mod)


def polar_residual(f: FunctionalSpec, u: Element, modulus: FunctionalSpec) -> float:
    """Worst deviation of ``phi(A) = psi(A U)`` and ``psi(A) = phi(A U*)`` over matrix units."""
    worst = 0.0
    for e in f.algebra.matrix_units():
        worst = max(worst, abs(f(e) - modulus(e @ u)), abs(modulus(e) - f(e @ u.H)))
    return worst


def dominated_bound_check(f: FunctionalSpec, h: Element, rng: np.random.Generator | None = None,
                          n_random: int = 200, tol: float = 1e-9) -> bool:
    """``|phi(A H)| <= ||H|| phi(A)`` over a test set of positive ``A``.

    Raises :class:`PreconditionFailed` unless ``A -> phi(A H)`` is a
    self-adjoint functional on the matrix-unit basis.
    """
    f.require_bounded()
    f.require_positive()
    alg = f.algebra
    F = f.density
    scale = 1.0 + operator_norm(F) * operator_norm(h)
    for e in alg.matrix_units():
        if abs(trace(F @ e @ h) - np.conj(trace(F @ e.H @ h))) > tol * scale:
            raise PreconditionFailed("A -> phi(A H) is not self-adjoint")

    from .sampling import random_hermitian

    rng = np.random.default_rng(0) if rng is None else rng
    tests = list(_unit_projections(alg))
    for _ in range(n_random):
        tests.extend(spectral_decomposition(random_hermitian(alg, rng)).projections)
    hn = operator_norm(h)
    for a in tests:
        if abs(trace(F @ a @ h)) > hn * trace(F @ a).real + tol * scale:
            return False
    return True


def _unit_projections(alg: AlgebraSpec):
    """Rank-one projections onto e_i, (e_i + e_j)/sqrt2 and (e_i + i e_j)/sqrt2."""
    for k, n in enumerate(alg.block_dims):
        vecs = [np.eye(n)[i] for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                vecs.append((np.eye(n)[i] + np.eye(n)[j]) / np.sqrt(2))
                vecs.append((np.eye(n)[i] + 1j * np.eye(n)[j]) / np.sqrt(2))
        for v in vecs:
            blocks = [np.zeros((m, m)) for m in alg.block_dims]
            blocks[k] = np.outer(v, v.conj())
            yield Element(alg, blocks)


def balanced_weight(f: FunctionalSpec, g: FunctionalSpec) -> FunctionalSpec:
    """``theta(A) = phi(A_11) + psi(A_22)`` on the 2x2 amplification ``M_2(M)``."""
    if f.algebra != g.algebra:
        raise AlgebraMismatch("balanced weight needs functionals on the same algebra")
    big = f.algebra.amplify(2)

    def stack(x: Element, y: Element) -> Element:
        blocks = []
        for xb, yb in zip(x.blocks, y.blocks):
            n = len(xb)
            b = np.zeros((2 * n, 2 * n), dtype=complex)
            b[:n, :n], b[n:, n:] = xb, yb
            blocks.append(b)
        return Element(big, blocks)

    return FunctionalSpec(stack(f.density, g.density), stack(f.infinite_part, g.infinite_part))


def corner_embed(a: Element, i: int, j: int) -> Element:
    """Place ``a`` in the ``(i, j)`` corner of ``M_2(M)``, i.e. ``a (x) e_ij``."""
    big = a.algebra.amplify(2)
    blocks = []
    for ab in a.blocks:
        n = len(ab)
        b = np.zeros((2 * n, 2 * n), dtype=complex)
        b[i * n:(i + 1) * n, j * n:(j + 1) * n] = ab
        blocks.append(b)
    return Element(big, blocks)


def cauchy_schwarz_gap(f: FunctionalSpec, a: Element, b: Element) -> float:
    """``phi(A*A) phi(B*B) - |phi(A*B)|^2``; nonnegative for positive ``phi``."""
    return float((f(a.H @ a) * f(b.H @ b)).real - abs(f(a.H @ b)) ** 2)
