"""Finite-dimensional von Neumann algebras as direct sums of matrix blocks.

An :class:`AlgebraSpec` fixes block sizes ``n_1, ..., n_K`` and strictly
positive trace weights ``c_1, ..., c_K``; an :class:`Element` is a tuple of
complex ``n_k x n_k`` matrices. Everything here is a pure function of
immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Callable, Sequence

import numpy as np

from .errors import AlgebraMismatch, DomainError, NotAProjection, NotSelfAdjoint

#: relative tolerance used for eigenvalue clustering and symmetry checks
CLUSTER_TOL = 1e-9
#: absolute singular-value cut used by rank-revealing decompositions
RANK_TOL = 1e-9


def rel_tol(scale: float, tol: float = CLUSTER_TOL) -> float:
    return tol * (1.0 + scale)


@dataclass(frozen=True)
class AlgebraSpec:
    """Block dimensions and per-block trace weights."""

    block_dims: tuple[int, ...]
    trace_weights: tuple[float, ...]

    def __init__(self, block_dims: Sequence[int], trace_weights: Sequence[float] | None = None):
        dims = tuple(int(n) for n in block_dims)
        weights = tuple(float(c) for c in trace_weights) if trace_weights is not None else (1.0,) * len(dims)
        if not dims:
            raise ValueError("an algebra needs at least one block")
        if len(weights) != len(dims):
            raise ValueError(f"{len(dims)} blocks but {len(weights)} trace weights")
        if any(n < 1 for n in dims):
            raise ValueError(f"block dimensions must be >= 1, got {dims}")
        if any(not np.isfinite(c) or c <= 0 for c in weights):
            raise ValueError(f"trace weights must be finite and > 0, got {weights}")
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "trace_weights", weights)

    @classmethod
    def full(cls, n: int, weight: float = 1.0) -> AlgebraSpec:
        """The single factor M_n."""
        return cls((n,), (weight,))

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def dim(self) -> int:
        """Linear dimension, i.e. the sum of squared block sizes."""
        return sum(n * n for n in self.block_dims)

    def identity(self) -> Element:
        return Element(self, [np.eye(n) for n in self.block_dims])

    def zeros(self) -> Element:
        return Element(self, [np.zeros((n, n)) for n in self.block_dims])

    def element(self, *blocks) -> Element:
        return Element(self, blocks)

    def diag(self, *values) -> Element:
        """Diagonal element; ``values`` are the diagonals block by block, flattened."""
        values = np.asarray(values, dtype=complex).ravel()
        if values.size != sum(self.block_dims):
            raise ValueError(f"expected {sum(self.block_dims)} diagonal entries, got {values.size}")
        blocks, start = [], 0
        for n in self.block_dims:
            blocks.append(np.diag(values[start:start + n]))
            start += n
        return Element(self, blocks)

    def matrix_unit(self, k: int, i: int, j: int) -> Element:
        blocks = [np.zeros((n, n)) for n in self.block_dims]
        blocks[k][i, j] = 1.0
        return Element(self, blocks)

    def matrix_units(self) -> list[Element]:
        """The basis {E^k_ij}, ordered by block then row-major."""
        return [self.matrix_unit(k, i, j)
                for k, n in enumerate(self.block_dims)
                for i in range(n) for j in range(n)]

    def from_vector(self, vec) -> Element:
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.dim,):
            raise ValueError(f"vector of length {self.dim} expected, got shape {vec.shape}")
        blocks, start = [], 0
        for n in self.block_dims:
            blocks.append(vec[start:start + n * n].reshape(n, n))
            start += n * n
        return Element(self, blocks)

    def amplify(self, m: int = 2) -> AlgebraSpec:
        """The algebra M_m(M): every block dimension multiplied by ``m``."""
        return AlgebraSpec([m * n for n in self.block_dims], self.trace_weights)


class Element:
    """An immutable block matrix living in an :class:`AlgebraSpec`.

    ``a @ b`` is the algebra product, ``a * c`` scalar multiplication and
    ``a.H`` the adjoint.
    """

    __slots__ = ("algebra", "blocks")
    __array_ufunc__ = None

    def __init__(self, algebra: AlgebraSpec, blocks):
        blocks = tuple(np.array(b, dtype=complex) for b in blocks)
        if len(blocks) != algebra.num_blocks:
            raise ValueError(f"algebra has {algebra.num_blocks} blocks, got {len(blocks)}")
        for k, (b, n) in enumerate(zip(blocks, algebra.block_dims)):
            if b.shape != (n, n):
                raise ValueError(f"block {k} must be {n}x{n}, got shape {b.shape}")
            if not np.all(np.isfinite(b)):
                raise ValueError(f"block {k} has non-finite entries")
            b.setflags(write=False)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    def __repr__(self) -> str:
        return f"Element({self.algebra.block_dims}, {[b.tolist() for b in self.blocks]})"

    def _check(self, other: Element) -> None:
        if not isinstance(other, Element):
            raise TypeError(f"expected Element, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise AlgebraMismatch(f"{self.algebra} vs {other.algebra}")

    def _map(self, fn) -> Element:
        return Element(self.algebra, [fn(b) for b in self.blocks])

    def _zip(self, other: Element, fn) -> Element:
        self._check(other)
        return Element(self.algebra, [fn(x, y) for x, y in zip(self.blocks, other.blocks)])

    def __add__(self, other: Element) -> Element:
        return self._zip(other, np.add)

    def __sub__(self, other: Element) -> Element:
        return self._zip(other, np.subtract)

    def __neg__(self) -> Element:
        return self._map(np.negative)

    def __matmul__(self, other: Element) -> Element:
        return self._zip(other, np.matmul)

    def __mul__(self, scalar) -> Element:
        if not isinstance(scalar, Number):
            return NotImplemented
        return self._map(lambda b: b * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> Element:
        return self * (1.0 / scalar)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Element) or other.algebra != self.algebra:
            return False
        return all(np.array_equal(x, y) for x, y in zip(self.blocks, other.blocks))

    __hash__ = None

    @property
    def H(self) -> Element:
        return self._map(lambda b: b.conj().T)

    def adjoint(self) -> Element:
        return self.H

    def vector(self) -> np.ndarray:
        """Coordinates with respect to :meth:`AlgebraSpec.matrix_units`."""
        return np.concatenate([b.ravel() for b in self.blocks])

    def norm(self) -> float:
        return operator_norm(self)

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(b))) for b in self.blocks)

    def allclose(self, other: Element, atol: float = 1e-9) -> bool:
        return (self - other).norm() <= atol

    def is_self_adjoint(self, tol: float = CLUSTER_TOL) -> bool:
        return (self - self.H).norm() <= rel_tol(self.norm(), tol)


def element_arithmetic(a: Element, b: Element | None, op: str, scalar: complex = 1.0) -> Element:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a @ b
    if op == "scalar-mul":
        return a * scalar
    if op == "adjoint":
        return a.H
    raise ValueError(f"unknown operation {op!r}")


def operator_norm(a: Element) -> float:
    """Largest singular value over all blocks."""
    return max(float(np.linalg.norm(b, 2)) for b in a.blocks)


def commutator(a: Element, b: Element) -> Element:
    return a @ b - b @ a


def trace(a: Element) -> complex:
    """Canonical weighted trace: sum of c_k Tr(a_k)."""
    return complex(sum(c * np.trace(b) for c, b in zip(a.algebra.trace_weights, a.blocks)))


def is_positive(a: Element, criterion: str = "spectral", tol: float = CLUSTER_TOL) -> bool:
    """Positivity, either by the spectrum or by ``||1 - A/||A|| || <= 1``.

    Both criteria first require self-adjointness within ``tol (1 + ||A||)``
    and share that same absolute threshold, so they agree on every input.
    """
    norm = operator_norm(a)
    thresh = rel_tol(norm, tol)
    if (a - a.H).norm() > thresh:
        return False
    if criterion == "spectral":
        lo = min(np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0] for b in a.blocks)
        return bool(lo >= -thresh)
    if criterion == "norm-distance":
        if norm == 0.0:
            return True
        shifted = a.algebra.identity() - a / norm
        return bool(operator_norm(shifted) <= 1.0 + thresh / norm)
    raise ValueError(f"unknown positivity criterion {criterion!r}")


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: tuple[float, ...]
    projections: tuple[Element, ...]
    source_norm: float

    def reconstruct(self) -> Element:
        out = self.projections[0] * self.eigenvalues[0]
        for lam, p in zip(self.eigenvalues[1:], self.projections[1:]):
            out = out + p * lam
        return out


def _hermitian_eigh(a: Element, check: bool = True):
    norm = operator_norm(a)
    if check and (a - a.H).norm() > rel_tol(norm):
        raise NotSelfAdjoint(f"||A - A*|| = {(a - a.H).norm():.3e}")
    return [np.linalg.eigh(0.5 * (b + b.conj().T)) for b in a.blocks], norm


def spectral_decomposition(a: Element) -> SpectralData:
    """Eigenvalues with multiplicity merged into spectral points.

    Consecutive sorted eigenvalues closer than ``1e-9 (1 + ||A||)`` are merged
    into one spectral point (their mean); the projection collects the
    eigenvectors of every merged value across all blocks.
    """
    decomps, norm = _hermitian_eigh(a)
    tol = rel_tol(norm)
    entries = sorted((float(w[i]), k, i) for k, (w, _) in enumerate(decomps) for i in range(len(w)))
    groups: list[list[tuple[float, int, int]]] = []
    for item in entries:
        if groups and item[0] - groups[-1][-1][0] <= tol:
            groups[-1].append(item)
        else:
            groups.append([item])
    eigenvalues, projections = [], []
    for group in groups:
        eigenvalues.append(float(np.mean([g[0] for g in group])))
        blocks = [np.zeros((n, n), dtype=complex) for n in a.algebra.block_dims]
        for _, k, i in group:
            v = decomps[k][1][:, i]
            blocks[k] += np.outer(v, v.conj())
        projections.append(Element(a.algebra, blocks))
    return SpectralData(tuple(eigenvalues), tuple(projections), norm)


def functional_calculus(f: Callable, a: Element) -> Element:
    """``f(A) = sum f(lambda_i) P_i`` over the merged spectral points of ``A``.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero before ``f`` is applied.
    """
    spec = spectral_decomposition(a)
    tol = rel_tol(spec.source_norm)
    out = a.algebra.zeros()
    for lam, p in zip(spec.eigenvalues, spec.projections):
        if -tol <= lam < 0.0:
            lam = 0.0
        try:
            with np.errstate(all="ignore"):
                val = complex(f(lam))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"f undefined at eigenvalue {lam!r}: {exc}") from exc
        if not np.isfinite(val):
            raise DomainError(f"f({lam!r}) = {val}")
        out = out + p * val
    return out


def hermitian_apply(a: Element, fn: Callable[[np.ndarray], np.ndarray], check: bool = True) -> Element:
    """Blockwise ``V fn(w) V*`` with a vectorized ``fn``; no clustering.

    Faster path used internally for powers and imaginary powers of densities.
    Slightly negative eigenvalues (within tolerance) are clamped to zero.
    """
    decomps, norm = _hermitian_eigh(a, check)
    tol = rel_tol(norm)
    blocks = []
    for w, v in decomps:
        w = np.where((w < 0) & (w >= -tol), 0.0, w)
        with np.errstate(divide="ignore", invalid="ignore"):
            fw = np.asarray(fn(w), dtype=complex)
        if not np.all(np.isfinite(fw)):
            raise DomainError(f"function undefined on eigenvalues {w}")
        blocks.append((v * fw) @ v.conj().T)
    return Element(a.algebra, blocks)


def positive_power(a: Element, p: float) -> Element:
    """``A^p`` for positive ``A`` and ``p > 0``, with ``0^p = 0``."""
    if p <= 0:
        raise DomainError(f"positive_power needs p > 0, got {p}")
    return hermitian_apply(a, lambda w: np.where(w > 0, np.abs(w) ** p, 0.0))


def complex_power(a: Element, z: complex) -> Element:
    """``A^z`` for positive invertible ``A`` (any complex exponent)."""
    return hermitian_apply(a, lambda w: np.where(w > 0, w, np.nan) ** z)


def polar_decomposition(a: Element) -> tuple[Element, Element]:
    """``A = u |A|`` with ``u`` vanishing on ``ker |A|``.

    Computed from a blockwise SVD ``A = W S V*``: ``|A| = V S V*`` and
    ``u = W_r V_r*`` over singular values above ``1e-9 (1 + ||A||)``.
    """
    tol = rel_tol(operator_norm(a))
    us, mods = [], []
    for b in a.blocks:
        w, s, vh = np.linalg.svd(b)
        keep = s > tol
        us.append(w[:, keep] @ vh[keep])
        mods.append((vh.conj().T * s) @ vh)
    return Element(a.algebra, us), Element(a.algebra, mods)


def modulus(a: Element) -> Element:
    return polar_decomposition(a)[1]


def singular_values(a: Element) -> list[np.ndarray]:
    return [np.linalg.svd(b, compute_uv=False) for b in a.blocks]


def support_projection(a: Element, side: str = "right") -> Element:
    """Right support (projection onto ``ker(A)^perp``) or left support (range)."""
    u, _ = polar_decomposition(a)
    return u.H @ u if side == "right" else u @ u.H


def is_projection(p: Element, tol: float = CLUSTER_TOL) -> bool:
    thresh = rel_tol(operator_norm(p), tol)
    return (p - p.H).norm() <= thresh and (p @ p - p).norm() <= thresh


def require_projection(p: Element, name: str = "p") -> None:
    if not is_projection(p):
        raise NotAProjection(f"{name} is not a self-adjoint idempotent")


def _range_basis(block: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (block + block.conj().T))
    return v[:, w > 0.5]


def projection_ranks(p: Element) -> tuple[int, ...]:
    return tuple(_range_basis(b).shape[1] for b in p.blocks)


def projection_lattice(p: Element, q: Element, op: str) -> Element:
    """Meet (range intersection) or join of two projections."""
    require_projection(p, "p")
    require_projection(q, "q")
    p._check(q)
    if op == "meet":
        return _meet(p, q)
    if op == "join":
        one = p.algebra.identity()
        return one - _meet(one - p, one - q)
    raise ValueError(f"unknown lattice operation {op!r}")


def _meet(p: Element, q: Element) -> Element:
    blocks = []
    for pb, qb in zip(p.blocks, q.blocks):
        n = pb.shape[0]
        eye = np.eye(n)
        _, s, vh = np.linalg.svd(np.vstack([eye - pb, eye - qb]))
        null = vh[s < RANK_TOL].conj().T
        blocks.append(null @ null.conj().T)
    return Element(p.algebra, blocks)


def meet(p: Element, q: Element) -> Element:
    return projection_lattice(p, q, "meet")


def join(p: Element, q: Element) -> Element:
    return projection_lattice(p, q, "join")


def mv_equivalent(p: Element, q: Element) -> tuple[bool, Element | None]:
    """Murray-von Neumann equivalence with a witnessing partial isometry.

    In a direct sum of factors two projections are equivalent exactly when
    their ranks agree block by block. The witness ``u`` satisfies
    ``u* u = p`` and ``u u* = q``.
    """
    require_projection(p, "p")
    require_projection(q, "q")
    p._check(q)
    blocks = []
    for pb, qb in zip(p.blocks, q.blocks):
        vp, vq = _range_basis(pb), _range_basis(qb)
        if vp.shape[1] != vq.shape[1]:
            return False, None
        blocks.append(vq @ vp.conj().T)
    return True, Element(p.algebra, blocks)


def solution_space(algebra: AlgebraSpec, constraint: Callable[[Element], Sequence[Element]],
                   tol: float = RANK_TOL) -> list[Element]:
    """Basis of the linear subspace ``{A : constraint(A) = 0}``.

    ``constraint`` must be linear; it is sampled on the matrix-unit basis and
    the null space is read off an SVD with singular-value cut ``tol``.
    """
    units = algebra.matrix_units()
    cols = [np.concatenate([c.vector() for c in constraint(e)]) for e in units]
    mat = np.array(cols).T
    if mat.size == 0 or mat.shape[0] == 0:
        return units
    _, s, vh = np.linalg.svd(mat)
    s_full = np.zeros(vh.shape[0])
    s_full[:len(s)] = s
    null = vh[s_full < tol]
    return [_clean(algebra.from_vector(row.conj())) for row in null]


def _clean(a: Element) -> Element:
    # strip rounding noise so that exact subspaces come out with exact zeros
    return a._map(lambda b: np.where(np.abs(b) < 1e-14, 0.0, b))


def span_rank(elements: Sequence[Element], tol: float = RANK_TOL) -> int:
    if not elements:
        return 0
    s = np.linalg.svd(np.array([e.vector() for e in elements]), compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))
