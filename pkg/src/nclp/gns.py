"""GNS representations and Tomita-Takesaki modular data.

Coordinates: an element ``A = sum_a x_a E_a`` over a basis of ``N_phi`` has
GNS coordinates ``y = D^(1/2) V* x`` where ``G = V D V*`` is the Gram matrix
``G_ab = phi(E_a* E_b)`` with its null directions removed. Then
``<[A], [B]> = phi(B* A) = y_B* y_A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import AlgebraSpec, Element, operator_norm, solution_space, support_projection
from .errors import NotAState, NotFaithful
from .functionals import FunctionalSpec

#: relative eigenvalue cut for the quotient by the null ideal
QUOTIENT_TOL = 1e-10


def _blockdiag(mats) -> np.ndarray:
    return scipy.linalg.block_diag(*mats) if len(mats) > 1 else np.asarray(mats[0])


def full_gram(f: FunctionalSpec) -> np.ndarray:
    """``phi(E_a* E_b)`` over all matrix units, as one block-diagonal matrix."""
    return _blockdiag([c * np.kron(np.eye(len(F)), F.T)
                       for c, F in zip(f.algebra.trace_weights, f.density.blocks)])


def left_multiplication(c: Element) -> np.ndarray:
    """Matrix of ``A -> C A`` on matrix-unit coordinates (row-major vec)."""
    return _blockdiag([np.kron(b, np.eye(len(b))) for b in c.blocks])


def adjoint_permutation(alg: AlgebraSpec) -> np.ndarray:
    """Permutation taking the coordinates of A to those of A^T (blockwise)."""
    idx, start = [], 0
    for n in alg.block_dims:
        idx.extend(start + j * n + i for i in range(n) for j in range(n))
        start += n * n
    perm = np.zeros((alg.dim, alg.dim))
    perm[np.arange(alg.dim), idx] = 1.0
    return perm


@dataclass(frozen=True, eq=False)
class GnsData:
    functional: FunctionalSpec
    basis: np.ndarray          # columns: N_phi basis in matrix-unit coordinates
    to_gns: np.ndarray         # T = D^(1/2) V* B^+  (matrix-unit coords -> GNS coords)
    from_gns: np.ndarray       # R = B V D^(-1/2)   (GNS coords -> a representative)
    gram: np.ndarray           # phi(E_a* E_b) over the basis columns
    cyclic_vector: np.ndarray
    residuals: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.to_gns.shape[0]

    @property
    def algebra(self) -> AlgebraSpec:
        return self.functional.algebra

    def vector(self, a: Element) -> np.ndarray:
        """GNS coordinates of the class ``[a]`` (``a`` must lie in N_phi)."""
        return self.to_gns @ a.vector()

    def element(self, y: np.ndarray) -> Element:
        """A representative of the class with coordinates ``y``."""
        return self.algebra.from_vector(self.from_gns @ y)

    def rep(self, c: Element) -> np.ndarray:
        """``pi_phi(c)`` as a ``dim x dim`` matrix."""
        return self.to_gns @ left_multiplication(c) @ self.from_gns

    def inner(self, x: np.ndarray, y: np.ndarray) -> complex:
        return complex(np.vdot(y, x))

    def expectation(self, c: Element) -> complex:
        xi = self.cyclic_vector
        return self.inner(self.rep(c) @ xi, xi)


def gns_construct(f: FunctionalSpec, rng: np.random.Generator | None = None, verify: bool = True) -> GnsData:
    """GNS space, representation and cyclic vector of a positive weight.

    For weights with an infinite part the pre-Hilbert space is
    ``N_phi / (null ideal)`` and the cyclic vector is the class of the
    support projection of the density.
    """
    f.require_positive()
    alg = f.algebra
    if f.is_bounded:
        basis = np.eye(alg.dim, dtype=complex)
    else:
        p = f.infinite_part
        basis = np.array([e.vector() for e in solution_space(alg, lambda a: [a @ p])]).T
        if basis.size == 0:
            basis = np.zeros((alg.dim, 0), dtype=complex)
    gram = basis.conj().T @ full_gram(f) @ basis
    gram = 0.5 * (gram + gram.conj().T)
    w, v = np.linalg.eigh(gram) if gram.size else (np.zeros(0), np.zeros((0, 0)))
    keep = w > QUOTIENT_TOL * max(w.max(initial=0.0), 0.0) if w.size else np.zeros(0, bool)
    keep &= w > 0
    w, v = w[keep], v[:, keep]
    pinv = np.linalg.pinv(basis) if basis.size else basis.conj().T
    to_gns = (np.sqrt(w)[:, None] * v.conj().T) @ pinv
    from_gns = basis @ (v / np.sqrt(w)[None, :])

    cyclic_el = alg.identity() if f.is_bounded else support_projection(f.density)
    xi = to_gns @ cyclic_el.vector()
    data = GnsData(f, basis, to_gns, from_gns, gram, xi)
    if verify:
        data.residuals.update(verify_gns(data, rng))
    return data


def verify_gns(data: GnsData, rng: np.random.Generator | None = None, pairs: int = 4) -> dict:
    """Residuals of the GNS invariants (expectation, *-homomorphism, cyclicity)."""
    from .sampling import random_element

    f, alg = data.functional, data.algebra
    rng = np.random.default_rng(0) if rng is None else rng
    if f.is_bounded:
        probes = alg.matrix_units()
    else:
        q = alg.identity() - f.infinite_part
        probes = [q @ e @ q for e in alg.matrix_units()]
    fidelity = max((abs(data.expectation(e) - f(e)) for e in probes), default=0.0)
    hom = 0.0
    for _ in range(pairs):
        a, b = random_element(alg, rng), random_element(alg, rng)
        pa, pb = data.rep(a), data.rep(b)
        hom = max(hom, np.linalg.norm(data.rep(a @ b) - pa @ pb, 2),
                  np.linalg.norm(data.rep(a.H) - pa.conj().T, 2))
    orbit = np.array([data.rep(e) @ data.cyclic_vector for e in alg.matrix_units()]).T
    rank = int(np.linalg.matrix_rank(orbit, tol=1e-9)) if data.dim else 0
    return {"fidelity": float(fidelity), "homomorphism": float(hom),
            "cyclic": rank == data.dim, "dim": data.dim}


def require_faithful_state(f: FunctionalSpec) -> None:
    if not f.is_bounded or not f.is_positive_functional or abs(f(f.algebra.identity()) - 1.0) > 1e-9:
        raise NotAState("a faithful state (positive, bounded, phi(1) = 1) is required")
    if not f.is_faithful:
        raise NotFaithful("the state has a kernel")


def require_faithful(f: FunctionalSpec) -> None:
    if not f.is_bounded or not f.is_positive_functional or not f.is_faithful:
        raise NotFaithful("a faithful bounded positive functional is required")


@dataclass(frozen=True)
class Antilinear:
    """The antilinear map ``y -> M conj(y)``."""

    matrix: np.ndarray

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return self.matrix @ np.conj(y)

    def realify(self) -> np.ndarray:
        """Real matrix acting on ``[Re y; Im y]``."""
        mr, mi = self.matrix.real, self.matrix.imag
        return np.block([[mr, mi], [mi, -mr]])


def complex_from_real(r: np.ndarray) -> np.ndarray:
    """Recover ``X + iY`` from its realification ``[[X, -Y], [Y, X]]``."""
    d = r.shape[0] // 2
    return r[:d, :d] + 1j * r[d:, :d]


@dataclass(frozen=True, eq=False)
class ModularData:
    gns: GnsData
    S: Antilinear
    J: Antilinear
    Delta: np.ndarray
    flow_generator: Element
    residuals: dict = field(default_factory=dict)

    def delta_power(self, z: complex) -> np.ndarray:
        w, v = np.linalg.eigh(self.Delta)
        return (v * np.clip(w, 1e-300, None) ** z) @ v.conj().T


def modular_data(f: FunctionalSpec) -> ModularData:
    """``S [A] = [A*]``, ``S = J Delta^(1/2)`` and ``Delta = S* S``.

    ``S*`` is taken as the real transpose of the realified ``S``.
    """
    require_faithful_state(f)
    g = gns_construct(f)
    perm = adjoint_permutation(f.algebra)
    s = Antilinear(g.to_gns @ perm @ np.conj(g.from_gns))
    real_s = s.realify()
    delta = complex_from_real(real_s.T @ real_s)
    delta = 0.5 * (delta + delta.conj().T)
    w, v = np.linalg.eigh(delta)
    inv_half = (v * w ** -0.5) @ v.conj().T
    half = (v * w ** 0.5) @ v.conj().T
    j = Antilinear(s.matrix @ np.conj(inv_half))

    eye = np.eye(g.dim)
    residuals = {
        "S_polar": float(np.linalg.norm(j.matrix @ np.conj(half) - s.matrix, 2)),
        "J_involution": float(np.linalg.norm(j.matrix @ np.conj(j.matrix) - eye, 2)),
        "J_isometry": float(np.linalg.norm(j.matrix.conj().T @ j.matrix - eye, 2)),
        "J_delta_J": float(np.linalg.norm(j.matrix @ np.conj(half) @ np.conj(j.matrix) - inv_half, 2)),
        "vacuum": float(np.linalg.norm(delta @ g.cyclic_vector - g.cyclic_vector)),
        "delta_realification": float(np.linalg.norm(real_s.T @ real_s
                                                    - np.block([[delta.real, -delta.imag],
                                                                [delta.imag, delta.real]]), 2)),
    }
    return ModularData(g, s, j, delta, f.density, residuals)


def density_power(rho: Element, z: complex) -> Element:
    """``rho^z`` for an invertible positive density, blockwise via eigh."""
    blocks = []
    for b in rho.blocks:
        w, v = np.linalg.eigh(0.5 * (b + b.conj().T))
        if np.any(w <= 0):
            raise NotFaithful("density is not invertible")
        blocks.append((v * w.astype(complex) ** z) @ v.conj().T)
    return Element(rho.algebra, blocks)


def modular_flow(f: FunctionalSpec, a: Element, t: float) -> Element:
    """``sigma_t(A) = rho^(-it) A rho^(it)``.

    With this orientation ``z -> phi(A sigma_z(B))`` meets the boundary
    condition on the strip ``0 < Im z < 1``: ``F(t + i) = phi(sigma_t(B) A)``.
    """
    require_faithful(f)
    u = density_power(f.density, 1j * t)
    return u.H @ a @ u


class ModularFlow:
    """Precomputed eigendata of ``rho`` for evaluating many ``sigma_t``."""

    def __init__(self, f: FunctionalSpec):
        require_faithful(f)
        self.functional = f
        self._eig = [np.linalg.eigh(0.5 * (b + b.conj().T)) for b in f.density.blocks]

    def __call__(self, a: Element, t: complex) -> Element:
        blocks = []
        for (w, v), b in zip(self._eig, a.blocks):
            lw = np.log(w)
            phase = np.exp(-1j * t * (lw[:, None] - lw[None, :]))
            blocks.append(v @ (phase * (v.conj().T @ b @ v)) @ v.conj().T)
        return Element(a.algebra, blocks)


def kms_function(f: FunctionalSpec, a: Element, b: Element, z: complex) -> complex:
    """Entire extension ``F_{A,B}(z) = phi(A rho^(-iz) B rho^(iz))``.

    Evaluated in the eigenbasis of ``rho`` as
    ``sum c_k rho_i^(1+iz) rho_j^(-iz) A_ij B_ji``, independently of
    :func:`modular_flow`.
    """
    require_faithful(f)
    total = 0.0j
    for c, rb, ab, bb in zip(f.algebra.trace_weights, f.density.blocks, a.blocks, b.blocks):
        w, v = np.linalg.eigh(0.5 * (rb + rb.conj().T))
        ap, bp = v.conj().T @ ab @ v, v.conj().T @ bb @ v
        lw = np.log(w)
        coeff = np.exp((1 + 1j * z) * lw[:, None] - 1j * z * lw[None, :])
        total += c * np.sum(coeff * ap * bp.T)
    return complex(total)


def kms_check(f: FunctionalSpec, a: Element, b: Element, t_samples, tol: float = 1e-8) -> tuple[float, bool]:
    """Worst deviation of both boundary lines of the modular condition."""
    require_faithful(f)
    flow = ModularFlow(f)
    worst = 0.0
    for t in t_samples:
        sb = flow(b, t)
        worst = max(worst,
                    abs(kms_function(f, a, b, t) - f(a @ sb)),
                    abs(kms_function(f, a, b, t + 1j) - f(sb @ a)))
    return worst, worst <= tol * (1.0 + operator_norm(a) * operator_norm(b))


@dataclass(frozen=True)
class CentralizerData:
    basis: list[Element]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def centralizer(f: FunctionalSpec, rng: np.random.Generator | None = None, samples: int = 10,
                tol: float = 1e-9) -> CentralizerData:
    """Fixed points of the modular flow: solutions of ``[X, rho] = 0``."""
    from .sampling import random_element

    require_faithful(f)
    rho = f.density
    basis = solution_space(f.algebra, lambda x: [x @ rho - rho @ x])
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(samples):
        b = random_element(f.algebra, rng)
        for a in basis:
            if abs(f(a @ b) - f(b @ a)) > tol * (1.0 + operator_norm(b)):
                raise ArithmeticError("centralizer element fails phi(AB) = phi(BA)")
    return CentralizerData(basis)


def centralizer_witness(f: FunctionalSpec, a: Element, threshold: float = 1e-6) -> Element | None:
    """A matrix unit ``B`` with ``|phi(AB) - phi(BA)| > threshold``, if any."""
    best, best_gap = None, threshold
    for e in f.algebra.matrix_units():
        gap = abs(f(a @ e) - f(e @ a))
        if gap > best_gap:
            best, best_gap = e, gap
    return best
