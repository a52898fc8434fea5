"""Random algebras, elements and states for property sweeps.

All generators take an explicit ``numpy.random.Generator`` so that sweeps
are reproducible from a single seed.
"""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraSpec, Element, trace
from .functionals import FunctionalSpec


def random_algebra(rng: np.random.Generator, max_blocks: int = 3, max_dim: int = 4,
                   unit_weights: bool = False) -> AlgebraSpec:
    k = int(rng.integers(1, max_blocks + 1))
    dims = [int(n) for n in rng.integers(1, max_dim + 1, size=k)]
    weights = [1.0] * k if unit_weights else [float(w) for w in rng.uniform(0.5, 2.0, size=k)]
    return AlgebraSpec(dims, weights)


def _gauss(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def random_element(alg: AlgebraSpec, rng: np.random.Generator, scale: float = 1.0) -> Element:
    return Element(alg, [scale * _gauss(rng, n) / np.sqrt(2 * n) for n in alg.block_dims])


def random_hermitian(alg: AlgebraSpec, rng: np.random.Generator) -> Element:
    a = random_element(alg, rng)
    return (a + a.H) * 0.5


def random_positive(alg: AlgebraSpec, rng: np.random.Generator) -> Element:
    a = random_element(alg, rng)
    return a @ a.H


def random_unitary(alg: AlgebraSpec, rng: np.random.Generator) -> Element:
    blocks = []
    for n in alg.block_dims:
        q, r = np.linalg.qr(_gauss(rng, n))
        d = np.diag(r)
        blocks.append(q * (d / np.abs(d)))
    return Element(alg, blocks)


def random_diagonal(alg: AlgebraSpec, rng: np.random.Generator, real: bool = False) -> Element:
    m = sum(alg.block_dims)
    vals = rng.normal(size=m) if real else rng.normal(size=m) + 1j * rng.normal(size=m)
    return alg.diag(*vals)


def random_projection(alg: AlgebraSpec, rng: np.random.Generator) -> Element:
    u = random_unitary(alg, rng)
    blocks = []
    for n, ub in zip(alg.block_dims, u.blocks):
        r = int(rng.integers(0, n + 1))
        blocks.append(ub[:, :r] @ ub[:, :r].conj().T)
    return Element(alg, blocks)


def random_density(alg: AlgebraSpec, rng: np.random.Generator, faithful: bool = True,
                   min_eig: float = 0.05) -> Element:
    """Positive density with ``tau(F) = 1``.

    Faithful densities have spectrum bounded below by ``min_eig`` before
    normalisation; otherwise every block loses at least one rank when its
    dimension allows it (and at least one block keeps some rank).
    """
    u = random_unitary(alg, rng)
    blocks = []
    for n, ub in zip(alg.block_dims, u.blocks):
        w = rng.uniform(min_eig, 1.0, size=n)
        if not faithful:
            w[rng.random(size=n) < 0.5] = 0.0
            if n > 1 and np.all(w > 0):
                w[0] = 0.0
        blocks.append((ub * w) @ ub.conj().T)
    if all(np.allclose(b, 0) for b in blocks):
        blocks[0] = u.blocks[0][:, :1] @ u.blocks[0][:, :1].conj().T
    rho = Element(alg, blocks)
    return rho / trace(rho).real


def random_state(alg: AlgebraSpec, rng: np.random.Generator, faithful: bool = True) -> FunctionalSpec:
    return FunctionalSpec(random_density(alg, rng, faithful))
