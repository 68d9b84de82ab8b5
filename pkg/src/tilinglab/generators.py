"""Seeded host and random graph constructions.

Hosts ``extremal`` and ``sublinear`` split each part as ``V_i = A_i + B_i``
with the A-block on the lowest indices; A is complete to everything across
parts and there are no B-B edges.  Block sizes are rounded up so the
minimum cross degree is never below the nominal fraction of n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tilinglab.errors import AlphaOutOfRange, EtaTooSmall, GenerationFailed, SizesExceedPart
from tilinglab.mpgraph import PartiteGraph, VertexRef, from_blocks
from tilinglab.rng import make_rng


@dataclass(frozen=True)
class RandomSpec:
    p: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


def gen_random(r: int, n: int, spec: RandomSpec, parts: tuple[int, ...] | None = None) -> PartiteGraph:
    """G_r(n, p): every cross pair independently with probability ``spec.p``.

    With ``parts`` given, edges are only sampled between those parts (the
    other parts stay isolated); this is how G_{r-1}(V_2, ..., V_r, p) is built.
    Each block (i, j) uses its own stream derived from (seed, i, j).
    """
    parts = tuple(range(r)) if parts is None else tuple(sorted(parts))
    blocks = {}
    for a, i in enumerate(parts):
        for j in parts[a + 1:]:
            rng = make_rng(spec.seed, i, j)
            blocks[(i, j)] = rng.random((n, n)) < spec.p
    return from_blocks(r, n, blocks)


def _split_host(r: int, n: int, a_size: int) -> PartiteGraph:
    a = np.zeros(n, dtype=bool)
    a[:a_size] = True
    block = a[:, None] | a[None, :]
    return from_blocks(r, n, {(i, j): block for i in range(r) for j in range(i + 1, r)})


def extremal_a_size(n: int, alpha: float) -> int:
    # small guard so alpha*n landing exactly on an integer is not bumped up by float noise
    return math.ceil(alpha * n - 1e-9)


def gen_extremal(r: int, n: int, alpha: float) -> PartiteGraph:
    """Lower-bound host: |A_i| = ceil(alpha n), (B_i, B_j) empty."""
    if not 0.0 < alpha < 1.0 / r:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1/r) = (0, {1 / r:.4g}), got {alpha}")
    a_size = extremal_a_size(n, alpha)
    if a_size < 1:
        raise AlphaOutOfRange(f"ceil(alpha n) = 0 for alpha={alpha}, n={n}")
    return _split_host(r, n, a_size)


def sublinear_eta(r: int, omega: float) -> float:
    return 1.0 / (3 * r * omega)


def gen_sublinear(r: int, n: int, omega: float) -> PartiteGraph:
    """Sublinear-degree host with |A_i| = ceil(eta n), eta = 1/(3 r omega)."""
    if omega < 1:
        raise ValueError(f"omega must be >= 1, got {omega}")
    a_size = extremal_a_size(n, sublinear_eta(r, omega))
    if a_size < 1:
        raise EtaTooSmall(f"ceil(eta n) = 0 for r={r}, omega={omega}, n={n}")
    return _split_host(r, n, min(a_size, n))


def host_a_size(g: PartiteGraph) -> int:
    """Size of the A-block of an extremal/sublinear host (vertices of full degree)."""
    full = (g.r - 1) * g.n
    return sum(1 for v in g.part_vertices(0) if g.degree(v) == full)


def gen_superregular_star(r: int, n: int, d: float, spec: RandomSpec, max_retries: int = 50) -> PartiteGraph:
    """Star-shaped fixture: (V_1, V_i) random with density min(2d, 1), V_2..V_r mutually empty.

    Rows and columns whose degree is not strictly above d*n are redrawn until
    every vertex of every pair (V_1, V_i) satisfies deg > d*n.
    ``spec.p`` is ignored; only the seed is used.
    """
    if not 0.0 < d < 1.0:
        raise ValueError(f"d must lie in (0, 1), got {d}")
    density = min(2 * d, 1.0)
    need = d * n
    blocks = {}
    for i in range(1, r):
        rng = make_rng(spec.seed, 0, i)
        block = rng.random((n, n)) < density
        for _ in range(max_retries):
            bad_rows = np.flatnonzero(block.sum(axis=1) <= need)
            bad_cols = np.flatnonzero(block.sum(axis=0) <= need)
            if not len(bad_rows) and not len(bad_cols):
                break
            if len(bad_rows):
                block[bad_rows] = rng.random((len(bad_rows), n)) < density
            if len(bad_cols):
                block[:, bad_cols] = rng.random((n, len(bad_cols))) < density
        else:
            raise GenerationFailed(f"degree condition not met after {max_retries} resamples (pair 1-{i + 1})")
        blocks[(0, i)] = block
    return from_blocks(r, n, blocks)


def random_slice(g: PartiteGraph, part: int, sizes: list[int], seed: int) -> list[list[VertexRef]]:
    """Uniformly random disjoint subsets of ``part`` with the requested sizes."""
    if any(s < 0 for s in sizes) or sum(sizes) > g.n:
        raise SizesExceedPart(f"sizes {sizes} do not fit in a part of size {g.n}")
    perm = make_rng(seed, part).permutation(g.n)
    out, start = [], 0
    for s in sizes:
        out.append(sorted(VertexRef(part, int(i)) for i in perm[start:start + s]))
        start += s
    return out


def gen_min_degree_host(r: int, n: int, p: float, min_degree: int, seed: int) -> PartiteGraph:
    """G_r(n, p) topped up with random extra edges until delta* >= min_degree.

    For every block, each deficient row gets uniformly random missing columns
    and then each deficient column gets random missing rows; adding edges never
    lowers a degree, so one pass of each suffices.
    """
    if not 0 <= min_degree <= n:
        raise ValueError(f"min_degree must lie in [0, n], got {min_degree}")
    blocks = {}
    for i in range(r):
        for j in range(i + 1, r):
            block = make_rng(seed, i, j).random((n, n)) < p
            rng = make_rng(seed, 0x746F70, i, j)
            for view in (block, block.T):
                for row in np.flatnonzero(view.sum(axis=1) < min_degree):
                    missing = np.flatnonzero(~view[row])
                    need = min_degree - int(view[row].sum())
                    view[row, rng.choice(missing, size=need, replace=False)] = True
            blocks[(i, j)] = block
    return from_blocks(r, n, blocks)
