"""Star-tiling pipeline: perfect K_r-tilings of a star-shaped host plus a sparse random graph.

The host has dense pairs (V_1, V_i) for i >= 2 and nothing among V_2..V_r;
random edges are added on V_2..V_r only.  The pipeline:

1. reveals two independent random (r-1)-partite graphs G1, G2 at p/2 each;
2. builds the auxiliary hypergraph F of (r-1)-tuples with at least
   (d/2)^(r-1) |V_1| common neighbours in V_1, keeps the tuples that form a
   clique in G1, and runs a random greedy matching M of size (1 - delta) n;
3. on the leftover vertices builds F', keeps the G2-cliques, and finds a
   perfect matching M' exactly;
4. gives every m in M' a distinct common neighbour in V_1, lowest index first;
5. matches the rest of V_1 to M through the bipartite graph B(V_1, M) via Hall;
6. glues each matched (v, m) into a K_r and re-validates the whole tiling.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from tilinglab.errors import BudgetExceeded, TupleSpaceTooLarge
from tilinglab.generators import RandomSpec, gen_random
from tilinglab.mpgraph import PartiteGraph, iter_bits, mask_of
from tilinglab.rng import derive_seed, make_rng
from tilinglab.tiler import Tiling, exact_hypergraph_matching, hall_perfect_matching, tiling_problems

TUPLE_CAP = 2_000_000

STAGES = ("greedy_stall", "no_M_prime", "greedy_V1_exhausted", "hall_deficient")


@dataclass(frozen=True)
class AuxHypergraph:
    """(r-1)-partite hypergraph on V_2..V_r (global ids); ``base_set`` is X within V_1."""

    sides: tuple[tuple[int, ...], ...]
    hyperedges: tuple[tuple[int, ...], ...]
    threshold: float
    base_set: frozenset[int]

    def degrees(self) -> dict[int, int]:
        deg = {v: 0 for side in self.sides for v in side}
        for e in self.hyperedges:
            for v in e:
                deg[v] += 1
        return deg

    def min_degree(self) -> int:
        return min(self.degrees().values(), default=0)

    def __len__(self) -> int:
        return len(self.hyperedges)


@dataclass(frozen=True)
class AuxBipartite:
    left: tuple[int, ...]
    right: tuple[tuple[int, ...], ...]
    adj: dict[int, tuple[int, ...]]  # left vertex -> indices into ``right``

    def right_degree(self, k: int) -> int:
        return sum(1 for v in self.left if k in self.adj[v])


@dataclass(frozen=True)
class PipelineConfig:
    d: float
    delta: float
    p: float
    seed: int
    attempts: int = 64  # greedy restarts over the same G1, G2
    hall_budget: int = 1_000_000

    def __post_init__(self):
        if not 0 < self.d < 1:
            raise ValueError(f"d must lie in (0, 1), got {self.d}")
        if not 0 < self.delta <= self.d / 2:
            raise ValueError(f"need 0 < delta <= d/2, got delta={self.delta}, d={self.d}")
        if not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.attempts < 1:
            raise ValueError("attempts must be >= 1")


def aux_threshold(d: float, r: int, x_size: int) -> float:
    return (d / 2) ** (r - 1) * x_size


def build_aux_hypergraph(g: PartiteGraph, x: set[int] | None, d: float,
                         sides: list[list[int]] | None = None, cap: int = TUPLE_CAP) -> AuxHypergraph:
    """F_X[sides]: tuples with at least (d/2)^(r-1) |X| common neighbours in X (X defaults to V_1)."""
    n, r = g.n, g.r
    x = set(g.part_vertices(0)) if x is None else {g.vid(v) for v in x}
    if not x:
        raise ValueError("X must be nonempty")
    sides = [list(g.part_vertices(i)) for i in range(1, r)] if sides is None else [sorted(s) for s in sides]
    size = math.prod(len(s) for s in sides)
    if size > cap:
        raise TupleSpaceTooLarge(f"{size} tuples exceeds cap {cap}")
    x_mask = 0
    for v in x:
        x_mask |= 1 << (v % n)
    thr = aux_threshold(d, r, len(x))
    edges = []

    def rec(k, chosen, mask):
        if k == len(sides):
            edges.append(tuple(chosen))
            return
        for v in sides[k]:
            m = mask & g.nbr_mask(v, 0)
            if m.bit_count() >= thr:
                chosen.append(v)
                rec(k + 1, chosen, m)
                chosen.pop()

    rec(0, [], x_mask)
    return AuxHypergraph(tuple(tuple(s) for s in sides), tuple(edges), thr, frozenset(x))


def degree_bound_i(n: int, r: int, eps: float) -> float:
    """(1 - (r-2) eps) n^(r-2): the minimum-degree floor of F over super-regular pairs."""
    return (1 - (r - 2) * eps) * n ** (r - 2)


def degree_bound_ii(n: int, r: int, eps: float) -> float:
    """(1 - 2(r-2) eps) n^(r-2): the floor met by all but eps n vertices per side in F_X."""
    return (1 - 2 * (r - 2) * eps) * n ** (r - 2)


def low_degree_per_side(f: AuxHypergraph, bound: float) -> list[int]:
    """Per side, the number of vertices of F-degree below ``bound``."""
    deg = f.degrees()
    return [sum(1 for v in side if deg[v] < bound) for side in f.sides]


def aux_edge_ok(g: PartiteGraph, f: AuxHypergraph, e: tuple[int, ...]) -> bool:
    """Exact recount of the common-neighbour condition for one hyperedge."""
    common = g.common_mask(e, 0)
    x_mask = 0
    for v in f.base_set:
        x_mask |= 1 << (v % g.n)
    return (common & x_mask).bit_count() >= f.threshold


def reveal_hyperedges(f: AuxHypergraph, g_random: PartiteGraph) -> AuxHypergraph:
    """Keep hyperedges whose C(r-1, 2) vertex pairs are all edges of ``g_random``."""
    kept = tuple(
        e for e in f.hyperedges
        if all(g_random.has_edge(a, b) for a, b in itertools.combinations(e, 2))
    )
    return AuxHypergraph(f.sides, kept, f.threshold, f.base_set)


@dataclass(frozen=True)
class GreedyMatching:
    edges: tuple[tuple[int, ...], ...]
    stalled: bool


def random_greedy_matching(f: AuxHypergraph, target: int, seed: int, miss_limit: int = 100) -> GreedyMatching:
    """Add uniformly random hyperedges disjoint from the chosen ones until ``target`` or none remain.

    Draws are rejection-sampled from a pool; after ``miss_limit`` consecutive
    rejections (live fraction likely below 1%) the pool is compacted to the
    live edges, so each accepted edge is uniform over the live ones.
    """
    rng = make_rng(seed, 0x6D61)
    edges = f.hyperedges
    masks = [mask_of(e) for e in edges]
    pool = list(range(len(edges)))
    used = 0
    chosen = []
    misses = 0
    while len(chosen) < target:
        if misses >= miss_limit or not pool:
            pool = [k for k in pool if not masks[k] & used]
            misses = 0
            if not pool:
                return GreedyMatching(tuple(chosen), stalled=True)
        k = pool[int(rng.integers(len(pool)))]
        if masks[k] & used:
            misses += 1
            continue
        used |= masks[k]
        chosen.append(edges[k])
        misses = 0
    return GreedyMatching(tuple(chosen), stalled=False)


def build_aux_bipartite(g: PartiteGraph, matching, left: list[int] | None = None) -> AuxBipartite:
    """B(V_1, M): v ~ m iff v is adjacent to every vertex of m."""
    left = tuple(g.part_vertices(0)) if left is None else tuple(sorted(left))
    right = tuple(tuple(m) for m in matching)
    common = [g.common_mask(m, 0) for m in right]
    adj = {v: tuple(k for k, c in enumerate(common) if c >> (v % g.n) & 1) for v in left}
    return AuxBipartite(left, right, adj)


def count_good_edge_deficit(matching, f_x: AuxHypergraph) -> int:
    good = set(f_x.hyperedges)
    return sum(1 for m in matching if tuple(m) not in good)


@dataclass
class PipelineResult:
    tiling: Tiling | None
    stage: str | None  # failing stage id, None on success
    trace: dict = field(default_factory=dict)
    witness: frozenset | None = None
    perturbed: PartiteGraph | None = None  # g_star | G1 | G2

    @property
    def perfect(self) -> bool:
        return self.tiling is not None

    def to_json(self) -> dict:
        out = {"perfect": self.perfect, "stage": self.stage, "trace": self.trace}
        if self.tiling is not None:
            out["tiling"] = self.tiling.to_json()
        if self.witness is not None:
            out["hall_witness"] = sorted(int(v) for v in self.witness)
        return out


def leftover_size(n: int, delta: float) -> int:
    """Vertices per side left for M'; at least one so the exact stage is exercised."""
    return max(1, math.ceil(delta * n - 1e-9))


def star_tiling_pipeline(g_star: PartiteGraph, cfg: PipelineConfig) -> PipelineResult:
    r, n = g_star.r, g_star.n
    rand_parts = tuple(range(1, r))
    g1 = gen_random(r, n, RandomSpec(cfg.p / 2, derive_seed(cfg.seed, 1)), parts=rand_parts)
    g2 = gen_random(r, n, RandomSpec(cfg.p / 2, derive_seed(cfg.seed, 2)), parts=rand_parts)
    perturbed = g_star | g1 | g2
    f = build_aux_hypergraph(g_star, None, cfg.d)
    f1 = reveal_hyperedges(f, g1)
    k_left = leftover_size(n, cfg.delta)
    target = n - k_left
    base = {"n": n, "r": r, "F": len(f), "F_revealed": len(f1), "target": target, "attempts": []}

    last = None
    for attempt in range(cfg.attempts):
        res = _attempt(g_star, g2, f1, cfg, target, derive_seed(cfg.seed, 3, attempt))
        base["attempts"].append(res.trace)
        last = res
        if res.perfect:
            break
    last.trace = base
    last.perturbed = perturbed
    if last.tiling is not None:
        problems = tiling_problems(perturbed, last.tiling)
        if problems:  # pragma: no cover - would indicate a bug in the assembly
            raise AssertionError(f"pipeline produced an invalid tiling: {problems[:3]}")
    return last


def _attempt(g_star, g2, f1, cfg, target, seed) -> PipelineResult:
    r, n = g_star.r, g_star.n
    trace: dict = {}
    greedy = random_greedy_matching(f1, target, seed)
    trace["M"] = len(greedy.edges)
    if greedy.stalled:
        return PipelineResult(None, "greedy_stall", trace)
    m = list(greedy.edges)
    covered = {v for e in m for v in e}
    leftovers = [[v for v in g_star.part_vertices(i) if v not in covered] for i in range(1, r)]
    f_prime = build_aux_hypergraph(g_star, None, cfg.d, sides=leftovers)
    f2 = reveal_hyperedges(f_prime, g2)
    trace["F_prime"], trace["F_prime_revealed"] = len(f_prime), len(f2)
    try:
        m_prime = exact_hypergraph_matching(f2, budget=cfg.hall_budget)
    except BudgetExceeded:
        m_prime = None
    if m_prime is None:
        return PipelineResult(None, "no_M_prime", trace)
    trace["M_prime"] = len(m_prime)

    used_v1 = set()
    assigned = []
    for e in m_prime:
        common = g_star.common_mask(e, 0)
        pick = next((v for v in iter_bits(common) if v not in used_v1), None)
        if pick is None:
            return PipelineResult(None, "greedy_V1_exhausted", trace)
        used_v1.add(pick)
        assigned.append((pick, e))
    trace["V1_prime"] = len(used_v1)

    rest = [v for v in g_star.part_vertices(0) if v not in used_v1]
    b = build_aux_bipartite(g_star, m, left=rest)
    hall = hall_perfect_matching(rest, range(len(m)), b.adj)
    if not hall.perfect:
        trace["hall"] = {"witness": len(hall.witness), "neighborhood": len(hall.witness_neighborhood)}
        return PipelineResult(None, "hall_deficient", trace, witness=hall.witness)
    trace["hall"] = "perfect"
    copies = [(v, *m[k]) for v, k in hall.matching.items()] + [(v, *e) for v, e in assigned]
    return PipelineResult(Tiling(r, n, tuple(sorted(copies))), None, trace)
