"""K_r-tiling search: clique enumeration, exact cover, greedy partial tiling,
Hall matchings and exact hypergraph perfect matching.

The exact searches are Algorithm X over dict-of-sets with fail-first
branching (uncovered item with the fewest live rows, ties to the lowest id).
The perfect-tiling search additionally prunes with an LP relaxation: a float
LP proposes a Farkas vector, which is rounded to rationals and re-checked
exactly before any subtree is discarded, so pruning never relies on
floating-point tolerance.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from tilinglab.errors import BudgetExceeded, SizeMismatch
from tilinglab.mpgraph import PartiteGraph, VertexRef, iter_bits
from tilinglab.rng import make_rng

DEFAULT_CLIQUE_CAP = 5_000_000


@dataclass(frozen=True)
class Tiling:
    """Vertex-disjoint transversal cliques; each copy is a tuple of global ids, one per part."""

    r: int
    n: int
    copies: tuple[tuple[int, ...], ...]

    @property
    def covered(self) -> frozenset[int]:
        return frozenset(v for c in self.copies for v in c)

    @property
    def is_perfect(self) -> bool:
        return len(self.covered) == self.r * self.n

    def leftover(self) -> list[int]:
        """Uncovered vertex count per part."""
        return [self.n - len(self.copies)] * self.r

    def uncovered(self) -> list[int]:
        cov = self.covered
        return [v for v in range(self.r * self.n) if v not in cov]

    def as_refs(self) -> list[list[VertexRef]]:
        return [[VertexRef(*divmod(v, self.n)) for v in c] for c in self.copies]

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "n": self.n,
            "perfect": self.is_perfect,
            "copies": [[f"{p + 1}:{i + 1}" for p, i in c] for c in self.as_refs()],
            "digest": tiling_digest(self),
        }


def tiling_digest(t: Tiling) -> str:
    canon = sorted(tuple(c) for c in t.copies)
    return hashlib.sha256(json.dumps([t.r, t.n, canon]).encode()).hexdigest()[:16]


def tiling_problems(g: PartiteGraph, t: Tiling, require_perfect: bool = True) -> list[str]:
    """Independent re-validation; returns a list of violations (empty if valid)."""
    problems = []
    if (t.r, t.n) != (g.r, g.n):
        problems.append("shape mismatch")
        return problems
    seen: set[int] = set()
    for c in t.copies:
        if len(c) != g.r or sorted(g.part_of(v) for v in c) != list(range(g.r)):
            problems.append(f"copy {c} is not one vertex per part")
            continue
        for a in range(len(c)):
            for b in range(a + 1, len(c)):
                if not g.has_edge(c[a], c[b]):
                    problems.append(f"copy {c} misses edge {c[a]}-{c[b]}")
        for v in c:
            if v in seen:
                problems.append(f"vertex {v} covered twice")
            seen.add(v)
    if require_perfect and len(seen) != g.num_vertices:
        problems.append(f"covers {len(seen)} of {g.num_vertices} vertices")
    return problems


def validate_tiling(g: PartiteGraph, t: Tiling, require_perfect: bool = True) -> bool:
    return not tiling_problems(g, t, require_perfect)


# -- clique enumeration -----------------------------------------------------

def iter_kr(g: PartiteGraph, fixed: dict[int, int] | None = None):
    """Yield transversal cliques as global-id tuples in lexicographic order.

    ``fixed`` optionally pins some parts to a given vertex index.
    """
    n, r = g.n, g.r
    fixed = fixed or {}
    full = (1 << n) - 1

    def rec(part, chosen, cand_masks):
        if part == r:
            yield tuple(chosen)
            return
        mask = cand_masks[part]
        if part in fixed:
            mask &= 1 << fixed[part]
        for idx in iter_bits(mask):
            v = part * n + idx
            nxt = list(cand_masks)
            ok = True
            for q in range(part + 1, r):
                nxt[q] = cand_masks[q] & g.nbr_mask(v, q)
                if not nxt[q]:
                    ok = False
                    break
            if ok:
                chosen.append(v)
                yield from rec(part + 1, chosen, nxt)
                chosen.pop()

    yield from rec(0, [], [full] * r)


def enumerate_kr(g: PartiteGraph, cap: int = DEFAULT_CLIQUE_CAP) -> tuple[list[tuple[int, ...]], bool]:
    """All transversal K_r copies, up to ``cap``; returns (copies, truncated)."""
    out = []
    for c in iter_kr(g):
        if len(out) >= cap:
            return out, True
        out.append(c)
    return out, False


def count_kr(g: PartiteGraph) -> int:
    return sum(1 for _ in iter_kr(g))


# -- exact cover engine -----------------------------------------------------

@dataclass
class CoverSearch:
    """Algorithm X over ``items`` with ``rows`` (each a tuple of items).

    ``prune(uncovered_items, live_row_ids)`` may return True to discard a
    subtree; it must be sound (only return True when no exact cover exists).
    It may instead return a dict of row weights, used to order the branches.
    """

    items: Sequence[Hashable]
    rows: Sequence[tuple]
    budget: int = 1_000_000
    prune: Callable[[list, set], bool] | None = None
    prune_depth: int = 0
    expansions: int = 0
    pruned: int = 0
    _key: dict = field(default_factory=dict)

    def solve(self) -> list[int] | None:
        cols: dict = {i: set() for i in self.items}
        for rid, row in enumerate(self.rows):
            if all(i in cols for i in row):
                for i in row:
                    cols[i].add(rid)
        self._key = {item: k for k, item in enumerate(sorted(cols))}
        return self._search(cols, [], 0)

    def _search(self, cols, partial, depth):
        if not cols:
            return list(partial)
        self.expansions += 1
        if self.expansions > self.budget:
            raise BudgetExceeded(self.expansions)
        key = self._key
        c = min(cols, key=lambda i: (len(cols[i]), key[i]))
        if not cols[c]:
            return None
        options = sorted(cols[c])
        if self.prune is not None and depth <= self.prune_depth and len(options) > 1:
            live = set().union(*cols.values())
            verdict = self.prune(list(cols), live)
            if verdict is True:
                self.pruned += 1
                return None
            if verdict:
                # LP weights as a value-ordering hint; ties keep id order
                options.sort(key=lambda rid: -verdict.get(rid, 0.0))
        for rid in options:
            partial.append(rid)
            removed = self._select(cols, rid)
            found = self._search(cols, partial, depth + 1)
            self._deselect(cols, rid, removed)
            partial.pop()
            if found is not None:
                return found
        return None

    def _select(self, cols, rid):
        removed = []
        for j in self.rows[rid]:
            for i in cols[j]:
                for k in self.rows[i]:
                    if k != j and k in cols:
                        cols[k].discard(i)
            removed.append((j, cols.pop(j)))
        return removed

    def _deselect(self, cols, rid, removed):
        for j, col in reversed(removed):
            cols[j] = col
            for i in col:
                for k in self.rows[i]:
                    if k != j and k in cols:
                        cols[k].add(i)


def lp_relaxation(items: list, rows: Sequence[tuple], live: Iterable[int]):
    """Fractional exact-cover check of ``items`` by the ``live`` rows.

    Returns True when an exactly verified Farkas vector proves that no exact
    cover exists, otherwise a dict ``row id -> LP weight`` (possibly empty).

    Solves min sum(s) s.t. A w + s = 1, w, s >= 0 with HiGHS; a positive optimum
    comes with duals y satisfying y.A_j <= 0 and y.1 > 0.  The duals are rounded
    to small-denominator rationals and both conditions re-checked exactly.
    """
    from scipy.optimize import linprog
    from scipy.sparse import csc_matrix, hstack, identity

    live = sorted(live)
    index = {item: k for k, item in enumerate(items)}
    m = len(items)
    data, ri, ci = [], [], []
    for col, rid in enumerate(live):
        for it in rows[rid]:
            ri.append(index[it])
            ci.append(col)
            data.append(1.0)
    a = csc_matrix((data, (ri, ci)), shape=(m, len(live)))
    a_eq = hstack([a, identity(m, format="csc")], format="csc")
    cost = np.concatenate([np.zeros(len(live)), np.ones(m)])
    res = linprog(cost, A_eq=a_eq, b_eq=np.ones(m), bounds=(0, None), method="highs")
    if res.status != 0:
        return {}
    if res.fun < 1e-7:
        return {rid: float(w) for rid, w in zip(live, res.x[: len(live)]) if w > 1e-9}
    y = res.eqlin.marginals
    for sign in (1, -1):
        cert = [Fraction(float(sign * v)).limit_denominator(1000) for v in y]
        if sum(cert) <= 0:
            continue
        if all(sum(cert[index[it]] for it in rows[rid]) <= 0 for rid in live):
            return True
    return {}


# -- perfect K_r-tiling -----------------------------------------------------

@dataclass
class TilingSearchStats:
    cliques: int = 0
    expansions: int = 0
    pruned: int = 0


def exact_perfect_tiling(
    g: PartiteGraph,
    budget: int = 200_000,
    clique_cap: int = DEFAULT_CLIQUE_CAP,
    use_lp: bool = True,
    lp_depth: int = 1_000,
    stats: TilingSearchStats | None = None,
) -> Tiling | None:
    """Decide whether ``g`` has a perfect K_r-tiling.

    Returns a perfect :class:`Tiling`, or ``None`` when the exhaustive search
    proved that none exists.  Raises :class:`BudgetExceeded` when the node
    budget runs out or the clique enumeration was truncated (a truncated list
    can never support a "no tiling" verdict).
    """
    stats = stats if stats is not None else TilingSearchStats()
    cliques, truncated = enumerate_kr(g, cap=clique_cap)
    stats.cliques = len(cliques)
    if truncated:
        raise BudgetExceeded(0, reason=f"clique cap {clique_cap}")
    search = CoverSearch(
        items=list(range(g.num_vertices)),
        rows=cliques,
        budget=budget,
        prune=(lambda items, live: lp_relaxation(items, cliques, live)) if use_lp else None,
        prune_depth=lp_depth,
    )
    try:
        found = search.solve()
    finally:
        stats.expansions, stats.pruned = search.expansions, search.pruned
    if found is None:
        return None
    return Tiling(g.r, g.n, tuple(sorted(cliques[i] for i in found)))


def brute_force_perfect_tiling(g: PartiteGraph) -> bool:
    """Oracle: try every n-subset of transversal cliques (tiny graphs only)."""
    import itertools

    cliques = list(iter_kr(g))
    for combo in itertools.combinations(cliques, g.n):
        if len({v for c in combo for v in c}) == g.num_vertices:
            return True
    return False


def greedy_partial_tiling(g: PartiteGraph, seed: int, clique_cap: int = DEFAULT_CLIQUE_CAP) -> Tiling:
    """Random greedy K_r-tiling, maximal by inclusion.

    Scanning the cliques in a uniformly random order and keeping every one
    disjoint from those already kept is the same process as repeatedly picking
    a uniform clique among those still available.
    """
    cliques, truncated = enumerate_kr(g, cap=clique_cap)
    if truncated:
        raise BudgetExceeded(0, reason=f"clique cap {clique_cap}")
    order = make_rng(seed, 0x6772).permutation(len(cliques))
    used = 0
    chosen = []
    for k in order:
        c = cliques[k]
        m = 0
        for v in c:
            m |= 1 << v
        if not used & m:
            used |= m
            chosen.append(c)
    return Tiling(g.r, g.n, tuple(sorted(chosen)))


# -- bipartite matching -----------------------------------------------------

@dataclass(frozen=True)
class HallResult:
    """Either ``matching`` (left -> right) or a Hall-violating ``witness`` S with |N(S)| < |S|."""

    matching: dict | None
    witness: frozenset | None = None
    witness_neighborhood: frozenset | None = None

    @property
    def perfect(self) -> bool:
        return self.matching is not None


def maximum_matching(left: Sequence, adj: dict) -> dict:
    """Augmenting-path maximum matching; returns left -> right."""
    match_r: dict = {}
    match_l: dict = {}
    for u in left:
        # iterative DFS for an augmenting path from u
        parent: dict = {}
        stack = [(u, iter(adj.get(u, ())))]
        visited = set()
        end = None
        while stack and end is None:
            x, it = stack[-1]
            for y in it:
                if y in visited:
                    continue
                visited.add(y)
                parent[y] = x
                if y not in match_r:
                    end = y
                    break
                stack.append((match_r[y], iter(adj.get(match_r[y], ()))))
                break
            else:
                stack.pop()
        if end is None:
            continue
        y = end
        while True:
            x = parent[y]
            prev = match_l.get(x)
            match_l[x] = y
            match_r[y] = x
            if x == u:
                break
            y = prev
    return match_l


def hall_perfect_matching(left: Iterable, right: Iterable, adj) -> HallResult:
    left = list(left)
    right = list(right)
    if len(left) != len(right):
        raise SizeMismatch(f"|left|={len(left)} != |right|={len(right)}")
    right_set = set(right)
    if callable(adj):
        adj = {u: [v for v in right if adj(u, v)] for u in left}
    adj = {u: [v for v in adj.get(u, ()) if v in right_set] for u in left}
    match = maximum_matching(left, adj)
    if len(match) == len(left):
        return HallResult(matching=match)
    match_r = {v: u for u, v in match.items()}
    root = next(u for u in left if u not in match)
    s, nbrs = {root}, set()
    frontier = [root]
    while frontier:
        u = frontier.pop()
        for v in adj[u]:
            if v not in nbrs:
                nbrs.add(v)
                w = match_r[v]  # matched, otherwise the matching was not maximum
                if w not in s:
                    s.add(w)
                    frontier.append(w)
    return HallResult(matching=None, witness=frozenset(s), witness_neighborhood=frozenset(nbrs))


# -- hypergraph perfect matching --------------------------------------------

def exact_hypergraph_matching(h, budget: int = 1_000_000) -> list[tuple] | None:
    """Exact perfect matching of an (r-1)-partite hypergraph with equal sides.

    ``h`` needs ``sides`` (sequence of vertex collections) and ``hyperedges``
    (tuples with one vertex per side).  Returns the matching, ``None`` if none
    exists, or raises :class:`BudgetExceeded`.
    """
    sizes = {len(s) for s in h.sides}
    if len(sizes) > 1:
        raise SizeMismatch(f"hypergraph sides have sizes {sorted(len(s) for s in h.sides)}")
    items = [v for side in h.sides for v in side]
    if not items:
        return []
    edges = list(h.hyperedges)
    found = CoverSearch(items=items, rows=edges, budget=budget).solve()
    if found is None:
        return None
    return sorted(edges[i] for i in found)
