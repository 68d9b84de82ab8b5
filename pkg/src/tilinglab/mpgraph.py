"""Balanced r-partite graphs with cross-part adjacency.

Vertices are addressed either by a :class:`VertexRef` ``(part, index)`` or by a
global id ``part * n + index``; both are 0-based.  The text format is 1-based
and the conversion happens only in :func:`serialize` / :func:`deserialize`.

Adjacency is one Python ``int`` bitset per vertex over the ``r * n`` global
ids, so neighbourhood intersections are single ``&`` operations.
"""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from tilinglab.errors import (
    IndexOutOfRange,
    IntraPartEdge,
    ParseError,
    ShapeMismatch,
    TargetInSet,
)


class VertexRef(NamedTuple):
    part: int
    index: int


class PairStats(NamedTuple):
    density: Fraction
    min_degree_ab: int
    min_degree_ba: int


@dataclass(frozen=True, eq=True)
class PartiteGraph:
    r: int
    n: int
    adj: tuple[int, ...]

    def __post_init__(self):
        if self.r < 2 or self.n < 1:
            raise ValueError(f"need r >= 2 and n >= 1, got r={self.r} n={self.n}")
        if len(self.adj) != self.r * self.n:
            raise ValueError("adjacency length must equal r*n")

    # -- addressing ---------------------------------------------------------
    @property
    def num_vertices(self) -> int:
        return self.r * self.n

    def vid(self, v) -> int:
        """Global id of a VertexRef (ints pass through)."""
        if isinstance(v, (int, np.integer)):
            return int(v)
        part, index = v
        return part * self.n + index

    def ref(self, vid: int) -> VertexRef:
        return VertexRef(*divmod(vid, self.n))

    def part_of(self, vid: int) -> int:
        return vid // self.n

    def part_mask(self, part: int) -> int:
        return ((1 << self.n) - 1) << (part * self.n)

    def part_vertices(self, part: int) -> range:
        return range(part * self.n, (part + 1) * self.n)

    # -- queries ------------------------------------------------------------
    def has_edge(self, u, v) -> bool:
        return bool(self.adj[self.vid(u)] >> self.vid(v) & 1)

    def nbr_mask(self, v, part: int) -> int:
        """Neighbours of ``v`` inside ``part`` as an n-bit mask (bit i = index i)."""
        return (self.adj[self.vid(v)] >> (part * self.n)) & ((1 << self.n) - 1)

    def degree(self, v, part: int | None = None) -> int:
        if part is None:
            return self.adj[self.vid(v)].bit_count()
        return self.nbr_mask(v, part).bit_count()

    def deg_into(self, v, vertices_mask: int) -> int:
        """Number of neighbours of ``v`` inside a global-id mask."""
        return (self.adj[self.vid(v)] & vertices_mask).bit_count()

    @property
    def num_edges(self) -> int:
        return sum(a.bit_count() for a in self.adj) // 2

    def edges(self) -> list[tuple[VertexRef, VertexRef]]:
        """All edges ``(u, v)`` with ``u < v``, sorted lexicographically."""
        out = []
        for u in range(self.num_vertices):
            higher = self.adj[u] >> (u + 1)
            for v in iter_bits(higher, offset=u + 1):
                out.append((self.ref(u), self.ref(v)))
        return out

    def pair_stats(self, a_vertices: Iterable, b_vertices: Iterable) -> PairStats:
        a_ids = [self.vid(v) for v in a_vertices]
        b_ids = [self.vid(v) for v in b_vertices]
        a_mask = mask_of(a_ids)
        b_mask = mask_of(b_ids)
        if a_mask & b_mask:
            raise ValueError("pair sets must be disjoint")
        deg_a = [self.deg_into(a, b_mask) for a in a_ids]
        deg_b = [self.deg_into(b, a_mask) for b in b_ids]
        total = len(a_ids) * len(b_ids)
        density = Fraction(sum(deg_a), total) if total else Fraction(0)
        return PairStats(density, min(deg_a, default=0), min(deg_b, default=0))

    def density(self, a_vertices: Iterable, b_vertices: Iterable) -> Fraction:
        return self.pair_stats(a_vertices, b_vertices).density

    def min_cross_degree(self) -> int:
        """delta*: min over ordered part pairs (i, j) of min_{v in V_i} deg(v, V_j)."""
        best = self.n
        for i in range(self.r):
            for v in self.part_vertices(i):
                for j in range(self.r):
                    if j != i:
                        best = min(best, self.degree(v, j))
        return best

    def common_neighbors(self, s: Iterable, target: int) -> set[VertexRef]:
        ids = [self.vid(v) for v in s]
        if any(self.part_of(v) == target for v in ids):
            raise TargetInSet(f"part {target} contains a vertex of s")
        mask = (1 << self.n) - 1
        for v in ids:
            mask &= self.nbr_mask(v, target)
        return {VertexRef(target, i) for i in iter_bits(mask)}

    def common_mask(self, ids: Iterable[int], target: int) -> int:
        """n-bit mask of vertices in ``target`` adjacent to all of ``ids``."""
        mask = (1 << self.n) - 1
        for v in ids:
            mask &= self.nbr_mask(v, target)
        return mask

    # -- derived graphs -----------------------------------------------------
    def union(self, other: PartiteGraph) -> PartiteGraph:
        if (self.r, self.n) != (other.r, other.n):
            raise ShapeMismatch(
                f"cannot union r={self.r},n={self.n} with r={other.r},n={other.n}"
            )
        return PartiteGraph(self.r, self.n, tuple(a | b for a, b in zip(self.adj, other.adj)))

    def __or__(self, other: PartiteGraph) -> PartiteGraph:
        return self.union(other)

    def induced(self, index_sets: list[Iterable[int]]) -> PartiteGraph:
        """Balanced subgraph on the given per-part index sets (all equal size).

        Indices are relabelled in increasing order within each part.
        """
        sets = [sorted(s) for s in index_sets]
        if len(sets) != self.r or len({len(s) for s in sets}) != 1:
            raise ShapeMismatch("need one index set per part, all of equal size")
        m = len(sets[0])
        new_id = {}
        for p, s in enumerate(sets):
            for k, idx in enumerate(s):
                new_id[p * self.n + idx] = p * m + k
        adj = [0] * (self.r * m)
        for old, new in new_id.items():
            bits = 0
            for w in iter_bits(self.adj[old]):
                if w in new_id:
                    bits |= 1 << new_id[w]
            adj[new] = bits
        return PartiteGraph(self.r, m, tuple(adj))

    def __repr__(self) -> str:
        return f"PartiteGraph(r={self.r}, n={self.n}, edges={self.num_edges})"


def iter_bits(mask: int, offset: int = 0):
    """Yield positions of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1 + offset
        mask ^= low


def mask_of(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def build_graph(r: int, n: int, edges: Iterable) -> PartiteGraph:
    """Graph with exactly the given edges (pairs of VertexRef or global ids)."""
    adj = [0] * (r * n)
    for u, v in edges:
        u = VertexRef(*u) if not isinstance(u, (int, np.integer)) else VertexRef(*divmod(int(u), n))
        v = VertexRef(*v) if not isinstance(v, (int, np.integer)) else VertexRef(*divmod(int(v), n))
        for w in (u, v):
            if not (0 <= w.part < r and 0 <= w.index < n):
                raise IndexOutOfRange(f"vertex {w} outside r={r}, n={n}")
        if u.part == v.part:
            raise IntraPartEdge(f"edge {u}-{v} joins two vertices of part {u.part}")
        a, b = u.part * n + u.index, v.part * n + v.index
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    return PartiteGraph(r, n, tuple(adj))


def empty_graph(r: int, n: int) -> PartiteGraph:
    return PartiteGraph(r, n, (0,) * (r * n))


def complete_graph(r: int, n: int) -> PartiteGraph:
    everything = (1 << (r * n)) - 1
    part = (1 << n) - 1
    adj = tuple(everything & ~(part << (v // n * n)) for v in range(r * n))
    return PartiteGraph(r, n, adj)


def from_blocks(r: int, n: int, blocks: dict[tuple[int, int], np.ndarray]) -> PartiteGraph:
    """Assemble a graph from boolean n x n blocks keyed by part pairs (i < j).

    ``blocks[(i, j)][a, b]`` is the edge between (i, a) and (j, b).
    """
    adj = [0] * (r * n)
    for (i, j), block in blocks.items():
        if i == j:
            raise IntraPartEdge(f"block ({i}, {i}) is intra-part")
        if i > j:
            i, j, block = j, i, np.asarray(block).T
        block = np.asarray(block, dtype=bool)
        rows = _rows_to_ints(block)
        cols = _rows_to_ints(block.T)
        for a in range(n):
            adj[i * n + a] |= rows[a] << (j * n)
            adj[j * n + a] |= cols[a] << (i * n)
    return PartiteGraph(r, n, tuple(adj))


def _rows_to_ints(block: np.ndarray) -> list[int]:
    packed = np.packbits(block, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


# -- text format ------------------------------------------------------------

def serialize(g: PartiteGraph) -> bytes:
    buf = io.StringIO()
    buf.write(f"r={g.r} n={g.n}\n")
    for u, v in g.edges():
        buf.write(f"{u.part + 1}:{u.index + 1} {v.part + 1}:{v.index + 1}\n")
    return buf.getvalue().encode("ascii")


def deserialize(data: bytes | str) -> PartiteGraph:
    text = data.decode("ascii") if isinstance(data, (bytes, bytearray)) else data
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            header = _parse_header(line, lineno)
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected two endpoints, got {line!r}", lineno)
        u, v = (_parse_endpoint(f, lineno) for f in fields)
        edges.append((u, v, lineno))
    if header is None:
        raise ParseError("missing 'r=<int> n=<int>' header", max(1, len(text.splitlines())))
    r, n = header
    checked = []
    for u, v, lineno in edges:
        for w in (u, v):
            if not (0 <= w.part < r and 0 <= w.index < n):
                raise ParseError(f"vertex {w.part + 1}:{w.index + 1} out of range", lineno)
        if u.part == v.part:
            raise ParseError(f"intra-part edge {u.part + 1}:{u.index + 1}", lineno)
        checked.append((u, v))
    return build_graph(r, n, checked)


def _parse_header(line: str, lineno: int) -> tuple[int, int]:
    try:
        kv = dict(tok.split("=", 1) for tok in line.split())
        r, n = int(kv["r"]), int(kv["n"])
    except (ValueError, KeyError):
        raise ParseError(f"bad header {line!r}", lineno) from None
    if r < 2 or n < 1:
        raise ParseError(f"header needs r >= 2 and n >= 1, got {line!r}", lineno)
    return r, n


def _parse_endpoint(tok: str, lineno: int) -> VertexRef:
    try:
        part, index = tok.split(":")
        return VertexRef(int(part) - 1, int(index) - 1)
    except ValueError:
        raise ParseError(f"bad endpoint {tok!r}", lineno) from None


def all_transversals(g: PartiteGraph):
    """Every (v_1, ..., v_r) with one global id per part, in lexicographic order."""
    return itertools.product(*(g.part_vertices(i) for i in range(g.r)))
