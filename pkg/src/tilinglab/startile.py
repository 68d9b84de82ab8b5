"""Labeled stars, perfect fractional star tilings and Farkas certificates.

A labeled star S*_t(i, j) is a K_{1,r-1} with its center in V_i, a big leaf
in V_j carrying label t, and one small leaf (label 1) in every other part;
the center has label 1.  Leaves need not be adjacent to each other.

A perfect fractional tiling is a weighting ``w >= 0`` with
``sum_S w(S) * label_S(v) = 1`` for every vertex.  It is found (or refuted)
with the exact rational phase-1 simplex in :mod:`tilinglab.simplex`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from tilinglab.errors import EnumerationTruncated
from tilinglab.mpgraph import PartiteGraph, VertexRef, iter_bits
from tilinglab.simplex import phase_one

STAR_CAP = 10_000_000


@dataclass(frozen=True, order=True)
class LabeledStar:
    """Vertices are global ids; ``small_leaves`` are ordered by part."""

    center: int
    big_leaf: int
    small_leaves: tuple[int, ...]
    t: int

    def chi(self) -> dict[int, int]:
        """Label vector restricted to the star's support."""
        out = {self.center: 1, self.big_leaf: self.t}
        for v in self.small_leaves:
            out[v] = 1
        return out

    def vertices(self) -> tuple[int, ...]:
        return (self.center, self.big_leaf, *self.small_leaves)

    def to_json(self, n: int) -> dict:
        def ref(v):
            p, i = divmod(v, n)
            return f"{p + 1}:{i + 1}"

        return {
            "center": ref(self.center),
            "big_leaf": ref(self.big_leaf),
            "small_leaves": [ref(v) for v in self.small_leaves],
            "t": self.t,
        }


@dataclass(frozen=True)
class FractionalTiling:
    weights: dict[LabeledStar, Fraction]

    def load(self, g: PartiteGraph) -> list[Fraction]:
        load = [Fraction(0)] * g.num_vertices
        for star, w in self.weights.items():
            for v, lab in star.chi().items():
                load[v] += w * lab
        return load

    @property
    def support(self) -> list[LabeledStar]:
        return sorted(s for s, w in self.weights.items() if w > 0)


@dataclass(frozen=True)
class FarkasCertificate:
    """``x . chi(S) <= 0`` for every star and ``x . 1 > 0``."""

    x: tuple[Fraction, ...]


def star_is_valid(g: PartiteGraph, s: LabeledStar) -> bool:
    parts = [g.part_of(v) for v in s.vertices()]
    if sorted(parts) != list(range(g.r)) or s.t < 1:
        return False
    return all(g.has_edge(s.center, v) for v in (s.big_leaf, *s.small_leaves))


def iter_stars(g: PartiteGraph, t: int):
    """Stars in deterministic order: (i, j) lexicographic, then center, big leaf, small leaves."""
    if t < 1:
        raise ValueError(f"t must be a positive integer, got {t}")
    n, r = g.n, g.r
    for i in range(r):
        for j in range(r):
            if j == i:
                continue
            others = [k for k in range(r) if k not in (i, j)]
            for c in g.part_vertices(i):
                big = [j * n + x for x in iter_bits(g.nbr_mask(c, j))]
                if not big:
                    continue
                small = [[k * n + x for x in iter_bits(g.nbr_mask(c, k))] for k in others]
                if any(not s for s in small):
                    continue
                for b in big:
                    for leaves in itertools.product(*small):
                        yield LabeledStar(c, b, tuple(leaves), t)


def enumerate_stars(g: PartiteGraph, t: int, cap: int = STAR_CAP) -> list[LabeledStar]:
    out = []
    for s in iter_stars(g, t):
        if len(out) >= cap:
            raise EnumerationTruncated(f"more than {cap} labeled stars")
        out.append(s)
    return out


def solve_fractional(g: PartiteGraph, t: int, cap: int = STAR_CAP) -> FractionalTiling | FarkasCertificate:
    """Exact perfect fractional S*_t-tiling of ``g``, or a Farkas certificate of infeasibility."""
    stars = enumerate_stars(g, t, cap)
    columns = [s.chi() for s in stars]
    res = phase_one(columns, [1] * g.num_vertices)
    if res.feasible:
        return FractionalTiling({stars[k]: w for k, w in sorted(res.w.items())})
    return FarkasCertificate(tuple(res.y))


def verify_fractional(g: PartiteGraph, ft: FractionalTiling) -> bool:
    if any(w < 0 for w in ft.weights.values()):
        return False
    if not all(star_is_valid(g, s) for s in ft.weights):
        return False
    return all(x == 1 for x in ft.load(g))


def verify_certificate(g: PartiteGraph, t: int, cert: FarkasCertificate) -> bool:
    x = cert.x
    if len(x) != g.num_vertices or sum(x) <= 0:
        return False
    for s in iter_stars(g, t):
        if sum(x[v] * lab for v, lab in s.chi().items()) > 0:
            return False
    return True


def guarantee_t_bound(r: int, n: int, alpha: float) -> Fraction:
    """Smallest t the fractional-tiling guarantee asks for: (r-1) floor((1-alpha)n) / ceil(alpha n)."""
    a = Fraction(alpha).limit_denominator(10**9)
    return Fraction((r - 1) * math.floor((1 - a) * n), math.ceil(a * n))


def integralize(ft: FractionalTiling) -> tuple[int, dict[LabeledStar, int]]:
    """Scale rational weights by the lcm D of their denominators."""
    positive = {s: w for s, w in ft.weights.items() if w > 0}
    d = math.lcm(*(w.denominator for w in positive.values())) if positive else 1
    replication = {s: int(w * d) for s, w in positive.items()}
    return d, replication


def replicated_load(g: PartiteGraph, replication: dict[LabeledStar, int]) -> list[int]:
    load = [0] * g.num_vertices
    for s, k in replication.items():
        for v, lab in s.chi().items():
            load[v] += k * lab
    return load


def fractional_to_json(g: PartiteGraph, result) -> dict:
    if isinstance(result, FractionalTiling):
        return {
            "status": "feasible",
            "weights": [
                {"star": s.to_json(g.n), "w": _q(w)} for s, w in sorted(result.weights.items()) if w
            ],
        }
    return {
        "status": "infeasible",
        "certificate": {f"{p + 1}:{i + 1}": _q(v) for (p, i), v in
                        ((VertexRef(*divmod(k, g.n)), v) for k, v in enumerate(result.x))},
    }


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
