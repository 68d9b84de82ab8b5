"""Checkers and a trimming transform for regular and super-regular pairs.

Densities are exact :class:`fractions.Fraction` values.  Exhaustive checking
relies on the fact that for a fixed X the extreme values of d(X, Y) over
|Y| >= k are attained at |Y| = k by the k lowest (or highest) degree vertices
into X, and symmetrically for X; so it suffices to enumerate X of the
threshold size and sort column degrees.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from tilinglab.errors import PartsNotDisjoint, TooManyLowDegreeVertices
from tilinglab.mpgraph import PartiteGraph
from tilinglab.rng import make_rng

EXHAUSTIVE_CAP = 14


@dataclass(frozen=True)
class RegularityParams:
    epsilon: float
    d: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 < self.d < 1:
            raise ValueError(f"d must lie in (0, 1), got {self.d}")


@dataclass
class RegularityReport:
    """Result of :func:`check_superregular`.

    ``witness`` is a pair (X, Y) with |d(A,B) - d(X,Y)| >= epsilon, present
    exactly when ``worst_deviation_found >= epsilon``.  ``violation`` is the
    evidence behind a negative super-regularity verdict: ``("degree", v)`` or
    ``("density", (X, Y))``.
    """

    base_density: Fraction
    worst_deviation_found: Fraction
    min_density_found: Fraction
    mode: str
    samples_taken: int
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    violation: tuple[str, object] | None = None
    degree_ok: bool = True

    def to_json(self) -> dict:
        def q(x):
            return f"{x.numerator}/{x.denominator}"

        out = {
            "base_density": q(self.base_density),
            "worst_deviation_found": q(self.worst_deviation_found),
            "min_density_found": q(self.min_density_found),
            "mode": self.mode,
            "samples_taken": self.samples_taken,
            "degree_ok": self.degree_ok,
            "witness": None if self.witness is None else [list(self.witness[0]), list(self.witness[1])],
        }
        if self.violation is not None:
            kind, data = self.violation
            out["violation"] = {"kind": kind, "data": data if kind == "degree" else [list(data[0]), list(data[1])]}
        return out


def _as_ids(g: PartiteGraph, s) -> list[int]:
    return sorted({g.vid(v) for v in s})


def _single_part(g: PartiteGraph, ids: list[int], name: str) -> int:
    parts = {g.part_of(v) for v in ids}
    if len(parts) != 1:
        raise PartsNotDisjoint(f"{name} must be a nonempty subset of a single part")
    return parts.pop()


def pair_density(g: PartiteGraph, x, y) -> Fraction:
    x, y = _as_ids(g, x), _as_ids(g, y)
    if not x or not y:
        raise ValueError("density of an empty pair is undefined")
    py = g.part_of(y[0])
    ymask = sum(1 << (v % g.n) for v in y)
    e = sum((g.nbr_mask(a, py) & ymask).bit_count() for a in x)
    return Fraction(e, len(x) * len(y))


def check_superregular(g: PartiteGraph, a, b, params: RegularityParams, mode: str = "auto",
                       samples: int = 1000, seed: int = 0,
                       exhaustive_cap: int = EXHAUSTIVE_CAP) -> tuple[RegularityReport, bool]:
    """(epsilon, d)-super-regularity of (A, B).

    The degree clause is exact.  The density clause is exact in exhaustive
    mode and a falsifier in sampled mode: ``False`` is always backed by a
    witness, ``True`` means no violation was found.
    """
    a, b = _as_ids(g, a), _as_ids(g, b)
    if not a or not b:
        raise PartsNotDisjoint("A and B must be nonempty")
    pa, pb = _single_part(g, a, "A"), _single_part(g, b, "B")
    if pa == pb:
        raise PartsNotDisjoint(f"A and B lie in the same part {pa + 1}")
    if mode == "auto":
        mode = "exhaustive" if max(len(a), len(b)) <= exhaustive_cap else "sampled"
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and max(len(a), len(b)) > exhaustive_cap:
        raise ValueError(f"exhaustive mode needs |A|, |B| <= {exhaustive_cap}")

    amask = sum(1 << (v % g.n) for v in a)
    bmask = sum(1 << (v % g.n) for v in b)
    deg_a = {v: (g.nbr_mask(v, pb) & bmask).bit_count() for v in a}
    deg_b = {v: (g.nbr_mask(v, pa) & amask).bit_count() for v in b}
    base = Fraction(sum(deg_a.values()), len(a) * len(b))

    violation = None
    bad = next((v for v in a if not deg_a[v] > params.d * len(b)), None)
    if bad is None:
        bad = next((v for v in b if not deg_b[v] > params.d * len(a)), None)
    degree_ok = bad is None
    if not degree_ok:
        violation = ("degree", bad)

    kx = max(1, math.ceil(params.epsilon * len(a) - 1e-9))
    ky = max(1, math.ceil(params.epsilon * len(b) - 1e-9))
    denom = kx * ky
    # adjacency of each b restricted to A, as positions in the sorted list a
    pos = {v: k for k, v in enumerate(a)}
    b_rows = [sum(1 << pos[u] for u in a if g.has_edge(u, w)) for w in b]

    best_dev, dev_wit = Fraction(-1), None
    min_den, min_wit = None, None
    taken = 0
    if mode == "exhaustive":
        for xs in itertools.combinations(range(len(a)), kx):
            xm = sum(1 << k for k in xs)
            cols = sorted((((row & xm).bit_count()), j) for j, row in enumerate(b_rows))
            lo = cols[:ky]
            hi = cols[-ky:]
            taken += 1
            for chunk in (lo, hi):
                den = Fraction(sum(c for c, _ in chunk), denom)
                dev = abs(den - base)
                wit = (tuple(a[k] for k in xs), tuple(sorted(b[j] for _, j in chunk)))
                if dev > best_dev:
                    best_dev, dev_wit = dev, wit
                if min_den is None or den < min_den:
                    min_den, min_wit = den, wit
    else:
        for s in range(samples):
            rng = make_rng(seed, s)
            xs = sorted(int(k) for k in rng.choice(len(a), size=kx, replace=False))
            ys = sorted(int(k) for k in rng.choice(len(b), size=ky, replace=False))
            xm = sum(1 << k for k in xs)
            den = Fraction(sum((b_rows[j] & xm).bit_count() for j in ys), denom)
            dev = abs(den - base)
            wit = (tuple(a[k] for k in xs), tuple(b[j] for j in ys))
            taken += 1
            if dev > best_dev:
                best_dev, dev_wit = dev, wit
            if min_den is None or den < min_den:
                min_den, min_wit = den, wit

    density_ok = min_den > params.d
    if violation is None and not density_ok:
        violation = ("density", min_wit)
    report = RegularityReport(
        base_density=base,
        worst_deviation_found=best_dev,
        min_density_found=min_den,
        mode=mode,
        samples_taken=taken,
        witness=dev_wit if best_dev >= params.epsilon else None,
        violation=violation,
        degree_ok=degree_ok,
    )
    return report, degree_ok and density_ok


def low_degree_count(g: PartiteGraph, a, y, threshold: float) -> int:
    """Number of a in A with deg(a, Y) < threshold."""
    a, y = _as_ids(g, a), _as_ids(g, y)
    if not y:
        return sum(1 for _ in a if 0 < threshold)
    py = _single_part(g, y, "Y")
    ymask = sum(1 << (v % g.n) for v in y)
    return sum(1 for v in a if (g.nbr_mask(v, py) & ymask).bit_count() < threshold)


def regularization_delta(max_degree: int, epsilon: float) -> float:
    """delta = 2 D eps / (2 + D eps), a root-side solution of delta < D eps < delta + delta^2."""
    x = max_degree * epsilon
    return 2 * x / (2 + x)


@dataclass
class TrimResult:
    clusters: list[list[int]]
    removed_low: list[list[int]]
    removed_pad: list[list[int]]
    delta: float
    meta: dict = field(default_factory=dict)


def super_regularize(g: PartiteGraph, clusters, j_pairs, params: RegularityParams,
                     target_size: int) -> TrimResult:
    """Trim every cluster to exactly ``target_size`` vertices.

    Vertices with degree below (d - eps)|C'| into some J-adjacent cluster C'
    go first; the remainder of the cut takes the highest-index survivors.
    """
    clusters = [_as_ids(g, c) for c in clusters]
    k = len(clusters)
    nbrs = [set() for _ in range(k)]
    for i, j in j_pairs:
        if i == j or not (0 <= i < k and 0 <= j < k):
            raise ValueError(f"bad cluster pair ({i}, {j})")
        nbrs[i].add(j)
        nbrs[j].add(i)
    max_deg = max((len(s) for s in nbrs), default=0)
    delta = regularization_delta(max_deg, params.epsilon)
    for c in clusters:
        if target_size > len(c):
            raise ValueError(f"target size {target_size} exceeds a cluster of size {len(c)}")
        # with J empty there is no degree condition to protect, so any cut is allowed
        if max_deg and target_size < (1 - delta) * len(c) - 1e-9:
            raise ValueError(f"target size {target_size} below (1 - delta)|C| with delta={delta:.4g}")

    masks = []
    for c in clusters:
        part = _single_part(g, c, "cluster") if c else 0
        masks.append((part, sum(1 << (v % g.n) for v in c)))

    out, low_all, pad_all = [], [], []
    for i, c in enumerate(clusters):
        low = []
        for v in c:
            for j in sorted(nbrs[i]):
                pj, mj = masks[j]
                if (g.nbr_mask(v, pj) & mj).bit_count() < (params.d - params.epsilon) * len(clusters[j]):
                    low.append(v)
                    break
        if len(low) > len(c) - target_size:
            raise TooManyLowDegreeVertices(
                f"cluster {i}: {len(low)} low-degree vertices but only {len(c) - target_size} may be removed"
            )
        low_set = set(low)
        keep = [v for v in c if v not in low_set]
        cut = len(keep) - target_size
        pad = keep[len(keep) - cut:] if cut else []
        out.append(keep[:target_size])
        low_all.append(low)
        pad_all.append(pad)
    return TrimResult(out, low_all, pad_all, delta, {"max_degree": max_deg})
