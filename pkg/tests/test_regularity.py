import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tilinglab.errors import PartsNotDisjoint, TooManyLowDegreeVertices
from tilinglab.generators import RandomSpec, gen_random, gen_superregular_star, random_slice
from tilinglab.mpgraph import build_graph, complete_graph, empty_graph, from_blocks
from tilinglab.regularity import (
    RegularityParams, check_superregular, low_degree_count, pair_density, regularization_delta,
    super_regularize,
)


def planted_rectangle():
    # |A| = |B| = 12, every row has degree 6, rows 0..2 miss columns 0..2
    block = np.zeros((12, 12), dtype=bool)
    for i in range(12):
        cols = range(3, 9) if i < 3 else [(i + 2 * k) % 12 for k in range(6)]
        block[i, list(cols)] = True
    # balance columns is not needed; density is exactly 1/2
    return from_blocks(2, 12, {(0, 1): block})


def test_complete_pair():
    g = complete_graph(2, 6)
    rep, ok = check_superregular(g, g.part_vertices(0), g.part_vertices(1), RegularityParams(0.2, 0.5))
    assert ok and rep.worst_deviation_found == 0 and rep.witness is None and rep.violation is None


def test_isolated_vertex_fails_degree():
    g = complete_graph(2, 6)
    g = build_graph(2, 6, [e for e in g.edges() if (0, 0) not in e])
    rep, ok = check_superregular(g, g.part_vertices(0), g.part_vertices(1), RegularityParams(0.2, 0.1))
    assert not ok and rep.violation == ("degree", 0) and not rep.degree_ok


def test_planted_rectangle_exhaustive():
    g = planted_rectangle()
    a, b = g.part_vertices(0), g.part_vertices(1)
    assert pair_density(g, a, b) == Fraction(1, 2)
    rep, ok = check_superregular(g, a, b, RegularityParams(0.25, 0.3), mode="exhaustive")
    assert rep.mode == "exhaustive"
    assert not ok
    kind, (x, y) = rep.violation
    assert kind == "density" and len(x) == 3 and len(y) == 3
    assert pair_density(g, x, y) == 0 == rep.min_density_found
    wx, wy = rep.witness
    assert abs(pair_density(g, wx, wy) - rep.base_density) == rep.worst_deviation_found >= Fraction(1, 4)


def test_sampled_mode_falsifier():
    g = planted_rectangle()
    a, b = g.part_vertices(0), g.part_vertices(1)
    rep, ok = check_superregular(g, a, b, RegularityParams(0.25, 0.3), mode="sampled", samples=3000, seed=1)
    assert rep.mode == "sampled" and rep.samples_taken == 3000
    if not ok:
        x, y = rep.violation[1]
        assert pair_density(g, x, y) <= 0.3


def test_disjointness_errors():
    g = complete_graph(3, 4)
    with pytest.raises(PartsNotDisjoint):
        check_superregular(g, [0, 1], [1, 2], RegularityParams(0.1, 0.1))
    with pytest.raises(PartsNotDisjoint):
        check_superregular(g, [0, 1], [4, 9], RegularityParams(0.1, 0.1))


def test_exhaustive_cap():
    g = complete_graph(2, 15)
    with pytest.raises(ValueError):
        check_superregular(g, g.part_vertices(0), g.part_vertices(1), RegularityParams(0.1, 0.1), mode="exhaustive")
    rep, _ = check_superregular(g, g.part_vertices(0), g.part_vertices(1), RegularityParams(0.1, 0.1), samples=10)
    assert rep.mode == "sampled"


def brute_extremes(g, a, b, eps):
    kx, ky = math.ceil(eps * len(a) - 1e-9), math.ceil(eps * len(b) - 1e-9)
    lo, hi = None, None
    for sx in range(kx, len(a) + 1):
        for x in itertools.combinations(a, sx):
            for sy in range(ky, len(b) + 1):
                for y in itertools.combinations(b, sy):
                    d = pair_density(g, x, y)
                    lo = d if lo is None else min(lo, d)
                    hi = d if hi is None else max(hi, d)
    return lo, hi


@given(st.integers(2, 5), st.sampled_from([0.2, 0.4, 0.6]), st.floats(0.1, 0.9), st.integers(0, 2**32))
def test_exhaustive_extremes_match_brute_force(n, eps, p, seed):
    g = gen_random(2, n, RandomSpec(p, seed))
    a, b = list(g.part_vertices(0)), list(g.part_vertices(1))
    rep, _ = check_superregular(g, a, b, RegularityParams(eps, 0.5), mode="exhaustive")
    lo, hi = brute_extremes(g, a, b, eps)
    assert rep.min_density_found == lo
    assert rep.worst_deviation_found == max(rep.base_density - lo, hi - rep.base_density)


@given(st.integers(2, 6), st.floats(0.1, 0.9), st.integers(0, 2**32))
def test_false_verdict_has_witness(n, p, seed):
    g = gen_random(2, n, RandomSpec(p, seed))
    params = RegularityParams(0.3, 0.4)
    rep, ok = check_superregular(g, g.part_vertices(0), g.part_vertices(1), params)
    assert (rep.witness is not None) == (rep.worst_deviation_found >= params.epsilon)
    if not ok:
        kind, data = rep.violation
        if kind == "degree":
            side = g.part_vertices(1) if g.part_of(data) == 0 else g.part_vertices(0)
            assert g.degree(data, g.part_of(side[0])) <= params.d * n
        else:
            assert pair_density(g, *data) <= params.d


def test_low_degree_examples():
    g = complete_graph(2, 8)
    y = list(g.part_vertices(1))[:5]
    assert low_degree_count(g, g.part_vertices(0), y, 5) == 0
    e = empty_graph(2, 8)
    assert low_degree_count(e, e.part_vertices(0), y, 1) == 8


def test_low_degree_regular_fixture():
    n, d, eps = 60, 0.4, 0.1
    good = 0
    for seed in range(100):
        g = gen_superregular_star(3, n, d, RandomSpec(0.0, seed))
        (y,) = random_slice(g, 1, [int(0.2 * n)], seed)
        cnt = low_degree_count(g, g.part_vertices(0), y, (d - eps) * len(y))
        good += cnt <= eps * n
    assert good >= 95


@given(st.integers(2, 6), st.floats(0.1, 0.9), st.integers(0, 2**32), st.integers(0, 6), st.integers(0, 6))
def test_low_degree_monotone_in_threshold(n, p, seed, t1, t2):
    g = gen_random(2, n, RandomSpec(p, seed))
    lo, hi = sorted((t1, t2))
    a, y = g.part_vertices(0), g.part_vertices(1)
    assert low_degree_count(g, a, y, lo) <= low_degree_count(g, a, y, hi)


def test_regularization_delta():
    d = regularization_delta(3, 0.05)
    assert d < 3 * 0.05 < d + d * d


def test_super_regularize_complete_and_truncation():
    g = complete_graph(3, 10)
    clusters = [list(g.part_vertices(i)) for i in range(3)]
    params = RegularityParams(0.1, 0.5)
    res = super_regularize(g, clusters, [(0, 1), (1, 2)], params, 9)
    assert all(len(c) == 9 for c in res.clusters)
    assert all(not low for low in res.removed_low)
    assert res.clusters[0] == list(range(9))  # highest index removed first
    res = super_regularize(g, clusters, [], params, 4)
    assert res.clusters == [c[:4] for c in clusters] and res.delta == 0
    with pytest.raises(ValueError):
        super_regularize(g, clusters, [(0, 1)], params, 4)  # below (1 - delta)|C|


def planted_low_degree(n=20, k=2, seed=0):
    rng = np.random.default_rng(seed)
    blocks = {}
    for i, j in [(0, 1), (1, 2), (0, 2)]:
        blocks[(i, j)] = rng.random((n, n)) < 0.8
    # vertices 3 and 7 of part 1 see only 2 vertices of part 2
    for v in (3, 7)[:k]:
        blocks[(0, 1)][v] = False
        blocks[(0, 1)][v, :2] = True
    return from_blocks(3, n, blocks)


def test_super_regularize_removes_planted_first():
    g = planted_low_degree()
    clusters = [list(g.part_vertices(i)) for i in range(3)]
    params = RegularityParams(0.1, 0.4)
    res = super_regularize(g, clusters, [(0, 1), (1, 2)], params, 17)
    assert {3, 7} <= set(res.removed_low[0])
    assert 3 not in res.clusters[0] and 7 not in res.clusters[0]
    assert all(len(c) == 17 for c in res.clusters)
    # surviving vertices clear the relaxed degree condition delta * L'
    trimmed = res.clusters
    for i, j in [(0, 1), (1, 2)]:
        for a, b in ((i, j), (j, i)):
            bmask = sum(1 << (v % g.n) for v in trimmed[b])
            for v in trimmed[a]:
                assert (g.nbr_mask(v, b) & bmask).bit_count() > res.delta * 17
    with pytest.raises(TooManyLowDegreeVertices):
        super_regularize(g, clusters, [(0, 1), (1, 2)], params, 19)
