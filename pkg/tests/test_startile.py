import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import partite_graphs
from tilinglab.errors import EnumerationTruncated
from tilinglab.generators import RandomSpec, gen_extremal, gen_min_degree_host, gen_random
from tilinglab.mpgraph import build_graph, complete_graph, empty_graph
from tilinglab.simplex import phase_one
from tilinglab.startile import (
    FarkasCertificate, FractionalTiling, LabeledStar, enumerate_stars, integralize, guarantee_t_bound,
    replicated_load, solve_fractional, star_is_valid, verify_certificate, verify_fractional,
)


def brute_stars(g, t):
    out = set()
    for combo in itertools.product(*(g.part_vertices(i) for i in range(g.r))):
        for i in range(g.r):
            for j in range(g.r):
                if i == j:
                    continue
                c = combo[i]
                if all(g.has_edge(c, combo[k]) for k in range(g.r) if k != i):
                    small = tuple(combo[k] for k in range(g.r) if k not in (i, j))
                    out.add(LabeledStar(c, combo[j], small, t))
    return out


def test_enumerate_examples():
    stars = enumerate_stars(complete_graph(3, 1), 1)
    assert len(stars) == 6
    assert enumerate_stars(empty_graph(3, 3), 2) == []


def test_extremal_b_centers_have_a_leaves():
    g = gen_extremal(3, 10, 0.2)
    a_size = 2
    for s in enumerate_stars(g, 2):
        if s.center % g.n >= a_size:
            assert all(v % g.n < a_size for v in (s.big_leaf, *s.small_leaves))


def test_enumerate_cap():
    with pytest.raises(EnumerationTruncated):
        enumerate_stars(complete_graph(3, 3), 1, cap=5)


@given(partite_graphs(r_range=(2, 4), n_range=(1, 3)), st.integers(1, 5))
def test_enumerate_matches_brute_force(g, t):
    stars = enumerate_stars(g, t)
    assert len(stars) == len(set(stars))
    assert set(stars) == brute_stars(g, t)
    assert all(star_is_valid(g, s) for s in stars)


def test_solve_feasible_n1():
    g = complete_graph(3, 1)
    res = solve_fractional(g, 1)
    assert isinstance(res, FractionalTiling) and verify_fractional(g, res)
    uniform = FractionalTiling({s: Fraction(1, 6) for s in enumerate_stars(g, 1)})
    assert verify_fractional(g, uniform)


def test_solve_infeasible_isolated_vertex():
    g = complete_graph(3, 3)
    edges = [e for e in g.edges() if (1, 2) not in e]
    g = build_graph(3, 3, edges)
    res = solve_fractional(g, 2)
    assert isinstance(res, FarkasCertificate)
    assert verify_certificate(g, 2, res)
    indicator = tuple(Fraction(int(v == g.vid((1, 2)))) for v in range(g.num_vertices))
    assert verify_certificate(g, 2, FarkasCertificate(indicator))


def test_zero_cross_degree_fixture():
    # (1,1) loses all edges into part 3: it can no longer be a center, only a
    # leaf, so either verdict is possible but it must verify
    outcomes = set()
    for seed in range(6):
        g = gen_min_degree_host(3, 5, 0.5, 2, seed)
        edges = [e for e in g.edges() if not ((0, 0) in e and 2 in (e[0].part, e[1].part))]
        g = build_graph(3, 5, edges)
        assert g.degree(0, 2) == 0
        res = solve_fractional(g, 4)
        outcomes.add(type(res))
        if isinstance(res, FarkasCertificate):
            assert verify_certificate(g, 4, res)
        else:
            assert verify_fractional(g, res)
    g = build_graph(3, 5, [e for e in complete_graph(3, 5).edges() if (0, 0) not in e])
    res = solve_fractional(g, 4)
    assert isinstance(res, FarkasCertificate) and verify_certificate(g, 4, res)


def test_verify_fractional_rejects():
    g = complete_graph(3, 1)
    res = solve_fractional(g, 1)
    s, w = next((s, w) for s, w in res.weights.items() if w > 0)
    doubled = dict(res.weights)
    doubled[s] = 2 * w
    assert not verify_fractional(g, FractionalTiling(doubled))
    bad = build_graph(3, 1, [((0, 0), (1, 0))])
    fake = LabeledStar(0, 1, (2,), 1)
    assert not verify_fractional(bad, FractionalTiling({fake: Fraction(1)}))


def test_verify_certificate_rejects():
    g = complete_graph(3, 1)
    assert not verify_certificate(g, 1, FarkasCertificate((Fraction(0),) * 3))
    assert not verify_certificate(g, 1, FarkasCertificate((Fraction(1),) * 3))


def test_integralize_examples():
    g = complete_graph(3, 1)
    stars = enumerate_stars(g, 1)
    d, rep = integralize(FractionalTiling({s: Fraction(1, 6) for s in stars}))
    assert d == 6 and set(rep.values()) == {1}
    d, rep = integralize(FractionalTiling(dict(zip(stars[:3], [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]))))
    assert d == 6 and [rep[s] for s in stars[:3]] == [3, 2, 1]


def test_integralize_solver_output():
    g = gen_min_degree_host(3, 6, 0.4, 3, 11)
    t = 4
    res = solve_fractional(g, t)
    assert isinstance(res, FractionalTiling)
    d, rep = integralize(res)
    assert replicated_load(g, rep) == [d] * g.num_vertices
    assert all(rep[s] == res.weights[s] * d for s in rep)


def test_guarantee_t_bound():
    assert guarantee_t_bound(3, 12, 0.25) == Fraction(2 * 9, 3)
    assert guarantee_t_bound(4, 12, 0.25) <= 8 * 3


def test_monotone_in_edges():
    g = gen_min_degree_host(3, 5, 0.3, 2, 4)
    res = solve_fractional(g, 3)
    if isinstance(res, FractionalTiling):
        h = g | gen_random(3, 5, RandomSpec(0.3, 9))
        assert verify_fractional(h, res)
        assert isinstance(solve_fractional(h, 3), FractionalTiling)


@given(partite_graphs(r_range=(3, 3), n_range=(1, 3)), st.integers(1, 4))
def test_exactly_one_verified_outcome(g, t):
    res = solve_fractional(g, t)
    if isinstance(res, FractionalTiling):
        assert verify_fractional(g, res)
    else:
        assert verify_certificate(g, t, res)


@given(partite_graphs(r_range=(3, 4), n_range=(1, 2)), st.integers(1, 3))
def test_feasibility_matches_float_lp(g, t):
    stars = enumerate_stars(g, t)
    res = solve_fractional(g, t)
    if not stars:
        assert isinstance(res, FarkasCertificate)
        return
    a = np.zeros((g.num_vertices, len(stars)))
    for k, s in enumerate(stars):
        for v, lab in s.chi().items():
            a[v, k] = lab
    lp = linprog(np.zeros(len(stars)), A_eq=a, b_eq=np.ones(g.num_vertices), bounds=(0, None), method="highs")
    assert isinstance(res, FractionalTiling) == (lp.status == 0)


@given(st.integers(1, 4), st.integers(1, 6), st.integers(0, 2**32))
def test_phase_one_duality(m, k, seed):
    rng = np.random.default_rng(seed)
    cols = [{i: int(rng.integers(0, 3)) for i in range(m) if rng.random() < 0.7} for _ in range(k)]
    b = [int(x) for x in rng.integers(0, 3, size=m)]
    res = phase_one(cols, b)
    if res.feasible:
        for i in range(m):
            assert sum(cols[j].get(i, 0) * w for j, w in res.w.items()) == b[i]
        assert all(w >= 0 for w in res.w.values())
    else:
        assert sum(y * bi for y, bi in zip(res.y, b)) > 0
        for col in cols:
            assert sum(res.y[i] * a for i, a in col.items()) <= 0
