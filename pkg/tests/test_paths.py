import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from blinkprox import BudgetExceeded, PathFilterParams, Unreachable, WeightedGraph, best_single_path, enumerate_minimal_paths
from blinkprox.paths import best_single_paths, fanout_factors, nominal_contribution

from conftest import diamond, random_graph

OPEN = PathFilterParams(t1=0.0, t2=1e-300)


def all_simple_paths(g, s, t):
    """Reference: every node-nonrepeating path on the original graph."""
    out = []

    def walk(path):
        u = path[-1]
        if u == t:
            out.append(tuple(path))
            return
        for v, _w in g.succ[u]:
            if v not in path:
                walk(path + [v])

    walk([g.id(s)])
    return out


def test_nominal_examples():
    assert nominal_contribution([0.9]) == pytest.approx(-math.log(0.1))
    assert nominal_contribution([0.5, 0.5]) == pytest.approx(0.287682, abs=1e-6)
    assert math.isfinite(nominal_contribution([1.0, 1.0]))


def test_direct_edge():
    g = WeightedGraph.from_edges([("A", "B", 0.5)])
    paths = enumerate_minimal_paths(g, "A", PathFilterParams(t1=0.1))
    assert len(paths["B"]) == 1 and paths["B"][0].nominal == pytest.approx(0.693147, abs=1e-6)


def test_diamond_right_has_four_paths():
    g = diamond(0.5, True)
    paths = enumerate_minimal_paths(g, "A", OPEN)["B"]
    assert sorted(p.length for p in paths) == [2, 2, 3, 3]
    sg = g.split()
    assert {tuple(p.names(sg)) for p in paths} == {
        ("A", "C", "B"), ("A", "D", "B"), ("A", "C", "D", "B"), ("A", "D", "C", "B")}
    assert [p.nominal for p in paths] == sorted((p.nominal for p in paths), reverse=True)


def test_paths_recorded_for_intermediate_targets():
    g = WeightedGraph.from_edges([("A", "B", 0.9), ("B", "C", 0.9)])
    paths = enumerate_minimal_paths(g, "A", OPEN)
    assert set(paths) == {"B", "C"}


def test_fanout_factor_equal_weights():
    g = WeightedGraph.from_edges([("A", x, 0.4) for x in "BCD"])
    f = fanout_factors(g.split())
    assert f[g.id("A")] == pytest.approx([1 / 3] * 3)


def test_fanout_limit_on_binary_chain():
    # each step offers two equal edges: product of factors is 2**-k
    k_max = 25
    edges = []
    for i in range(k_max):
        edges += [(f"n{i}", f"n{i+1}", 0.99), (f"n{i}", f"x{i}", 0.99)]
    g = WeightedGraph.from_edges(edges)
    paths = enumerate_minimal_paths(g, "n0", PathFilterParams(t1=0.0, t2=2e-6))
    assert max(p.length for ps in paths.values() for p in ps) == 18
    assert "n18" in paths and "n19" not in paths


def test_filters_hold_for_every_path():
    rng = random.Random(2)
    params = PathFilterParams(t1=0.05, t2=0.05)
    for _ in range(40):
        g = random_graph(rng, max_edges=12)
        sg = g.split()
        fac = fanout_factors(sg)
        for ps in enumerate_minimal_paths(g, 0, params).values():
            for p in ps:
                assert p.nominal >= params.t1 - 1e-15
                fan = 1.0
                for u, v in p.edges:
                    fan *= fac[u][[x for x, _ in sg.succ[u]].index(v)]
                assert fan >= params.t2


def test_full_set_with_open_filters():
    rng = random.Random(4)
    for _ in range(40):
        g = random_graph(rng, max_edges=12)
        sg = g.split()
        got = enumerate_minimal_paths(g, 0, OPEN)
        for t in range(1, g.n_nodes):
            ref = {tuple(g.nodes[i] for i in p) for p in all_simple_paths(g, 0, t)}
            mine = {tuple(p.names(sg)) for p in got.get(t, [])}
            assert mine == ref


def test_enumeration_deterministic():
    g = diamond(0.3, True)
    assert enumerate_minimal_paths(g, "A", OPEN) == enumerate_minimal_paths(g, "A", OPEN)


def test_budget_exceeded():
    g = diamond(0.5, True)
    with pytest.raises(BudgetExceeded):
        enumerate_minimal_paths(g, "A", PathFilterParams(t1=0.0, t2=1e-9, max_paths_per_source=3))


def test_best_single_path_examples():
    g = WeightedGraph.from_edges([("A", "C", 0.5), ("C", "B", 0.5), ("A", "D", 0.8), ("D", "B", 0.5)])
    p = best_single_path(g, "A", "B")
    assert p.names(g.split()) == ["A", "D", "B"] and p.product == pytest.approx(0.4)
    g1 = WeightedGraph.from_edges([("A", "B", 0.3)])
    assert best_single_path(g1, "A", "B").product == 0.3
    with pytest.raises(Unreachable):
        best_single_path(g1, "B", "A")


def test_best_single_path_matches_exhaustive_max():
    rng = random.Random(8)
    for _ in range(60):
        g = random_graph(rng, max_edges=12)
        reach = [t for t in range(1, g.n_nodes) if all_simple_paths(g, 0, t)]
        if not reach:
            continue
        best = best_single_paths(g, 0, reach)
        for t in reach:
            ref = 0.0
            for p in all_simple_paths(g, 0, t):
                prod = math.prod(g.weight(g.nodes[a], g.nodes[b]) for a, b in zip(p, p[1:]))
                prod *= math.prod(g.node_weights[x] for x in p[1:-1])
                ref = max(ref, prod)
            assert best[t].product == pytest.approx(ref, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.randoms(use_true_random=False))
def test_max_product_equals_min_neglog(r):
    g = random_graph(r, max_edges=10, node_weights=False)
    sg = g.split()
    for t, ps in enumerate_minimal_paths(g, 0, OPEN).items():
        best = best_single_path(g, 0, t)
        costs = [sum(-math.log(w) for w in p.weights) for p in ps]
        assert sum(-math.log(w) for w in best.weights) == pytest.approx(min(costs), abs=1e-12)
