import math
import random

import pytest
from hypothesis import given, strategies as st

from blinkprox import HyperedgeRecord, ParseError, WeightRangeError, WeightedGraph, expand_hyperedges, load_graph, merge_parallel
from blinkprox.exact import exact_reachability
from blinkprox.graph import OutPort, hop_neighborhood, in_port, out_port, read_edge_list, series_reduce, split_node_weights

from conftest import graph_oracle, random_graph

probs = st.floats(min_value=1e-6, max_value=1.0)


def test_merge_parallel_examples():
    assert merge_parallel(0.5, 0.5) == 0.75
    assert merge_parallel(1.0, 0.3) == 1.0
    w = 0.3
    assert math.isclose(merge_parallel(merge_parallel(w, w), w), 1 - 0.7**3, abs_tol=1e-15)


@given(probs, probs, probs)
def test_merge_parallel_commutative_associative(a, b, c):
    assert abs(merge_parallel(a, b) - merge_parallel(b, a)) <= 1e-15
    assert abs(merge_parallel(merge_parallel(a, b), c) - merge_parallel(a, merge_parallel(b, c))) <= 1e-15


def test_normalization_merges_parallel_and_drops_self_loops():
    g = WeightedGraph.from_edges([("A", "B", 0.5), ("A", "B", 0.5), ("B", "B", 0.4)])
    assert g.n_edges == 1
    assert g.weight("A", "B") == 0.75
    assert not g.has_edge("B", "B")


def test_adjacency_consistent_with_edges(rng):
    for _ in range(20):
        g = random_graph(rng)
        out = {(g.nodes[u], g.nodes[v]) for u in range(g.n_nodes) for v, _ in g.succ[u]}
        inn = {(g.nodes[u], g.nodes[v]) for v in range(g.n_nodes) for u, _ in g.pred[v]}
        assert out == inn == {(s, d) for s, d, _ in g.edges()}


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.5, math.nan])
def test_weights_outside_unit_interval_rejected(bad):
    with pytest.raises(WeightRangeError):
        WeightedGraph.from_edges([("A", "B", bad)])
    with pytest.raises(WeightRangeError):
        WeightedGraph.from_edges([("A", "B", 0.5)], node_weights={"A": bad})


def test_undirected_input_shares_weight():
    g = WeightedGraph.from_edges([("A", "B", 0.3)], undirected=True)
    assert g.weight("A", "B") == g.weight("B", "A") == 0.3


def test_series_reduce_chain():
    g = WeightedGraph.from_edges([("A", "Y", 0.5), ("Y", "B", 0.5)])
    r = series_reduce(g, {"A", "B"})
    assert r.edges() == [("A", "B", 0.25)]


def test_series_reduce_with_node_weight_preserves_b():
    g = WeightedGraph.from_edges([("A", "Y", 0.5), ("Y", "B", 0.5)], node_weights={"Y": 0.8})
    r = series_reduce(g, {"A", "B"})
    assert r.n_edges == 1 and math.isclose(r.weight("A", "B"), 0.2, abs_tol=1e-15)
    assert math.isclose(exact_reachability(g, "A", "B"), exact_reachability(r, "A", "B"), abs_tol=1e-12)


def test_series_reduce_fixpoint_without_candidates():
    g = WeightedGraph.from_edges([("A", "B", 0.5), ("A", "C", 0.4), ("C", "B", 0.3), ("B", "C", 0.2)])
    assert series_reduce(g, {"A", "B"}) == g


def test_split_node_weights_example():
    g = WeightedGraph.from_edges([("A", "C", 0.9), ("C", "B", 0.9)], node_weights={"C": 0.5})
    sg = split_node_weights(g)
    assert set(sg.node_weights) == {1.0}
    assert sg.weight("C", OutPort("C")) == 0.5
    assert math.isclose(exact_reachability(g, "A", "B"), 0.405, abs_tol=1e-12)
    assert math.isclose(exact_reachability(sg, out_port(sg, "A"), in_port(sg, "B")), 0.405, abs_tol=1e-12)


def test_split_unit_weights_is_identity():
    g = WeightedGraph.from_edges([("A", "C", 0.9), ("C", "B", 0.9)])
    assert split_node_weights(g) == g


def test_split_source_without_in_edges():
    # A has weight 0.5 but no in-edges: it is never an interior node
    g = WeightedGraph.from_edges([("A", "C", 0.7), ("C", "B", 0.6)], node_weights={"A": 0.5, "C": 0.9})
    sg = split_node_weights(g)
    assert OutPort("A") not in sg and OutPort("C") in sg
    before = graph_oracle(g, "A", "B")
    after = exact_reachability(sg, out_port(sg, "A"), in_port(sg, "B"))
    assert math.isclose(before, after, abs_tol=1e-12)


def test_hyperedge_examples():
    g = expand_hyperedges([HyperedgeRecord(frozenset("AB"), 0.5)])
    assert math.isclose(exact_reachability(g, "A", "B"), 0.5, abs_tol=1e-12)
    w = 0.3
    g2 = expand_hyperedges([HyperedgeRecord(frozenset("AB"), w), HyperedgeRecord(frozenset("AB"), w)])
    assert math.isclose(exact_reachability(g2, "A", "B"), 1 - (1 - w) ** 2, abs_tol=1e-12)
    g3 = expand_hyperedges([HyperedgeRecord(frozenset("ABC"), 0.4)])
    hub = [n for n in g3.nodes if n not in {"A", "B", "C"}][0]
    assert g3.in_degree(g3.id(hub)) == g3.out_degree(g3.id(hub)) == 3
    assert all(w == 1.0 for _s, _d, w in g3.edges())


def test_hyperedge_needs_two_members():
    with pytest.raises(ValueError):
        HyperedgeRecord(frozenset("A"), 0.5)


def test_transformations_preserve_b_on_random_graphs():
    rng = random.Random(7)
    checked = 0
    for _ in range(100):
        g = random_graph(rng, max_edges=12)
        a, b = rng.sample(range(g.n_nodes), 2)
        base = exact_reachability(g, a, b)
        sg = split_node_weights(g)
        assert abs(exact_reachability(sg, out_port(sg, a), in_port(sg, b)) - base) <= 1e-12
        r = series_reduce(g, {a, b})
        assert abs(exact_reachability(r, a, b) - base) <= 1e-12
        checked += 1
    assert checked == 100


def test_hop_neighborhood():
    g = WeightedGraph.from_edges([("A", "B"), ("B", "C"), ("C", "D"), ("D", "E")])
    assert hop_neighborhood(g, "A", 2) == ["B", "C"]
    assert hop_neighborhood(g, "A", 10) == ["B", "C", "D", "E"]


def test_edge_file_parsing(tmp_path):
    p = tmp_path / "e.tsv"
    p.write_text("# comment\nA\tB\t0.5\nA\tC\nB\tC\t2.5\n")
    recs = read_edge_list(p)
    assert [(r.src, r.dst, r.f, r.position) for r in recs] == [("A", "B", 0.5, 1), ("A", "C", 1.0, 2), ("B", "C", 2.5, 1)]


def test_edge_file_errors_carry_line_numbers(tmp_path):
    p = tmp_path / "e.tsv"
    p.write_text("A\tB\t0.5\nA\tB\tzero\n")
    with pytest.raises(ParseError, match=r"e\.tsv:2"):
        read_edge_list(p)
    p.write_text("A\tB\t0\n")
    with pytest.raises(ParseError, match=":1:"):
        read_edge_list(p)


def test_load_graph_with_nodes_and_hyperedges(tmp_path):
    (tmp_path / "e.tsv").write_text("A\tB\t0.5\n")
    (tmp_path / "n.tsv").write_text("B\t0.5\n")
    (tmp_path / "h.tsv").write_text("0.5\tB\tC\n")
    g = load_graph(tmp_path / "e.tsv", tmp_path / "n.tsv", tmp_path / "h.tsv")
    # A->B (0.5), B must exist (0.5), hyperedge (0.5)
    assert math.isclose(exact_reachability(g, "A", "C"), 0.125, abs_tol=1e-12)
    (tmp_path / "bad.tsv").write_text("A\tB\t1.5\n")
    with pytest.raises(ParseError):
        load_graph(tmp_path / "bad.tsv")
