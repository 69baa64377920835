import math
import random

import numpy as np
import pytest

from blinkprox import Divergent, Unreachable, WeightedGraph
from blinkprox.baselines import (
    Combine,
    adamic_adar,
    effective_conductance,
    katz_scores,
    katz_vector,
    ppr_scores,
    ppr_vector,
    shortest_path_scores,
    spectral_radius,
    symmetric_combine,
    weighted_shortest_path,
)

from conftest import diamond, random_graph


def test_ppr_two_cycle():
    g = WeightedGraph.from_edges([("A", "B", 0.7), ("B", "A", 0.7)])
    alpha = 0.5
    assert ppr_scores(g, "A", alpha)["B"] == pytest.approx((1 - alpha) / (2 - alpha), abs=1e-10)


def test_ppr_sums_to_one_and_ignores_node_weights():
    rng = random.Random(1)
    for _ in range(20):
        g = random_graph(rng)
        pi = ppr_vector(g, 0, 0.3)
        assert pi.sum() == pytest.approx(1.0, abs=1e-10)
        plain = WeightedGraph.from_edges(g.edges(), nodes=g.nodes)
        assert np.allclose(ppr_vector(plain, 0, 0.3), pi, atol=1e-12)


def test_ppr_restart_dominance():
    g = WeightedGraph.from_edges([("A", "B", 1.0), ("B", "C", 1.0), ("C", "A", 1.0)])
    assert ppr_scores(g, "A", 0.999)["C"] < 1e-5


def test_ppr_dangling_restarts():
    g = WeightedGraph.from_edges([("A", "B", 1.0)])
    pi = ppr_vector(g, "A", 0.2)
    # A -> B w.p. 0.8, B always back to A: pi_B = 0.8 pi_A
    assert pi[g.id("B")] == pytest.approx(0.8 / 1.8, abs=1e-10)


def test_katz_examples():
    g = WeightedGraph.from_edges([("A", "B", 0.4)])
    assert katz_scores(g, "A", 0.1)["B"] == pytest.approx(0.04, abs=1e-15)
    w, v, beta = 0.6, 0.5, 0.2
    g2 = WeightedGraph.from_edges([("A", "C", w), ("C", "B", w)], node_weights={"C": v})
    assert katz_scores(g2, "A", beta)["B"] == pytest.approx(beta**2 * w**2 * v, abs=1e-15)


def test_katz_two_cycle_diverges():
    g = WeightedGraph.from_edges([("A", "B", 1.0), ("B", "A", 1.0)])
    assert spectral_radius(g) == pytest.approx(1.0)
    with pytest.raises(Divergent):
        katz_scores(g, "A", 1.01)


def test_katz_truncation_invariance():
    rng = random.Random(5)
    g = random_graph(rng, max_edges=12)
    beta = 0.5 / max(spectral_radius(g), 1e-9)
    a = katz_vector(g, 0, beta, tol=1e-12)
    b = katz_vector(g, 0, beta, tol=1e-15)
    assert np.allclose(a, b, atol=1e-10, rtol=0)


def test_katz_series_matches_closed_form():
    g = diamond(0.5, True)
    beta = 0.4
    x = katz_vector(g, "A", beta)
    W = np.zeros((g.n_nodes, g.n_nodes))
    for s, d, w in g.edges():
        W[g.id(s), g.id(d)] = w
    M = np.diag(g.node_weights) @ W
    ref = beta * W[g.id("A")] @ np.linalg.inv(np.eye(g.n_nodes) - beta * M)
    assert np.allclose(x, ref, atol=1e-10)


def test_adamic_adar_examples():
    # C has in-degree 3 and out-degree 3
    edges = [("A", "C"), ("X", "C"), ("Y", "C"), ("C", "B"), ("C", "X"), ("C", "Y")]
    g = WeightedGraph.from_edges(edges)
    assert adamic_adar(g, "A")["B"] == pytest.approx(1 / (2 * math.log(3)))
    assert adamic_adar(g, "A", ["X"])["X"] == pytest.approx(1 / (2 * math.log(3)))
    g0 = WeightedGraph.from_edges([("A", "B"), ("C", "D")])
    assert adamic_adar(g0, "A", ["D"])["D"] == 0.0


def test_adamic_adar_two_common_neighbors():
    edges = [("A", "C"), ("P", "C"), ("C", "B"), ("C", "Q"),
             ("A", "D"), ("P1", "D"), ("P2", "D"), ("P3", "D"), ("D", "B"), ("D", "Q1"), ("D", "Q2"), ("D", "Q3")]
    g = WeightedGraph.from_edges(edges)
    expect = 1 / (2 * math.log(2)) + 1 / (2 * math.log(4))
    assert adamic_adar(g, "A")["B"] == pytest.approx(expect)
    assert expect == pytest.approx(0.7213 + 0.3607, abs=1e-4)


def test_adamic_adar_matches_brute_force():
    rng = random.Random(6)
    for _ in range(30):
        g = random_graph(rng, max_edges=12)
        got = adamic_adar(g, 0)
        for b in range(1, g.n_nodes):
            ref = 0.0
            for c in range(g.n_nodes):
                if g.has_edge(0, c) and g.has_edge(c, b):
                    cid = g.id(c)
                    ref += 1 / (math.log(max(g.in_degree(cid), 2)) + math.log(max(g.out_degree(cid), 2)))
            assert got[b] == ref


@pytest.mark.parametrize("w", [0.1, 0.5, 0.9])
def test_conductance_diamond(w):
    assert effective_conductance(diamond(w, False), "A", "B") == pytest.approx(w, abs=1e-10)
    assert effective_conductance(diamond(w, True), "A", "B") == pytest.approx(w, abs=1e-10)


def test_conductance_single_edge_and_errors():
    g = WeightedGraph.from_edges([("A", "B", 0.3)])
    assert effective_conductance(g, "A", "B") == pytest.approx(0.3)
    g2 = WeightedGraph.from_edges([("A", "B", 0.3), ("C", "D", 0.3)])
    with pytest.raises(Unreachable):
        effective_conductance(g2, "A", "D")
    with pytest.raises(ValueError):
        effective_conductance(g, "A", "A")


def test_shortest_path_examples():
    w = 0.4
    assert weighted_shortest_path(diamond(w, False), "A", "B") == pytest.approx(1 / (2 / w) * 1.0)
    assert weighted_shortest_path(diamond(w, False), "A", "B") == pytest.approx(w / 2)
    g = WeightedGraph.from_edges([("A", "B", 0.3)])
    assert weighted_shortest_path(g, "A", "B") == pytest.approx(0.3)
    with pytest.raises(Unreachable):
        weighted_shortest_path(g, "B", "A")
    assert shortest_path_scores(g, "B", ["A"])["A"] == 0.0


def test_symmetric_combine():
    assert symmetric_combine(0.2, 0.5, Combine.MAX) == 0.5
    assert symmetric_combine(0.2, 0.5, "min") == 0.2
    assert symmetric_combine(0.2, 0.5, Combine.SUM) == pytest.approx(0.7)
    assert symmetric_combine(0.5, 0.5, Combine.PRODUCT_B) == pytest.approx(-math.log(0.75))
    assert symmetric_combine(0.5, 0.5, Combine.PRODUCT_B) == pytest.approx(0.2877, abs=1e-4)


def test_shared_tie_break():
    # B and C tie on score; C has the larger in-degree
    g = WeightedGraph.from_edges([("A", "B", 0.5), ("A", "C", 0.5), ("D", "C", 0.5)])
    assert [t for t, _ in shortest_path_scores(g, "A", ["B", "C"]).ranked()] == ["C", "B"]
    assert [t for t, _ in katz_scores(g, "A", 0.1, ["B", "C"]).ranked()] == ["C", "B"]
