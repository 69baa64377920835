import math

import pytest
from hypothesis import given, strategies as st

from blinkprox import WeightRangeError, merge_parallel
from blinkprox.exact import exact_reachability
from blinkprox.graph import EdgeRecord, HyperedgeNode
from blinkprox.weighting import (
    DEFAULT_B_GRID,
    DomainKnowledge,
    SchemeKind,
    WeightScheme,
    apply_weights,
    arxiv_knowledge,
    arxiv_uniform_graph,
    grid_search,
    wiki_knowledge,
)

EXP, LIN = SchemeKind.EXPONENTIAL, SchemeKind.LINEAR


def test_scheme_examples():
    assert WeightScheme(EXP, 0.5, 0.5).weight(0.5, 1.0) == 0.5
    assert WeightScheme(EXP, 0.5, 0.5).weight(0.5, 2.0) == pytest.approx(0.75, abs=1e-15)
    assert WeightScheme(EXP, 0.5, 0.5).weight(0.5, 2.0) == pytest.approx(merge_parallel(0.5, 0.5), abs=1e-15)
    assert WeightScheme(LIN, 0.3, 0.5).weight(0.3, 2.0) == pytest.approx(0.6)
    assert WeightScheme(EXP).weight(0.5, math.inf) == 1.0
    with pytest.raises(WeightRangeError):
        WeightScheme(LIN, 0.6, 0.5).weight(0.6, 2.0)
    with pytest.raises(ValueError):
        WeightScheme(EXP, 1.0, 0.5)


@given(st.floats(0.01, 0.99), st.floats(0.01, 20), st.floats(0.01, 20))
def test_f_additivity_is_parallel_merge(b, f1, f2):
    s = WeightScheme(EXP, b, 0.5)
    assert abs(s.weight(b, f1 + f2) - merge_parallel(s.weight(b, f1), s.weight(b, f2))) <= 1e-15


@given(st.floats(1e-6, 0.01), st.floats(0.5, 50))
def test_exponential_approaches_linear(b, f):
    if b * f > 1:
        return
    w_exp = WeightScheme(EXP, b, 0.5).weight(b, f)
    w_lin = WeightScheme(LIN, b, 0.5).weight(b, f)
    assert abs(w_exp - w_lin) / w_lin <= f * b


@given(st.floats(1e-6, 0.01), st.floats(1e-3, 50))
def test_exponential_linear_gap_tight_bound(b, f):
    # relative gap is |1 - f| * b / 2 to first order, for every f
    if b * f > 1:
        return
    w_exp = WeightScheme(EXP, b, 0.5).weight(b, f)
    w_lin = b * f
    assert abs(w_exp - w_lin) / w_lin <= abs(1 - f) * b / 2 * (1 + 2 * b) + 1e-15 + max(f, 1) * b * b


def test_f_times_b_bound_fails_for_small_f():
    b, f = 0.01, 0.1
    rel = abs(WeightScheme(EXP, b, 0.5).weight(b, f) - b * f) / (b * f)
    assert rel > f * b


def test_apply_weights_uniform_and_defaults():
    k = DomainKnowledge.uniform([("A", "B"), ("B", "C")])
    g = apply_weights(k, WeightScheme(EXP, 0.3, 0.6))
    assert {w for _s, _d, w in g.edges()} == {0.3}
    assert g.node_weight("B") == pytest.approx(0.6)
    k.f_V["B"] = math.inf
    assert apply_weights(k, WeightScheme(EXP, 0.3, 0.6)).node_weight("B") == 1.0


def test_parallel_records_add_f():
    k = DomainKnowledge()
    k.add_edge("A", "B", 1.0)
    k.add_edge("A", "B", 1.0)
    k.add_edge("A", "A", 5.0)
    assert k.f_E == {("A", "B"): 2.0}


def test_arxiv_knowledge():
    gamma = 4.0
    # author a writes 4 papers (out-degree 4 = gamma) and 16 for z (gamma**2)
    papers = [("a", f"x{i}") for i in range(4)] + [("z", f"y{i}") for i in range(16)]
    k = arxiv_knowledge(papers, gamma)
    hub0 = HyperedgeNode(0)
    assert k.f_E[("a", hub0)] == pytest.approx(1.0)
    assert k.f_E[("z", HyperedgeNode(4))] == pytest.approx(0.5)
    assert k.f_V[hub0] == math.inf
    assert k.f_V["x0"] == 1.0  # one coauthor < gamma
    assert k.f_V["z"] == pytest.approx(0.5)


def test_wiki_knowledge():
    gamma = 4.0
    recs = [EdgeRecord("X", "Y", 1.0, 1)]
    k = wiki_knowledge(recs, gamma)
    assert k.f_E[("X", "Y")] == 1.0
    k2 = wiki_knowledge([EdgeRecord("X", "Y", 1.0, 1), EdgeRecord("Y", "X", 1.0, 1)], gamma)
    assert k2.f_E[("X", "Y")] == 2.0
    # 16th citation of X, target with in-degree 4
    recs = [EdgeRecord("X", f"p{i}", 1.0, i + 1) for i in range(15)]
    recs += [EdgeRecord("X", "Y", 1.0, 16)] + [EdgeRecord(f"q{i}", "Y", 1.0, 1) for i in range(3)]
    assert wiki_knowledge(recs, gamma).f_E[("X", "Y")] == pytest.approx(0.5)
    assert k.f_V["X"] == pytest.approx(1 / (2 * math.log(2)))


def test_arxiv_uniform_graph():
    g = arxiv_uniform_graph([("a", "b"), ("b", "c")], 0.5, 0.4)
    # a -> paper0 -> b -> paper1 -> c with every element uncertain
    assert exact_reachability(g, "a", "c") == pytest.approx(0.5**4 * 0.4**3)


def test_grid_search_rules():
    best, val, table = grid_search({"b1": [0.3]}, lambda b1: 7.0)
    assert best == {"b1": 0.3} and val == 7.0
    best, _v, table = grid_search({"b2": DEFAULT_B_GRID, "b1": DEFAULT_B_GRID}, lambda b1, b2: 1.0)
    assert best == {"b1": 0.1, "b2": 0.1} and len(table) == 81
    best, _v, _t = grid_search({"b1": DEFAULT_B_GRID}, lambda b1: -abs(b1 - 0.5))
    assert best == {"b1": 0.5}
