"""Competing proximity measures: PPR, Katz, Adamic/Adar, conductance, shortest path."""

from __future__ import annotations

import enum
import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.sparse.linalg import eigs, spsolve

from .errors import Divergent, Unreachable
from .exact import CLAMP
from .graph import Node, WeightedGraph
from .scoretable import ScoreTable

DENSE_SPECTRUM_LIMIT = 1500


def _targets(g: WeightedGraph, source: Node, targets) -> list:
    if targets is None:
        return [n for n in g.nodes if n != source]
    return [t for t in targets if t != source]


def _weight_matrix(g: WeightedGraph) -> sp.csr_matrix:
    src, dst, w = g.arrays
    return sp.csr_matrix((w, (src, dst)), shape=(g.n_nodes, g.n_nodes))


# -- personalized PageRank ---------------------------------------------------


def ppr_vector(g: WeightedGraph, source: Node, alpha: float, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Stationary distribution of the restart-to-source walk.

    From X the walk jumps to the source with probability ``alpha`` and
    otherwise follows an out-edge in proportion to its weight.  Nodes without
    out-edges always jump back.  Node weights play no part.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    s = g.id(source)
    W = _weight_matrix(g)
    out_sum = np.asarray(W.sum(axis=1)).ravel()
    dangling = out_sum == 0
    inv = np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, out_sum))
    T = (sp.diags(inv) @ W).T.tocsr() * (1.0 - alpha)
    pi = np.zeros(g.n_nodes)
    pi[s] = 1.0
    for _ in range(max_iter):
        nxt = T @ pi
        nxt[s] += alpha * pi[~dangling].sum() + pi[dangling].sum()
        if np.abs(nxt - pi).sum() < tol:
            return nxt
        pi = nxt
    return pi


def ppr_scores(g: WeightedGraph, source: Node, alpha: float, targets=None) -> ScoreTable:
    pi = ppr_vector(g, source, alpha)
    return ScoreTable.build(g, source, {t: float(pi[g.id(t)]) for t in _targets(g, source, targets)})


# -- Katz over walks ----------------------------------------------------------


def _katz_matrix(g: WeightedGraph) -> sp.csr_matrix:
    """``M[i, j] = node_weight(i) * w(i -> j)``."""
    return (sp.diags(np.asarray(g.node_weights)) @ _weight_matrix(g)).tocsr()


def spectral_radius(g: WeightedGraph) -> float:
    M = _katz_matrix(g)
    n = g.n_nodes
    if M.nnz == 0:
        return 0.0
    if n <= DENSE_SPECTRUM_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvals(M.toarray()))))
    vals = eigs(M.astype(float), k=1, which="LM", return_eigenvectors=False, tol=1e-10)
    return float(np.abs(vals).max())


def katz_vector(g: WeightedGraph, source: Node, beta: float, tol: float = 1e-12, max_terms: int = 2000) -> np.ndarray:
    """Sum over walk lengths of beta^l times walk weight, for every end node.

    A walk's weight is the product of its edge weights and of the node weights
    at its interior visits.  Raises :class:`Divergent` when
    ``beta * spectral_radius >= 1``.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    rho = spectral_radius(g)
    if beta * rho >= 1.0:
        raise Divergent(f"beta={beta} diverges (limit {1.0 / rho if rho else math.inf})")
    s = g.id(source)
    W = _weight_matrix(g)
    M = _katz_matrix(g)
    x = beta * W.getrow(s).toarray().ravel()
    total = x.copy()
    Mt = (beta * M).T.tocsr()
    for _ in range(max_terms):
        x = Mt @ x
        total += x
        if np.abs(x).max(initial=0.0) < tol:
            return total
    # slow geometric tail: solve (I - beta M)^T y = x1 directly
    x1 = beta * W.getrow(s).toarray().ravel()
    A = (sp.identity(g.n_nodes, format="csc") - (beta * M).T.tocsc())
    return np.asarray(spsolve(A, x1)).ravel()


def katz_scores(g: WeightedGraph, source: Node, beta: float, targets=None) -> ScoreTable:
    x = katz_vector(g, source, beta)
    return ScoreTable.build(g, source, {t: float(x[g.id(t)]) for t in _targets(g, source, targets)})


# -- Adamic/Adar -----------------------------------------------------------------


def adamic_adar(g: WeightedGraph, source: Node, targets=None) -> ScoreTable:
    """Two-hop evidence weighted by ``1 / (ln d_in + ln d_out)`` of the middle node.

    Degrees below 2 are floored at 2 so the denominator never drops under
    ``2 ln 2``.
    """
    s = g.id(source)
    acc: dict[int, float] = {}
    for c, _w in g.succ[s]:
        denom = math.log(max(g.in_degree(c), 2)) + math.log(max(g.out_degree(c), 2))
        for b, _w2 in g.succ[c]:
            if b != s:
                acc[b] = acc.get(b, 0.0) + 1.0 / denom
    return ScoreTable.build(g, source, {t: acc.get(g.id(t), 0.0) for t in _targets(g, source, targets)})


# -- effective conductance ---------------------------------------------------


def _undirected_conductance(g: WeightedGraph) -> sp.csr_matrix:
    """Symmetric conductances: the mean over whichever directions exist."""
    W = _weight_matrix(g)
    present = (W != 0).astype(float)
    total = W + W.T
    count = present + present.T
    count.data = 1.0 / count.data
    return total.multiply(count).tocsr()


def effective_conductance(g: WeightedGraph, a: Node, b: Node) -> float:
    """Conductance between ``a`` and ``b`` with edge weights as conductances."""
    i, j = g.id(a), g.id(b)
    if i == j:
        raise ValueError("endpoints must differ")
    C = _undirected_conductance(g)
    _n, labels = csgraph.connected_components(C, directed=False)
    if labels[i] != labels[j]:
        raise Unreachable(f"{a!r} and {b!r} lie in different components")
    comp = np.flatnonzero(labels == labels[i])
    C = C[comp][:, comp]
    L = sp.diags(np.asarray(C.sum(axis=1)).ravel()) - C
    local = {g_id: k for k, g_id in enumerate(comp)}
    ai, bj = local[i], local[j]
    keep = np.array([k for k in range(len(comp)) if k != bj])
    rhs = np.zeros(len(keep))
    pos_a = int(np.searchsorted(keep, ai))
    rhs[pos_a] = 1.0
    Lr = L.tocsr()[keep][:, keep].tocsc()
    v = np.atleast_1d(spsolve(Lr, rhs))
    return float(1.0 / v[pos_a])


# -- shortest path -------------------------------------------------------------


def weighted_shortest_path(g: WeightedGraph, a: Node, b: Node) -> float:
    """``1 / min_path sum(1/w)``: reciprocal of the cheapest resistance-like route."""
    i, j = g.id(a), g.id(b)
    src, dst, w = g.arrays
    cost = sp.csr_matrix((1.0 / w, (src, dst)), shape=(g.n_nodes, g.n_nodes))
    d = csgraph.dijkstra(cost, directed=True, indices=i)[j]
    if not np.isfinite(d):
        raise Unreachable(f"{b!r} is not reachable from {a!r}")
    return float(1.0 / d) if d > 0 else math.inf


def shortest_path_scores(g: WeightedGraph, source: Node, targets=None) -> ScoreTable:
    src, dst, w = g.arrays
    cost = sp.csr_matrix((1.0 / w, (src, dst)), shape=(g.n_nodes, g.n_nodes))
    d = csgraph.dijkstra(cost, directed=True, indices=g.id(source))
    scores = {}
    for t in _targets(g, source, targets):
        dt = d[g.id(t)]
        scores[t] = float(1.0 / dt) if np.isfinite(dt) else 0.0
    return ScoreTable.build(g, source, scores)


# -- symmetric combination ------------------------------------------------------


class Combine(enum.Enum):
    MAX = "max"
    MIN = "min"
    SUM = "sum"
    PRODUCT_B = "product_b"


def symmetric_combine(s_ab: float, s_ba: float, rule) -> float:
    """Merge two directional scores.

    ``PRODUCT_B`` expects blink probabilities ``b`` (not scores) and returns
    the score of both directions existing: ``-ln(1 - b_ab * b_ba)``.
    """
    rule = rule if isinstance(rule, Combine) else Combine(str(rule).lower())
    if rule is Combine.MAX:
        return max(s_ab, s_ba)
    if rule is Combine.MIN:
        return min(s_ab, s_ba)
    if rule is Combine.SUM:
        return s_ab + s_ba
    return -math.log1p(-min(s_ab * s_ba, CLAMP))
