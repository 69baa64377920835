"""Weighted directed graphs and the measure-preserving transformations on them.

A :class:`WeightedGraph` is immutable.  Node names can be any hashable value;
each name is interned to a dense integer id in first-seen order, and those ids
are the canonical order used for every deterministic tie-break downstream.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, WeightRangeError

log = logging.getLogger(__name__)

Node = Hashable


def merge_parallel(w1: float, w2: float) -> float:
    """Weight of a single edge equivalent to two parallel edges."""
    return 1.0 - (1.0 - w1) * (1.0 - w2)


def _check_weight(w: float, what: str) -> float:
    w = float(w)
    if not (0.0 < w <= 1.0) or math.isnan(w):
        raise WeightRangeError(f"{what} weight {w!r} is outside (0, 1]")
    return w


@dataclass(frozen=True)
class OutPort:
    """Source-side half of a node split by :func:`split_node_weights`."""

    node: Node

    def __repr__(self) -> str:
        return f"{self.node!r}'"


@dataclass(frozen=True)
class HyperedgeNode:
    """Auxiliary node standing in for one hyperedge."""

    index: int

    def __repr__(self) -> str:
        return f"<hyperedge {self.index}>"


@dataclass(frozen=True)
class HyperedgeRecord:
    members: frozenset
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if len(self.members) < 2:
            raise ValueError(f"hyperedge needs at least 2 distinct members, got {sorted(map(str, self.members))}")
        object.__setattr__(self, "weight", _check_weight(self.weight, "hyperedge"))


class WeightedGraph:
    """Directed simple graph with blink probabilities on nodes and edges.

    Parameters
    ----------
    nodes : sequence of node names, in canonical order.
    node_weights : sequence of floats aligned with ``nodes``.
    edges : mapping ``(src_id, dst_id) -> weight`` over dense ids.

    Most callers should use :meth:`from_edges` instead, which interns names,
    merges parallel edges and drops self-loops.
    """

    def __init__(self, nodes: Sequence[Node], node_weights: Sequence[float], edges: Mapping[tuple[int, int], float]):
        self.nodes: tuple = tuple(nodes)
        self.index: dict = {name: i for i, name in enumerate(self.nodes)}
        if len(self.index) != len(self.nodes):
            raise ValueError("duplicate node names")
        if len(node_weights) != len(self.nodes):
            raise ValueError("node_weights must align with nodes")
        self.node_weights: tuple[float, ...] = tuple(_check_weight(w, f"node {n!r}") for n, w in zip(self.nodes, node_weights))
        n = len(self.nodes)
        succ: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        pred: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        weights = {}
        for (u, v) in sorted(edges):
            if u == v:
                raise ValueError(f"self-loop on {self.nodes[u]!r}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) references an unknown node id")
            w = _check_weight(edges[(u, v)], f"edge {self.nodes[u]!r}->{self.nodes[v]!r}")
            weights[(u, v)] = w
            succ[u].append((v, w))
            pred[v].append((u, w))
        self.edge_weight: dict[tuple[int, int], float] = weights
        self.succ: tuple[tuple[tuple[int, float], ...], ...] = tuple(tuple(s) for s in succ)
        self.pred: tuple[tuple[tuple[int, float], ...], ...] = tuple(tuple(p) for p in pred)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple],
        node_weights: Mapping[Node, float] | None = None,
        nodes: Iterable[Node] | None = None,
        undirected: bool = False,
    ) -> "WeightedGraph":
        """Build a normalized graph from ``(src, dst[, weight])`` records.

        Parallel edges are merged with :func:`merge_parallel`; self-loops never
        lie on a minimal path and are dropped.  Undirected input expands each
        record into two directed edges sharing the weight.
        """
        index: dict = {}
        names: list = []

        def intern(name):
            i = index.get(name)
            if i is None:
                i = index[name] = len(names)
                names.append(name)
            return i

        for name in nodes or ():
            intern(name)
        merged: dict[tuple[int, int], float] = {}
        dropped = 0
        for rec in edges:
            if len(rec) == 2:
                src, dst = rec
                w = 1.0
            else:
                src, dst, w = rec
            w = _check_weight(w, f"edge {src!r}->{dst!r}")
            u, v = intern(src), intern(dst)
            if u == v:
                dropped += 1
                continue
            pairs = ((u, v), (v, u)) if undirected else ((u, v),)
            for key in pairs:
                merged[key] = merge_parallel(merged[key], w) if key in merged else w
        if dropped:
            log.debug("dropped %d self-loop(s)", dropped)
        node_weights = node_weights or {}
        for name in node_weights:
            intern(name)
        nw = [float(node_weights.get(name, 1.0)) for name in names]
        return cls(names, nw, merged)

    def __repr__(self) -> str:
        return f"WeightedGraph(nodes={self.n_nodes}, edges={self.n_edges})"

    def __contains__(self, name) -> bool:
        return name in self.index

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.nodes == other.nodes and self.node_weights == other.node_weights
                and self.edge_weight == other.edge_weight)

    __hash__ = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edge_weight)

    def id(self, name) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise KeyError(f"unknown node {name!r}") from None

    def node_weight(self, name) -> float:
        return self.node_weights[self.id(name)]

    def weight(self, src, dst) -> float:
        return self.edge_weight[(self.id(src), self.id(dst))]

    def has_edge(self, src, dst) -> bool:
        return src in self.index and dst in self.index and (self.index[src], self.index[dst]) in self.edge_weight

    def edges(self) -> list[tuple]:
        """Edges as ``(src_name, dst_name, weight)`` in canonical order."""
        return [(self.nodes[u], self.nodes[v], w) for (u, v), w in self.edge_weight.items()]

    def out_degree(self, u: int) -> int:
        return len(self.succ[u])

    def in_degree(self, u: int) -> int:
        return len(self.pred[u])

    @cached_property
    def edge_list(self) -> tuple[tuple[int, int], ...]:
        return tuple(self.edge_weight)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edge_weight)}

    @cached_property
    def in_degrees(self) -> np.ndarray:
        return np.array([len(p) for p in self.pred], dtype=np.int64)

    @cached_property
    def out_degrees(self) -> np.ndarray:
        return np.array([len(s) for s in self.succ], dtype=np.int64)

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(src, dst, weight)`` numpy arrays in canonical edge order."""
        if not self.edge_weight:
            return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0)
        src, dst = np.array(self.edge_list, dtype=np.int64).T
        return src, dst, np.fromiter(self.edge_weight.values(), float, len(self.edge_weight))

    def split(self) -> "WeightedGraph":
        """Cached :func:`split_node_weights` of this graph."""
        cached = self.__dict__.get("_split")
        if cached is None:
            cached = self.__dict__["_split"] = split_node_weights(self)
        return cached

    def with_weights(self, node_weights: Sequence[float], edge_weights: Sequence[float]) -> "WeightedGraph":
        """Same topology with new weights (``edge_weights`` in canonical order)."""
        return WeightedGraph(self.nodes, node_weights, dict(zip(self.edge_list, edge_weights)))

    def subgraph(self, edges: Iterable[tuple[int, int]]) -> "WeightedGraph":
        """Subgraph induced by a set of edge ids, keeping canonical node order."""
        edges = set(edges)
        keep = sorted({u for e in edges for u in e})
        remap = {old: new for new, old in enumerate(keep)}
        return WeightedGraph(
            [self.nodes[i] for i in keep],
            [self.node_weights[i] for i in keep],
            {(remap[u], remap[v]): self.edge_weight[(u, v)] for (u, v) in edges},
        )


# -- transformations ---------------------------------------------------------


def series_reduce(g: WeightedGraph, preserve: Iterable[Node]) -> WeightedGraph:
    """Eliminate every non-preserved node whose only edges are X->Y and Y->Z.

    The replacement edge X->Z carries ``w(X,Y) * w(Y,Z) * node_weight(Y)`` and
    is merged with any existing X->Z edge; the procedure repeats to a fixpoint.
    """
    keep = {g.id(p) for p in preserve}
    succ = [dict(s) for s in g.succ]
    pred = [dict(p) for p in g.pred]
    alive = [True] * g.n_nodes
    queue = list(range(g.n_nodes))
    while queue:
        y = queue.pop()
        if not alive[y] or y in keep or len(pred[y]) != 1 or len(succ[y]) != 1:
            continue
        (x, w_in), = pred[y].items()
        (z, w_out), = succ[y].items()
        del succ[x][y], pred[z][y]
        alive[y] = False
        pred[y].clear()
        succ[y].clear()
        if x != z:
            w = w_in * w_out * g.node_weights[y]
            w = merge_parallel(succ[x][z], w) if z in succ[x] else w
            succ[x][z] = pred[z][x] = w
        queue.extend((x, z))
    ids = [i for i in range(g.n_nodes) if alive[i]]
    remap = {old: new for new, old in enumerate(ids)}
    edges = {(remap[u], remap[v]): w for u in ids for v, w in succ[u].items()}
    return WeightedGraph([g.nodes[i] for i in ids], [g.node_weights[i] for i in ids], edges)


def split_node_weights(g: WeightedGraph) -> WeightedGraph:
    """Move node weights onto auxiliary edges so every node weight becomes 1.

    A node with weight below 1 that has both in- and out-edges becomes its
    in-half (keeping its name, receiving in-edges) and an :class:`OutPort`
    (emitting out-edges), joined by an edge carrying the node weight.  Nodes
    that cannot be intermediate on any path just get weight 1.  Use
    :func:`out_port` / :func:`in_port` to map query endpoints.
    """
    names: list = []
    port_in: list[int] = []
    port_out: list[int] = []
    aux: dict[tuple[int, int], float] = {}
    for u, name in enumerate(g.nodes):
        port_in.append(len(names))
        names.append(name)
        w = g.node_weights[u]
        if w < 1.0 and g.pred[u] and g.succ[u]:
            names.append(OutPort(name))
            aux[(len(names) - 2, len(names) - 1)] = w
        port_out.append(len(names) - 1)
    edges = {(port_out[u], port_in[v]): w for (u, v), w in g.edge_weight.items()}
    edges.update(aux)
    return WeightedGraph(names, [1.0] * len(names), edges)


def out_port(g: WeightedGraph, name: Node) -> Node:
    """Name under which ``name`` emits edges in a split graph."""
    port = OutPort(name)
    return port if port in g.index else name


def in_port(g: WeightedGraph, name: Node) -> Node:
    """Name under which ``name`` receives edges in a split graph."""
    return name


def expand_hyperedges(records: Iterable[HyperedgeRecord], base: WeightedGraph | None = None) -> WeightedGraph:
    """Encode each hyperedge as an auxiliary node with weight-1 spokes.

    The auxiliary node carries the hyperedge weight, so all member-to-member
    paths through one hyperedge exist or vanish together.
    """
    edges = list(base.edges()) if base is not None else []
    node_w = dict(zip(base.nodes, base.node_weights)) if base is not None else {}
    nodes = list(base.nodes) if base is not None else []
    for i, rec in enumerate(records):
        if not isinstance(rec, HyperedgeRecord):
            rec = HyperedgeRecord(*rec)
        hub = HyperedgeNode(i)
        nodes.append(hub)
        node_w[hub] = rec.weight
        for m in sorted(rec.members, key=str):
            edges.append((m, hub, 1.0))
            edges.append((hub, m, 1.0))
    return WeightedGraph.from_edges(edges, node_weights=node_w, nodes=nodes)


def hop_neighborhood(g: WeightedGraph, source: Node, hops: int) -> list:
    """Names of nodes within ``hops`` forward hops of ``source`` (excluding it)."""
    s = g.id(source)
    seen = {s}
    frontier = [s]
    for _ in range(hops):
        nxt = []
        for u in frontier:
            for v, _w in g.succ[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    seen.discard(s)
    return [g.nodes[i] for i in sorted(seen)]


# -- file formats ------------------------------------------------------------


@dataclass(frozen=True)
class EdgeRecord:
    src: str
    dst: str
    f: float = 1.0
    position: int = 0  # 1-based order among lines with the same src


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line.split("\t") if "\t" in line else line.split()


def _positive(text: str, path, lineno) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", str(path), lineno) from None
    if not value > 0:
        raise ParseError(f"value must be positive, got {value}", str(path), lineno)
    return value


def read_edge_list(path) -> list[EdgeRecord]:
    """Parse ``src<TAB>dst[<TAB>f_value]`` lines."""
    out = []
    counts: dict[str, int] = {}
    for lineno, cols in _lines(path):
        if len(cols) not in (2, 3):
            raise ParseError(f"expected 2 or 3 columns, got {len(cols)}", str(path), lineno)
        f = _positive(cols[2], path, lineno) if len(cols) == 3 else 1.0
        pos = counts[cols[0]] = counts.get(cols[0], 0) + 1
        out.append(EdgeRecord(cols[0], cols[1], f, pos))
    return out


def read_node_file(path) -> dict[str, float]:
    """Parse ``node<TAB>f_value`` lines."""
    out = {}
    for lineno, cols in _lines(path):
        if len(cols) != 2:
            raise ParseError(f"expected 2 columns, got {len(cols)}", str(path), lineno)
        out[cols[0]] = _positive(cols[1], path, lineno)
    return out


def read_hyperedges(path) -> list[HyperedgeRecord]:
    """Parse ``weight<TAB>member1<TAB>member2...`` lines."""
    out = []
    for lineno, cols in _lines(path):
        if len(cols) < 3:
            raise ParseError("hyperedge needs a weight and at least 2 members", str(path), lineno)
        w = _positive(cols[0], path, lineno)
        try:
            out.append(HyperedgeRecord(frozenset(cols[1:]), w))
        except ValueError as exc:
            raise ParseError(str(exc), str(path), lineno) from None
    return out


def _check_unit_column(path, col: int) -> None:
    for lineno, cols in _lines(path):
        if len(cols) > col:
            value = _positive(cols[col], path, lineno)
            if value > 1.0:
                raise ParseError(f"weight {value} is outside (0, 1]", str(path), lineno)


def load_graph(edge_path=None, node_path=None, hyperedge_path=None, undirected: bool = False) -> WeightedGraph:
    """Load a graph whose file values are used directly as blink weights."""
    for path, col in ((edge_path, 2), (node_path, 1), (hyperedge_path, 0)):
        if path:
            _check_unit_column(path, col)
    edges = [(r.src, r.dst, r.f) for r in read_edge_list(edge_path)] if edge_path else []
    node_w = read_node_file(node_path) if node_path else {}
    try:
        g = WeightedGraph.from_edges(edges, node_weights=node_w, undirected=undirected)
        if hyperedge_path:
            g = expand_hyperedges(read_hyperedges(hyperedge_path), base=g)
    except WeightRangeError as exc:
        raise ParseError(str(exc), str(edge_path or hyperedge_path)) from None
    return g
