"""Minimal-path enumeration with strength and fan-out filters.

All paths live on the node-split graph (``WeightedGraph.split()``), where
every node weight has become an edge weight.  A path's ``length`` is its
number of split edges.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import BudgetExceeded, Unreachable
from .exact import CLAMP
from .graph import Node, OutPort, WeightedGraph, in_port, out_port


def nominal_contribution(weights) -> float:
    """``-ln(1 - prod(weights))`` with the usual clamp below 1."""
    p = math.prod(weights)
    return -math.log1p(-min(p, CLAMP))


@dataclass(frozen=True)
class MinimalPath:
    """A node-nonrepeating path on the split graph.

    ``ids`` are split-graph node ids; ``edges`` pairs of consecutive ids.
    """

    ids: tuple[int, ...]
    weights: tuple[float, ...]
    nominal: float

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.ids, self.ids[1:]))

    @property
    def length(self) -> int:
        return len(self.weights)

    @property
    def product(self) -> float:
        return math.prod(self.weights)

    def names(self, sg: WeightedGraph) -> list:
        """Original node names along the path, with out-ports folded away."""
        out = []
        for i in self.ids:
            name = sg.nodes[i]
            name = name.node if isinstance(name, OutPort) else name
            if not out or out[-1] != name:
                out.append(name)
        return out

    @classmethod
    def from_ids(cls, sg: WeightedGraph, ids) -> "MinimalPath":
        ids = tuple(ids)
        ws = tuple(sg.edge_weight[e] for e in zip(ids, ids[1:]))
        return cls(ids, ws, nominal_contribution(ws))


@dataclass(frozen=True)
class PathFilterParams:
    t1: float = 1e-4
    t2: float = 2e-6
    max_paths_per_source: int = 1_000_000

    def __post_init__(self):
        if not self.t1 >= 0:
            raise ValueError("t1 must be non-negative")
        if not 0 < self.t2 <= 1:
            raise ValueError("t2 must lie in (0, 1]")
        if self.max_paths_per_source < 1:
            raise ValueError("max_paths_per_source must be positive")

    @property
    def min_product(self) -> float:
        # nominal >= t1  <=>  product >= 1 - exp(-t1)
        return -math.expm1(-self.t1)


def fanout_factors(sg: WeightedGraph) -> list[list[float]]:
    """Per out-edge share ``log(1-w_e) / sum_f log(1-w_f)`` of each node."""
    out = []
    for succ in sg.succ:
        logs = [math.log1p(-min(w, CLAMP)) for _v, w in succ]
        total = sum(logs)
        out.append([x / total for x in logs])
    return out


@numba.njit(cache=True)
def _grow(a, need):
    if need <= len(a):
        return a
    b = np.empty(max(need, 2 * len(a)), dtype=a.dtype)
    b[: len(a)] = a
    return b


@numba.njit(cache=True)
def _dfs_kernel(indptr, indices, wts, factors, is_port, wanted, s, src_in, pmin, t2, budget):
    """Iterative form of the search in :func:`enumerate_minimal_paths`."""
    n = len(indptr) - 1
    on_path = np.zeros(n, dtype=np.bool_)
    on_path[s] = True
    on_path[src_in] = True
    ids = np.empty(n + 1, dtype=np.int64)
    via = np.empty(n + 1, dtype=np.int64)
    prods = np.empty(n + 1)
    fans = np.empty(n + 1)
    cursor = np.empty(n + 1, dtype=np.int64)
    out_ids = np.empty(1024, dtype=np.int64)
    out_edges = np.empty(1024, dtype=np.int64)
    out_off = np.zeros(256, dtype=np.int64)
    out_prod = np.empty(256)
    n_ids = 0
    n_edges = 0
    count = 0
    depth = 0
    ids[0] = s
    prods[0] = 1.0
    fans[0] = 1.0
    cursor[0] = indptr[s]
    while depth >= 0:
        u = ids[depth]
        i = cursor[depth]
        if i >= indptr[u + 1]:
            on_path[u] = False
            depth -= 1
            continue
        cursor[depth] = i + 1
        v = indices[i]
        if on_path[v]:
            continue
        p = prods[depth] * wts[i]
        f = fans[depth] * factors[i]
        if p < pmin or f < t2:
            continue
        depth += 1
        ids[depth] = v
        via[depth] = i
        prods[depth] = p
        fans[depth] = f
        cursor[depth] = indptr[v]
        on_path[v] = True
        if not is_port[v] and wanted[v]:
            count += 1
            if count > budget:
                return out_ids[:0], out_edges[:0], out_off[:1], out_prod[:0], False
            out_ids = _grow(out_ids, n_ids + depth + 1)
            out_edges = _grow(out_edges, n_edges + depth)
            out_off = _grow(out_off, count + 1)
            out_prod = _grow(out_prod, count)
            out_ids[n_ids:n_ids + depth + 1] = ids[: depth + 1]
            out_edges[n_edges:n_edges + depth] = via[1: depth + 1]
            n_ids += depth + 1
            n_edges += depth
            out_off[count] = n_ids
            out_prod[count - 1] = p
    return out_ids[:n_ids], out_edges[:n_edges], out_off[: count + 1], out_prod[:count], True


def _csr(sg: WeightedGraph):
    """Cached CSR arrays of ``sg``: indptr, successor ids, weights, fan-out factors."""
    cached = sg.__dict__.get("_csr")
    if cached is None:
        indptr = np.zeros(sg.n_nodes + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(succ) for succ in sg.succ])
        indices = np.fromiter((v for succ in sg.succ for v, _w in succ), dtype=np.int64, count=int(indptr[-1]))
        wts = np.fromiter((w for succ in sg.succ for _v, w in succ), dtype=float, count=int(indptr[-1]))
        factors = np.fromiter((x for row in fanout_factors(sg) for x in row), dtype=float, count=int(indptr[-1]))
        is_port = np.array([isinstance(name, OutPort) for name in sg.nodes], dtype=bool)
        cached = sg.__dict__["_csr"] = (indptr, indices, wts, factors, is_port)
    return cached


def concat_ranges(starts: np.ndarray, lens: np.ndarray) -> np.ndarray:
    """Concatenated ``arange(start, start + len)`` ranges."""
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    shift = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
    return shift + np.arange(total)


@dataclass(frozen=True)
class PathSet:
    """Many minimal paths on one split graph, stored flat.

    Path ``k`` visits ``ids[offsets[k]:offsets[k + 1]]`` and uses the CSR edges
    ``edges[offsets[k] - k:offsets[k + 1] - k - 1]`` with matching
    ``weights``.  Paths are grouped by target (ascending split id) and, within
    a target, ordered by descending nominal and then node ids.
    """

    ids: np.ndarray
    offsets: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    nominal: np.ndarray
    target: np.ndarray

    def __len__(self) -> int:
        return len(self.nominal)

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.offsets) - 1

    @property
    def edge_offsets(self) -> np.ndarray:
        return self.offsets - np.arange(len(self.offsets))

    def take(self, rows) -> "PathSet":
        rows = np.asarray(rows, dtype=np.int64)
        lens = self.lengths[rows]
        node_idx = concat_ranges(self.offsets[rows], lens + 1)
        edge_idx = concat_ranges(self.edge_offsets[rows], lens)
        offsets = np.concatenate(([0], np.cumsum(lens + 1))).astype(np.int64)
        return PathSet(self.ids[node_idx], offsets, self.edges[edge_idx], self.weights[edge_idx],
                       self.nominal[rows], self.target[rows])

    def by_target(self, sg: WeightedGraph) -> dict[Node, list[MinimalPath]]:
        ids = self.ids.tolist()
        ws = self.weights.tolist()
        off = self.offsets.tolist()
        eoff = self.edge_offsets.tolist()
        nominal = self.nominal.tolist()
        out: dict = {}
        for k, t in enumerate(self.target.tolist()):
            path = MinimalPath(tuple(ids[off[k]:off[k + 1]]), tuple(ws[eoff[k]:eoff[k + 1]]), nominal[k])
            out.setdefault(sg.nodes[t], []).append(path)
        return out

    @classmethod
    def from_ids(cls, sg: WeightedGraph, id_lists, sort: bool = True) -> "PathSet":
        """Build from raw node-id sequences (in any order)."""
        indptr, indices, wts, _f, _p = _csr(sg)
        seqs = [np.asarray(x, dtype=np.int64) for x in id_lists]
        lens = np.array([len(x) for x in seqs], dtype=np.int64)
        ids = np.concatenate(seqs) if seqs else np.zeros(0, dtype=np.int64)
        offsets = np.concatenate(([0], np.cumsum(lens))).astype(np.int64)
        mask = np.ones(len(ids), dtype=bool)
        mask[offsets[1:] - 1] = False  # last node of each path has no out-edge
        u = ids[mask]
        v = ids[np.flatnonzero(mask) + 1]
        codes = np.repeat(np.arange(sg.n_nodes, dtype=np.int64), np.diff(indptr)) * sg.n_nodes + indices
        edges = np.searchsorted(codes, u * sg.n_nodes + v)
        if len(edges) and (edges.max() >= len(codes) or np.any(codes[edges] != u * sg.n_nodes + v)):
            raise ValueError("path uses an edge that is not in the graph")
        weights = wts[edges]
        eoff = offsets - np.arange(len(offsets))
        prods = [math.prod(weights[eoff[k]:eoff[k + 1]].tolist()) for k in range(len(seqs))]
        return cls._finish(ids, offsets, edges, weights, prods, sort)

    @classmethod
    def _finish(cls, ids, offsets, edges, weights, prods, sort: bool) -> "PathSet":
        nominal = np.array([-math.log1p(-min(p, CLAMP)) for p in prods], dtype=float)
        target = ids[offsets[1:] - 1] if len(nominal) else np.zeros(0, dtype=np.int64)
        ps = cls(ids, offsets, edges, weights, nominal, target)
        if not sort or len(ps) == 0:
            return ps
        order = np.lexsort((np.arange(len(ps)), -nominal, target))
        return ps.take(order)


def enumerate_path_set(
    g: WeightedGraph,
    source: Node,
    params: PathFilterParams = PathFilterParams(),
    targets=None,
) -> PathSet:
    """Flat form of :func:`enumerate_minimal_paths`."""
    sg = g.split()
    indptr, indices, wts, factors, is_port = _csr(sg)
    s = sg.id(out_port(sg, source))
    src_in = sg.id(in_port(sg, source))
    if targets is None:
        wanted = np.ones(sg.n_nodes, dtype=bool)
    else:
        wanted = np.zeros(sg.n_nodes, dtype=bool)
        wanted[[sg.id(in_port(sg, t)) for t in targets]] = True
    ids, edges, offsets, prods, ok = _dfs_kernel(indptr, indices, wts, factors, is_port, wanted, s, src_in,
                                                 params.min_product, params.t2, params.max_paths_per_source)
    if not ok:
        raise BudgetExceeded(f"more than {params.max_paths_per_source} paths from {source!r}; tighten t1/t2")
    # the search visits successors in id order, so each target's paths arrive
    # in lexicographic id order and a stable sort on nominal finishes the job
    return PathSet._finish(ids, offsets, edges, wts[edges], prods.tolist(), sort=True)


def enumerate_minimal_paths(
    g: WeightedGraph,
    source: Node,
    params: PathFilterParams = PathFilterParams(),
    targets=None,
) -> dict[Node, list[MinimalPath]]:
    """Depth-first enumeration of filtered minimal paths from ``source``.

    Each surviving prefix that ends at an original node V (other than the
    source) is recorded as a path to V, so one traversal yields paths to
    every reachable target.  Returns ``{target_name: paths}`` with paths sorted
    by descending nominal, then node ids.  Raises :class:`BudgetExceeded`
    when more than ``params.max_paths_per_source`` paths would be kept.
    """
    return enumerate_path_set(g, source, params, targets).by_target(g.split())


def best_single_path(g: WeightedGraph, source: Node, target: Node) -> MinimalPath:
    """The path maximizing the weight product (Dijkstra on ``-ln w``)."""
    return best_single_paths(g, source, [target])[target]


def best_single_paths(g: WeightedGraph, source: Node, targets) -> dict[Node, MinimalPath]:
    """Strongest path to each target from one single-source search.

    Ties on cost go to the lexicographically smaller predecessor id, so the
    result is deterministic.  Raises :class:`Unreachable` if any target
    cannot be reached.
    """
    sg = g.split()
    s = sg.id(out_port(sg, source))
    src_in = sg.id(in_port(sg, source))
    dist = {s: 0.0}
    prev: dict[int, int] = {}
    heap = [(0.0, s)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in sg.succ[u]:
            if v == src_in or v in done:
                continue
            nd = d - math.log(w)
            if v not in dist or nd < dist[v] or (nd == dist[v] and u < prev.get(v, -1)):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    out = {}
    for t in targets:
        v = sg.id(in_port(sg, t))
        if v not in dist or v == s:
            raise Unreachable(f"{t!r} is not reachable from {source!r}")
        chain = [v]
        while chain[-1] != s:
            chain.append(prev[chain[-1]])
        out[t] = MinimalPath.from_ids(sg, reversed(chain))
    return out
