"""Monte Carlo estimation of blink reachability and expected reliable distance.

Samples are processed in fixed batches.  Every random element (edge or node)
gets its own generator keyed by ``(seed, batch, element)``, and a batch of
size ``r`` uses the first ``r`` draws of that stream.  Sample ``i`` therefore
sees the same blink instance regardless of traversal order, of which other
elements were touched, and of how the sample range is partitioned.  Two graphs
sharing node ids also share draws (common random numbers), which makes
comparisons between them far less noisy than independent runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Node, WeightedGraph

BATCH = 8192


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    hits: int

    @classmethod
    def from_hits(cls, hits: int, samples: int) -> "McEstimate":
        mean = hits / samples
        return cls(mean, math.sqrt(mean * (1.0 - mean) / samples), samples, hits)


class _Draws:
    """Lazily realized blink states for one batch."""

    def __init__(self, g: WeightedGraph, seed: int, batch: int, size: int):
        self.g = g
        self.key = (int(seed), int(batch))
        self.size = size
        self._edges: dict[tuple[int, int], np.ndarray] = {}
        self._nodes: dict[int, np.ndarray] = {}
        self._all = np.ones(size, dtype=bool)

    def edge(self, u: int, v: int, w: float) -> np.ndarray:
        col = self._edges.get((u, v))
        if col is None:
            if w >= 1.0:
                col = self._all
            else:
                rng = np.random.default_rng([*self.key, 0, u, v])
                col = rng.random(self.size) < w
            self._edges[(u, v)] = col
        return col

    def node(self, x: int) -> np.ndarray:
        col = self._nodes.get(x)
        if col is None:
            w = self.g.node_weights[x]
            if w >= 1.0:
                col = self._all
            else:
                rng = np.random.default_rng([*self.key, 1, x])
                col = rng.random(self.size) < w
            self._nodes[x] = col
        return col


def _bfs(draws: _Draws, start: int, reverse: bool = False, stop: int | None = None):
    """Wave-by-wave BFS over all samples of a batch at once.

    Returns ``(reached, hops)``: boolean masks per reached node id and, when
    ``stop`` is given, the hop count at which ``stop`` was first reached
    (``-1`` where never).  The start node always expands; any other node
    expands only in samples where it exists.
    """
    g = draws.g
    adj = g.pred if reverse else g.succ
    size = draws.size
    reached = {start: np.ones(size, dtype=bool)}
    frontier = {start: reached[start]}
    hops = np.full(size, -1, dtype=np.int64) if stop is not None else None
    wave = 0
    while frontier:
        wave += 1
        nxt: dict[int, np.ndarray] = {}
        for u, mask in frontier.items():
            live = mask if u == start else mask & draws.node(u)
            if not live.any():
                continue
            for v, w in adj[u]:
                e = (v, u) if reverse else (u, v)
                hit = live & draws.edge(e[0], e[1], w)
                seen = reached.get(v)
                if seen is not None:
                    hit &= ~seen
                if hit.any():
                    nxt[v] = nxt[v] | hit if v in nxt else hit
        for v, hit in nxt.items():
            reached[v] = reached[v] | hit if v in reached else hit
            if v == stop:
                hops[hit] = wave
        if stop is not None and stop in reached and reached[stop].all():
            break
        frontier = nxt
    return reached, hops


def _batches(n: int):
    for b, start in enumerate(range(0, n, BATCH)):
        yield b, min(BATCH, n - start)


def sample_reachable_set(g: WeightedGraph, source: Node, seed: int) -> set:
    """Nodes reachable from ``source`` in one lazily realized blink instance.

    This is sample 0 of the stream used by :func:`mc_blink_estimate`.
    """
    draws = _Draws(g, seed, 0, 1)
    reached, _ = _bfs(draws, g.id(source))
    return {g.nodes[v] for v, m in reached.items() if m[0]}


def mc_reach_counts(g: WeightedGraph, source: Node, n: int, seed: int) -> np.ndarray:
    """Per-node count of samples (out of ``n``) in which the node is reached."""
    if n < 1:
        raise ValueError("n must be at least 1")
    s = g.id(source)
    counts = np.zeros(g.n_nodes, dtype=np.int64)
    for b, size in _batches(n):
        reached, _ = _bfs(_Draws(g, seed, b, size), s)
        for v, m in reached.items():
            counts[v] += int(m.sum())
    return counts


def mc_blink_estimate(g: WeightedGraph, source: Node, target: Node, n: int, seed: int) -> McEstimate:
    if n < 1:
        raise ValueError("n must be at least 1")
    s, t = g.id(source), g.id(target)
    hits = 0
    for b, size in _batches(n):
        reached, _ = _bfs(_Draws(g, seed, b, size), s, stop=t)
        if t in reached:
            hits += int(reached[t].sum())
    return McEstimate.from_hits(hits, n)


def mc_erd(g: WeightedGraph, source: Node, target: Node, n: int, seed: int, symmetric: bool = False) -> float:
    """Expected hop distance given connection; ``math.inf`` if never connected.

    With ``symmetric`` the per-sample distance is the shorter of the forward
    and backward directions, both read from the same blink instance.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    s, t = g.id(source), g.id(target)
    if s == t:
        return 0.0
    total = 0
    connected = 0
    for b, size in _batches(n):
        draws = _Draws(g, seed, b, size)
        _, d = _bfs(draws, s, stop=t)
        if symmetric:
            # B->A in the realized instance: start at A, walk edges backwards
            _, back = _bfs(draws, s, reverse=True, stop=t)
            both = (d > 0) & (back > 0)
            d = np.where(both, np.minimum(d, back), np.maximum(d, back))
        ok = d > 0
        connected += int(ok.sum())
        total += int(d[ok].sum())
    return total / connected if connected else math.inf


def mc_erd_all(g: WeightedGraph, source: Node, n: int, seed: int) -> np.ndarray:
    """Forward expected hop distance from ``source`` to every node.

    Entry ``v`` is the mean first-reach wave over samples that reach ``v``,
    or ``inf`` when no sample does.  Equals :func:`mc_erd` per target.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    s = g.id(source)
    total = np.zeros(g.n_nodes)
    count = np.zeros(g.n_nodes, dtype=np.int64)
    for b, size in _batches(n):
        draws = _Draws(g, seed, b, size)
        reached = {s: np.ones(size, dtype=bool)}
        frontier = dict(reached)
        wave = 0
        while frontier:
            wave += 1
            nxt: dict[int, np.ndarray] = {}
            for u, mask in frontier.items():
                live = mask if u == s else mask & draws.node(u)
                if not live.any():
                    continue
                for v, w in g.succ[u]:
                    hit = live & draws.edge(u, v, w)
                    if v in reached:
                        hit &= ~reached[v]
                    if hit.any():
                        nxt[v] = nxt[v] | hit if v in nxt else hit
            for v, hit in nxt.items():
                reached[v] = reached[v] | hit if v in reached else hit
                k = int(hit.sum())
                total[v] += wave * k
                count[v] += k
            frontier = nxt
    out = np.full(g.n_nodes, np.inf)
    ok = count > 0
    out[ok] = total[ok] / count[ok]
    out[s] = 0.0
    return out
