"""Exact blink probabilities for small graphs.

Two independent engines live here:

* :func:`exact_reachability` conditions on one uncertain edge at a time
  (edge factoring) and applies series/parallel reductions, pruning and
  certain-edge contraction at every recursion level.
* :func:`brute_force_reachability` and :func:`exact_event_probability`
  enumerate every blink state with numpy.  They share no code with the
  factoring engine and serve as its oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import CapExceeded
from .graph import Node, WeightedGraph, in_port, out_port

DEFAULT_CAP = 25
EVENT_CAP = 20
BRUTE_FORCE_CAP = 20
CLAMP = 1.0 - 1e-15


def score_from_probability(b: float) -> float:
    """``-ln(1 - b)`` with ``b`` clamped below 1 so the score stays finite."""
    return -math.log1p(-min(float(b), CLAMP))


def probability_from_score(s: float) -> float:
    return -math.expm1(-s)


# -- factoring engine --------------------------------------------------------


class _Net:
    """Mutable adjacency used during factoring (dict-of-dicts both ways)."""

    __slots__ = ("succ", "pred")

    def __init__(self, succ, pred):
        self.succ = succ
        self.pred = pred

    @classmethod
    def from_graph(cls, g: WeightedGraph) -> "_Net":
        succ = {u: {} for u in range(g.n_nodes)}
        pred = {u: {} for u in range(g.n_nodes)}
        for (u, v), w in g.edge_weight.items():
            succ[u][v] = w
            pred[v][u] = w
        return cls(succ, pred)

    def copy(self) -> "_Net":
        return _Net({u: dict(d) for u, d in self.succ.items()}, {u: dict(d) for u, d in self.pred.items()})

    def n_edges(self) -> int:
        return sum(len(d) for d in self.succ.values())

    def add(self, u, v, w):
        if u == v:
            return
        old = self.succ[u].get(v)
        if old is not None:
            w = 1.0 - (1.0 - old) * (1.0 - w)
        self.succ[u][v] = w
        self.pred[v][u] = w

    def remove_edge(self, u, v):
        del self.succ[u][v]
        del self.pred[v][u]

    def remove_node(self, x):
        for v in self.succ.pop(x):
            del self.pred[v][x]
        for u in self.pred.pop(x):
            del self.succ[u][x]


def _prune(net: _Net, s, t) -> bool:
    """Drop everything not on some s->t route; return False if t is cut off."""
    for u in list(net.pred[s]):
        net.remove_edge(u, s)
    for v in list(net.succ[t]):
        net.remove_edge(t, v)
    fwd = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v in net.succ[u]:
            if v not in fwd:
                fwd.add(v)
                stack.append(v)
    if t not in fwd:
        return False
    bwd = {t}
    stack = [t]
    while stack:
        v = stack.pop()
        for u in net.pred[v]:
            if u not in bwd and u in fwd:
                bwd.add(u)
                stack.append(u)
    for x in [x for x in net.succ if x not in bwd]:
        net.remove_node(x)
    return True


def _certainly_connected(net: _Net, s, t) -> bool:
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v, w in net.succ[u].items():
            if w >= 1.0 and v not in seen:
                if v == t:
                    return True
                seen.add(v)
                stack.append(v)
    return False


def _reduce(net: _Net, s, t) -> float | None:
    """Reduce in place; return 0.0/1.0 when the answer is already determined."""
    changed = True
    while changed:
        changed = False
        if not _prune(net, s, t):
            return 0.0
        if _certainly_connected(net, s, t):
            return 1.0
        for y in list(net.succ):
            if y == s or y == t or y not in net.succ:
                continue
            ins, outs = net.pred[y], net.succ[y]
            if len(ins) == 1 and len(outs) == 1:
                (x, w1), = ins.items()
                (z, w2), = outs.items()
                net.remove_node(y)
                net.add(x, z, w1 * w2)
                changed = True
                continue
            # a certain edge lets its endpoints be identified in four safe cases
            for x, w in list(ins.items()):
                if w < 1.0:
                    continue
                if x == s or len(ins) == 1:
                    # y is reached whenever x is: y's out-edges move to x
                    for z, wz in list(outs.items()):
                        net.add(x, z, wz)
                    net.remove_node(y)
                    changed = True
                    break
            if changed or y not in net.succ:
                continue
            for z, w in list(outs.items()):
                if w < 1.0:
                    continue
                if z == t or len(outs) == 1:
                    # reaching y implies reaching z: y's in-edges move to z
                    for x, wx in list(ins.items()):
                        net.add(x, z, wx)
                    net.remove_node(y)
                    changed = True
                    break
    return None


def _factor(net: _Net, s, t) -> float:
    done = _reduce(net, s, t)
    if done is not None:
        return done
    direct = net.succ[s].get(t)
    if direct is not None:
        net.remove_edge(s, t)
        if net.n_edges() == 0:
            return direct
        return direct + (1.0 - direct) * _factor(net, s, t)
    best = None
    for u, d in net.succ.items():
        for v, w in d.items():
            if w < 1.0:
                key = (abs(w - 0.5), u, v)
                if best is None or key < best[0]:
                    best = (key, u, v, w)
    _, u, v, w = best
    present = net.copy()
    present.succ[u][v] = present.pred[v][u] = 1.0
    net.remove_edge(u, v)
    return w * _factor(present, s, t) + (1.0 - w) * _factor(net, s, t)


def reduced_size(g: WeightedGraph, source: Node, target: Node) -> int:
    """Edge count left after splitting and reduction (0 if decided outright)."""
    sg = g.split()
    s, t = sg.id(out_port(sg, source)), sg.id(in_port(sg, target))
    net = _Net.from_graph(sg)
    if s == t or _reduce(net, s, t) is not None:
        return 0
    return net.n_edges()


def exact_reachability(g: WeightedGraph, source: Node, target: Node, cap: int = DEFAULT_CAP) -> float:
    """Probability that at least one source->target path exists.

    Raises :class:`CapExceeded` when more than ``cap`` edges survive the
    initial reduction.
    """
    if source == target:
        g.id(source)
        return 1.0
    sg = g.split()
    s, t = sg.id(out_port(sg, source)), sg.id(in_port(sg, target))
    net = _Net.from_graph(sg)
    done = _reduce(net, s, t)
    if done is not None:
        return done
    m = net.n_edges()
    if m > cap:
        raise CapExceeded(f"{m} edges remain after reduction (cap {cap})")
    return min(1.0, max(0.0, _factor(net, s, t)))


def exact_blink_score(g: WeightedGraph, source: Node, target: Node, cap: int = DEFAULT_CAP) -> float:
    return score_from_probability(exact_reachability(g, source, target, cap))


def blink_distance(g: WeightedGraph, source: Node, target: Node, cap: int = DEFAULT_CAP) -> float:
    """``-ln b(source, target)``; ``math.inf`` when the target is unreachable.

    The triangle inequality holds when intermediate nodes have weight 1; a
    weak middle node B can make ``b(A, C) < b(A, B) * b(B, C)`` because B must
    exist to relay the path but is an endpoint in both shorter legs.
    """
    b = exact_reachability(g, source, target, cap)
    return math.inf if b <= 0.0 else -math.log(b)


# -- enumeration engine ------------------------------------------------------


def _enumerate(n_nodes, edges, edge_p, gate_nodes, gate_p, sources):
    """Reachability matrix over all blink states.

    ``edges`` are ``(u, v)`` pairs; ``gate_nodes`` are nodes that must exist to
    be passed through (never sources).  Returns ``(state_probs, reach)`` with
    ``reach`` of shape ``(n_states, n_nodes)``.
    """
    m_e, m_n = len(edges), len(gate_nodes)
    m = m_e + m_n
    codes = np.arange(1 << m, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(m)) & 1).astype(bool)
    p = np.concatenate([np.asarray(edge_p, float), np.asarray(gate_p, float)])
    probs = np.prod(np.where(bits, p, 1.0 - p), axis=1) if m else np.ones(1)
    alive = np.ones((len(codes), n_nodes), dtype=bool)
    for k, x in enumerate(gate_nodes):
        alive[:, x] = bits[:, m_e + k]
    for x in sources:
        alive[:, x] = True
    reach = np.zeros((len(codes), n_nodes), dtype=bool)
    reach[:, list(sources)] = True
    while True:
        before = reach.copy()
        for k, (u, v) in enumerate(edges):
            reach[:, v] |= reach[:, u] & alive[:, u] & bits[:, k]
        if np.array_equal(before, reach):
            return probs, reach


def brute_force_reachability(g: WeightedGraph, source: Node, target: Node) -> float:
    """Sum state probabilities over every edge/node blink state.

    Works on the unsplit graph: nodes other than the source gate traversal
    directly.  Limited to ``BRUTE_FORCE_CAP`` random elements.
    """
    s, t = g.id(source), g.id(target)
    if s == t:
        return 1.0
    edges = list(g.edge_weight)
    gates = [x for x in range(g.n_nodes) if x not in (s, t) and g.node_weights[x] < 1.0]
    if len(edges) + len(gates) > BRUTE_FORCE_CAP:
        raise CapExceeded(f"{len(edges) + len(gates)} random elements exceed brute-force cap {BRUTE_FORCE_CAP}")
    probs, reach = _enumerate(g.n_nodes, edges, list(g.edge_weight.values()), gates,
                              [g.node_weights[x] for x in gates], [s])
    return math.fsum(probs[reach[:, t]])


@dataclass(frozen=True)
class Reach:
    source: Node
    target: Node


@dataclass(frozen=True)
class AnyToAll:
    sources: frozenset
    targets: frozenset

    def __post_init__(self):
        object.__setattr__(self, "sources", frozenset(self.sources))
        object.__setattr__(self, "targets", frozenset(self.targets))
        if not self.sources or not self.targets:
            raise ValueError("source and target sets must be nonempty")


@dataclass(frozen=True)
class ReachAndAvoid:
    source: Node
    target: Node
    avoid: Node


BlinkEvent = Union[Reach, AnyToAll, ReachAndAvoid]


def exact_event_probability(g: WeightedGraph, event: BlinkEvent, cap: int = EVENT_CAP) -> float:
    """Exact probability of a generalized blink event by state enumeration.

    Node weights are split into edges first and the cap applies to the
    resulting edge count.
    """
    if isinstance(event, Reach):
        srcs, tgts = [event.source], [event.target]
    elif isinstance(event, AnyToAll):
        srcs, tgts = sorted(event.sources, key=g.id), sorted(event.targets, key=g.id)
    elif isinstance(event, ReachAndAvoid):
        srcs, tgts = [event.source], [event.target, event.avoid]
    else:
        raise TypeError(f"unsupported event {event!r}")
    sg = g.split()
    if sg.n_edges > cap:
        raise CapExceeded(f"{sg.n_edges} edges exceed event cap {cap}")
    s_ids = [sg.id(out_port(sg, a)) for a in srcs]
    t_ids = [sg.id(in_port(sg, b)) for b in tgts]
    probs, reach = _enumerate(sg.n_nodes, list(sg.edge_weight), list(sg.edge_weight.values()), [], [], s_ids)
    # a node that is itself a source is trivially reached
    for a in srcs:
        reach[:, sg.id(in_port(sg, a))] = True
    if isinstance(event, ReachAndAvoid):
        hit = reach[:, t_ids[0]] & ~reach[:, t_ids[1]]
    else:
        hit = np.all(reach[:, t_ids], axis=1)
    return math.fsum(probs[hit])


def generalized_score(g: WeightedGraph, event: BlinkEvent, cap: int = EVENT_CAP) -> float:
    return score_from_probability(exact_event_probability(g, event, cap))
