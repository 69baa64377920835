"""From domain knowledge ``f_E``, ``f_V`` and parameters ``(b1, b2)`` to blink weights."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import WeightRangeError
from .graph import EdgeRecord, HyperedgeNode, HyperedgeRecord, Node, WeightedGraph, expand_hyperedges

DEFAULT_B_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))
DEFAULT_GAMMA_GRID = (4.0, 5.0, 10.0, 500.0)


class SchemeKind(enum.Enum):
    EXPONENTIAL = "exponential"
    LINEAR = "linear"


@dataclass(frozen=True)
class WeightScheme:
    kind: SchemeKind = SchemeKind.EXPONENTIAL
    b1: float = 0.5
    b2: float = 0.5

    def __post_init__(self):
        kind = self.kind if isinstance(self.kind, SchemeKind) else SchemeKind(str(self.kind).lower())
        object.__setattr__(self, "kind", kind)
        for name in ("b1", "b2"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")

    def weight(self, b: float, f: float) -> float:
        """Blink weight for base ``b`` and knowledge value ``f`` (``inf`` gives 1)."""
        if math.isinf(f):
            return 1.0
        if self.kind is SchemeKind.EXPONENTIAL:
            return -math.expm1(f * math.log1p(-b))
        w = b * f
        if w > 1.0:
            raise WeightRangeError(f"linear weight {b}*{f} exceeds 1")
        return w


@dataclass
class DomainKnowledge:
    """Per-edge and per-node knowledge values; missing entries mean ``f = 1``.

    ``f_E`` is keyed by ``(src, dst)``; several records on one pair add up,
    which is what keeps the exponential scheme consistent with merging
    parallel edges.
    """

    f_E: dict = field(default_factory=dict)
    f_V: dict = field(default_factory=dict)
    nodes: list = field(default_factory=list)

    @classmethod
    def uniform(cls, edges: Iterable[tuple], nodes: Iterable[Node] = ()) -> "DomainKnowledge":
        k = cls(nodes=list(nodes))
        for src, dst, *_ in edges:
            k.add_edge(src, dst, 1.0)
        return k

    def add_edge(self, src, dst, f: float) -> None:
        if src == dst:
            return
        key = (src, dst)
        self.f_E[key] = self.f_E.get(key, 0.0) + f


def apply_weights(knowledge: DomainKnowledge, scheme: WeightScheme) -> WeightedGraph:
    """Weights ``g(b1, f_E)`` on edges and ``g(b2, f_V)`` on nodes; missing ``f`` is 1."""
    edges = [(s, d, scheme.weight(scheme.b1, f)) for (s, d), f in knowledge.f_E.items()]
    nodes = list(knowledge.nodes) or list(dict.fromkeys(n for e in knowledge.f_E for n in e))
    for n in knowledge.f_V:
        if n not in nodes:
            nodes.append(n)
    node_w = {n: scheme.weight(scheme.b2, knowledge.f_V.get(n, 1.0)) for n in nodes}
    return WeightedGraph.from_edges(edges, node_weights=node_w, nodes=nodes)


def _log_base(x: float, gamma: float) -> float:
    return math.log(x) / math.log(gamma)


def arxiv_knowledge(papers: Sequence[Iterable[Node]], gamma: float) -> DomainKnowledge:
    """Paper/author bipartite knowledge.

    Each paper becomes a node linked to and from every author.  Edge X->Y gets
    ``1 / max(1, log_gamma outdeg(X))``; paper nodes get ``f_V = inf``
    (weight 1) and an author gets ``1 / max(1, log_gamma m)`` with ``m`` its
    number of distinct coauthors.
    """
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    out_deg: dict = {}
    coauthors: dict = {}
    links = []
    nodes = []
    for i, authors in enumerate(papers):
        authors = sorted(set(authors), key=str)
        hub = HyperedgeNode(i)
        nodes.append(hub)
        out_deg[hub] = len(authors)
        for a in authors:
            out_deg[a] = out_deg.get(a, 0) + 1
            coauthors.setdefault(a, set()).update(x for x in authors if x != a)
            links.append((a, hub))
            links.append((hub, a))
    k = DomainKnowledge(nodes=sorted(coauthors, key=str) + nodes)
    for x, y in links:
        k.add_edge(x, y, 1.0 / max(1.0, _log_base(out_deg[x], gamma)))
    for hub in nodes:
        k.f_V[hub] = math.inf
    for a, co in coauthors.items():
        k.f_V[a] = 1.0 / max(1.0, _log_base(len(co), gamma)) if co else 1.0
    return k


def arxiv_uniform_graph(papers: Sequence[Iterable[Node]], b1: float, b2: float) -> WeightedGraph:
    """Topology-only coauthorship graph: each paper is a hyperedge.

    Every edge (author<->paper spoke) and every node gets the same weight:
    ``b1`` for edges and ``b2`` for nodes, with papers as weighted hyperedge
    nodes.
    """
    records = [HyperedgeRecord(frozenset(a), b2) for a in papers if len(set(a)) >= 2]
    g = expand_hyperedges(records)
    edges = [(s, d, b1) for s, d, _w in g.edges()]
    return WeightedGraph.from_edges(edges, node_weights={n: b2 for n in g.nodes}, nodes=g.nodes)


def wiki_knowledge(records: Sequence[EdgeRecord], gamma: float) -> DomainKnowledge:
    """Citation-graph knowledge.

    The i-th citation X->Y gets ``delta / (max(1, log_gamma i) * max(1,
    log_gamma indeg(Y)))`` with ``delta = 2`` when Y also cites X.  Nodes get
    ``1 / (ln max(d_in, 2) + ln max(d_out, 2))``.
    """
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    pairs = {(r.src, r.dst) for r in records if r.src != r.dst}
    indeg: dict = {}
    outdeg: dict = {}
    nodes: list = []
    seen = set()
    for r in records:
        for n in (r.src, r.dst):
            if n not in seen:
                seen.add(n)
                nodes.append(n)
    for s, d in pairs:
        outdeg[s] = outdeg.get(s, 0) + 1
        indeg[d] = indeg.get(d, 0) + 1
    k = DomainKnowledge(nodes=nodes)
    for r in records:
        if r.src == r.dst:
            continue
        delta = 2.0 if (r.dst, r.src) in pairs else 1.0
        pos = max(1.0, _log_base(r.position, gamma)) if r.position > 0 else 1.0
        k.add_edge(r.src, r.dst, delta / (pos * max(1.0, _log_base(max(indeg.get(r.dst, 0), 1), gamma))))
    for n in nodes:
        k.f_V[n] = 1.0 / (math.log(max(indeg.get(n, 0), 2)) + math.log(max(outdeg.get(n, 0), 2)))
    return k


def grid_search(space: Mapping[str, Sequence], metric: Callable[..., float]):
    """Exhaustive scan; returns ``(best_params, best_value, table)``.

    ``metric`` is called with one keyword per axis.  Ties go to the
    lexicographically smallest parameter tuple (axes in sorted name order).
    """
    names = sorted(space)
    axes = [sorted(space[n]) for n in names]
    table = []
    best = None
    for combo in itertools.product(*axes):
        params = dict(zip(names, combo))
        value = float(metric(**params))
        table.append((combo, value))
        if best is None or value > best[1] or (value == best[1] and combo < best[0]):
            best = (combo, value)
    return dict(zip(names, best[0])), best[1], table
