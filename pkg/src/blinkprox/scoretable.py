"""Per-source score tables with one deterministic ranking rule."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph import Node, WeightedGraph


@dataclass
class ScoreTable:
    """Scores from one source node.

    Ranking is descending score, ties broken by higher in-degree and then by
    canonical node id.  ``tiers`` optionally partitions targets; a lower tier
    always ranks first (used when a refinement pass re-scores a prefix).
    """

    source: Node
    scores: dict = field(default_factory=dict)
    in_degree: dict = field(default_factory=dict)
    order_key: dict = field(default_factory=dict)
    tiers: dict = field(default_factory=dict)

    @classmethod
    def build(cls, g: WeightedGraph, source: Node, scores: Mapping[Node, float],
              tiers: Mapping[Node, int] | None = None) -> "ScoreTable":
        return cls(
            source=source,
            scores=dict(scores),
            in_degree={t: g.in_degree(g.id(t)) for t in scores},
            order_key={t: g.id(t) for t in scores},
            tiers=dict(tiers or {}),
        )

    def _key(self, t):
        return (self.tiers.get(t, 0), -self.scores[t], -self.in_degree.get(t, 0), self.order_key.get(t, 0))

    def ranked(self) -> list[tuple[Node, float]]:
        return [(t, self.scores[t]) for t in sorted(self.scores, key=self._key)]

    def top(self, k: int) -> list[Node]:
        return [t for t, _ in self.ranked()[:k]]

    def restrict(self, keep: Iterable[Node]) -> "ScoreTable":
        keep = set(keep)
        pick = lambda d: {t: v for t, v in d.items() if t in keep}
        return ScoreTable(self.source, pick(self.scores), pick(self.in_degree), pick(self.order_key), pick(self.tiers))

    def __len__(self) -> int:
        return len(self.scores)

    def __getitem__(self, t) -> float:
        return self.scores[t]

    def __contains__(self, t) -> bool:
        return t in self.scores
