"""Temporal link-prediction benchmark: datasets, tasks, scoring runs and metrics.

A run is described by one plain ``key = value`` config file.  Training-period
files define the graph; test-period files define which new links count as
truth.  Every output is written with 12 significant digits and tasks are
processed in a fixed order, so a given config produces byte-identical files
regardless of the number of worker processes.
"""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .approx import ApproxParams, Variation, approx_blink
from .baselines import (
    Combine,
    adamic_adar,
    effective_conductance,
    katz_scores,
    ppr_scores,
    shortest_path_scores,
    symmetric_combine,
)
from .errors import ParseError, Unreachable
from .graph import EdgeRecord, WeightedGraph, _lines, hop_neighborhood, read_edge_list, read_node_file
from .montecarlo import mc_erd_all, sample_reachable_set
from .paths import PathFilterParams
from .scoretable import ScoreTable
from .weighting import (
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

log = logging.getLogger(__name__)

MEASURES = ("blink", "ppr", "katz", "adamic_adar", "erd", "conductance", "shortest_path")
RULES = ("new-edges", "wiki", "core")
KNOWLEDGE = ("file", "uniform", "wiki", "arxiv")
GRID_AXES = ("b1", "b2", "gamma", "alpha", "beta")


def fmt(x: float) -> str:
    return format(float(x), ".12g")


# -- configuration -----------------------------------------------------------


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


@dataclass(frozen=True)
class RunConfig:
    """Every setting of one benchmark run; file paths resolve against the config's folder."""

    train: str | None = None
    test: str | None = None
    nodes: str | None = None
    mapping: str | None = None
    rule: str = "new-edges"
    knowledge: str = "file"
    measure: str = "blink"
    variation: str = "medium"
    scheme: str = "auto"
    b1: float = 0.5
    b2: float = 0.5
    gamma: float = 10.0
    alpha: float = 0.2
    beta: float = 0.01
    t1: float = 1e-4
    t2: float = 2e-6
    seed: int = 0
    samples: int = 10_000
    hybrid_k: int = 0
    hops: int = 4
    symmetric: str = "none"
    metric: str = "map"
    workers: int = 1
    out: str | None = None
    grid: dict = field(default_factory=dict)

    def __post_init__(self):
        checks = (("rule", RULES), ("knowledge", KNOWLEDGE), ("measure", MEASURES),
                  ("metric", ("map", "precision")))
        for name, allowed in checks:
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        Variation.parse(self.variation)
        if self.scheme != "auto":
            SchemeKind(self.scheme)
        if self.symmetric != "none":
            Combine(self.symmetric)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        text = Path(path).read_text(encoding="utf-8")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
        try:
            parser.read_string("[run]\n" + text, source=str(path))
        except configparser.Error as exc:
            raise ParseError(str(exc).splitlines()[0], str(path)) from None
        base = Path(path).resolve().parent
        return cls.from_mapping(dict(parser["run"]), base, str(path))

    @classmethod
    def from_mapping(cls, raw: dict, base: Path | None = None, where: str = "<config>") -> "RunConfig":
        kinds = {f.name: f.type for f in fields(cls)}
        values: dict = {}
        grid: dict = {}
        for key, text in raw.items():
            key = key.strip().lower()
            text = str(text).strip()
            try:
                if key.startswith("grid_") and key[5:] in GRID_AXES:
                    grid[key[5:]] = _floats(text)
                elif key not in kinds or key == "grid":
                    raise ParseError(f"unknown key {key!r}", where)
                elif key in ("train", "test", "nodes", "mapping", "out"):
                    values[key] = str((base / text) if base is not None and not os.path.isabs(text) else text)
                elif kinds[key] in ("int",):
                    values[key] = int(text)
                elif kinds[key] in ("float",):
                    values[key] = float(text)
                else:
                    values[key] = text.lower() if key not in ("out",) else text
            except ValueError as exc:
                raise ParseError(f"bad value for {key}: {exc}", where) from None
        values["grid"] = grid
        try:
            return cls(**values)
        except ValueError as exc:
            raise ParseError(str(exc), where) from None

    @property
    def scheme_kind(self) -> SchemeKind:
        """``auto`` pairs PPR with linear weights and every other measure with exponential."""
        if self.scheme == "auto":
            return SchemeKind.LINEAR if self.measure == "ppr" else SchemeKind.EXPONENTIAL
        return SchemeKind(self.scheme)

    def approx_params(self) -> ApproxParams:
        return ApproxParams(
            variation=Variation.parse(self.variation),
            filters=PathFilterParams(self.t1, self.t2),
            seed=self.seed,
            mc_samples=self.samples,
            hybrid_k=self.hybrid_k or None,
        )


# -- datasets and tasks -------------------------------------------------------


@dataclass(frozen=True)
class PredictionTask:
    source: object
    truth: frozenset
    excluded: frozenset
    candidates: tuple

    def __post_init__(self):
        if not self.truth <= set(self.candidates):
            raise ValueError("truth must be a subset of candidates")
        if self.truth & self.excluded:
            raise ValueError("truth and excluded sets overlap")


@dataclass
class TemporalDataset:
    """Training-period material plus the tasks derived from the test period."""

    rule: str
    records: list = field(default_factory=list)  # EdgeRecord, training edges
    node_f: dict = field(default_factory=dict)
    papers: list = field(default_factory=list)  # core rule: author lists
    truth: dict = field(default_factory=dict)  # source -> set of new targets
    excluded: dict = field(default_factory=dict)
    core: frozenset = frozenset()
    unmapped: tuple = ()


def read_papers(path) -> list[tuple[str, ...]]:
    """One paper per line, authors separated by tabs (or whitespace)."""
    return [tuple(cols) for _lineno, cols in _lines(path)]


def read_mapping(path) -> dict[str, str]:
    out = {}
    for lineno, cols in _lines(path):
        if len(cols) != 2:
            raise ParseError(f"expected 2 columns, got {len(cols)}", str(path), lineno)
        out[cols[0]] = cols[1]
    return out


def _succ_sets(records: Iterable[EdgeRecord]) -> tuple[dict, dict]:
    succ: dict = {}
    pred: dict = {}
    for r in records:
        if r.src != r.dst:
            succ.setdefault(r.src, set()).add(r.dst)
            pred.setdefault(r.dst, set()).add(r.src)
    return succ, pred


def load_temporal_dataset(cfg: RunConfig) -> TemporalDataset:
    """Read the configured files and derive truth/exclusion sets per source.

    * ``new-edges``: every test-period edge absent from training is truth.
    * ``wiki``: new citations excluding pages that already cite the source;
      a source qualifies when ``5 <= |new| <= 20% of |old citations|``.
    * ``core``: papers files; Core authors have >= 3 papers in each period and
      truth is the new coauthor pairs among them.
    """
    if cfg.train is None:
        raise ParseError("config needs a 'train' file")
    if cfg.rule == "core":
        return _load_core(cfg)
    train = read_edge_list(cfg.train)
    test = read_edge_list(cfg.test) if cfg.test else []
    mapping = read_mapping(cfg.mapping) if cfg.mapping else {}
    known = {r.src for r in train} | {r.dst for r in train}
    gaps: set = set()
    mapped = []
    for r in test:
        src, dst = mapping.get(r.src, r.src), mapping.get(r.dst, r.dst)
        for n in (src, dst):
            if n not in known:
                gaps.add(n)
        if src in known and dst in known:
            mapped.append(EdgeRecord(src, dst, r.f, r.position))
    if gaps:
        log.warning("%d test-period node(s) have no training counterpart", len(gaps))
    old_succ, old_pred = _succ_sets(train)
    new_succ, _ = _succ_sets(mapped)
    ds = TemporalDataset(cfg.rule, train, read_node_file(cfg.nodes) if cfg.nodes else {},
                         unmapped=tuple(sorted(gaps)))
    order = {}
    for r in train:
        order.setdefault(r.src, len(order))
        order.setdefault(r.dst, len(order))
    for src in sorted(new_succ, key=order.get):
        s14 = old_succ.get(src, set())
        if cfg.rule == "new-edges":
            new = new_succ[src] - s14 - {src}
            excl = s14 | {src}
            ok = bool(new)
        else:
            x14 = old_pred.get(src, set())
            new = (new_succ[src] - s14) - x14 - {src}
            excl = s14 | x14 | {src}
            ok = 5 <= len(new) <= 0.2 * len(s14)
        if ok:
            ds.truth[src] = new
            ds.excluded[src] = excl
    return ds


def _load_core(cfg: RunConfig) -> TemporalDataset:
    train = read_papers(cfg.train)
    test = read_papers(cfg.test) if cfg.test else []
    count_tr: dict = {}
    count_te: dict = {}
    for papers, count in ((train, count_tr), (test, count_te)):
        for authors in papers:
            for a in set(authors):
                count[a] = count.get(a, 0) + 1
    core = frozenset(a for a in count_tr if count_tr[a] >= 3 and count_te.get(a, 0) >= 3)
    old: dict = {}
    for authors in train:
        for a in authors:
            old.setdefault(a, set()).update(x for x in authors if x != a)
    new: dict = {}
    for authors in test:
        for a in authors:
            if a in core:
                new.setdefault(a, set()).update(x for x in authors if x in core and x != a and x not in old.get(a, ()))
    ds = TemporalDataset("core", papers=train, core=core)
    seen = []
    for authors in train:
        for a in authors:
            if a in core and a not in ds.excluded:
                seen.append(a)
                ds.excluded[a] = old.get(a, set()) | {a}
    for a in seen:
        if new.get(a):
            ds.truth[a] = new[a]
    ds.excluded = {a: ds.excluded[a] for a in ds.truth}
    return ds


def build_graph(ds: TemporalDataset, cfg: RunConfig) -> WeightedGraph:
    """Weighted training graph under the configured knowledge and scheme."""
    if ds.rule == "core":
        if cfg.knowledge == "uniform":
            return arxiv_uniform_graph(ds.papers, cfg.b1, cfg.b2)
        know = arxiv_knowledge(ds.papers, cfg.gamma)
    elif cfg.knowledge == "wiki":
        know = wiki_knowledge(ds.records, cfg.gamma)
    else:
        know = DomainKnowledge()
        seen: dict = {}
        for r in ds.records:
            seen.setdefault(r.src, None)
            seen.setdefault(r.dst, None)
            know.add_edge(r.src, r.dst, 1.0 if cfg.knowledge == "uniform" else r.f)
        know.nodes = list(seen)
        if cfg.knowledge == "file":
            know.f_V = {n: f for n, f in ds.node_f.items() if n in seen}
    return apply_weights(know, WeightScheme(cfg.scheme_kind, cfg.b1, cfg.b2))


def make_tasks(ds: TemporalDataset, g: WeightedGraph, hops: int) -> list[PredictionTask]:
    """Tasks in first-seen source order; candidates are nodes within ``hops``."""
    tasks = []
    for src, truth in ds.truth.items():
        if src not in g:
            continue
        excl = frozenset(ds.excluded[src])
        near = set(hop_neighborhood(g, src, hops)) if hops > 0 else set(g.nodes)
        cand = (near | set(truth)) - excl
        if ds.rule == "core":
            cand &= ds.core
        cand = {c for c in cand if c in g}
        truth = frozenset(t for t in truth if t in cand)
        if not truth:
            continue
        tasks.append(PredictionTask(src, truth, excl, tuple(sorted(cand, key=g.id))))
    return tasks


# -- scoring -------------------------------------------------------------------


def score_task(g: WeightedGraph, task: PredictionTask, cfg: RunConfig) -> ScoreTable:
    src, cand = task.source, list(task.candidates)
    m = cfg.measure
    if m == "blink":
        return approx_blink(g, src, cand, cfg.approx_params())
    if m == "ppr":
        return ppr_scores(g, src, cfg.alpha, cand)
    if m == "katz":
        return katz_scores(g, src, cfg.beta, cand)
    if m == "adamic_adar":
        return adamic_adar(g, src, cand)
    if m == "shortest_path":
        return shortest_path_scores(g, src, cand)
    if m == "erd":
        d = mc_erd_all(g, src, cfg.samples, cfg.seed)
        return ScoreTable.build(g, src, {t: (1.0 / d[g.id(t)] if np.isfinite(d[g.id(t)]) else 0.0) for t in cand})
    scores = {}
    for t in cand:
        try:
            scores[t] = effective_conductance(g, src, t)
        except Unreachable:
            scores[t] = 0.0
    return ScoreTable.build(g, src, scores)


_WORKER: dict = {}


def _init_worker(g, cfg):
    _WORKER["g"] = g
    _WORKER["cfg"] = cfg


def _score_in_worker(task):
    return score_task(_WORKER["g"], task, _WORKER["cfg"])


def score_all(g: WeightedGraph, tasks: Sequence[PredictionTask], cfg: RunConfig) -> list[ScoreTable]:
    """Score tasks in order, optionally across ``cfg.workers`` processes."""
    if cfg.workers <= 1 or len(tasks) < 2:
        return [score_task(g, t, cfg) for t in tasks]
    with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_init_worker, initargs=(g, cfg)) as pool:
        return list(pool.map(_score_in_worker, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))


# -- metrics -------------------------------------------------------------------


def topk_precision(ranked: Sequence, truth: Iterable, k: int | None = None) -> float:
    """Fraction of truth items among the first ``k`` (default ``|truth|``) predictions."""
    truth = set(truth)
    if not truth:
        return 0.0
    k = len(truth) if k is None else k
    return sum(1 for p in ranked[:k] if p in truth) / len(truth)


def average_precision(ranked: Sequence, truth: Iterable) -> float:
    truth = set(truth)
    if not truth:
        return 0.0
    hits = 0
    total = 0.0
    for i, p in enumerate(ranked, 1):
        if p in truth:
            hits += 1
            total += hits / i
    return total / len(truth)


def mean_average_precision(runs: Sequence[tuple[Sequence, Iterable]], removed: Iterable = ()) -> float:
    """Mean AP over ``(ranking, truth)`` runs; ``removed`` items vanish from both."""
    removed = set(removed)
    aps = []
    for ranked, truth in runs:
        if removed:
            ranked = [p for p in ranked if p not in removed]
            truth = set(truth) - removed
        aps.append(average_precision(ranked, truth))
    return float(np.mean(aps)) if aps else 0.0


def roc_points(runs: Sequence[tuple[Sequence, Iterable]], max_predictions: int | None = None) -> list[tuple[int, float]]:
    """True-positive rate against the number of predictions made.

    Runs are merged by rank: every run's first prediction comes before any
    run's second one, ties in run order.
    """
    total = sum(len(set(t)) for _r, t in runs)
    if total == 0:
        return []
    merged = []
    for i, (ranked, truth) in enumerate(runs):
        truth = set(truth)
        merged.extend((rank, i, p in truth) for rank, p in enumerate(ranked))
    merged.sort(key=lambda x: (x[0], x[1]))
    if max_predictions is not None:
        merged = merged[:max_predictions]
    pts = []
    hits = 0
    for n, (_r, _i, hit) in enumerate(merged, 1):
        hits += hit
        pts.append((n, hits / total))
    return pts


@dataclass
class EvaluationReport:
    tasks: int
    truth: int
    candidates: int
    precision: float
    random_precision: float
    map: float
    roc: list
    ranked_pairs: list  # (source, target, score, hit) in global rank order
    per_task: list  # (source, ranked [(target, score)])

    def rows(self) -> list[tuple[str, str]]:
        return [
            ("tasks", str(self.tasks)),
            ("truth", str(self.truth)),
            ("candidates", str(self.candidates)),
            ("precision", fmt(self.precision)),
            ("random_precision", fmt(self.random_precision)),
            ("map", fmt(self.map)),
        ]


def _pair_scores(g, tasks, tables, cfg) -> list[tuple]:
    """Global pair list ``(a, b, score, tier)``; symmetric rules merge both directions."""
    if cfg.symmetric == "none":
        out = []
        for task, table in zip(tasks, tables):
            for t, s in table.scores.items():
                out.append((task.source, t, s, table.tiers.get(t, 0)))
        return out
    rule = Combine(cfg.symmetric)
    lookup = {task.source: table for task, table in zip(tasks, tables)}
    done = set()
    out = []
    for task, table in zip(tasks, tables):
        a = task.source
        for b, s_ab in table.scores.items():
            key = tuple(sorted((a, b), key=g.id))
            if key in done:
                continue
            done.add(key)
            other = lookup.get(b)
            s_ba = other.scores.get(a, 0.0) if other is not None else 0.0
            if rule is Combine.PRODUCT_B and cfg.measure == "blink":
                val = symmetric_combine(-math.expm1(-s_ab), -math.expm1(-s_ba), rule)
            else:
                val = symmetric_combine(s_ab, s_ba, rule)
            out.append((key[0], key[1], val, 0))
    return out


def evaluate(g: WeightedGraph, tasks: Sequence[PredictionTask], tables: Sequence[ScoreTable], cfg: RunConfig) -> EvaluationReport:
    pairs = _pair_scores(g, tasks, tables, cfg)
    if cfg.symmetric == "none":
        truth_pairs = {(t.source, b) for t in tasks for b in t.truth}
    else:
        truth_pairs = {tuple(sorted((t.source, b), key=g.id)) for t in tasks for b in t.truth}
    indeg = g.in_degrees
    pairs.sort(key=lambda p: (p[3], -p[2], -indeg[g.id(p[1])], g.id(p[0]), g.id(p[1])))
    ranked = [(a, b) for a, b, _s, _t in pairs]
    prec = topk_precision(ranked, truth_pairs)
    per_task = [(t.source, tab.ranked()) for t, tab in zip(tasks, tables)]
    runs = [([b for b, _s in ranked_t], t.truth) for t, (_src, ranked_t) in zip(tasks, per_task)]
    n_cand = len(pairs)
    report = EvaluationReport(
        tasks=len(tasks),
        truth=len(truth_pairs),
        candidates=n_cand,
        precision=prec,
        random_precision=len(truth_pairs) / n_cand if n_cand else 0.0,
        map=mean_average_precision(runs),
        roc=roc_points(runs) if cfg.symmetric == "none" else roc_points([(ranked, truth_pairs)]),
        ranked_pairs=[(a, b, s, (a, b) in truth_pairs) for a, b, s, _t in pairs],
        per_task=per_task,
    )
    return report


# -- runs ----------------------------------------------------------------------


def _csv(rows: Iterable[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def scores_csv(report: EvaluationReport) -> str:
    rows = ((a, b, fmt(s), rank, int(hit)) for rank, (a, b, s, hit) in enumerate(report.ranked_pairs, 1))
    return _csv(rows, ("source", "target", "score", "rank", "truth"))


def roc_csv(report: EvaluationReport) -> str:
    return _csv(((n, fmt(r)) for n, r in report.roc), ("predictions", "true_positive_rate"))


def metrics_csv(report: EvaluationReport) -> str:
    return _csv(report.rows(), ("metric", "value"))


def _write(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run_predict(cfg: RunConfig, ds: TemporalDataset | None = None) -> EvaluationReport:
    """Score every task with the configured parameters and write CSV outputs."""
    ds = ds or load_temporal_dataset(cfg)
    g = build_graph(ds, cfg)
    tasks = make_tasks(ds, g, cfg.hops)
    tables = score_all(g, tasks, cfg)
    report = evaluate(g, tasks, tables, cfg)
    if cfg.out:
        _write(cfg.out + ".scores.csv", scores_csv(report))
        _write(cfg.out + ".roc.csv", roc_csv(report))
        _write(cfg.out + ".metrics.csv", metrics_csv(report))
    return report


@dataclass
class ScanResult:
    best: dict
    value: float
    table: list  # (combo, value)
    axes: list


def run_scan(cfg: RunConfig, ds: TemporalDataset | None = None) -> ScanResult:
    """Exhaustive grid over the configured axes (default: b1 over 0.1..0.9)."""
    ds = ds or load_temporal_dataset(cfg)
    space = dict(cfg.grid) or {"b1": DEFAULT_B_GRID}

    def metric(**params):
        point = replace(cfg, **params)
        g = build_graph(ds, point)
        tasks = make_tasks(ds, g, point.hops)
        rep = evaluate(g, tasks, score_all(g, tasks, point), point)
        return rep.map if cfg.metric == "map" else rep.precision

    best, value, table = grid_search(space, metric)
    axes = sorted(space)
    if cfg.out:
        rows = [[fmt(v) for v in combo] + [fmt(val)] for combo, val in table]
        _write(cfg.out + ".scan.csv", _csv(rows, axes + [cfg.metric]))
    return ScanResult(best, value, table, axes)


# -- synthetic benchmark -----------------------------------------------------------


@dataclass(frozen=True)
class SyntheticDesign:
    """Layout of the planted benchmark.

    Candidates come in four kinds, each reached from every source by 2-hop
    paths through hubs:

    * ``spread``: ``spread_paths`` paths of weak edges (knowledge ``f_spread``)
      through a shared pool of hubs; its score grows steeply with ``b1``.
    * ``low`` / ``high``: one path of near-certain edges through a private
      hub whose node weight is fixed by ``b2``; nearly flat in ``b1``.
    * ``noise``: one path through a shared, rarely existing hub.

    Hub node weights are chosen so that ``low`` ties ``spread`` at
    ``b1 = cross_low`` and ``high`` ties it at ``cross_high``.  Ranking by
    blink score therefore matches the truth-generating order only for ``b1``
    strictly between the two crossings.
    """

    sources: int = 55
    spread: int = 16
    low: int = 10
    high: int = 6
    noise: int = 80
    spread_hubs: int = 16
    spread_paths: int = 12
    f_spread: float = 0.35
    f_strong: float = 20.0
    noise_hub_weight: float = 0.001
    cross_low: float = 0.42
    cross_high: float = 0.58
    b1: float = 0.5
    b2: float = 0.5

    @property
    def n_nodes(self) -> int:
        return self.sources + self.spread_hubs + self.spread + 2 * self.low + 2 * self.high + 1 + self.noise


def _spread_score(d: SyntheticDesign, b1: float) -> float:
    w = -math.expm1(d.f_spread * math.log1p(-b1))
    return -d.spread_paths * math.log1p(-w * w)


def _hub_f(d: SyntheticDesign, b1_cross: float) -> float:
    """Node knowledge value making a strong single path tie ``spread`` at ``b1_cross``."""
    w = -math.expm1(d.f_strong * math.log1p(-b1_cross))
    q = -math.expm1(-_spread_score(d, b1_cross)) / (w * w)
    if not 0 < q < 1:
        raise ValueError("design has no valid hub weight for this crossing")
    # weight q = 1 - (1 - b2)**f
    return math.log1p(-q) / math.log1p(-d.b2)


def write_synthetic_benchmark(folder, seed: int, design: SyntheticDesign = SyntheticDesign(),
                              config: dict | None = None) -> Path:
    """Write train/test/node files and a config; return the config path.

    Truth for each source is the candidate set reached in one blink draw of
    the training graph weighted with the design's ``b1``/``b2``.
    """
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    d = design
    if d.spread_paths > d.spread_hubs:
        raise ValueError("spread_paths cannot exceed spread_hubs")
    sources = [f"s{i:03d}" for i in range(d.sources)]
    edges: list[tuple[str, str, float]] = []
    node_f: dict[str, float] = {}
    pool = [f"h{i:03d}" for i in range(d.spread_hubs)]
    for h in pool:
        node_f[h] = math.inf
        for s in sources:
            edges.append((s, h, d.f_spread))
    for j in range(d.spread):
        c = f"x{j:03d}"
        for k in range(d.spread_paths):
            edges.append((pool[(j + k) % d.spread_hubs], c, d.f_spread))
    for kind, count, cross in (("y", d.low, d.cross_low), ("w", d.high, d.cross_high)):
        f_hub = _hub_f(d, cross)
        for j in range(count):
            hub, c = f"{kind}h{j:03d}", f"{kind}{j:03d}"
            node_f[hub] = f_hub
            for s in sources:
                edges.append((s, hub, d.f_strong))
            edges.append((hub, c, d.f_strong))
    node_f["zh"] = math.log1p(-d.noise_hub_weight) / math.log1p(-d.b2)
    for s in sources:
        edges.append((s, "zh", d.f_strong))
    for j in range(d.noise):
        edges.append(("zh", f"z{j:03d}", d.f_strong))
    for n in sources + [f"x{j:03d}" for j in range(d.spread)] + [f"y{j:03d}" for j in range(d.low)] \
            + [f"w{j:03d}" for j in range(d.high)] + [f"z{j:03d}" for j in range(d.noise)]:
        node_f[n] = math.inf

    know = DomainKnowledge(nodes=list(dict.fromkeys([n for e in edges for n in e[:2]])))
    for s, t, f in edges:
        know.add_edge(s, t, f)
    know.f_V = dict(node_f)
    g = apply_weights(know, WeightScheme(SchemeKind.EXPONENTIAL, d.b1, d.b2))
    ss = np.random.SeedSequence([int(seed), 0x5EED])
    draws = ss.generate_state(len(sources))
    candidates_prefix = ("x", "y", "w", "z")
    new_edges = []
    for s, draw_seed in zip(sources, draws):
        reached = sample_reachable_set(g, s, int(draw_seed))
        for c in sorted(reached, key=g.id):
            if isinstance(c, str) and c[0] in candidates_prefix and c != s:
                new_edges.append((s, c))

    def edge_lines(rows):
        return "".join(f"{s}\t{t}\t{fmt(f)}\n" for s, t, f in rows)

    _write(str(folder / "train.tsv"), "# src\tdst\tf\n" + edge_lines(edges))
    _write(str(folder / "test.tsv"), "# src\tdst\tf\n" + edge_lines(edges) + edge_lines((s, t, 1.0) for s, t in new_edges))
    _write(str(folder / "nodes.tsv"), "".join(f"{n}\t{fmt(f) if math.isfinite(f) else 'inf'}\n" for n, f in node_f.items()))
    settings = {
        "train": "train.tsv",
        "test": "test.tsv",
        "nodes": "nodes.tsv",
        "rule": "new-edges",
        "knowledge": "file",
        "measure": "blink",
        "variation": "medium",
        "scheme": "exponential",
        "b1": "0.5",
        "b2": fmt(d.b2),
        "seed": str(seed),
        "metric": "map",
        "grid_b1": ",".join(fmt(b) for b in DEFAULT_B_GRID),
        "out": "out/run",
    }
    settings.update(config or {})
    cfg_path = folder / "benchmark.cfg"
    _write(str(cfg_path), "".join(f"{k} = {v}\n" for k, v in settings.items()))
    return cfg_path
