"""Command-line entry point: ``blinkprox <command> ...``.

Exit codes: 0 success, 2 parse or usage error, 3 exact cap or path budget
exceeded, 1 any other package error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from .approx import ApproxParams, Variation, approx_blink
from .baselines import adamic_adar, effective_conductance, katz_scores, ppr_scores, shortest_path_scores, weighted_shortest_path
from .errors import BlinkError, BudgetExceeded, CapExceeded, ParseError, Unreachable
from .exact import DEFAULT_CAP, exact_reachability, score_from_probability
from .graph import load_graph, hop_neighborhood
from .harness import RunConfig, fmt, load_temporal_dataset, run_predict, run_scan, write_synthetic_benchmark
from .montecarlo import mc_blink_estimate, mc_erd, mc_erd_all
from .paths import PathFilterParams
from .scoretable import ScoreTable

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_CAP = 0, 1, 2, 3
RANK_MEASURES = ("blink", "ppr", "katz", "adamic_adar", "erd", "shortest_path")
PAIR_MEASURES = ("blink", "exact", "mc", "ppr", "katz", "adamic_adar", "erd", "conductance", "shortest_path")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", help="edge list: src<TAB>dst[<TAB>weight]")
    p.add_argument("--nodes", help="node weights: node<TAB>weight")
    p.add_argument("--hyperedges", help="hyperedges: weight<TAB>member...")
    p.add_argument("--undirected", action="store_true")


def _approx_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variation", default="medium", choices=[v.value for v in Variation])
    p.add_argument("--t1", type=float, default=1e-4)
    p.add_argument("--t2", type=float, default=2e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--hybrid-k", type=int, default=0)


def _params(a) -> ApproxParams:
    return ApproxParams(
        variation=Variation.parse(a.variation),
        filters=PathFilterParams(a.t1, a.t2),
        seed=a.seed,
        mc_samples=a.samples,
        hybrid_k=a.hybrid_k or None,
    )


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="blinkprox", description="Blink-model proximity scores and link-prediction benchmarks.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="score one pair with one or more measures")
    _graph_args(p)
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--measure", action="append", choices=PAIR_MEASURES,
                   help="repeatable; default is every measure that applies")
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    _approx_args(p)

    p = sub.add_parser("rank", help="rank every target near a source")
    _graph_args(p)
    p.add_argument("src")
    p.add_argument("--measure", default="blink", choices=RANK_MEASURES)
    p.add_argument("--hops", type=int, default=4, help="candidate radius; 0 means all nodes")
    p.add_argument("--top", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--out")
    _approx_args(p)

    for name, text in (("predict", "run a temporal benchmark"), ("scan", "grid-search a temporal benchmark")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config")
        p.add_argument("--workers", type=int)
        p.add_argument("--out")

    p = sub.add_parser("oracle", help="exact blink probability and score")
    _graph_args(p)
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)

    p = sub.add_parser("mc", help="Monte Carlo blink estimate")
    _graph_args(p)
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("synth", help="write a seeded synthetic temporal benchmark")
    p.add_argument("folder")
    p.add_argument("--seed", type=int, default=0)
    return ap


def _load(a):
    return load_graph(a.graph, a.nodes, a.hyperedges, a.undirected)


def _emit(rows, header, out=None) -> None:
    fh = open(out, "w", encoding="utf-8", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if out:
            fh.close()


def _pair_value(g, a, m: str) -> float:
    s, t = a.src, a.dst
    if m == "blink":
        return approx_blink(g, s, [t], _params(a))[t]
    if m == "exact":
        return score_from_probability(exact_reachability(g, s, t, a.cap))
    if m == "mc":
        return score_from_probability(mc_blink_estimate(g, s, t, a.samples, a.seed).mean)
    if m == "ppr":
        return ppr_scores(g, s, a.alpha, [t])[t]
    if m == "katz":
        return katz_scores(g, s, a.beta, [t])[t]
    if m == "adamic_adar":
        return adamic_adar(g, s, [t])[t]
    if m == "erd":
        return mc_erd(g, s, t, a.samples, a.seed)
    try:
        if m == "conductance":
            return effective_conductance(g, s, t)
        return weighted_shortest_path(g, s, t)
    except Unreachable:
        return 0.0


def cmd_score(a) -> int:
    g = _load(a)
    measures = a.measure or list(PAIR_MEASURES)
    rows = []
    for m in measures:
        try:
            rows.append((m, fmt(_pair_value(g, a, m))))
        except CapExceeded:
            if a.measure:
                raise
            rows.append((m, "nan"))
    _emit(rows, ("measure", "value"))
    return EXIT_OK


def cmd_rank(a) -> int:
    g = _load(a)
    cand = hop_neighborhood(g, a.src, a.hops) if a.hops > 0 else [n for n in g.nodes if n != a.src]
    if a.measure == "blink":
        table = approx_blink(g, a.src, cand, _params(a))
    elif a.measure == "ppr":
        table = ppr_scores(g, a.src, a.alpha, cand)
    elif a.measure == "katz":
        table = katz_scores(g, a.src, a.beta, cand)
    elif a.measure == "adamic_adar":
        table = adamic_adar(g, a.src, cand)
    elif a.measure == "shortest_path":
        table = shortest_path_scores(g, a.src, cand)
    else:
        d = mc_erd_all(g, a.src, a.samples, a.seed)
        table = ScoreTable.build(g, a.src, {t: 1.0 / d[g.id(t)] if math.isfinite(d[g.id(t)]) else 0.0 for t in cand})
    ranked = table.ranked()
    if a.top:
        ranked = ranked[: a.top]
    _emit(((i, t, fmt(s)) for i, (t, s) in enumerate(ranked, 1)), ("rank", "target", "score"), a.out)
    return EXIT_OK


def _config(a) -> RunConfig:
    cfg = RunConfig.from_file(a.config)
    changes = {}
    if a.workers is not None:
        changes["workers"] = a.workers
    if a.out is not None:
        changes["out"] = a.out
    return replace(cfg, **changes)


def cmd_predict(a) -> int:
    cfg = _config(a)
    report = run_predict(cfg)
    _emit(report.rows(), ("metric", "value"))
    return EXIT_OK


def cmd_scan(a) -> int:
    cfg = _config(a)
    ds = load_temporal_dataset(cfg)
    res = run_scan(cfg, ds)
    rows = [[fmt(v) for v in combo] + [fmt(val)] for combo, val in res.table]
    _emit(rows, res.axes + [cfg.metric])
    print("best," + ",".join(f"{k}={fmt(v)}" for k, v in sorted(res.best.items())) + f",{cfg.metric}={fmt(res.value)}")
    return EXIT_OK


def cmd_oracle(a) -> int:
    g = _load(a)
    b = exact_reachability(g, a.src, a.dst, a.cap)
    _emit([(fmt(b), fmt(score_from_probability(b)))], ("probability", "score"))
    return EXIT_OK


def cmd_mc(a) -> int:
    g = _load(a)
    est = mc_blink_estimate(g, a.src, a.dst, a.samples, a.seed)
    _emit([(fmt(est.mean), fmt(est.stderr), est.samples, fmt(score_from_probability(est.mean)))],
          ("probability", "stderr", "samples", "score"))
    return EXIT_OK


def cmd_synth(a) -> int:
    print(write_synthetic_benchmark(Path(a.folder), a.seed))
    return EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "rank": cmd_rank,
    "predict": cmd_predict,
    "scan": cmd_scan,
    "oracle": cmd_oracle,
    "mc": cmd_mc,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[a.command](a)
    except (ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CapExceeded, BudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (BlinkError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
