"""Blink-model graph proximity: exact, sampled and approximate scores plus baselines."""

from .approx import ApproxParams, Variation, approx_blink, approx_score
from .errors import (
    BlinkError,
    BudgetExceeded,
    CapExceeded,
    DegenerateUsage,
    Divergent,
    NumericError,
    ParseError,
    Unreachable,
    WeightRangeError,
)
from .exact import (
    AnyToAll,
    Reach,
    ReachAndAvoid,
    blink_distance,
    brute_force_reachability,
    exact_blink_score,
    exact_event_probability,
    exact_reachability,
    score_from_probability,
)
from .graph import HyperedgeRecord, WeightedGraph, expand_hyperedges, load_graph, merge_parallel
from .montecarlo import McEstimate, mc_blink_estimate, mc_erd, sample_reachable_set
from .paths import MinimalPath, PathFilterParams, best_single_path, enumerate_minimal_paths
from .scoretable import ScoreTable

__version__ = "0.1.0"
