"""Iterative path-contribution approximation of blink scores.

Every minimal path ``i`` from A to B starts with its nominal contribution
``s_hat_i``.  Paths of length <= 2 keep it; longer paths are repeatedly
rescaled by::

    s_hat_i <- s_hat_i * (s_G - upsilon) / denom

where ``s_G`` scores a small subgraph around path ``i``, ``upsilon`` is the
nominal total of the short paths inside that subgraph and ``denom`` estimates
how much of ``s_G`` the long paths share.  Three subgraph constructions trade
accuracy for speed:

* HIGH: the union of all paths sharing an edge with path i, scored exactly
  (or by Monte Carlo past the exact cap).
* MEDIUM: a series-parallel chain along path i where an edge used by more
  paths than its neighbours gets a hypothetical bypass.
* LOW: path i collapsed to three edges with usage-scaled weights.

Paths live on the node-split graph; edges are split-graph id pairs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numba
import numpy as np

from .errors import CapExceeded, DegenerateUsage, NumericError
from .exact import CLAMP, DEFAULT_CAP, exact_reachability, score_from_probability
from .graph import Node, WeightedGraph, in_port, out_port
from .montecarlo import mc_blink_estimate
from .paths import (
    MinimalPath,
    PathFilterParams,
    PathSet,
    best_single_paths,
    concat_ranges,
    enumerate_path_set,
)
from .scoretable import ScoreTable

SHORT = 2
NUMERIC_TOL = 1e-9


class Variation(enum.Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"

    @classmethod
    def parse(cls, value) -> "Variation":
        return value if isinstance(value, cls) else cls(str(value).lower())


@dataclass(frozen=True)
class ApproxParams:
    variation: Variation = Variation.MEDIUM
    filters: PathFilterParams = PathFilterParams()
    max_iter: int = 100
    tol: float = 1e-9
    seed: int = 0
    mc_samples: int = 100_000
    exact_cap: int = DEFAULT_CAP
    hybrid_k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "variation", Variation.parse(self.variation))


def boost(p, x):
    """``1 - (1 - p)**x``: probability that one of ``x`` copies of ``p`` exists."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.expm1(x * np.log1p(-np.asarray(p, dtype=float)))


def _boost1(p: float, x: float) -> float:
    if p >= 1.0:
        return 1.0
    return -math.expm1(x * math.log1p(-p))


# -- state and the update rule -----------------------------------------------


@dataclass
class PathContributionState:
    paths: list[MinimalPath]
    s_hat: np.ndarray
    iteration: int = 0
    converged: bool = False

    @classmethod
    def initial(cls, paths: Sequence[MinimalPath]) -> "PathContributionState":
        return cls(list(paths), np.array([p.nominal for p in paths], dtype=float))

    @property
    def nominal(self) -> np.ndarray:
        return np.array([p.nominal for p in self.paths], dtype=float)

    @property
    def is_long(self) -> np.ndarray:
        return np.array([p.length > SHORT for p in self.paths], dtype=bool)

    @property
    def score(self) -> float:
        return math.fsum(self.s_hat)


def compute_edge_usage(state: PathContributionState) -> dict[tuple[int, int], float]:
    """Sum of current contributions of the long paths through each edge."""
    usage: dict[tuple[int, int], float] = {}
    for p, s in zip(state.paths, state.s_hat):
        if p.length > SHORT:
            for e in p.edges:
                usage[e] = usage.get(e, 0.0) + float(s)
    return usage


def _rescale(s_hat, nominal, s_g, upsilon, denom):
    """Vector form of the update: only rows passed in are touched."""
    if np.any(s_g < upsilon - NUMERIC_TOL * np.maximum(1.0, upsilon)):
        bad = int(np.argmax(upsilon - s_g))
        raise NumericError(f"subgraph score {s_g[bad]!r} below its short-path total {upsilon[bad]!r}")
    if np.any(denom <= 0):
        raise NumericError("update denominator must be positive")
    new = s_hat * np.maximum(s_g - upsilon, 0.0) / denom
    return np.clip(new, 0.0, nominal)


def update_step(state: PathContributionState, s_g, len2_sum, denom) -> PathContributionState:
    """One rescaling of every long path with a positive contribution.

    ``s_g``, ``len2_sum`` and ``denom`` align with ``state.paths``; entries for
    short or zero-contribution paths are ignored.
    """
    s_g, len2_sum, denom = (np.asarray(a, dtype=float) for a in (s_g, len2_sum, denom))
    rows = state.is_long & (state.s_hat > 0)
    new = state.s_hat.copy()
    if rows.any():
        new[rows] = _rescale(state.s_hat[rows], state.nominal[rows], s_g[rows], len2_sum[rows], denom[rows])
    return PathContributionState(state.paths, new, state.iteration + 1, False)


def _relative_change(old, new):
    return np.abs(new - old) / np.maximum(old, 1e-12)


# -- HIGH: exact-ish subgraph around each path --------------------------------


def _overlap_sets(paths: Sequence[MinimalPath], i: int):
    edges_i = set(paths[i].edges)
    union = set(edges_i)
    for p in paths:
        es = p.edges
        if not edges_i.isdisjoint(es):
            union.update(es)
    inside = [j for j, p in enumerate(paths) if union.issuperset(p.edges)]
    xi = [j for j in inside if paths[j].length > SHORT]
    ups = [j for j in inside if paths[j].length <= SHORT]
    return union, xi, ups


def select_subgraph_high(sg: WeightedGraph, path: MinimalPath, paths: Sequence[MinimalPath]) -> WeightedGraph:
    """Union of ``path`` and every supplied path sharing at least one edge with it."""
    if path.length <= SHORT:
        raise ValueError("only paths longer than 2 have a HIGH subgraph")
    union = set(path.edges)
    for p in paths:
        if not union.isdisjoint(p.edges):
            union.update(p.edges)
    return sg.subgraph(union)


@dataclass(frozen=True)
class SubgraphScore:
    score: float
    exact: bool


def eval_subgraph_score(g_sub: WeightedGraph, source: Node, target: Node, budget: int = 100_000,
                        seed: int = 0, cap: int = DEFAULT_CAP) -> SubgraphScore:
    """Exact score when the reduced subgraph fits under ``cap``, else Monte Carlo."""
    try:
        return SubgraphScore(score_from_probability(exact_reachability(g_sub, source, target, cap)), True)
    except CapExceeded:
        est = mc_blink_estimate(g_sub, source, target, budget, seed)
        return SubgraphScore(score_from_probability(est.mean), False)


def _mc_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _run_high(sg: WeightedGraph, s: int, t: int, paths: list[MinimalPath], params: ApproxParams,
              cache: dict, trace=None, target=None) -> PathContributionState:
    state = PathContributionState.initial(paths)
    if trace:
        trace(target, state)
    n = len(paths)
    long_rows = [i for i in range(n) if paths[i].length > SHORT]
    if not long_rows:
        state.converged = True
        return state
    s_g = np.zeros(n)
    ups = np.zeros(n)
    xis: dict[int, list[int]] = {}
    for i in long_rows:
        union, xi, up = _overlap_sets(paths, i)
        key = (s, t, frozenset(union))
        hit = cache.get(key)
        if hit is None:
            seed = _mc_seed(params.seed, s, t, i)
            hit = cache[key] = eval_subgraph_score(sg.subgraph(union), sg.nodes[s], sg.nodes[t],
                                                   params.mc_samples, seed, params.exact_cap)
        ups[i] = math.fsum(paths[j].nominal for j in up)
        # a noisy estimate may dip below what the short paths alone guarantee
        s_g[i] = hit.score if hit.exact else max(hit.score, ups[i])
        xis[i] = xi
    for _ in range(params.max_iter):
        denom = np.ones(n)
        for i in long_rows:
            denom[i] = math.fsum(state.s_hat[j] for j in xis[i])
        old = state.s_hat
        state = update_step(state, s_g, ups, denom)
        if trace:
            trace(target, state)
        if _relative_change(old, state.s_hat).max() < params.tol:
            state.converged = True
            break
    return state


# -- MEDIUM: hypothetical series-parallel chain --------------------------------


class SeriesParallelChain:
    """Series-parallel surrogate of one path under edge usages.

    Edges are joined in increasing usage (ties in path order).  When edge
    ``e`` joins an already-built neighbour segment of usage ``u_c < u_e``, the
    segment gains a hypothetical parallel bypass carrying the extra
    ``u_e - u_c`` of usage, which turns its probability ``p`` into
    ``1 - (1 - p)**(u_e / u_c)``.

    The join order is the max-Cartesian tree of the usages, built with a
    stack in linear time; ``ops`` counts elementary steps for cost checks.
    """

    def __init__(self, weights: Sequence[float], usages: Sequence[float]):
        if len(weights) != len(usages) or not weights:
            raise ValueError("weights and usages must be nonempty and aligned")
        if any(u <= 0 for u in usages):
            raise DegenerateUsage("every path edge needs positive usage")
        self.weights = [float(w) for w in weights]
        self.usages = [float(u) for u in usages]
        self.ops = 0
        n = len(self.usages)
        left = [-1] * n
        right = [-1] * n
        stack: list[int] = []
        for j in range(n):
            last = -1
            while stack and self.usages[stack[-1]] <= self.usages[j]:
                last = stack.pop()
                self.ops += 1
            left[j] = last
            if stack:
                right[stack[-1]] = j
            stack.append(j)
            self.ops += 1
        self.root = stack[0]
        self.left, self.right = left, right

    def _walk(self, weights):
        """Post-order evaluation; returns per-node (prob, lo, hi) and join events."""
        n = len(weights)
        prob = [0.0] * n
        lo = list(range(n))
        hi = [j + 1 for j in range(n)]
        joins = []
        stack = [(self.root, False)]
        while stack:
            j, ready = stack.pop()
            self.ops += 1
            if not ready:
                stack.append((j, True))
                for c in (self.right[j], self.left[j]):
                    if c >= 0:
                        stack.append((c, False))
                continue
            p = weights[j]
            for c in (self.left[j], self.right[j]):
                if c >= 0:
                    x = self.usages[j] / self.usages[c]
                    p *= _boost1(prob[c], x)
                    joins.append((j, c, x))
            prob[j] = p
            if self.left[j] >= 0:
                lo[j] = lo[self.left[j]]
            if self.right[j] >= 0:
                hi[j] = hi[self.right[j]]
        return prob, lo, hi, joins

    def probability(self, first: float | None = None, last: float | None = None) -> float:
        """Chain reliability, optionally forcing the first/last edge to 0 or 1."""
        w = list(self.weights)
        if first is not None:
            w[0] = first
        if last is not None:
            w[-1] = last
        prob, *_ = self._walk(w)
        return prob[self.root]

    def hypothetical_edges(self) -> list[tuple[int, int, float]]:
        """``(from_pos, to_pos, weight)`` bypasses in the order they are added."""
        prob, lo, hi, joins = self._walk(self.weights)
        rank = {j: r for r, j in enumerate(sorted(range(len(self.usages)), key=lambda j: (self.usages[j], j)))}
        out = []
        for j, c, x in sorted(joins, key=lambda e: (rank[e[0]], e[1] > e[0])):
            if x > 1.0:
                p = prob[c]
                wt = 1.0 if p >= 1.0 else -math.expm1((x - 1.0) * math.log1p(-p))
                out.append((lo[c], hi[c], wt))
        return out

    def endpoint_probabilities(self) -> tuple[float, float]:
        """Probabilities that the second node and that the last edge's far end are
        reached through the first and last chain elements respectively."""
        u, w = self.usages, self.weights
        n = len(u)
        p_first = _boost1(w[0], u[1] / u[0]) if n > 1 and u[0] <= u[1] else w[0]
        p_last = _boost1(w[-1], u[-2] / u[-1]) if n > 1 and u[-1] < u[-2] else w[-1]
        return p_first, p_last


def _with_shortcuts(c, p_first, p_last, wb, wa):
    """Combine conditioned chain values with shortcut edges X1->B and A->Xn.

    ``c[f][l]`` is chain reliability given the first element in state ``f`` and
    the last in state ``l``.
    """
    total = 0.0
    for f in (0, 1):
        pf = p_first if f else 1.0 - p_first
        for l in (0, 1):
            pl = p_last if l else 1.0 - p_last
            total += pf * pl * (1.0 - (1.0 - c[f][l]) * (1.0 - f * wb) * (1.0 - l * wa))
    return total


@dataclass(frozen=True)
class HypotheticalEstimate:
    score: float
    upsilon: float
    denom: float


def _short_index(paths: Sequence[MinimalPath]) -> dict[int, MinimalPath]:
    """Length-2 paths keyed by their middle node."""
    return {p.ids[1]: p for p in paths if p.length == 2}


def _shortcuts(path: MinimalPath, shorts: Mapping[int, MinimalPath]):
    first = shorts.get(path.ids[1])
    last = shorts.get(path.ids[-2])
    wb = first.weights[1] if first else 0.0
    wa = last.weights[0] if last else 0.0
    ups = (first.nominal if first else 0.0) + (last.nominal if last else 0.0)
    return wb, wa, ups


def _path_usages(path: MinimalPath, usages: Mapping[tuple[int, int], float]) -> list[float]:
    us = [usages.get(e, 0.0) for e in path.edges]
    if any(u <= 0 for u in us):
        raise DegenerateUsage("path edge missing from the usage table")
    return us


def build_hypothetical_medium(path: MinimalPath, usages: Mapping[tuple[int, int], float],
                              paths: Sequence[MinimalPath]) -> HypotheticalEstimate:
    """Score of the hypothetical chain for ``path`` plus overlapping length-2 paths.

    A length-2 path A->X1->B sharing the first edge adds a shortcut X1->B and
    one A->Xn->B sharing the last edge adds A->Xn.  Both break the
    series-parallel form, so the chain is evaluated conditioned on its first
    and last elements.
    """
    if path.length <= SHORT:
        raise ValueError("path must be longer than 2")
    us = _path_usages(path, usages)
    chain = SeriesParallelChain(path.weights, us)
    wb, wa, ups = _shortcuts(path, _short_index(paths))
    if wb == 0.0 and wa == 0.0:
        b = chain.probability()
    else:
        pf, pl = chain.endpoint_probabilities()
        c = [[chain.probability(first=f, last=l) for l in (0.0, 1.0)] for f in (0.0, 1.0)]
        b = _with_shortcuts(c, pf, pl, wb, wa)
    return HypotheticalEstimate(score_from_probability(b), ups, max(us))


# -- LOW: three-edge chain ---------------------------------------------------


def _low_probability(a, m, d, wb, wa):
    # A->C (a), C->D (m), D->B (d), C->B (wb), A->D (wa)
    given_a = 1.0 - (1.0 - wb) * (1.0 - d * (1.0 - (1.0 - m) * (1.0 - wa)))
    return a * given_a + (1.0 - a) * wa * d


def usage_mean(weights: Sequence[float], usages: Sequence[float]) -> float:
    """Usage average weighted by ``log w`` (plain mean when all weights are 1)."""
    logs = [math.log(w) for w in weights]
    total = sum(logs)
    if total == 0.0:
        return sum(usages) / len(usages)
    return sum(u * lw for u, lw in zip(usages, logs)) / total


def build_hypothetical_low(path: MinimalPath, usages: Mapping[tuple[int, int], float],
                           paths: Sequence[MinimalPath]) -> HypotheticalEstimate:
    if path.length < 3:
        raise ValueError("path must have at least 3 edges")
    us = _path_usages(path, usages)
    w = path.weights
    umax = max(us)
    mid_w, mid_u = w[1:-1], us[1:-1]
    a = _boost1(w[0], umax / us[0])
    m = _boost1(math.prod(mid_w), umax / usage_mean(mid_w, mid_u))
    d = _boost1(w[-1], umax / us[-1])
    wb, wa, ups = _shortcuts(path, _short_index(paths))
    return HypotheticalEstimate(score_from_probability(_low_probability(a, m, d, wb, wa)), ups, umax)


def _run_scalar(paths: list[MinimalPath], variation: Variation, params: ApproxParams,
                trace=None, target=None) -> PathContributionState:
    """Reference MEDIUM/LOW loop for one target, path by path."""
    build = build_hypothetical_medium if variation is Variation.MEDIUM else build_hypothetical_low
    state = PathContributionState.initial(paths)
    if trace:
        trace(target, state)
    n = len(paths)
    if not state.is_long.any():
        state.converged = True
        return state
    for _ in range(params.max_iter):
        usage = compute_edge_usage(state)
        s_g, ups, denom = np.zeros(n), np.zeros(n), np.ones(n)
        for i, p in enumerate(paths):
            if p.length > SHORT and state.s_hat[i] > 0:
                est = build(p, usage, paths)
                s_g[i], ups[i], denom[i] = est.score, est.upsilon, est.denom
        old = state.s_hat
        state = update_step(state, s_g, ups, denom)
        if trace:
            trace(target, state)
        if _relative_change(old, state.s_hat).max() < params.tol:
            state.converged = True
            break
    return state


# -- compiled MEDIUM/LOW over every target of a source ------------------------


@numba.njit(cache=True)
def _nb_boost(p, x):
    if p >= 1.0:
        return 1.0
    return -math.expm1(x * math.log1p(-p))


@numba.njit(cache=True)
def _nb_chain(W, V, u, n, order, done, other, prob, use, out):
    """Chain reliability of ``V`` weight rows ``W[:V, :n]`` sharing usages ``u``.

    Same joins as :class:`SeriesParallelChain`: edges in stable increasing
    usage order, each absorbing its processed neighbour segments.
    """
    for k in range(n):  # stable insertion sort
        x = u[k]
        i = k
        while i > 0 and u[order[i - 1]] > x:
            order[i] = order[i - 1]
            i -= 1
        order[i] = k
    for j in range(n):
        done[j] = False
        other[j] = j
    for k in range(n):
        j = order[k]
        uj = u[j]
        has_l = j > 0 and done[j - 1]
        has_r = j < n - 1 and done[j + 1]
        lo = other[j - 1] if has_l else j
        hi = other[j + 1] if has_r else j
        # segments away from both chain ends agree across variants
        nv = V if lo == 0 or hi == n - 1 else 1
        for v in range(nv):
            p = W[v, j]
            if has_l:
                p *= _nb_boost(prob[v, j - 1], uj / use[j - 1])
            if has_r:
                p *= _nb_boost(prob[v, j + 1], uj / use[j + 1])
            prob[v, lo] = p
            prob[v, hi] = p
        for v in range(nv, V):
            prob[v, lo] = prob[0, lo]
            prob[v, hi] = prob[0, hi]
        done[j] = True
        other[lo] = hi
        other[hi] = lo
        use[lo] = uj
        use[hi] = uj
    for v in range(V):
        out[v] = prob[v, 0]


@numba.njit(cache=True)
def _nb_medium(w, u, n, wb, wa, Wv, order, done, other, prob, use, out):
    if wb <= 0.0 and wa <= 0.0:
        Wv[0, :n] = w
        _nb_chain(Wv, 1, u, n, order, done, other, prob, use, out)
        return out[0]
    for v in range(4):
        Wv[v, :n] = w
        Wv[v, 0] = float(v // 2)
        Wv[v, n - 1] = float(v % 2)
    _nb_chain(Wv, 4, u, n, order, done, other, prob, use, out)
    pf = _nb_boost(w[0], u[1] / u[0]) if u[0] <= u[1] else w[0]
    pl = _nb_boost(w[n - 1], u[n - 2] / u[n - 1]) if u[n - 1] < u[n - 2] else w[n - 1]
    tot = 0.0
    for v in range(4):
        f = float(v // 2)
        l = float(v % 2)
        weight = (pf if f else 1.0 - pf) * (pl if l else 1.0 - pl)
        tot += weight * (1.0 - (1.0 - out[v]) * (1.0 - f * wb) * (1.0 - l * wa))
    return tot


@numba.njit(cache=True)
def _nb_low(w, u, n, wb, wa):
    umax = u[0]
    for k in range(1, n):
        umax = max(umax, u[k])
    tot = 0.0
    num = 0.0
    plain = 0.0
    prod = 1.0
    for k in range(1, n - 1):
        lw = math.log(w[k])
        tot += lw
        num += u[k] * lw
        plain += u[k]
        prod *= w[k]
    umean = plain / (n - 2) if tot == 0.0 else num / tot
    a = _nb_boost(w[0], umax / u[0])
    m = _nb_boost(prod, umax / umean)
    d = _nb_boost(w[n - 1], umax / u[n - 1])
    given_a = 1.0 - (1.0 - wb) * (1.0 - d * (1.0 - (1.0 - m) * (1.0 - wa)))
    return a * given_a + (1.0 - a) * wa * d


@numba.njit(cache=True)
def _nb_iterate(medium, rows, owner, start, length, W, K, wb, wa, ups, nominal, s_hat, n_targets, n_keys,
                tol, max_iter, clamp, numeric_tol):
    """Jacobi iteration of the update rule over the long paths ``rows``.

    Returns ``(s_hat, status, row, a, b)``; status 1 flags a zero usage and
    status 2 a subgraph score below its short-path total ``b``.
    """
    R = len(rows)
    done = np.ones(n_targets, dtype=np.bool_)
    for i in range(R):
        done[owner[i]] = False
    L = 1
    for i in range(R):
        L = max(L, length[i])
    order = np.empty(L, dtype=np.int64)
    flags = np.empty(L, dtype=np.bool_)
    other = np.empty(L, dtype=np.int64)
    prob = np.empty((4, L))
    use = np.empty(L)
    Wv = np.empty((4, L))
    out = np.empty(4)
    ubuf = np.empty(L)
    usage = np.zeros(n_keys)
    maxrel = np.zeros(n_targets)
    s_hat = s_hat.copy()
    new = s_hat.copy()
    for _ in range(max_iter):
        if done.all():
            break
        usage[:] = 0.0
        for i in range(R):
            r = rows[i]
            if done[owner[i]] or s_hat[r] <= 0.0:
                continue
            for e in range(start[i], start[i] + length[i]):
                usage[K[e]] += s_hat[r]
        maxrel[:] = 0.0
        for i in range(R):
            r = rows[i]
            t = owner[i]
            if done[t] or s_hat[r] <= 0.0:
                continue
            n = length[i]
            st = start[i]
            umax = 0.0
            for k in range(n):
                x = usage[K[st + k]]
                if x <= 0.0:
                    return s_hat, 1, r, 0.0, 0.0
                ubuf[k] = x
                umax = max(umax, x)
            w = W[st:st + n]
            if medium:
                b = _nb_medium(w, ubuf, n, wb[i], wa[i], Wv, order, flags, other, prob, use, out)
            else:
                b = _nb_low(w, ubuf, n, wb[i], wa[i])
            s_g = -math.log1p(-min(b, clamp))
            if s_g < ups[i] - numeric_tol * max(1.0, ups[i]):
                return s_hat, 2, r, s_g, ups[i]
            v = s_hat[r] * max(s_g - ups[i], 0.0) / umax
            v = min(max(v, 0.0), nominal[r])
            new[r] = v
            rel = abs(v - s_hat[r]) / max(s_hat[r], 1e-12)
            if rel > maxrel[t]:
                maxrel[t] = rel
        for i in range(R):
            s_hat[rows[i]] = new[rows[i]]
        for t in range(n_targets):
            if not done[t] and maxrel[t] < tol:
                done[t] = True
    return s_hat, 0, -1, 0.0, 0.0


def _shortcut_arrays(ps: PathSet, owner: np.ndarray, rows: np.ndarray, n_nodes: int):
    """Vector form of :func:`_shortcuts` for the long paths ``rows``."""
    short = np.flatnonzero(ps.lengths == 2)
    zeros = np.zeros(len(rows))
    if not len(short):
        return zeros, zeros.copy(), zeros.copy()
    codes = owner[short] * n_nodes + ps.ids[ps.offsets[short] + 1]
    order = np.argsort(codes, kind="stable")
    codes, short = codes[order], short[order]
    eoff = ps.edge_offsets

    def find(mid):
        c = owner[rows] * n_nodes + mid
        pos = np.minimum(np.searchsorted(codes, c), len(codes) - 1)
        return codes[pos] == c, short[pos]

    hit_b, first = find(ps.ids[ps.offsets[rows] + 1])
    hit_a, last = find(ps.ids[ps.offsets[rows + 1] - 2])
    wb = np.where(hit_b, ps.weights[eoff[first] + 1], 0.0)
    wa = np.where(hit_a, ps.weights[eoff[last]], 0.0)
    ups = np.where(hit_b, ps.nominal[first], 0.0) + np.where(hit_a, ps.nominal[last], 0.0)
    return wb, wa, ups


def _run_vectorized(ps: PathSet, variation: Variation, params: ApproxParams, n_nodes: int, n_edges: int):
    """MEDIUM/LOW iteration over every target of ``ps`` at once.

    Returns ``(targets, scores)``: the distinct target ids in ``ps`` and the
    converged score of each.
    """
    targets, owner, counts = np.unique(ps.target, return_inverse=True, return_counts=True)
    bounds = np.concatenate(([0], np.cumsum(counts)))
    lens = ps.lengths
    rows = np.flatnonzero(lens > SHORT)
    s_hat = ps.nominal
    if len(rows):
        wb, wa, ups = _shortcut_arrays(ps, owner, rows, n_nodes)
        cols = concat_ranges(ps.edge_offsets[rows], lens[rows])
        keys = np.repeat(owner[rows], lens[rows]) * max(n_edges, 1) + ps.edges[cols]
        uniq, K = np.unique(keys, return_inverse=True)
        start = np.concatenate(([0], np.cumsum(lens[rows])[:-1])).astype(np.int64)
        s_hat, status, bad, a, b = _nb_iterate(
            variation is Variation.MEDIUM, rows, owner[rows], start, lens[rows], ps.weights[cols], K.astype(np.int64),
            wb, wa, ups, ps.nominal, ps.nominal, len(targets), len(uniq),
            params.tol, params.max_iter, CLAMP, NUMERIC_TOL)
        if status == 1:
            raise DegenerateUsage("path edge missing from the usage table")
        if status == 2:
            raise NumericError(f"subgraph score {a!r} below its short-path total {b!r}")
    scores = [math.fsum(s_hat[bounds[i]:bounds[i + 1]].tolist()) for i in range(len(targets))]
    return targets, scores


# -- public entry points -----------------------------------------------------


Trace = Callable[[Node, PathContributionState], None]


def approx_blink(
    g: WeightedGraph,
    source: Node,
    targets=None,
    params: ApproxParams = ApproxParams(),
    paths: Mapping[Node, list[MinimalPath]] | PathSet | None = None,
    trace: Trace | None = None,
) -> ScoreTable:
    """Approximate blink scores from ``source`` to each target.

    ``paths`` defaults to the filtered enumeration from the source.  Targets
    with no qualifying path fall back to the nominal of their single strongest
    path, and unreachable targets score 0.  With ``params.hybrid_k`` set, the
    top ``hybrid_k`` targets of a MEDIUM/LOW pass are re-scored with HIGH and
    ranked ahead of the rest.
    """
    sg = g.split()
    if paths is None:
        ps = enumerate_path_set(g, source, params.filters, targets)
        lists = None
    elif isinstance(paths, PathSet):
        ps, lists = paths, None
    else:
        lists = {t: list(v) for t, v in paths.items() if v}
        ps = PathSet.from_ids(sg, [p.ids for v in lists.values() for p in v])
    present = {sg.nodes[t] for t in np.unique(ps.target).tolist()}
    if targets is None:
        targets = [sg.nodes[t] for t in np.unique(ps.target).tolist()]
    targets = [t for t in targets if t != source]
    scores: dict = {}
    missing = [t for t in targets if t not in present]
    if missing:
        reachable = _forward_closure(g, source)
        fallback = best_single_paths(g, source, [t for t in missing if t in reachable])
        for t in missing:
            scores[t] = fallback[t].nominal if t in fallback else 0.0
    with_paths = [t for t in targets if t in present]
    s = sg.id(out_port(sg, source))
    variation = params.variation
    tiers = None
    if variation is Variation.HIGH or trace is not None:
        if lists is None:
            lists = ps.by_target(sg)
        cache: dict = {}
        for t in with_paths:
            tid = sg.id(in_port(sg, t))
            if variation is Variation.HIGH:
                st = _run_high(sg, s, tid, lists[t], params, cache, trace, t)
            else:
                st = _run_scalar(lists[t], variation, params, trace, t)
            scores[t] = st.score
    elif with_paths:
        wanted = np.array(sorted(sg.id(in_port(sg, t)) for t in with_paths), dtype=np.int64)
        sub = ps if len(wanted) == len(present) else ps.take(np.flatnonzero(np.isin(ps.target, wanted)))
        ids, vals = _run_vectorized(sub, variation, params, sg.n_nodes, len(sg.edge_index))
        for t, v in zip(ids.tolist(), vals):
            scores[sg.nodes[t]] = v
    table = ScoreTable.build(g, source, scores)
    if params.hybrid_k and variation is not Variation.HIGH:
        top = table.top(params.hybrid_k)
        refined = approx_blink(g, source, top, replace(params, variation=Variation.HIGH, hybrid_k=None),
                               paths=ps if lists is None else lists)
        scores.update(refined.scores)
        top_set = set(top)
        tiers = {t: 0 if t in top_set else 1 for t in scores}
        table = ScoreTable.build(g, source, scores, tiers)
    return table


def approx_score(g: WeightedGraph, source: Node, target: Node, params: ApproxParams = ApproxParams(),
                 paths: list[MinimalPath] | None = None) -> float:
    given = None if paths is None else {target: list(paths)}
    return approx_blink(g, source, [target], params, paths=given)[target]


def _forward_closure(g: WeightedGraph, source: Node) -> set:
    s = g.id(source)
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v, _w in g.succ[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return {g.nodes[i] for i in seen}


__all__ = [
    "ApproxParams",
    "HypotheticalEstimate",
    "PathContributionState",
    "SeriesParallelChain",
    "SubgraphScore",
    "Variation",
    "approx_blink",
    "approx_score",
    "boost",
    "build_hypothetical_low",
    "build_hypothetical_medium",
    "compute_edge_usage",
    "eval_subgraph_score",
    "select_subgraph_high",
    "update_step",
    "usage_mean",
]
