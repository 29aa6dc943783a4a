"""Chromatic-number computation (exact and heuristic), maximum average
degree, independence probabilities, the weighted independence number, and
the balanced-extraction colouring.

h(U) denotes -ln Pr(U independent) / |U|; the weighted independence number
is its maximum over nonempty independent sets.  The balanced-extraction
colouring repeatedly carves out independent sets whose per-block counts
follow the scaled remaining-block profile, then finishes leftovers with
DSATUR.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .functionals import GuardError, near_optimal_integer_system, w_value
from .graphs import SbmGraph
from .model import BlockVector, ModelError, ModelInstance
from .seeds import derive_seed, rng_from_seed

__all__ = [
    "BudgetExceededError",
    "Colouring",
    "WeightedIndepResult",
    "exact_chromatic",
    "exact_colouring",
    "dsatur_colouring",
    "max_avg_degree",
    "partition_objective",
    "independent_set_probability",
    "alpha_h",
    "find_balanced_independent_set",
    "balanced_extraction_colouring",
]

DEFAULT_COLOURING_BUDGET = 10 ** 8
_ALPHA_EXACT_HARD_N = 512    # beyond this even the node-capped search refuses
_ALPHA_ENUM_GUARD = 10 ** 7
_MAD_BRUTE_MAX_N = 20


class BudgetExceededError(RuntimeError):
    """Exact search ran out of budget; carries the best (lower, upper) bracket."""

    def __init__(self, lower: int, upper: int):
        super().__init__(f"colouring budget exceeded; chi in [{lower}, {upper}]")
        self.lower = lower
        self.upper = upper


@dataclass(frozen=True)
class Colouring:
    """Proper colouring with colours 0..num_colours-1, each used at least once."""

    colour_of: np.ndarray
    num_colours: int
    method: str

    def class_sizes(self) -> list[int]:
        return np.bincount(self.colour_of, minlength=self.num_colours).tolist()

    def check_proper(self, g: SbmGraph) -> None:
        col = self.colour_of
        if col.shape != (g.n,):
            raise ModelError("colouring does not cover the vertex set")
        for u, v in g.edges:
            if col[u] == col[v]:
                raise ModelError(f"monochromatic edge ({u},{v})")
        used = np.unique(col)
        if g.n and (used.size != self.num_colours or used[0] != 0
                    or used[-1] != self.num_colours - 1):
            raise ModelError("colours must be 0..num_colours-1, all used")


def _canonical_colouring(raw: Sequence[int], method: str) -> Colouring:
    """Relabel colours by first appearance so outputs are canonical."""
    relabel: dict[int, int] = {}
    out = np.empty(len(raw), dtype=np.int64)
    for i, c in enumerate(raw):
        if c not in relabel:
            relabel[c] = len(relabel)
        out[i] = relabel[c]
    return Colouring(colour_of=out, num_colours=len(relabel), method=method)


@dataclass(frozen=True)
class WeightedIndepResult:
    best_set: frozenset[int]
    h_value: float
    exact: bool


# ---------------------------------------------------------------------------
# Exact and heuristic colouring
# ---------------------------------------------------------------------------

def exact_colouring(g: SbmGraph, budget: int = DEFAULT_COLOURING_BUDGET) -> Colouring:
    """Optimal proper colouring by branch and bound (clique lower bound,
    DSATUR upper bound, one-new-colour symmetry breaking)."""
    status, chi, lower, colours = kernels.exact_coloring(
        g.n, g.adjacency_bits(), budget)
    if status == kernels.BUDGET_EXCEEDED:
        raise BudgetExceededError(lower, chi)
    col = _canonical_colouring(colours, "exact")
    col.check_proper(g)
    return col


def exact_chromatic(g: SbmGraph, budget: int = DEFAULT_COLOURING_BUDGET) -> int:
    """chi(g), exactly."""
    return exact_colouring(g, budget).num_colours


def dsatur_colouring(g: SbmGraph, seed: int = 0) -> Colouring:
    """DSATUR heuristic; ties on (saturation, degree) break by a seeded
    shuffle, then by index."""
    n = g.n
    if n == 0:
        return Colouring(np.zeros(0, dtype=np.int64), 0, "dsatur")
    adj = g.adjacency_bits()
    degs = [a.bit_count() for a in adj]
    rank = np.empty(n, dtype=np.int64)
    rank[rng_from_seed(seed).permutation(n)] = np.arange(n)
    colors = [-1] * n
    forbid = [0] * n
    for _ in range(n):
        pick, key = -1, (-1, -1, 1, 1)
        for v in range(n):
            if colors[v] >= 0:
                continue
            cand = (forbid[v].bit_count(), degs[v], -int(rank[v]), -v)
            if cand > key:
                pick, key = v, cand
        c = 0
        fb = forbid[pick]
        while (fb >> c) & 1:
            c += 1
        colors[pick] = c
        bit = 1 << c
        m = adj[pick]
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            if colors[u] < 0:
                forbid[u] |= bit
    col = _canonical_colouring(colors, "dsatur")
    col.check_proper(g)
    return col


# ---------------------------------------------------------------------------
# Maximum average degree (exact rational)
# ---------------------------------------------------------------------------

def _mad_bruteforce(n: int, adj: list[int]) -> Fraction:
    best_num, best_den = 0, 1  # density 2|E(S)| / |S|
    edge_cnt = [0] * (1 << n)
    for mask in range(1, 1 << n):
        v = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        edge_cnt[mask] = edge_cnt[rest] + (adj[v] & rest).bit_count()
        num = 2 * edge_cnt[mask]
        den = mask.bit_count()
        if num * best_den > best_num * den:
            best_num, best_den = num, den
    return Fraction(best_num, best_den)


class _Dinic:
    """Integer-capacity max flow (arc lists; BFS levels + blocking DFS)."""

    def __init__(self, n: int):
        self.n = n
        self.head = [-1] * n
        self.to: list[int] = []
        self.nxt: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, c: int) -> None:
        for (a, b, cc) in ((u, v, c), (v, u, 0)):
            self.to.append(b)
            self.cap.append(cc)
            self.nxt.append(self.head[a])
            self.head[a] = len(self.to) - 1

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = [-1] * self.n
            level[s] = 0
            q = deque([s])
            while q:
                u = q.popleft()
                e = self.head[u]
                while e != -1:
                    if self.cap[e] > 0 and level[self.to[e]] < 0:
                        level[self.to[e]] = level[u] + 1
                        q.append(self.to[e])
                    e = self.nxt[e]
            if level[t] < 0:
                return flow
            it = list(self.head)

            def dfs(u: int, pushed: int) -> int:
                if u == t:
                    return pushed
                while it[u] != -1:
                    e = it[u]
                    v = self.to[e]
                    if self.cap[e] > 0 and level[v] == level[u] + 1:
                        got = dfs(v, min(pushed, self.cap[e]))
                        if got:
                            self.cap[e] -= got
                            self.cap[e ^ 1] += got
                            return got
                    it[u] = self.nxt[e]
                return 0

            while True:
                pushed = dfs(s, 1 << 62)
                if not pushed:
                    break
                flow += pushed

    def min_cut_side(self, s: int) -> set[int]:
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            e = self.head[u]
            while e != -1:
                v = self.to[e]
                if self.cap[e] > 0 and v not in seen:
                    seen.add(v)
                    q.append(v)
                e = self.nxt[e]
        return seen


def _densest_improve(n: int, edges: np.ndarray, degs: list[int],
                     g: Fraction) -> Optional[list[int]]:
    """Vertex set of density strictly above g, or None (Goldberg network)."""
    m = edges.shape[0]
    a, b = g.numerator, g.denominator
    net = _Dinic(n + 2)
    s, t = n, n + 1
    for v in range(n):
        net.add_edge(s, v, b * m)
        net.add_edge(v, t, b * m + 2 * a - b * degs[v])
    for u, v in edges:
        net.add_edge(int(u), int(v), b)
        net.add_edge(int(v), int(u), b)
    flow = net.max_flow(s, t)
    if flow >= b * m * n:
        return None
    side = net.min_cut_side(s)
    side.discard(s)
    return sorted(side) if side else None


def max_avg_degree(g: SbmGraph) -> Fraction:
    """Exact mad(g) = max over nonempty S of 2|E(g[S])| / |S|.

    Subset brute force up to 20 vertices, exact min-cut density search
    (integer-scaled capacities) above; both agree on the overlap.
    """
    if g.n == 0:
        raise ModelError("mad of the empty graph is undefined")
    if g.m == 0:
        return Fraction(0)
    if g.n <= _MAD_BRUTE_MAX_N:
        return _mad_bruteforce(g.n, g.adjacency_bits())
    degs = [a.bit_count() for a in g.adjacency_bits()]
    best = Fraction(g.m, g.n)  # density of the whole graph
    while True:
        improved = _densest_improve(g.n, g.edges, degs, best)
        if improved is None:
            return 2 * best
        cnt = g.edge_count_within(improved)
        cand = Fraction(cnt, len(improved))
        if cand <= best:
            return 2 * best
        best = cand


def partition_objective(g: SbmGraph, partition: Iterable[Iterable[int]]) -> Fraction:
    """Sum over parts S of (1 + mad(g[S])); partition must cover V exactly."""
    parts = [sorted(set(int(v) for v in part)) for part in partition]
    seen: set[int] = set()
    for part in parts:
        if not part:
            raise ModelError("empty part in partition")
        if seen.intersection(part):
            raise ModelError("partition parts overlap")
        seen.update(part)
    if seen != set(range(g.n)):
        raise ModelError("partition does not cover the vertex set")
    total = Fraction(0)
    for part in parts:
        sub, _ = g.subgraph(part)
        total += 1 + max_avg_degree(sub)
    return total


# ---------------------------------------------------------------------------
# Independence probabilities and the weighted independence number
# ---------------------------------------------------------------------------

def independent_set_probability(m: ModelInstance, vertices: Iterable[int],
                                block_of: Optional[np.ndarray] = None) -> float:
    """ln Pr(U independent) = sum over pairs in U of ln(1 - p(u, v)).

    Blocks default to the model's contiguous layout; pass `block_of` to
    evaluate subsets of a relabelled graph.
    """
    if block_of is None:
        block_of = np.repeat(np.arange(m.k), m.sizes.values.astype(np.int64))
    vs = sorted(set(int(v) for v in vertices))
    if any(v < 0 or v >= block_of.size for v in vs):
        raise ModelError("vertex out of range")
    p = m.probs.entries
    total = 0.0
    for i, u in enumerate(vs):
        bu = block_of[u]
        for v in vs[i + 1:]:
            total += math.log1p(-p[bu, block_of[v]])
    return total


def _pair_weights(m: ModelInstance, g: SbmGraph) -> np.ndarray:
    q = m.q.entries
    return q[np.ix_(g.block_of, g.block_of)]


def alpha_h(m: ModelInstance, g: SbmGraph, mode: str = "exact",
            seed: int = 0) -> WeightedIndepResult:
    """Weighted independence number: maximise h(U) over independent sets.

    Exact mode enumerates independent sets by branch and bound with the
    pruning bound h(U) <= (|U|-1) max_q / 2; instances are in-guard when
    n <= 40 or the enumeration stays below 1e7 nodes.  Heuristic mode is a
    seeded ruin-and-recreate local search.
    """
    if g.n == 0:
        raise ModelError("alpha_h of the empty graph is undefined")
    if mode == "exact":
        if g.n > _ALPHA_EXACT_HARD_N:
            raise GuardError(f"exact alpha_h refuses n > {_ALPHA_EXACT_HARD_N}")
        weights = _pair_weights(m, g).ravel()
        status, _, mask, _ = kernels.best_weighted_independent_set(
            g.n, g.adjacency_bits(), [float(w) for w in weights],
            _ALPHA_ENUM_GUARD)
        if status == kernels.BUDGET_EXCEEDED:
            raise GuardError("independent-set enumeration exceeded 1e7 nodes")
        best = frozenset(v for v in range(g.n) if (mask >> v) & 1)
        exact = True
    elif mode == "heuristic":
        best = _alpha_h_local_search(m, g, seed)
        exact = False
    else:
        raise ValueError(f"unknown alpha_h mode {mode!r}")
    h = -independent_set_probability(m, best, block_of=g.block_of) / len(best)
    return WeightedIndepResult(best_set=best, h_value=h, exact=exact)


def _alpha_h_local_search(m: ModelInstance, g: SbmGraph, seed: int,
                          restarts: int = 6, iters: int = 40) -> frozenset[int]:
    """Seeded ruin-and-recreate: adaptive randomized greedy fills, partial
    teardown, refill; a drop pass trades large light sets for small heavy
    ones.  The best h seen anywhere is kept."""
    n = g.n
    amat = np.zeros((n, n))
    for u, v in g.edges:
        amat[u, v] = amat[v, u] = 1.0
    w = _pair_weights(m, g)

    def pair_sum(ind: np.ndarray) -> float:
        return float(ind @ w @ ind - np.diag(w) @ ind) / 2.0

    def h_of(ind: np.ndarray) -> float:
        size = float(ind.sum())
        return pair_sum(ind) / size if size >= 1.0 else 0.0

    def refill(ind: np.ndarray, conf: np.ndarray, rng) -> None:
        while True:
            addable = (ind == 0.0) & (conf == 0.0)
            cand = np.nonzero(addable)[0]
            if cand.size == 0:
                return
            fwd = amat[cand] @ addable.astype(np.float64)
            top = cand[np.argsort(fwd, kind="stable")]
            top = top[:max(1, int(np.ceil(0.3 * cand.size)))]
            v = int(top[rng.integers(top.size)])
            ind[v] = 1.0
            conf += amat[v]

    def drop_pass(ind: np.ndarray) -> np.ndarray:
        changed = True
        while changed and ind.sum() > 1.0:
            changed = False
            cur_h = h_of(ind)
            for u in np.nonzero(ind > 0.0)[0]:
                trial = ind.copy()
                trial[u] = 0.0
                if h_of(trial) > cur_h + 1e-12:
                    ind = trial
                    cur_h = h_of(ind)
                    changed = True
        return ind

    best_ind = np.zeros(n)
    best_ind[0] = 1.0
    best_h = 0.0

    def consider(ind: np.ndarray) -> None:
        nonlocal best_h, best_ind
        hv = h_of(ind)
        if hv > best_h:
            best_h, best_ind = hv, ind.copy()

    for r in range(restarts):
        rng = rng_from_seed(derive_seed(seed, r))
        ind = np.zeros(n)
        conf = np.zeros(n)
        refill(ind, conf, rng)
        consider(ind)
        consider(drop_pass(ind.copy()))
        cur = ind.copy()
        cur_h = h_of(cur)
        for _ in range(iters):
            ind = cur.copy()
            members = np.nonzero(ind > 0.0)[0]
            if members.size:
                kill = rng.choice(members,
                                  size=max(1, int(0.4 * members.size)),
                                  replace=False)
                ind[kill] = 0.0
            conf = amat @ ind
            refill(ind, conf, rng)
            consider(ind)
            consider(drop_pass(ind.copy()))
            if h_of(ind) >= cur_h:  # accept ties to keep wandering
                cur, cur_h = ind.copy(), h_of(ind)
    return frozenset(int(v) for v in np.nonzero(best_ind > 0.0)[0])


# ---------------------------------------------------------------------------
# Balanced extraction
# ---------------------------------------------------------------------------

def find_balanced_independent_set(m: ModelInstance, g_remaining: SbmGraph,
                                  target: BlockVector, seed: int = 0,
                                  effort: int = 8) -> Optional[frozenset[int]]:
    """Independent set whose per-block counts equal `target` exactly, or None.

    Seeded greedy fill in a random block-balanced order, then local repair:
    unmet block demand is served by the least-conflicting candidate, evicting
    the members it clashes with (a plateau walk when the clash is single).
    Up to `effort` restarts; the model argument is part of the call contract,
    feasibility only depends on the graph.
    """
    del m  # feasibility is purely graph-side
    g = g_remaining
    if not target.is_integer:
        raise ModelError("target must be an integer block profile")
    tgt = np.asarray(target.as_ints(), dtype=np.int64)
    if tgt.size != g.k:
        raise ModelError("target dimension does not match the graph")
    counts = g.block_sizes()
    if np.any(tgt > counts):
        raise ModelError("target exceeds remaining block counts")
    if tgt.sum() == 0:
        return frozenset()
    n = g.n
    amat = np.zeros((n, n))
    for u, v in g.edges:
        amat[u, v] = amat[v, u] = 1.0
    blocks = g.block_of
    block_onehot = np.zeros((g.k, n))
    block_onehot[blocks, np.arange(n)] = 1.0

    def refill(ind: np.ndarray, conf: np.ndarray, rng) -> None:
        # adaptive randomized greedy: among addable vertices of open blocks,
        # favour those with few neighbours left addable
        while True:
            counts = block_onehot @ ind
            open_block = counts < tgt
            addable = (ind == 0.0) & (conf == 0.0) & open_block[blocks]
            cand = np.nonzero(addable)[0]
            if cand.size == 0:
                return
            fwd = amat[cand] @ addable.astype(np.float64)
            top = cand[np.argsort(fwd, kind="stable")]
            top = top[:max(1, int(np.ceil(0.3 * cand.size)))]
            v = int(top[rng.integers(top.size)])
            ind[v] = 1.0
            conf += amat[v]

    def deficit(ind: np.ndarray) -> int:
        return int(np.clip(tgt - block_onehot @ ind, 0, None).sum())

    iters = 12
    for attempt in range(effort):
        rng = rng_from_seed(derive_seed(seed, attempt))
        ind = np.zeros(n)
        conf = np.zeros(n)
        refill(ind, conf, rng)
        cur = ind.copy()
        cur_def = deficit(cur)
        for _ in range(iters):
            if cur_def == 0:
                break
            ind = cur.copy()
            members = np.nonzero(ind > 0.0)[0]
            if members.size:
                kill = rng.choice(members,
                                  size=max(1, int(0.4 * members.size)),
                                  replace=False)
                ind[kill] = 0.0
            conf = amat @ ind
            refill(ind, conf, rng)
            new_def = deficit(ind)
            if new_def <= cur_def:  # accept ties to keep wandering
                cur, cur_def = ind.copy(), new_def
        if cur_def == 0:
            chosen = frozenset(int(v) for v in np.nonzero(cur > 0.0)[0])
            if np.array_equal(g.b_vector(chosen), tgt):
                return chosen
    return None


def balanced_extraction_colouring(m: ModelInstance, g: SbmGraph,
                                  epsilon: float = 0.2, seed: int = 0,
                                  effort: int = 8) -> Colouring:
    """Colouring built the way the upper-bound argument colours the graph:

    1. split the block-size vector by a near-optimal integer system;
    2. inside each part, repeatedly extract independent sets with target
       profile floor(nu * ||n|| / ||n_rem|| * n_rem), where
       nu = (2 - epsilon) ln(w(n_rem)) / w(n_rem), degrading the target by
       0.8 on failure (down to singletons, which always succeed);
    3. colour whatever remains with DSATUR.
    """
    if not 0.0 < epsilon < 1.0:
        raise ModelError("epsilon must lie in (0, 1)")
    if g.n == 0:
        return Colouring(np.zeros(0, dtype=np.int64), 0, "extraction")
    q = m.q
    k = g.k
    colour_of = np.full(g.n, -1, dtype=np.int64)
    next_colour = 0

    system = near_optimal_integer_system(g.size_vector(), q,
                                         seed=derive_seed(seed, 0))
    by_block = [list(np.nonzero(g.block_of == b)[0]) for b in range(k)]
    offsets = [0] * k
    part_vertices: list[list[int]] = []
    for part in system.parts:
        vs: list[int] = []
        for b in range(k):
            c = int(part.values[b])
            vs.extend(int(v) for v in by_block[b][offsets[b]:offsets[b] + c])
            offsets[b] += c
        part_vertices.append(vs)

    call = 1
    for vs in part_vertices:
        remaining = set(vs)
        part_norm = float(len(vs))
        while remaining:
            rem_counts = g.b_vector(remaining)
            rem_total = int(rem_counts.sum())
            wj = w_value(BlockVector(rem_counts, integer=True), q).value
            if wj <= 1.0:
                break  # nu would be nonpositive; leave the rest to DSATUR
            nu = (2.0 - epsilon) * math.log(wj) / wj
            scale = nu * part_norm / rem_total
            target = np.minimum(np.floor(scale * rem_counts).astype(np.int64),
                                rem_counts)
            if target.sum() == 0:
                break
            requested = int(target.sum())
            sub, mapping = g.subgraph(sorted(remaining))
            found = None
            while target.sum() > 0:
                found = find_balanced_independent_set(
                    m, sub, BlockVector(target, integer=True),
                    seed=derive_seed(seed, call), effort=effort)
                call += 1
                if found is not None:
                    break
                degraded = np.floor(0.8 * target).astype(np.int64)
                if degraded.sum() == 0:
                    degraded = np.zeros(k, dtype=np.int64)
                    degraded[int(np.argmax(rem_counts))] = 1
                    if np.array_equal(degraded, target):
                        break
                target = degraded
            if found is None or not found:
                break
            if len(found) < max(3.0, 0.5 * requested) and len(found) < rem_total:
                break  # independent structure exhausted; DSATUR packs the
                       # dense remainder better than forced tiny classes
            members = [mapping[i] for i in found]
            for v in members:
                colour_of[v] = next_colour
                remaining.discard(v)
            next_colour += 1

    leftovers = [v for v in range(g.n) if colour_of[v] < 0]
    if leftovers:
        sub, mapping = g.subgraph(leftovers)
        fill = dsatur_colouring(sub, seed=derive_seed(seed, 999_999))
        for i, v in enumerate(mapping):
            colour_of[v] = next_colour + int(fill.colour_of[i])
        next_colour += fill.num_colours

    col = _canonical_colouring(colour_of.tolist(), "extraction")
    col.check_proper(g)
    return col
