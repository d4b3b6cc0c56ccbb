"""Assembly of pseudoresidues and spin systems into one sequence-framed chain.

A chain starts at some item and grows only behind its tail. Each placed item
sits at a sequence offset; the cursor after an item is the first position it
does not cover. Before every step the cursor skips proline positions (prolines
have no amide and never produce a spin system). Anchored items are hard
constraints: they can only sit at their anchor position, and when the cursor
reaches that position they must be placed next.

Cost of a chain (all σ-normalized squared units, see ``ScoringConfig``):

* link error between adjacent placed items, or ``break_penalty`` if the link
  has no comparable shifts or the two items are separated by skipped positions;
* internal links of multi-member items, costed the same way;
* ``type_weight`` times the per-position residue-type score (capped at
  ``break_penalty``);
* ``unplaced_penalty`` for every spin system left out of the chain.

Three searches share this model: multi-start greedy (the production path),
A* (optimal, small instances) and a brute-force oracle used for verification.
"""

from __future__ import annotations

import heapq
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .linking import link_error
from .model import (
    Assignment,
    ProteinSequence,
    Pseudoresidue,
    ReferenceStats,
    ScoringConfig,
    SpinSystem,
    spins_by_id,
)
from .residue_typing import shift_pair_score

ASTAR_LIMIT = 20
ORACLE_LIMIT = 9
ORPHAN_GATE = 1.0
ORPHAN_PENALTY = 5.0
WEAK_CANDIDATES = 6
ROLLOUT_DEPTH = 12
PRUNE_SLACK = 1e-9


class InfeasibleAnchorsError(ValueError):
    pass


class SizeLimitError(ValueError):
    pass


@dataclass(frozen=True)
class ChainItem:
    """A bare spin system (span 1) or a pseudoresidue, optionally anchored."""

    id: str
    members: tuple[SpinSystem, ...]
    anchor_pos: Optional[int] = None

    @classmethod
    def from_spin(cls, spin: SpinSystem, anchor_pos: Optional[int] = None) -> "ChainItem":
        return cls(spin.id, (spin,), anchor_pos)

    @classmethod
    def from_pseudoresidue(cls, p: Pseudoresidue, spins) -> "ChainItem":
        by_id = spins if isinstance(spins, dict) else spins_by_id(spins)
        return cls(p.id, tuple(by_id[m] for m in p.members), p.anchor_pos)

    @property
    def span(self) -> int:
        return len(self.members)

    @property
    def member_ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.members)

    # linkable-unit interface
    @property
    def front_ca_prev(self):
        return self.members[0].ca_prev

    @property
    def front_cb_prev(self):
        return self.members[0].cb_prev

    @property
    def back_ca_i(self):
        return self.members[-1].ca_i

    @property
    def back_cb_i(self):
        return self.members[-1].cb_i


def build_items(spins: Sequence[SpinSystem],
                pseudoresidues: Sequence[Pseudoresidue] = ()) -> list[ChainItem]:
    """Pseudoresidues plus every spin system they do not consume."""
    by_id = spins_by_id(spins)
    items = [ChainItem.from_pseudoresidue(p, by_id) for p in pseudoresidues]
    used = {m for p in pseudoresidues for m in p.members}
    items += [ChainItem.from_spin(s) for s in spins if s.id not in used]
    return sorted(items, key=lambda it: it.id)


@dataclass(frozen=True)
class Placement:
    item_id: str
    offset: int
    members: tuple[str, ...]


@dataclass(frozen=True)
class AssemblyResult:
    order: tuple[Placement, ...]
    total_error: float
    start_item: Optional[str]
    unplaced: tuple[str, ...] = ()
    unplaced_spins: tuple[str, ...] = ()


class AssemblyProblem:
    """Precomputed costs and placement rules for one set of chain items."""

    def __init__(self, items: Sequence[ChainItem], seq: ProteinSequence,
                 cfg: ScoringConfig = ScoringConfig(),
                 stats: Optional[ReferenceStats] = None):
        if cfg.type_weight > 0 and stats is None:
            raise ValueError("type_weight > 0 needs reference stats")
        ids = [it.id for it in items]
        if len(set(ids)) != len(ids):
            raise ValueError("chain item ids must be unique")
        member_ids = [m for it in items for m in it.member_ids]
        if len(set(member_ids)) != len(member_ids):
            raise ValueError("a spin system appears in more than one chain item")

        self.items = sorted(items, key=lambda it: it.id)
        self.seq = seq
        self.cfg = cfg
        self.stats = stats
        self.n = len(seq)
        self.m = len(self.items)
        self.index = {it.id: k for k, it in enumerate(self.items)}
        self.span = np.array([it.span for it in self.items], dtype=int)
        self.gap = np.array([r == "P" for r in seq], dtype=bool)

        self.claim = np.full(self.n, -1, dtype=int)
        self.anchor_at = np.full(self.n, -1, dtype=int)
        self.anchored = np.zeros(self.m, dtype=bool)
        for k, it in enumerate(self.items):
            if it.anchor_pos is None:
                continue
            lo, hi = it.anchor_pos, it.anchor_pos + it.span
            if lo < 0 or hi > self.n:
                raise InfeasibleAnchorsError(
                    f"item {it.id!r} anchored at {lo} does not fit a {self.n}-residue sequence")
            clash = self.claim[lo:hi]
            if (clash >= 0).any():
                other = self.items[int(clash[clash >= 0][0])].id
                raise InfeasibleAnchorsError(f"anchored items {other!r} and {it.id!r} overlap")
            self.claim[lo:hi] = k
            self.anchor_at[lo] = k
            self.anchored[k] = True

        bp = cfg.break_penalty
        raw = np.full((self.m, self.m), np.inf)
        for i, a in enumerate(self.items):
            for j, b in enumerate(self.items):
                if i != j:
                    raw[i, j] = link_error(a, b, cfg.sigma_link).value
        self.link_raw = raw
        self.link_eff = np.where(np.isfinite(raw), raw, bp)

        self.internal = np.zeros(self.m)
        for k, it in enumerate(self.items):
            for a, b in zip(it.members, it.members[1:]):
                v = link_error(a, b, cfg.sigma_link).value
                self.internal[k] += v if math.isfinite(v) else bp

        self._type: dict[tuple[str, int], float] = {}
        self._self_cache: dict[tuple[int, int], float] = {}
        # unanchored items that may be placed at each position
        self.fit_lists: list[list[int]] = [[] for _ in range(self.n)]
        for k in range(self.m):
            if not self.anchored[k]:
                for p in range(self.n):
                    if self._fits_slow(k, p):
                        self.fit_lists[p].append(k)
        usable = ~self.gap | (self.claim >= 0)
        self.usable_from = np.append(np.cumsum(usable[::-1])[::-1], 0)
        self.fit_mask = np.zeros((self.n, self.m), dtype=bool)
        for p, ks in enumerate(self.fit_lists):
            self.fit_mask[p, ks] = True
        # own cost and raw type-score sum of each item at each allowed offset
        self.own = np.full((self.m, self.n), np.inf)
        self.type_sum = np.zeros((self.m, self.n))
        slots = [(k, p) for p, ks in enumerate(self.fit_lists) for k in ks]
        slots += [(int(k), self.items[k].anchor_pos) for k in np.flatnonzero(self.anchored)]
        for k, p in slots:
            self.own[k, p] = self.self_cost(k, p)
            self.type_sum[k, p] = sum(self.type_term(mem, p + q)
                                      for q, mem in enumerate(self.items[k].members))
        self.h_item = self._heuristic_terms()

    # -- cost pieces ----------------------------------------------------------

    def type_term(self, spin: SpinSystem, pos: int) -> float:
        """Raw type score of ``spin`` at ``pos``, capped at the break penalty."""
        if self.stats is None or not spin.has_intra:
            return 0.0
        key = (spin.id, pos)
        if key not in self._type:
            s = shift_pair_score(spin.ca_i, spin.cb_i, self.seq[pos], self.stats, self.cfg.p_miss)
            self._type[key] = min(s, self.cfg.break_penalty)
        return self._type[key]

    def self_cost(self, k: int, p: int) -> float:
        key = (k, p)
        if key not in self._self_cache:
            it = self.items[k]
            c = self.internal[k]
            if self.cfg.type_weight > 0:
                c += self.cfg.type_weight * sum(
                    self.type_term(mem, p + q) for q, mem in enumerate(it.members))
            self._self_cache[key] = float(c)
        return self._self_cache[key]

    def step_cost(self, tail: int, j: int, cursor: int, c: int) -> float:
        join = self.link_eff[tail, j] if c == cursor else self.cfg.break_penalty
        return float(join) + self.self_cost(j, c)

    def unplaced_cost(self, placed: int) -> float:
        return self.cfg.unplaced_penalty * sum(
            int(self.span[k]) for k in range(self.m) if not placed >> k & 1)

    # -- placement rules ------------------------------------------------------

    def fits(self, k: int, p: int) -> bool:
        if self.anchored[k]:
            return self.items[k].anchor_pos == p
        return 0 <= p < self.n and k in self.fit_lists[p]

    def _fits_slow(self, k: int, p: int) -> bool:
        if self.anchored[k]:
            return self.items[k].anchor_pos == p
        hi = p + int(self.span[k])
        if p < 0 or hi > self.n:
            return False
        return not (self.claim[p:hi] >= 0).any() and not self.gap[p:hi].any()

    def start_offset(self, k: int) -> Optional[int]:
        if self.anchored[k]:
            return self.items[k].anchor_pos
        for p in range(self.n):
            if k in self.fit_lists[p]:
                return p
        return None

    def advance(self, cursor: int) -> int:
        c = cursor
        while c < self.n and self.gap[c] and self.claim[c] < 0:
            c += 1
        return c

    def moves(self, placed: int, cursor: int) -> tuple[int, list[int]]:
        """Next placement position and the items that may go there."""
        c = self.advance(cursor)
        if c >= self.n:
            return c, []
        owner = int(self.claim[c])
        if owner >= 0:
            if self.anchor_at[c] == owner and not placed >> owner & 1:
                return c, [owner]
            return c, []
        return c, [k for k in self.fit_lists[c] if not placed >> k & 1]

    # -- heuristic ------------------------------------------------------------

    def _heuristic_terms(self) -> np.ndarray:
        bp, up = self.cfg.break_penalty, self.cfg.unplaced_penalty
        out = np.zeros(self.m)
        for j in range(self.m):
            others = np.delete(self.link_eff[:, j], j)
            min_in = min(float(others.min()) if others.size else bp, bp)
            if self.anchored[j]:
                self_min = self.self_cost(j, self.items[j].anchor_pos)
            else:
                self_min = float(self.own[j].min()) if self.n else math.inf
            out[j] = min(min_in + self_min, up * self.span[j])
        return out

    def heuristic(self, placed: int) -> float:
        """Lower bound on the cost still to come once ``placed`` are in the chain.

        Each unplaced item either joins later (paying at least its cheapest
        incoming link or a break, plus its cheapest own cost) or stays out.
        """
        return float(sum(self.h_item[k] for k in range(self.m) if not placed >> k & 1))

    # -- results --------------------------------------------------------------

    def chain_cost(self, chain: Sequence[tuple[int, int]]) -> float:
        """Total cost of a chain given as ``(item index, offset)`` pairs."""
        if not chain:
            return self.unplaced_cost(0)
        k0, p0 = chain[0]
        total = self.self_cost(k0, p0)
        placed = 1 << k0
        cursor = p0 + int(self.span[k0])
        tail = k0
        for k, p in chain[1:]:
            total += self.step_cost(tail, k, cursor, p)
            placed |= 1 << k
            cursor = p + int(self.span[k])
            tail = k
        return total + self.unplaced_cost(placed)

    def result(self, chain: Sequence[tuple[int, int]]) -> AssemblyResult:
        placed = {k for k, _ in chain}
        order = tuple(Placement(self.items[k].id, p, self.items[k].member_ids)
                      for k, p in chain)
        rest = [self.items[k] for k in range(self.m) if k not in placed]
        return AssemblyResult(
            order=order,
            total_error=self.chain_cost(chain),
            start_item=self.items[chain[0][0]].id if chain else None,
            unplaced=tuple(it.id for it in rest),
            unplaced_spins=tuple(sorted(m for it in rest for m in it.member_ids)),
        )


def _problem(items, seq, cfg, stats) -> AssemblyProblem:
    if isinstance(items, AssemblyProblem):
        return items
    return AssemblyProblem(items, seq, cfg, stats)


# -- greedy -------------------------------------------------------------------
#
# The plain rule is "append the free item with the lowest link error to the
# tail". Real data breaks it in three recurring ways, each handled here:
#
# * a link that shares few dimensions can match by accident; a candidate whose
#   preceding shifts are explained clearly better by another free item is not
#   credible behind this tail;
# * two credible candidates can be too close to call; a short lookahead that
#   also checks residue types settles it;
# * after a skipped proline, or when nothing credible is left, the tail gives
#   no evidence at all; the choice then rests on the lookahead, the fit of the
#   candidate's preceding shifts to the residue before the cursor, and on
#   preferring items that nothing else links into.
#
# Greedy state keeps the free items as a boolean mask rather than a bitmask.

def _moves(prob: AssemblyProblem, free: np.ndarray, cursor: int) -> tuple[int, np.ndarray]:
    c = prob.advance(cursor)
    if c >= prob.n:
        return c, _EMPTY
    owner = int(prob.claim[c])
    if owner >= 0:
        if prob.anchor_at[c] == owner and free[owner]:
            return c, np.array([owner])
        return c, _EMPTY
    return c, np.flatnonzero(prob.fit_mask[c] & free)


_EMPTY = np.zeros(0, dtype=int)


def _keys(prob: AssemblyProblem, tail: int, cands: np.ndarray, c: int) -> np.ndarray:
    return prob.link_eff[tail, cands] + prob.own[cands, c]


def _alternatives(prob: AssemblyProblem, free: np.ndarray, cands: np.ndarray) -> np.ndarray:
    """Lowest raw link into each candidate from any still-free item.

    The tail is never free and the diagonal is inf, so neither counts.
    """
    if not free.any():
        return np.full(len(cands), np.inf)
    return prob.link_raw[free][:, cands].min(axis=0)


def _rollout(prob: AssemblyProblem, j: int, c: int, free: np.ndarray,
             depth: int = ROLLOUT_DEPTH) -> float:
    """Score of continuing greedily from ``j`` placed at ``c``.

    Sums link errors, each capped at the break penalty so one bad lookahead
    step cannot swamp the rest, and adds the mean type score of the visited
    positions: a stretch that links well and matches the sequence beats one
    that merely links well. The walk ends without penalty where
    the best link is poor but some fitting item shares no dimension with the
    tail: there the true successor may simply be hidden by missing data.
    An island (``j`` alone between gaps) is scored with the walk that
    follows the next gap, as on its own it says nothing.
    """
    free = free.copy()
    free[j] = False
    cursor = c + int(prob.span[j])
    tail = j
    link = 0.0
    type_sum = prob.type_sum[j, c]
    n_types = int(prob.span[j])
    for _ in range(depth):
        nc, cands = _moves(prob, free, cursor)
        if not len(cands):
            break
        if nc != cursor:
            if tail != j or c == 0 or not prob.gap[c - 1]:
                break
            pre = np.array([_prev_type(prob, int(k), nc) for k in cands])
            q = int(np.argmin(pre + prob.type_sum[cands, nc]))
            k = int(cands[q])
            return float(type_sum / n_types + pre[q]
                         + _rollout(prob, k, nc, free, depth - 1))
        q = int(np.argmin(_keys(prob, tail, cands, nc)))
        k = int(cands[q])
        raw = prob.link_raw[tail, cands]
        if not raw[q] <= ORPHAN_GATE and not np.isfinite(raw).all():
            break
        link += min(prob.link_eff[tail, k], prob.cfg.break_penalty)
        type_sum += prob.type_sum[k, nc]
        n_types += int(prob.span[k])
        free[k] = False
        cursor = nc + int(prob.span[k])
        tail = k
    return float(link + type_sum / n_types)


def _prev_type(prob: AssemblyProblem, j: int, c: int) -> float:
    """How well j's preceding-residue shifts fit the residue before ``c``."""
    if prob.stats is None or c == 0:
        return 0.0
    front = prob.items[j].members[0]
    if front.ca_prev is None and front.cb_prev is None:
        return prob.cfg.p_miss
    s = shift_pair_score(front.ca_prev, front.cb_prev, prob.seq[c - 1], prob.stats,
                         prob.cfg.p_miss)
    return min(s, prob.cfg.break_penalty)


def _resolve_weak(prob: AssemblyProblem, cands: np.ndarray, c: int, free: np.ndarray) -> int:
    claimed = _alternatives(prob, free, cands) <= ORPHAN_GATE
    if prob.stats is None:
        return int(cands[np.lexsort((cands, claimed))[0]])
    pre = [ORPHAN_PENALTY * bool(cl) + _prev_type(prob, int(k), c) for k, cl in zip(cands, claimed)]
    ranked = sorted(zip(np.array(pre) + prob.type_sum[cands, c], pre, cands.tolist()))
    best = None
    for _, p, k in ranked[:WEAK_CANDIDATES]:
        key = (p + _rollout(prob, k, c, free), k)
        if best is None or key < best:
            best = key
    return best[1]


def _choose(prob: AssemblyProblem, tail: int, cands: np.ndarray, cursor: int, c: int,
            free: np.ndarray) -> int:
    if len(cands) == 1:
        return int(cands[0])
    if c != cursor:
        return _resolve_weak(prob, cands, c, free)
    keys = _keys(prob, tail, cands, c)
    margin = prob.cfg.tie_margin
    if margin <= 0 or prob.stats is None:
        return int(cands[np.argmin(keys)])
    alts = _alternatives(prob, free, cands)
    raw = prob.link_raw[tail, cands]
    credible = np.isfinite(raw) & (raw <= alts + margin)
    if not credible.any():
        return _resolve_weak(prob, cands, c, free)
    ckeys = np.where(credible, keys, np.inf)
    near = np.flatnonzero(ckeys <= ckeys.min() + margin)
    if len(near) == 1:
        return int(cands[near[0]])
    near = near[np.argsort(ckeys[near], kind="stable")][:WEAK_CANDIDATES]
    best = None
    for q in near:
        k = int(cands[q])
        key = (float(prob.link_eff[tail, k]) + _rollout(prob, k, c, free), k)
        if best is None or key < best:
            best = key
    return best[1]


def _greedy_chain(prob: AssemblyProblem, s: int,
                  budget: float = math.inf) -> Optional[list[tuple[int, int]]]:
    """Greedy chain from item ``s``.

    Returns None as soon as the cost so far plus the unplaced-spin bound
    exceeds ``budget``.
    """
    p0 = prob.start_offset(s)
    if p0 is None:
        return []
    chain = [(s, p0)]
    free = np.ones(prob.m, dtype=bool)
    free[s] = False
    cursor = p0 + int(prob.span[s])
    tail = s
    cost = prob.self_cost(s, p0)
    left = int(prob.span.sum()) - int(prob.span[s])
    while True:
        if cost + _unplaced_bound(prob, left, cursor) > budget + PRUNE_SLACK:
            return None
        c, cands = _moves(prob, free, cursor)
        if not len(cands):
            break
        j = _choose(prob, tail, cands, cursor, c, free)
        chain.append((j, c))
        cost += prob.step_cost(tail, j, cursor, c)
        left -= int(prob.span[j])
        free[j] = False
        cursor = c + int(prob.span[j])
        tail = j
    return chain


def _unplaced_bound(prob: AssemblyProblem, left: int, cursor: int) -> float:
    # at most one spin fits per usable position from the cursor on, and
    # every other cost term is non-negative
    return prob.cfg.unplaced_penalty * max(0, left - int(prob.usable_from[min(cursor, prob.n)]))


def greedy_assemble(items, start: str, seq: ProteinSequence = None,
                    cfg: ScoringConfig = ScoringConfig(),
                    stats: Optional[ReferenceStats] = None) -> AssemblyResult:
    """Grow a chain from ``start``, always appending the best-linking item."""
    prob = _problem(items, seq, cfg, stats)
    if start not in prob.index:
        raise KeyError(f"unknown start item {start!r}")
    s = prob.index[start]
    return _greedy_result(prob, s, _greedy_chain(prob, s))


def _greedy_result(prob: AssemblyProblem, s: int, chain) -> AssemblyResult:
    if not chain:
        return AssemblyResult((), prob.unplaced_cost(0), prob.items[s].id,
                              tuple(it.id for it in prob.items),
                              tuple(sorted(m for it in prob.items for m in it.member_ids)))
    return prob.result(chain)


def multi_start_greedy(items, seq: ProteinSequence = None, cfg: ScoringConfig = ScoringConfig(),
                       stats: Optional[ReferenceStats] = None,
                       threads: int = 1, polish: bool = True) -> AssemblyResult:
    """Greedy from every item; keep the lowest total error (ties: lowest start id).

    A start is abandoned once it provably cannot beat the best chain found so
    far, which never changes the result. With ``polish`` the winning chain is
    then improved by item swaps (see ``polish_chain``).
    """
    prob = _problem(items, seq, cfg, stats)
    if prob.m == 0:
        raise ValueError("nothing to assemble")
    starts = list(range(prob.m))
    best = None
    best_key = (math.inf, "")

    def run(k, budget):
        chain = _greedy_chain(prob, k, budget)
        if chain is None:
            return None
        return _greedy_result(prob, k, chain)

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        batch = max(1, threads)
        for i in range(0, len(starts), batch):
            budget = best_key[0]
            chunk = starts[i:i + batch]
            results = (pool.map(lambda k: run(k, budget), chunk) if pool
                       else (run(k, budget) for k in chunk))
            for r in results:
                if r is not None and (r.total_error, r.start_item) < best_key:
                    best, best_key = r, (r.total_error, r.start_item)
    finally:
        if pool:
            pool.shutdown()
    if polish and best.order:
        chain = [(prob.index[pl.item_id], pl.offset) for pl in best.order]
        best = prob.result(polish_chain(prob, chain))
    return best


def polish_chain(prob: AssemblyProblem, chain: Sequence[tuple[int, int]]
                 ) -> list[tuple[int, int]]:
    """Apply the best cost-lowering swap of equal-span items until none is left.

    Two placed items may trade offsets, or a placed item may trade places
    with an unplaced one. Offsets never move, so only the steps into and out
    of the touched positions are rescored. Anchored items stay put.
    """
    chain = list(chain)
    n = len(chain)
    fits = prob.fit_mask

    def step(t):
        k, p = chain[t]
        if t == 0:
            return prob.self_cost(k, p)
        kp, pp = chain[t - 1]
        return prob.step_cost(kp, k, pp + int(prob.span[kp]), p)

    def local(ts):
        return sum(step(t) for t in sorted(ts) if t < n)

    def gain(moves):
        touched = {t + d for t, _ in moves for d in (0, 1)}
        old = [chain[t] for t, _ in moves]
        before = local(touched)
        for t, k in moves:
            chain[t] = (k, chain[t][1])
        after = local(touched)
        for (t, _), prev in zip(moves, old):
            chain[t] = prev
        return before - after

    while True:
        placed = {k for k, _ in chain}
        rest = [k for k in range(prob.m) if k not in placed and not prob.anchored[k]]
        best, best_moves = PRUNE_SLACK, None
        for a in range(n):
            ka, pa = chain[a]
            if prob.anchored[ka]:
                continue
            for b in range(a + 1, n):
                kb, pb = chain[b]
                if (prob.anchored[kb] or prob.span[kb] != prob.span[ka]
                        or not (fits[pa, kb] and fits[pb, ka])):
                    continue
                g = gain([(a, kb), (b, ka)])
                if g > best:
                    best, best_moves = g, [(a, kb), (b, ka)]
            for r in rest:
                if prob.span[r] == prob.span[ka] and fits[pa, r]:
                    g = gain([(a, r)])
                    if g > best:
                        best, best_moves = g, [(a, r)]
        if best_moves is None:
            return chain
        for t, k in best_moves:
            chain[t] = (k, chain[t][1])


# -- A* -----------------------------------------------------------------------

def astar_assemble(items, seq: ProteinSequence = None, cfg: ScoringConfig = ScoringConfig(),
                   stats: Optional[ReferenceStats] = None,
                   limit: int = ASTAR_LIMIT) -> AssemblyResult:
    """Cost-optimal chain by A* over (placed set, tail, cursor) states."""
    prob = _problem(items, seq, cfg, stats)
    if prob.m == 0:
        raise ValueError("nothing to assemble")
    if prob.m > limit:
        raise SizeLimitError(
            f"{prob.m} chain items exceed the A* limit of {limit}; use the greedy strategy")

    tick = itertools.count()
    heap: list = []
    best_g: dict[tuple[int, int, int], float] = {}
    for s in range(prob.m):
        p0 = prob.start_offset(s)
        if p0 is None:
            continue
        placed = 1 << s
        state = (placed, s, p0 + int(prob.span[s]))
        g = prob.self_cost(s, p0)
        if g < best_g.get(state, math.inf):
            best_g[state] = g
            heapq.heappush(heap, (g + prob.heuristic(placed), next(tick), g, False, state,
                                  ((s, p0),)))
    if not heap:
        return AssemblyResult((), prob.unplaced_cost(0), None,
                              tuple(it.id for it in prob.items),
                              tuple(sorted(m for it in prob.items for m in it.member_ids)))

    while heap:
        f, _, g, done, state, chain = heapq.heappop(heap)
        if done:
            return prob.result(list(chain))
        if g > best_g.get(state, math.inf):
            continue
        placed, tail, cursor = state
        c, cands = prob.moves(placed, cursor)
        if not cands:
            final = g + prob.unplaced_cost(placed)
            heapq.heappush(heap, (final, next(tick), final, True, state, chain))
            continue
        for j in cands:
            ng = g + prob.step_cost(tail, j, cursor, c)
            np_ = placed | 1 << j
            nstate = (np_, j, c + int(prob.span[j]))
            if ng < best_g.get(nstate, math.inf):
                best_g[nstate] = ng
                heapq.heappush(heap, (ng + prob.heuristic(np_), next(tick), ng, False,
                                      nstate, chain + ((j, c),)))
    raise RuntimeError("A* exhausted without reaching a terminal state")


# -- brute force --------------------------------------------------------------

def exhaustive_oracle(items, seq: ProteinSequence = None, cfg: ScoringConfig = ScoringConfig(),
                      stats: Optional[ReferenceStats] = None,
                      limit: int = ORACLE_LIMIT) -> AssemblyResult:
    """Enumerate every valid chain from every start; return the cheapest."""
    prob = _problem(items, seq, cfg, stats)
    if prob.m > limit:
        raise SizeLimitError(f"{prob.m} chain items exceed the oracle limit of {limit}")
    if prob.m == 0:
        raise ValueError("nothing to assemble")
    best: list = [math.inf, []]

    def walk(chain, placed, cursor, tail, g):
        c, cands = prob.moves(placed, cursor)
        if not cands:
            total = g + prob.unplaced_cost(placed)
            if total < best[0]:
                best[0], best[1] = total, list(chain)
            return
        for j in cands:
            chain.append((j, c))
            walk(chain, placed | 1 << j, c + int(prob.span[j]), j,
                 g + prob.step_cost(tail, j, cursor, c))
            chain.pop()

    for s in range(prob.m):
        p0 = prob.start_offset(s)
        if p0 is not None:
            walk([(s, p0)], 1 << s, p0 + int(prob.span[s]), s, prob.self_cost(s, p0))
    if not best[1]:
        return AssemblyResult((), prob.unplaced_cost(0), None,
                              tuple(it.id for it in prob.items),
                              tuple(sorted(m for it in prob.items for m in it.member_ids)))
    return prob.result(best[1])


def remaining_cost_brute_force(prob: AssemblyProblem, placed: int, tail: int,
                               cursor: int) -> float:
    """Exact minimum cost still to come from a search state (test oracle)."""
    c, cands = prob.moves(placed, cursor)
    if not cands:
        return prob.unplaced_cost(placed)
    return min(prob.step_cost(tail, j, cursor, c)
               + remaining_cost_brute_force(prob, placed | 1 << j, j, c + int(prob.span[j]))
               for j in cands)


# -- output -------------------------------------------------------------------

def finalize_assignment(result: AssemblyResult, seq: ProteinSequence) -> Assignment:
    """Expand placements into a per-position map of spin-system ids."""
    mapping: dict[int, str] = {}
    for pl in result.order:
        if pl.offset < 0 or pl.offset + len(pl.members) > len(seq):
            raise ValueError(f"item {pl.item_id!r} at {pl.offset} runs past the sequence end")
        for q, sid in enumerate(pl.members):
            if pl.offset + q in mapping:
                raise ValueError(f"position {pl.offset + q} placed twice")
            mapping[pl.offset + q] = sid
    return Assignment(mapping, result.total_error, frozenset(result.unplaced_spins))

