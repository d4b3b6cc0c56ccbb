"""Sequential links between spin systems and anchor matching.

A link a -> b says b follows a in the chain: a's intra shifts should equal
b's preceding-residue shifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

from .model import (
    AnchorSubset,
    ProteinSequence,
    Pseudoresidue,
    ReferenceStats,
    SpinSystem,
    ToleranceSchedule,
    spins_by_id,
)
from .residue_typing import P_MISS, candidate_types

Linkable = Union[SpinSystem, Pseudoresidue]

SIGMA_LINK = 0.2


class LinkError(NamedTuple):
    value: float
    dims_used: int


def link_error(a: Linkable, b: Linkable, sigma_link: float = SIGMA_LINK) -> LinkError:
    """Mean squared σ-normalized mismatch between a's back and b's front."""
    total = 0.0
    dims = 0
    for x, y in ((a.back_ca_i, b.front_ca_prev), (a.back_cb_i, b.front_cb_prev)):
        if x is None or y is None:
            continue
        total += ((y - x) / sigma_link) ** 2
        dims += 1
    if dims == 0:
        return LinkError(math.inf, 0)
    return LinkError(total / dims, dims)


def _shift_arrays(spins: Sequence[SpinSystem]) -> tuple[np.ndarray, np.ndarray]:
    nan = np.nan
    intra = np.array([[nan if s.ca_i is None else s.ca_i, nan if s.cb_i is None else s.cb_i]
                      for s in spins], dtype=float).reshape(-1, 2)
    prev = np.array([[nan if s.ca_prev is None else s.ca_prev,
                      nan if s.cb_prev is None else s.cb_prev]
                     for s in spins], dtype=float).reshape(-1, 2)
    return intra, prev


def link_gate_matrix(spins: Sequence[SpinSystem]) -> np.ndarray:
    """Largest per-dimension ppm difference for every ordered pair (inf if none).

    Entry ``[i, j]`` describes the link spins[i] -> spins[j]; the diagonal is inf.
    """
    intra, prev = _shift_arrays(spins)
    diff = np.abs(intra[:, None, :] - prev[None, :, :])
    has = ~np.isnan(diff)
    worst = np.where(has, diff, -np.inf).max(axis=2)
    worst[~has.any(axis=2)] = np.inf
    np.fill_diagonal(worst, np.inf)
    return worst


def enumerate_links(spins: Sequence[SpinSystem], tol: float) -> set[tuple[str, str]]:
    """Ordered pairs whose every compared dimension agrees within ``tol`` ppm."""
    if not spins:
        return set()
    worst = link_gate_matrix(spins)
    ii, jj = np.nonzero(worst <= tol)
    return {(spins[i].id, spins[j].id) for i, j in zip(ii.tolist(), jj.tolist())}


def build_pseudoresidue(member_ids: Sequence[str], spins: Union[Mapping[str, SpinSystem],
                        Sequence[SpinSystem]], anchor_pos=None,
                        sigma_link: float = SIGMA_LINK) -> Pseudoresidue:
    by_id = spins if isinstance(spins, Mapping) else spins_by_id(spins)
    members = tuple(member_ids)
    if not members:
        raise ValueError("pseudoresidue needs at least one member")
    if len(set(members)) != len(members):
        raise ValueError(f"duplicate member in {members}")
    chain = [by_id[m] for m in members]
    for a, b in zip(chain, chain[1:]):
        if not math.isfinite(link_error(a, b, sigma_link).value):
            raise ValueError(f"members {a.id!r} -> {b.id!r} share no comparable shifts")
    first, last = chain[0], chain[-1]
    return Pseudoresidue(members, anchor_pos, first.ca_prev, first.cb_prev,
                         last.ca_i, last.cb_i)


@dataclass
class AnchorMatch:
    pseudoresidues: list[Pseudoresidue]
    consumed: set[str]
    matched: dict[int, float] = field(default_factory=dict)   # start_pos -> tolerance
    unmatched: list[AnchorSubset] = field(default_factory=list)

    def __iter__(self):
        # allows ``pseudos, consumed = match_anchors(...)``
        return iter((self.pseudoresidues, self.consumed))


def _candidate_chains(residues: Sequence[str], typed: Mapping[str, tuple[str, ...]],
                      succ: Mapping[str, list[str]], free: Iterable[str], limit: int = 2):
    """Chains of distinct free spins matching ``residues``; stops after ``limit``."""
    free = sorted(free)
    found: list[tuple[str, ...]] = []

    def extend(chain):
        if len(found) >= limit:
            return
        if len(chain) == len(residues):
            found.append(tuple(chain))
            return
        for nxt in succ.get(chain[-1], ()):
            if nxt not in chain and residues[len(chain)] in typed.get(nxt, ()):
                chain.append(nxt)
                extend(chain)
                chain.pop()

    for sid in free:
        if residues[0] in typed.get(sid, ()):
            extend([sid])
            if len(found) >= limit:
                break
    return found


def _repeats(seq: ProteinSequence, subset: AnchorSubset, taken: set[int]) -> bool:
    pattern, n = subset.residues, subset.length
    for w in range(len(seq) - n + 1):
        if w == subset.start_pos or tuple(seq[w:w + n]) != pattern:
            continue
        if taken.isdisjoint(range(w, w + n)):
            return True
    return False


def match_anchors(subsets: Sequence[AnchorSubset], spins: Sequence[SpinSystem],
                  stats: ReferenceStats, sched: ToleranceSchedule = ToleranceSchedule(),
                  cutoff: float = 9.0, sigma_link: float = SIGMA_LINK,
                  p_miss: float = P_MISS, seq: Optional[ProteinSequence] = None,
                  claimed: Iterable[int] = ()) -> AnchorMatch:
    """Pin anchor subsets to unique chains of spin systems under rising tolerance.

    A subset is matched only when exactly one chain fits at the current
    tolerance; ambiguous subsets wait for later steps and stay unmatched if
    the schedule runs out.

    With ``seq`` given, a subset whose residue pattern also occurs at another
    window free of matched anchors (and of the ``claimed`` positions) is
    ambiguous too: its one fitting chain may belong to the other window.
    """
    by_id = spins_by_id(spins)
    order = sorted(subsets, key=lambda s: (-s.uniqueness_score, s.start_pos))
    typed = {s.id: candidate_types(s, stats, cutoff, p_miss) for s in spins}
    worst = link_gate_matrix(spins) if spins else np.zeros((0, 0))
    ids = [s.id for s in spins]

    pending = list(order)
    consumed: set[str] = set()
    result = AnchorMatch([], consumed)
    taken = set(claimed)
    for tol in sched.values():
        if not pending:
            break
        ii, jj = np.nonzero(worst <= tol)
        succ: dict[str, list[str]] = {}
        for i, j in zip(ii.tolist(), jj.tolist()):
            succ.setdefault(ids[i], []).append(ids[j])
        for v in succ.values():
            v.sort()
        still = []
        for subset in pending:
            if seq is not None and _repeats(seq, subset, taken):
                still.append(subset)
                continue
            free = [sid for sid in ids if sid not in consumed]
            chains = _candidate_chains(subset.residues, typed, succ, free)
            if len(chains) == 1:
                chain = chains[0]
                result.pseudoresidues.append(
                    build_pseudoresidue(chain, by_id, subset.start_pos, sigma_link))
                consumed.update(chain)
                taken.update(subset.positions)
                result.matched[subset.start_pos] = tol
            else:
                still.append(subset)
        pending = still
    result.unmatched = sorted(pending, key=lambda s: s.start_pos)
    result.pseudoresidues.sort(key=lambda p: p.anchor_pos)
    return result
