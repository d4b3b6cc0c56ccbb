"""Independent re-check of an :class:`Assignment`.

The total error is recomputed position by position straight from the spin
systems, without any of the matrices the search builds, so it doubles as a
cross-check of the search's own bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .linking import link_error
from .model import Assignment, ProteinSequence, ReferenceStats, ScoringConfig, SpinSystem
from .residue_typing import shift_pair_score

ERROR_TOLERANCE = 1e-9


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    recomputed_error: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def recompute_total_error(a: Assignment, by_id: dict[str, SpinSystem], seq: ProteinSequence,
                          cfg: ScoringConfig, stats: Optional[ReferenceStats] = None) -> float:
    total = 0.0
    positions = sorted(p for p, sid in a.mapping.items() if sid in by_id)
    for p in positions:
        spin = by_id[a.mapping[p]]
        if cfg.type_weight > 0 and spin.has_intra:
            s = shift_pair_score(spin.ca_i, spin.cb_i, seq[p], stats, cfg.p_miss)
            total += cfg.type_weight * min(s, cfg.break_penalty)
    for p, q in zip(positions, positions[1:]):
        if q != p + 1:
            total += cfg.break_penalty
            continue
        v = link_error(by_id[a.mapping[p]], by_id[a.mapping[q]], cfg.sigma_link).value
        total += v if math.isfinite(v) else cfg.break_penalty
    return total + cfg.unplaced_penalty * len(a.unassigned)


def validate_assignment(a: Assignment, spins: Sequence[SpinSystem], seq: ProteinSequence,
                        cfg: ScoringConfig = ScoringConfig(),
                        stats: Optional[ReferenceStats] = None) -> ValidationReport:
    """List every problem with ``a``; never raises on a bad assignment."""
    report = ValidationReport()
    if cfg.type_weight > 0 and stats is None:
        report.violations.append("type_weight > 0 but no reference stats given")
        return report
    by_id = {s.id: s for s in spins}

    seen: dict[str, int] = {}
    for pos, sid in a.mapping.items():
        if not 0 <= pos < len(seq):
            report.violations.append(f"position {pos} outside sequence of length {len(seq)}")
        if sid not in by_id:
            report.violations.append(f"unknown spin system {sid!r} at position {pos}")
        if sid in seen:
            report.violations.append(
                f"spin system {sid!r} used twice (positions {seen[sid]} and {pos})")
        else:
            seen[sid] = pos
    for sid in sorted(a.unassigned):
        if sid in seen:
            report.violations.append(f"spin system {sid!r} both assigned and unassigned")
        if sid not in by_id:
            report.violations.append(f"unknown unassigned spin system {sid!r}")

    in_range = Assignment({p: s for p, s in a.mapping.items() if 0 <= p < len(seq)},
                          a.total_error, a.unassigned)
    report.recomputed_error = recompute_total_error(in_range, by_id, seq, cfg, stats)
    if not abs(report.recomputed_error - a.total_error) <= ERROR_TOLERANCE:
        report.violations.append(
            f"total_error {a.total_error!r} != recomputed {report.recomputed_error!r}")
    return report
