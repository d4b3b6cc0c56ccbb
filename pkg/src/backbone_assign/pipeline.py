"""End-to-end assignment: anchors, anchor matching, then chain assembly."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .linking import AnchorMatch, match_anchors
from .model import (
    AnchorSubset,
    Assignment,
    ProteinSequence,
    Pseudoresidue,
    ReferenceStats,
    ScoringConfig,
    SpinSystem,
    ToleranceSchedule,
)
from .residue_typing import AnchorParams, candidate_types, find_anchor_subsets
from .search import (
    ASTAR_LIMIT,
    AssemblyProblem,
    AssemblyResult,
    astar_assemble,
    build_items,
    finalize_assignment,
    multi_start_greedy,
)

STRATEGIES = ("greedy", "astar")
CUTOFF = 9.0  # 3σ in every observed dimension


@dataclass(frozen=True)
class PipelineConfig:
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    anchors: AnchorParams = field(default_factory=AnchorParams)
    schedule: ToleranceSchedule = field(default_factory=ToleranceSchedule)
    cutoff: float = CUTOFF
    strategy: str = "greedy"
    astar_limit: int = ASTAR_LIMIT
    threads: int = 1

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class PipelineRun:
    subsets: list[AnchorSubset]
    anchors: AnchorMatch
    result: AssemblyResult
    assignment: Assignment
    mismatches: list[tuple[int, str, str]]

    def report(self, seq: ProteinSequence, strategy: str) -> dict:
        return {
            "strategy": strategy,
            "total_error": self.assignment.total_error,
            "n_positions": len(seq),
            "n_assigned": len(self.assignment.mapping),
            "n_unassigned_spins": len(self.assignment.unassigned),
            "start_item": self.result.start_item,
            "anchor_subsets": [
                {"pos": s.start_pos + 1, "residues": "".join(s.residues),
                 "uniqueness": s.uniqueness_score,
                 "matched_at_ppm": self.anchors.matched.get(s.start_pos)}
                for s in sorted(self.subsets, key=lambda s: s.start_pos)],
            "unmatched_subsets": [s.start_pos + 1 for s in self.anchors.unmatched],
            "pseudoresidues": [{"pos": p.anchor_pos + 1, "members": list(p.members)}
                               for p in self.anchors.pseudoresidues
                               if p.anchor_pos is not None],
            "type_mismatches": [{"pos": p + 1, "res": r, "spin_id": s}
                                for p, r, s in self.mismatches],
        }


def type_mismatches(a: Assignment, spins: Sequence[SpinSystem], seq: ProteinSequence,
                    stats: ReferenceStats, cutoff: float = CUTOFF,
                    p_miss: float = 1.0) -> list[tuple[int, str, str]]:
    """Assigned positions whose residue is not among the spin's candidate types."""
    by_id = {s.id: s for s in spins}
    out = []
    for pos, sid in a.mapping.items():
        spin = by_id[sid]
        if spin.has_intra and seq[pos] not in candidate_types(spin, stats, cutoff, p_miss):
            out.append((pos, seq[pos], sid))
    return out


def assign(seq: ProteinSequence, spins: Sequence[SpinSystem], stats: ReferenceStats,
           config: PipelineConfig = PipelineConfig(),
           fixed: Sequence[Pseudoresidue] = ()) -> PipelineRun:
    """Run anchor detection, anchor matching and assembly on one dataset.

    ``fixed`` are user-pinned pseudoresidues; their spins are withheld from
    anchor matching and anchor subsets overlapping them are skipped.
    """
    scoring = config.scoring
    fixed_spins = {m for p in fixed for m in p.members}
    fixed_pos = {p.anchor_pos + q for p in fixed if p.anchor_pos is not None
                 for q in range(len(p.members))}
    subsets = [s for s in find_anchor_subsets(seq, stats, config.anchors)
               if not fixed_pos.intersection(s.positions)]
    free = [s for s in spins if s.id not in fixed_spins]
    anchors = match_anchors(subsets, free, stats, config.schedule, config.cutoff,
                            scoring.sigma_link, scoring.p_miss, seq=seq, claimed=fixed_pos)

    items = build_items(spins, [*fixed, *anchors.pseudoresidues])
    problem = AssemblyProblem(items, seq, scoring, stats)
    if config.strategy == "astar":
        result = astar_assemble(problem, limit=config.astar_limit)
    else:
        result = multi_start_greedy(problem, threads=config.threads)
    assignment = finalize_assignment(result, seq)
    mismatches = type_mismatches(assignment, spins, seq, stats, config.cutoff, scoring.p_miss)
    return PipelineRun(subsets, anchors, result, assignment, mismatches)


def assign_dataset(seq, spins, stats, config: Optional[PipelineConfig] = None) -> Assignment:
    return assign(seq, spins, stats, config or PipelineConfig()).assignment
