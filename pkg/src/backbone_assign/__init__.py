"""Automated sequential assignment of protein backbone NMR spin systems.

Three steps: find sequence stretches whose residue types stand out by their
Cα/Cβ shifts (anchor subsets), match spin-system chains to them under rising
link tolerances, then order everything along the sequence by multi-start
greedy search (or A* for small problems).
"""

__version__ = "0.1.0"

from .ingest import (
    ParseError,
    default_reference_stats,
    load_reference_stats,
    parse_anchors,
    parse_assignment,
    parse_sequence,
    parse_spin_table,
    parse_truth,
    write_anchors,
    write_assignment,
    write_reference_stats,
    write_sequence,
    write_spin_table,
    write_truth,
)
from .linking import AnchorMatch, build_pseudoresidue, enumerate_links, link_error, match_anchors
from .model import (
    AnchorSubset,
    Assignment,
    ProteinSequence,
    Pseudoresidue,
    ReferenceStats,
    ResidueStats,
    ScoringConfig,
    SpinSystem,
    ToleranceSchedule,
)
from .pipeline import PipelineConfig, PipelineRun, assign, assign_dataset
from .residue_typing import (
    AnchorParams,
    candidate_types,
    find_anchor_subsets,
    residue_uniqueness,
    type_score,
)
from .search import (
    AssemblyProblem,
    AssemblyResult,
    ChainItem,
    InfeasibleAnchorsError,
    SizeLimitError,
    astar_assemble,
    build_items,
    exhaustive_oracle,
    finalize_assignment,
    greedy_assemble,
    multi_start_greedy,
    polish_chain,
)
from .synth import (
    EvaluationReport,
    GeneratorConfig,
    GroundTruth,
    evaluate_assignment,
    generate_dataset,
    random_sequence,
)
from .validation import ValidationReport, validate_assignment
