"""Synthetic spin-system datasets with planted ground truth, and scoring.

For every residue the generator draws a "true" Cα/Cβ pair from the reference
distribution of its type. Each non-proline position then yields one spin
system whose intra shifts are that truth plus measurement noise, and whose
preceding-residue shifts are the previous residue's truth plus independent
noise (the two are measured in different experiments).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import (
    AMINO_ACIDS,
    CARBON_SHIFT_WINDOW,
    Assignment,
    ProteinSequence,
    ReferenceStats,
    SpinSystem,
)

COLLISION_GATE = 0.5  # ppm; the default schedule's loosest link gate
DECIMALS = 3


@dataclass(frozen=True)
class GeneratorConfig:
    noise_sigma: float = 0.0
    missing_prob: float = 0.0
    seed: int = 0
    strict: bool = False
    collision_gate: float = COLLISION_GATE

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0 <= self.missing_prob < 1:
            raise ValueError("missing_prob must be in [0, 1)")


@dataclass(frozen=True)
class GroundTruth:
    mapping: dict[int, str]
    config: GeneratorConfig = field(default_factory=GeneratorConfig)
    # true (Cα, Cβ) per position, Cβ None for glycine
    shifts: tuple[tuple[float, Optional[float]], ...] = ()

    def echo(self) -> dict:
        return asdict(self.config)


@dataclass(frozen=True)
class EvaluationReport:
    n_positions: int
    n_detectable: int
    n_assigned: int
    n_correct: int
    accuracy: float
    total_error_pred: Optional[float] = None
    total_error_truth: Optional[float] = None


def random_sequence(length: int, rng: np.random.Generator) -> ProteinSequence:
    """Uniform random sequence over the 20 standard residues."""
    return ProteinSequence(tuple(rng.choice(list(AMINO_ACIDS), size=length)))


def _draw(res: str, stats: ReferenceStats, rng) -> tuple[float, Optional[float]]:
    st = stats[res]
    lo, hi = CARBON_SHIFT_WINDOW
    ca = float(np.clip(rng.normal(st.ca_mean, st.ca_sd), lo, hi))
    if res == "G":
        return round(ca, DECIMALS), None
    cb = float(np.clip(rng.normal(st.cb_mean, st.cb_sd), lo, hi))
    return round(ca, DECIMALS), round(cb, DECIMALS)


def _collides(a, b, gate: float) -> bool:
    diffs = [abs(x - y) for x, y in zip(a, b) if x is not None and y is not None]
    return max(diffs) <= gate


def _draw_truth(seq: ProteinSequence, stats: ReferenceStats, rng, certify: bool,
                gate: float, max_rounds: int = 10_000):
    truth = [_draw(r, stats, rng) for r in seq]
    if not certify:
        return truth
    for _ in range(max_rounds):
        clash = next(((i, j) for j in range(len(truth)) for i in range(j)
                      if _collides(truth[i], truth[j], gate)), None)
        if clash is None:
            return truth
        j = clash[1]
        truth[j] = _draw(seq[j], stats, rng)
    raise RuntimeError("could not draw collision-free shifts; lower the collision gate")


def generate_dataset(seq: ProteinSequence, stats: ReferenceStats,
                     cfg: GeneratorConfig = GeneratorConfig()
                     ) -> tuple[list[SpinSystem], GroundTruth]:
    """Simulate a spin-system table for ``seq``; spins are returned sorted by id.

    With zero noise and no dropout the true shifts are redrawn until no two
    positions agree within ``cfg.collision_gate`` ppm on every shared
    dimension, which rules out accidental links at any default tolerance.
    """
    rng = np.random.default_rng(cfg.seed)
    certify = cfg.noise_sigma == 0 and cfg.missing_prob == 0
    truth = _draw_truth(seq, stats, rng, certify, cfg.collision_gate)

    def noisy(x):
        if x is None:
            return None
        if cfg.noise_sigma > 0:
            lo, hi = CARBON_SHIFT_WINDOW
            x = float(np.clip(x + rng.normal(0.0, cfg.noise_sigma), lo, hi))
        return round(x, DECIMALS)

    positions = [i for i, r in enumerate(seq) if r != "P"]
    raw = []
    for i in positions:
        ca_i, cb_i = noisy(truth[i][0]), noisy(truth[i][1])
        if i == 0 or (cfg.strict and seq[i - 1] == "P"):
            ca_prev = cb_prev = None
        else:
            ca_prev, cb_prev = noisy(truth[i - 1][0]), noisy(truth[i - 1][1])
        fields = [ca_i, cb_i, ca_prev, cb_prev]
        if cfg.missing_prob > 0:
            drop = rng.random(4) < cfg.missing_prob
            kept = [None if d else v for v, d in zip(fields, drop)]
            if all(v is None for v in kept):
                # keep the first observable field so the spin system exists
                first = next(k for k, v in enumerate(fields) if v is not None)
                kept[first] = fields[first]
            fields = kept
        raw.append(fields)

    width = max(3, len(str(len(positions))))
    labels = [f"ss{k + 1:0{width}d}" for k in range(len(positions))]
    perm = rng.permutation(len(positions))
    spins = []
    mapping = {}
    for slot, (i, fields) in enumerate(zip(positions, raw)):
        sid = labels[int(perm[slot])]
        mapping[i] = sid
        spins.append(SpinSystem(sid, *fields))
    spins.sort(key=lambda s: s.id)
    return spins, GroundTruth(mapping, cfg, tuple(truth))


def truth_assignment(truth: GroundTruth) -> Assignment:
    return Assignment(dict(truth.mapping))


def evaluate_assignment(pred: Assignment, truth: GroundTruth,
                        spins: Optional[Sequence[SpinSystem]] = None,
                        seq: Optional[ProteinSequence] = None, cfg=None,
                        stats: Optional[ReferenceStats] = None,
                        n_positions: Optional[int] = None) -> EvaluationReport:
    """Position-wise accuracy of ``pred`` over the detectable positions.

    When ``spins`` and ``seq`` are supplied the report also carries the total
    error of the prediction and of the ground truth under ``cfg`` (bundled
    reference statistics unless ``stats`` is given).
    """
    known = set(truth.mapping.values())
    stray = sorted(sid for sid in pred.mapping.values() if sid not in known)
    if stray:
        raise ValueError(f"prediction uses spin systems absent from the dataset: {stray}")
    n_correct = sum(1 for pos, sid in pred.mapping.items() if truth.mapping.get(pos) == sid)
    n_det = len(truth.mapping)
    err_pred = err_truth = None
    if spins is not None and seq is not None:
        from .model import ScoringConfig
        from .validation import recompute_total_error

        cfg = cfg or ScoringConfig()
        if stats is None and cfg.type_weight > 0:
            from .ingest import default_reference_stats

            stats = default_reference_stats()
        by_id = {s.id: s for s in spins}
        err_pred = recompute_total_error(pred, by_id, seq, cfg, stats)
        ref = Assignment(dict(truth.mapping))
        err_truth = recompute_total_error(ref, by_id, seq, cfg, stats)
        n_positions = len(seq)
    if n_positions is None:
        n_positions = (max(truth.mapping) + 1) if truth.mapping else 0
    accuracy = n_correct / n_det if n_det else (1.0 if not pred.mapping else 0.0)
    if not math.isfinite(accuracy):
        accuracy = 0.0
    return EvaluationReport(n_positions, n_det, len(pred.mapping), n_correct, accuracy,
                            err_pred, err_truth)
