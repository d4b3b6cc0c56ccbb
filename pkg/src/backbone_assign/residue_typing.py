"""Residue-type scoring of spin systems and anchor-subset detection.

Scores are σ-normalized squared deviations from the per-type reference means,
averaged over the dimensions that were observed, so lower is better and a
1σ miss in every dimension scores 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

from .model import AMINO_ACIDS, AnchorSubset, ProteinSequence, ReferenceStats, SpinSystem

P_MISS = 1.0
U_GLY = 3.0


class TypeScore(NamedTuple):
    residue: str
    score: float


@dataclass(frozen=True)
class AnchorParams:
    min_uniqueness: float = 2.0
    max_len: int = 4
    max_subsets: int = 16
    u_gly: float = U_GLY

    def __post_init__(self):
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.max_subsets < 0:
            raise ValueError("max_subsets must be >= 0")


def shift_pair_score(ca: Optional[float], cb: Optional[float], res: str,
                     stats: ReferenceStats, p_miss: float = P_MISS) -> float:
    """Type score of a bare (Cα, Cβ) observation; at least one must be given."""
    if ca is None and cb is None:
        raise ValueError("no shifts to score")
    st = stats[res]
    if res == "G":
        # glycine has no β-carbon: a Cβ observation rules it out
        if cb is not None or ca is None:
            return math.inf
        return ((ca - st.ca_mean) / st.ca_sd) ** 2
    terms = []
    if ca is not None:
        terms.append(((ca - st.ca_mean) / st.ca_sd) ** 2)
    if cb is not None:
        terms.append(((cb - st.cb_mean) / st.cb_sd) ** 2)
    elif terms:
        terms[0] += p_miss
    return sum(terms) / len(terms)


def type_score(spin: SpinSystem, res: str, stats: ReferenceStats,
               p_miss: float = P_MISS) -> TypeScore:
    if not spin.has_intra:
        raise ValueError(f"spin system {spin.id!r} has no intra-residue shifts to type")
    return TypeScore(res, shift_pair_score(spin.ca_i, spin.cb_i, res, stats, p_miss))


def candidate_types(spin: SpinSystem, stats: ReferenceStats, cutoff: float,
                    p_miss: float = P_MISS) -> tuple[str, ...]:
    """Residue codes scoring at most ``cutoff``, best first (ties alphabetical)."""
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    if not spin.has_intra:
        return ()
    scored = [type_score(spin, aa, stats, p_miss) for aa in AMINO_ACIDS]
    keep = sorted((s.score, s.residue) for s in scored if s.score <= cutoff)
    return tuple(res for _, res in keep)


def _pair_separation(a: str, b: str, stats: ReferenceStats, u_gly: float) -> float:
    sa, sb = stats[a], stats[b]
    d2 = (sa.ca_mean - sb.ca_mean) ** 2 / ((sa.ca_sd ** 2 + sb.ca_sd ** 2) / 2)
    if sa.cb_mean is not None and sb.cb_mean is not None:
        d2 += (sa.cb_mean - sb.cb_mean) ** 2 / ((sa.cb_sd ** 2 + sb.cb_sd ** 2) / 2)
        return math.sqrt(d2)
    # one side lacks Cβ altogether: categorically different
    return math.sqrt(d2) + u_gly


def residue_uniqueness(res: str, stats: ReferenceStats, u_gly: float = U_GLY) -> float:
    """Separation of ``res`` from its nearest other residue type.

    Proline returns -inf: it has no amide proton, so it never shows up as a
    spin system and cannot anchor anything.
    """
    if res == "P":
        return -math.inf
    return min(_pair_separation(res, other, stats, u_gly)
               for other in AMINO_ACIDS if other != res)


def uniqueness_table(stats: ReferenceStats, u_gly: float = U_GLY) -> dict[str, float]:
    return _uniqueness_table_cached(stats, u_gly)


@lru_cache(maxsize=32)
def _uniqueness_table_cached(stats: ReferenceStats, u_gly: float) -> dict[str, float]:
    return {aa: residue_uniqueness(aa, stats, u_gly) for aa in AMINO_ACIDS}


def find_anchor_subsets(seq: ProteinSequence, stats: ReferenceStats,
                        params: AnchorParams = AnchorParams()) -> list[AnchorSubset]:
    """Maximal runs of highly unique residues, best-scoring first."""
    uniq = uniqueness_table(stats, params.u_gly)
    runs: list[tuple[int, int]] = []
    start = None
    for pos, res in enumerate(seq):
        if uniq[res] >= params.min_uniqueness:
            if start is None:
                start = pos
        elif start is not None:
            runs.append((start, pos))
            start = None
    if start is not None:
        runs.append((start, len(seq)))

    subsets = []
    for lo, hi in runs:
        hi = min(hi, lo + params.max_len)
        residues = tuple(seq[lo:hi])
        subsets.append(AnchorSubset(lo, residues, sum(uniq[r] for r in residues)))
    subsets.sort(key=lambda s: (-s.uniqueness_score, s.start_pos))
    return subsets[:params.max_subsets]
