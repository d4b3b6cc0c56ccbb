"""Domain types shared by the rest of the package.

All types are frozen dataclasses; nothing here does I/O. Shifts are plain
floats in ppm and a missing shift is ``None``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

#: The 20 standard one-letter residue codes, in the conventional order.
AMINO_ACIDS = "ARNDCQEGHILKMFPSTWYV"
_AA_SET = frozenset(AMINO_ACIDS)

CARBON_SHIFT_WINDOW = (0.0, 100.0)

Shift = Optional[float]


def is_residue_code(code: str) -> bool:
    return code in _AA_SET


@dataclass(frozen=True)
class ProteinSequence:
    """Ordered residue codes; positions are 0-based."""

    residues: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "residues", tuple(self.residues))
        bad = [r for r in self.residues if r not in _AA_SET]
        if bad:
            raise ValueError(f"unknown residue code(s): {''.join(sorted(set(bad)))}")
        if len(self.residues) < 2:
            raise ValueError("a protein sequence needs at least 2 residues")

    @classmethod
    def from_string(cls, text: str) -> "ProteinSequence":
        return cls(tuple(text.strip().upper()))

    def __len__(self) -> int:
        return len(self.residues)

    def __getitem__(self, i):
        return self.residues[i]

    def __iter__(self) -> Iterator[str]:
        return iter(self.residues)

    def __str__(self) -> str:
        return "".join(self.residues)


@dataclass(frozen=True)
class SpinSystem:
    """One observed backbone unit.

    ``ca_i``/``cb_i`` are the intra-residue shifts, ``ca_prev``/``cb_prev``
    the shifts of the preceding residue seen through the same amide.
    ``extra`` carries passthrough columns (e.g. H/N) as ``(name, text)`` pairs.
    """

    id: str
    ca_i: Shift = None
    cb_i: Shift = None
    ca_prev: Shift = None
    cb_prev: Shift = None
    extra: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("spin system id must be non-empty")
        if all(v is None for v in self.shifts()):
            raise ValueError(f"spin system {self.id!r} has no observable shifts")
        for v in self.shifts():
            if v is not None and not math.isfinite(v):
                raise ValueError(f"spin system {self.id!r} has a non-finite shift")

    def shifts(self) -> tuple[Shift, Shift, Shift, Shift]:
        return (self.ca_i, self.cb_i, self.ca_prev, self.cb_prev)

    @property
    def has_intra(self) -> bool:
        return self.ca_i is not None or self.cb_i is not None

    # Linkable-unit interface shared with Pseudoresidue.
    @property
    def front_ca_prev(self) -> Shift:
        return self.ca_prev

    @property
    def front_cb_prev(self) -> Shift:
        return self.cb_prev

    @property
    def back_ca_i(self) -> Shift:
        return self.ca_i

    @property
    def back_cb_i(self) -> Shift:
        return self.cb_i


@dataclass(frozen=True)
class ResidueStats:
    ca_mean: float
    ca_sd: float
    cb_mean: Optional[float] = None
    cb_sd: Optional[float] = None


@dataclass(frozen=True)
class ReferenceStats:
    """Per-residue-type mean and standard deviation of the Cα and Cβ shifts."""

    table: Mapping[str, ResidueStats]

    def __post_init__(self):
        missing = [aa for aa in AMINO_ACIDS if aa not in self.table]
        if missing:
            raise ValueError(f"reference stats missing residue(s): {','.join(missing)}")
        extra = [k for k in self.table if k not in _AA_SET]
        if extra:
            raise ValueError(f"reference stats has unknown residue(s): {','.join(extra)}")
        for aa, st in self.table.items():
            if not st.ca_sd > 0:
                raise ValueError(f"reference stats: ca_sd for {aa} must be > 0")
            if aa == "G":
                if st.cb_mean is not None or st.cb_sd is not None:
                    raise ValueError("reference stats: glycine has no Cβ entry")
            else:
                if st.cb_mean is None or st.cb_sd is None:
                    raise ValueError(f"reference stats: Cβ statistics missing for {aa}")
                if not st.cb_sd > 0:
                    raise ValueError(f"reference stats: cb_sd for {aa} must be > 0")
        # freeze in canonical order
        object.__setattr__(self, "table", {aa: self.table[aa] for aa in AMINO_ACIDS})

    def __getitem__(self, res: str) -> ResidueStats:
        return self.table[res]

    def __eq__(self, other):
        if not isinstance(other, ReferenceStats):
            return NotImplemented
        return dict(self.table) == dict(other.table)

    def __hash__(self):
        return hash(tuple(self.table.items()))


@dataclass(frozen=True)
class ToleranceSchedule:
    """Rising ppm gates: start, start+step, ... clamped to and ending at max."""

    start: float = 0.05
    step: float = 0.05
    max: float = 0.5

    def __post_init__(self):
        if not (0 < self.start <= self.max):
            raise ValueError("tolerance schedule needs 0 < start <= max")
        if not self.step > 0:
            raise ValueError("tolerance schedule needs step > 0")

    def values(self) -> list[float]:
        out = []
        k = 0
        while True:
            v = self.start + k * self.step
            if v >= self.max:
                out.append(self.max)
                return out
            out.append(v)
            k += 1


@dataclass(frozen=True)
class AnchorSubset:
    start_pos: int
    residues: tuple[str, ...]
    uniqueness_score: float

    @property
    def length(self) -> int:
        return len(self.residues)

    @property
    def positions(self) -> range:
        return range(self.start_pos, self.start_pos + len(self.residues))


@dataclass(frozen=True)
class Pseudoresidue:
    """A chain of spin systems that links like a single unit.

    Front shifts are the preceding-residue shifts of the first member, back
    shifts are the intra shifts of the last member.
    """

    members: tuple[str, ...]
    anchor_pos: Optional[int] = None
    front_ca_prev: Shift = None
    front_cb_prev: Shift = None
    back_ca_i: Shift = None
    back_cb_i: Shift = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("pseudoresidue needs at least one member")
        if len(set(self.members)) != len(self.members):
            raise ValueError("pseudoresidue members must be distinct")

    @property
    def id(self) -> str:
        return "+".join(self.members)

    @property
    def span(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class ScoringConfig:
    """Weights of the assembly cost model (σ-normalized squared units).

    ``type_weight`` scales a per-position residue-type term; at 0 the
    objective is the plain sum of link errors plus penalties.
    """

    sigma_link: float = 0.2
    break_penalty: float = 10.0
    unplaced_penalty: float = 10.0
    type_weight: float = 0.1
    p_miss: float = 1.0
    # greedy only: candidates within this margin of the best link are
    # compared by a short lookahead instead of by link error alone
    tie_margin: float = 1.0

    def __post_init__(self):
        if not self.sigma_link > 0:
            raise ValueError("sigma_link must be > 0")
        if min(self.break_penalty, self.unplaced_penalty, self.type_weight, self.tie_margin) < 0:
            raise ValueError("penalties and weights must be >= 0")


@dataclass(frozen=True)
class Assignment:
    """Partial map from sequence position to spin-system id."""

    mapping: Mapping[int, str]
    total_error: float = 0.0
    unassigned: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "mapping", dict(sorted(self.mapping.items())))
        object.__setattr__(self, "unassigned", frozenset(self.unassigned))

    def ordering(self) -> list[tuple[int, str]]:
        return list(self.mapping.items())

    def __hash__(self):
        return hash((tuple(self.mapping.items()), self.total_error, self.unassigned))


def spins_by_id(spins: Sequence[SpinSystem]) -> dict[str, SpinSystem]:
    out: dict[str, SpinSystem] = {}
    for s in spins:
        if s.id in out:
            raise ValueError(f"duplicate spin system id {s.id!r}")
        out[s.id] = s
    return out
