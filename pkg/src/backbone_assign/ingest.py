"""Readers and writers for the plain-text formats used by the package.

Formats
-------
sequence      FASTA-like; ``>`` header lines are skipped, letters concatenated.
spin table    TSV, header ``id ca_i cb_i ca_prev cb_prev`` plus optional
              passthrough columns; ``.`` marks a missing value.
stats         TSV, header ``res ca_mean ca_sd cb_mean cb_sd``; glycine has
              ``.`` in both Cβ columns.
assignment    TSV ``pos res spin_id link_error_to_next`` with 1-based ``pos``.
truth         TSV ``pos res spin_id``.
anchors       TSV ``pos spin_ids``; a run of spins pinned from 1-based ``pos``
              on, ids joined by ``+``.

All writers emit LF line endings and are deterministic.
"""

from __future__ import annotations

import math
import re
from importlib import resources
from typing import Iterable, Optional, Sequence

from .model import (
    AMINO_ACIDS,
    CARBON_SHIFT_WINDOW,
    Assignment,
    ProteinSequence,
    ReferenceStats,
    ResidueStats,
    ScoringConfig,
    SpinSystem,
    is_residue_code,
    spins_by_id,
)

MISSING = "."
SPIN_COLUMNS = ("id", "ca_i", "cb_i", "ca_prev", "cb_prev")
STATS_COLUMNS = ("res", "ca_mean", "ca_sd", "cb_mean", "cb_sd")
ASSIGNMENT_COLUMNS = ("pos", "res", "spin_id", "link_error_to_next")

# Deliberately stricter than float(): no locale commas, no "nan"/"inf", no "1_0".
_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?\Z")


class ParseError(ValueError):
    """Malformed input; carries the source name, line and column when known."""

    def __init__(self, message: str, source: str = "<text>", line: Optional[int] = None,
                 column: Optional[int] = None):
        self.source = source
        self.line = line
        self.column = column
        where = source
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")


def format_number(x: float) -> str:
    # repr gives the shortest string that parses back to the same float
    return repr(float(x))


def parse_number(cell: str, source: str = "<text>", line=None, column=None) -> float:
    if not _NUMBER.match(cell):
        raise ParseError(f"not a number: {cell!r}", source, line, column)
    return float(cell)


def _lines(text: str) -> list[str]:
    return text.replace("\r\n", "\n").replace("\r", "\n").split("\n")


# -- sequence -----------------------------------------------------------------

def parse_sequence(text: str, source: str = "<sequence>") -> ProteinSequence:
    residues: list[str] = []
    for lineno, line in enumerate(_lines(text), start=1):
        if line.startswith(">"):
            continue
        for col, ch in enumerate(line, start=1):
            if ch.isspace():
                continue
            up = ch.upper()
            if not is_residue_code(up):
                raise ParseError(f"unknown residue letter {ch!r}", source, lineno, col)
            residues.append(up)
    if not residues:
        raise ParseError("empty sequence", source)
    if len(residues) < 2:
        raise ParseError("sequence must have at least 2 residues", source)
    return ProteinSequence(tuple(residues))


def write_sequence(seq: ProteinSequence, header: str = "sequence", width: int = 60) -> str:
    s = str(seq)
    body = "\n".join(s[i:i + width] for i in range(0, len(s), width))
    return f">{header}\n{body}\n"


# -- spin table ---------------------------------------------------------------

def _shift_cell(cell: str, name: str, source: str, line: int, col: int) -> Optional[float]:
    if cell == MISSING:
        return None
    value = parse_number(cell, source, line, col)
    lo, hi = CARBON_SHIFT_WINDOW
    if not lo <= value <= hi:
        raise ParseError(f"{name} = {cell} ppm is outside the carbon window [{lo:g}, {hi:g}]",
                         source, line, col)
    return value


def _header(lines: list[str], required: Sequence[str], source: str) -> tuple[int, list[str]]:
    for lineno, line in enumerate(lines, start=1):
        if line.strip() == "" or line.startswith("#"):
            continue
        cols = line.split("\t")
        if tuple(cols[:len(required)]) != tuple(required):
            raise ParseError(
                f"expected header starting with {' '.join(required)!r}, got {line!r}",
                source, lineno)
        if len(set(cols)) != len(cols):
            raise ParseError("duplicate column name in header", source, lineno)
        return lineno, cols
    raise ParseError("missing header", source)


def parse_spin_table(text: str, source: str = "<spins>") -> list[SpinSystem]:
    lines = _lines(text)
    header_line, cols = _header(lines, SPIN_COLUMNS, source)
    extra_names = cols[len(SPIN_COLUMNS):]
    spins: list[SpinSystem] = []
    seen: dict[str, int] = {}
    for lineno in range(header_line + 1, len(lines) + 1):
        line = lines[lineno - 1]
        if line.strip() == "" or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != len(cols):
            raise ParseError(f"expected {len(cols)} columns, found {len(cells)}", source, lineno)
        sid = cells[0]
        if not sid or sid == MISSING:
            raise ParseError("empty spin system id", source, lineno, 1)
        if sid in seen:
            raise ParseError(f"duplicate id {sid!r} (first seen on line {seen[sid]})",
                             source, lineno, 1)
        seen[sid] = lineno
        values = [_shift_cell(cells[k], SPIN_COLUMNS[k], source, lineno, k + 1)
                  for k in range(1, 5)]
        if all(v is None for v in values):
            raise ParseError(f"spin system {sid!r} has no observable shifts", source, lineno)
        extra = tuple(zip(extra_names, cells[len(SPIN_COLUMNS):]))
        spins.append(SpinSystem(sid, *values, extra=extra))
    return spins


def _check_cell(text: str, what: str) -> None:
    if any(ch in text for ch in "\t\r\n"):
        raise ValueError(f"{what} {text!r} contains a tab or line break")


def write_spin_table(spins: Iterable[SpinSystem]) -> str:
    spins = list(spins)
    extra_names = [name for name, _ in spins[0].extra] if spins else []
    for s in spins:
        if [name for name, _ in s.extra] != extra_names:
            raise ValueError("all spin systems must carry the same passthrough columns")
    for name in extra_names:
        _check_cell(name, "column name")
    out = ["\t".join([*SPIN_COLUMNS, *extra_names])]
    for s in spins:
        _check_cell(s.id, "spin system id")
        if s.id == MISSING or s.id.startswith("#"):
            raise ValueError(f"spin system id {s.id!r} would not read back")
        for _, value in s.extra:
            _check_cell(value, "passthrough value")
        cells = [s.id] + [MISSING if v is None else format_number(v) for v in s.shifts()]
        cells += [value for _, value in s.extra]
        out.append("\t".join(cells))
    return "\n".join(out) + "\n"


# -- reference statistics -----------------------------------------------------

def load_reference_stats(text: str, source: str = "<stats>") -> ReferenceStats:
    lines = _lines(text)
    header_line, cols = _header(lines, STATS_COLUMNS, source)
    table: dict[str, ResidueStats] = {}
    for lineno in range(header_line + 1, len(lines) + 1):
        line = lines[lineno - 1]
        if line.strip() == "" or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != len(STATS_COLUMNS):
            raise ParseError(f"expected {len(STATS_COLUMNS)} columns, found {len(cells)}",
                             source, lineno)
        res = cells[0].upper()
        if not is_residue_code(res):
            raise ParseError(f"unknown residue {cells[0]!r}", source, lineno, 1)
        if res in table:
            raise ParseError(f"duplicate residue {res}", source, lineno, 1)
        vals: list[Optional[float]] = []
        for k in range(1, 5):
            if cells[k] == MISSING:
                vals.append(None)
            else:
                vals.append(parse_number(cells[k], source, lineno, k + 1))
        ca_mean, ca_sd, cb_mean, cb_sd = vals
        if ca_mean is None or ca_sd is None:
            raise ParseError(f"Cα statistics missing for {res}", source, lineno)
        for name, sd in (("ca_sd", ca_sd), ("cb_sd", cb_sd)):
            if sd is not None and not sd > 0:
                raise ParseError(f"{name} for {res} must be > 0", source, lineno)
        if res == "G":
            if cb_mean is not None or cb_sd is not None:
                raise ParseError("glycine row must use '.' for the Cβ columns", source, lineno)
        elif cb_mean is None or cb_sd is None:
            raise ParseError(f"Cβ statistics missing for {res}", source, lineno)
        table[res] = ResidueStats(ca_mean, ca_sd, cb_mean, cb_sd)
    missing = [aa for aa in AMINO_ACIDS if aa not in table]
    if missing:
        raise ParseError(f"missing residue(s): {', '.join(missing)}", source)
    return ReferenceStats(table)


def write_reference_stats(stats: ReferenceStats) -> str:
    out = ["\t".join(STATS_COLUMNS)]
    for aa in AMINO_ACIDS:
        st = stats[aa]
        cells = [aa] + [MISSING if v is None else format_number(v)
                        for v in (st.ca_mean, st.ca_sd, st.cb_mean, st.cb_sd)]
        out.append("\t".join(cells))
    return "\n".join(out) + "\n"


def default_stats_text() -> str:
    return resources.files("backbone_assign").joinpath("data/reference_stats.tsv").read_text()


def default_reference_stats() -> ReferenceStats:
    return load_reference_stats(default_stats_text(), source="data/reference_stats.tsv")


# -- assignment ---------------------------------------------------------------

def write_assignment(a: Assignment, seq: ProteinSequence, spins: Sequence[SpinSystem] = (),
                     cfg: Optional[ScoringConfig] = None) -> str:
    """Serialize an assignment, one row per sequence position.

    ``link_error_to_next`` is filled when both this position and the next one
    are assigned and ``spins`` is given; otherwise it is ``.``.
    """
    from .linking import link_error

    cfg = cfg or ScoringConfig()
    by_id = spins_by_id(spins) if spins else {}
    out = ["\t".join(ASSIGNMENT_COLUMNS)]
    for pos, res in enumerate(seq):
        sid = a.mapping.get(pos)
        nxt = a.mapping.get(pos + 1)
        err = MISSING
        if sid is not None and nxt is not None and sid in by_id and nxt in by_id:
            le = link_error(by_id[sid], by_id[nxt], cfg.sigma_link)
            err = format_number(le.value) if math.isfinite(le.value) else "inf"
        out.append("\t".join([str(pos + 1), res, MISSING if sid is None else sid, err]))
    return "\n".join(out) + "\n"


def parse_assignment(text: str, seq: Optional[ProteinSequence] = None,
                     source: str = "<assignment>") -> Assignment:
    """Read an assignment TSV back into an :class:`Assignment` (error set to 0)."""
    lines = _lines(text)
    header_line, _ = _header(lines, ASSIGNMENT_COLUMNS, source)
    mapping: dict[int, str] = {}
    used: set[str] = set()
    for lineno in range(header_line + 1, len(lines) + 1):
        line = lines[lineno - 1]
        if line.strip() == "" or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != len(ASSIGNMENT_COLUMNS):
            raise ParseError(f"expected {len(ASSIGNMENT_COLUMNS)} columns", source, lineno)
        if not cells[0].isdigit() or int(cells[0]) < 1:
            raise ParseError(f"bad position {cells[0]!r}", source, lineno, 1)
        pos = int(cells[0]) - 1
        if seq is not None:
            if pos >= len(seq):
                raise ParseError(f"position {pos + 1} past sequence end", source, lineno, 1)
            if seq[pos] != cells[1]:
                raise ParseError(f"residue {cells[1]!r} does not match sequence", source,
                                 lineno, 2)
        sid = cells[2]
        if sid == MISSING:
            continue
        if sid in used:
            raise ParseError(f"spin system {sid!r} assigned twice", source, lineno, 3)
        used.add(sid)
        mapping[pos] = sid
    return Assignment(mapping)


def write_truth(mapping: dict[int, str], seq: ProteinSequence) -> str:
    out = ["pos\tres\tspin_id"]
    for pos in sorted(mapping):
        out.append(f"{pos + 1}\t{seq[pos]}\t{mapping[pos]}")
    return "\n".join(out) + "\n"


def parse_truth(text: str, source: str = "<truth>") -> dict[int, str]:
    lines = _lines(text)
    header_line, _ = _header(lines, ("pos", "res", "spin_id"), source)
    mapping: dict[int, str] = {}
    for lineno in range(header_line + 1, len(lines) + 1):
        line = lines[lineno - 1]
        if line.strip() == "" or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != 3 or not cells[0].isdigit() or int(cells[0]) < 1:
            raise ParseError("malformed truth row", source, lineno)
        pos = int(cells[0]) - 1
        if pos in mapping:
            raise ParseError(f"position {pos + 1} listed twice", source, lineno, 1)
        mapping[pos] = cells[2]
    return mapping


# -- pinned anchors -----------------------------------------------------------

ANCHOR_COLUMNS = ("pos", "spin_ids")


def parse_anchors(text: str, source: str = "<anchors>") -> list[tuple[int, tuple[str, ...]]]:
    """Read user-pinned runs as ``(0-based start, member ids)`` pairs."""
    lines = _lines(text)
    header_line, _ = _header(lines, ANCHOR_COLUMNS, source)
    out = []
    for lineno in range(header_line + 1, len(lines) + 1):
        line = lines[lineno - 1]
        if line.strip() == "" or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != 2:
            raise ParseError("expected 2 columns", source, lineno)
        if not cells[0].isdigit() or int(cells[0]) < 1:
            raise ParseError(f"bad position {cells[0]!r}", source, lineno, 1)
        members = tuple(cells[1].split("+"))
        if any(not m or m == MISSING for m in members):
            raise ParseError(f"bad spin id list {cells[1]!r}", source, lineno, 2)
        out.append((int(cells[0]) - 1, members))
    return out


def write_anchors(anchors: Iterable[tuple[int, Sequence[str]]]) -> str:
    out = ["\t".join(ANCHOR_COLUMNS)]
    for pos, members in anchors:
        out.append(f"{pos + 1}\t{'+'.join(members)}")
    return "\n".join(out) + "\n"
