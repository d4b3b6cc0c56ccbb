"""Command-line entry point: ``backbone-assign {assign,generate,evaluate}``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 infeasible
anchors, 4 problem too large for the A* strategy. Data goes to files or
stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .ingest import (
    ParseError,
    default_reference_stats,
    load_reference_stats,
    parse_anchors,
    parse_assignment,
    parse_sequence,
    parse_spin_table,
    parse_truth,
    write_assignment,
    write_sequence,
    write_spin_table,
    write_truth,
)
from .linking import build_pseudoresidue
from .model import ScoringConfig, ToleranceSchedule, spins_by_id
from .pipeline import CUTOFF, STRATEGIES, PipelineConfig, assign
from .residue_typing import U_GLY, AnchorParams
from .search import ASTAR_LIMIT, InfeasibleAnchorsError, SizeLimitError
from .synth import GeneratorConfig, GroundTruth, evaluate_assignment, generate_dataset, random_sequence

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ANCHORS = 3
EXIT_SIZE = 4

STATS_ENV = "BACKBONE_ASSIGN_STATS"

_S = ScoringConfig()
_A = AnchorParams()
_T = ToleranceSchedule()

DEFAULTS_TABLE = f"""\
default tunables:
  --cutoff            {CUTOFF:<8g} candidate-type score cutoff (σ-normalized squared)
  --min-uniqueness    {_A.min_uniqueness:<8g} residue types at or above this seed anchors
  --max-subset-len    {_A.max_len:<8d} longest anchor subset
  --max-subsets       {_A.max_subsets:<8d} anchor subsets tried
  --u-gly             {U_GLY:<8g} uniqueness bonus when one type lacks Cβ
  --schedule-start    {_T.start:<8g} first link tolerance (ppm)
  --schedule-step     {_T.step:<8g} tolerance increment (ppm)
  --schedule-max      {_T.max:<8g} last link tolerance (ppm)
  --sigma-link        {_S.sigma_link:<8g} link-error σ (ppm)
  --break-penalty     {_S.break_penalty:<8g} cost of a chain break or gap
  --unplaced-penalty  {_S.unplaced_penalty:<8g} cost per unplaced spin system
  --type-weight       {_S.type_weight:<8g} weight of the residue-type term
  --p-miss            {_S.p_miss:<8g} type penalty for a missing Cβ
  --tie-margin        {_S.tie_margin:<8g} greedy near-tie margin
  --strategy          greedy   greedy or astar
  --astar-limit       {ASTAR_LIMIT:<8d} largest item count A* accepts
  --threads           1        greedy worker threads

The reference statistics default to the bundled table; set {STATS_ENV}
or pass --stats to use another file.
"""


# -- helpers ------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(exc.strerror or "cannot read file", path) from None
    except UnicodeDecodeError:
        raise ParseError("not UTF-8 text", path) from None


def _sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _stats_path(args) -> Optional[str]:
    return args.stats or os.environ.get(STATS_ENV) or None


def _load_stats(args):
    path = _stats_path(args)
    if path is None:
        return default_reference_stats()
    return load_reference_stats(_read(path), source=path)


def _jsonable(x):
    # JSON has no inf/nan; write them as strings
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(out: Path, name: str, text: str) -> None:
    # newline="" keeps LF endings on every platform
    with open(out / name, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _scoring(args) -> ScoringConfig:
    return ScoringConfig(
        sigma_link=args.sigma_link, break_penalty=args.break_penalty,
        unplaced_penalty=args.unplaced_penalty, type_weight=args.type_weight,
        p_miss=args.p_miss, tie_margin=args.tie_margin)


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        scoring=_scoring(args),
        anchors=AnchorParams(args.min_uniqueness, args.max_subset_len, args.max_subsets,
                             args.u_gly),
        schedule=ToleranceSchedule(args.schedule_start, args.schedule_step, args.schedule_max),
        cutoff=args.cutoff, strategy=args.strategy, astar_limit=args.astar_limit,
        threads=args.threads)


def _input_record(path: Optional[str]) -> Optional[dict]:
    if path is None:
        return None
    return {"path": path, "sha256": _sha256(path)}


# -- subcommands --------------------------------------------------------------

def cmd_assign(args) -> int:
    seq = parse_sequence(_read(args.sequence), source=args.sequence)
    spins = parse_spin_table(_read(args.spins), source=args.spins)
    stats = _load_stats(args)
    config = _pipeline_config(args)

    fixed = []
    if args.anchors:
        by_id = spins_by_id(spins)
        used: dict[str, int] = {}
        for pos, members in parse_anchors(_read(args.anchors), source=args.anchors):
            for m in members:
                if m not in by_id:
                    raise ParseError(f"unknown spin system {m!r}", args.anchors)
                if m in used:
                    raise InfeasibleAnchorsError(
                        f"spin system {m!r} pinned at positions {used[m] + 1} and {pos + 1}")
                used[m] = pos
            try:
                fixed.append(build_pseudoresidue(members, by_id, pos, config.scoring.sigma_link))
            except ValueError as exc:
                raise InfeasibleAnchorsError(str(exc)) from None

    run = assign(seq, spins, stats, config, fixed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "assignment.tsv", write_assignment(run.assignment, seq, spins, config.scoring))
    _write(out, "report.json", _dump(run.report(seq, config.strategy)))
    _write(out, "run.json", _dump({
        "tool": "backbone-assign",
        "version": __version__,
        "subcommand": "assign",
        "inputs": {
            "sequence": _input_record(args.sequence),
            "spins": _input_record(args.spins),
            "stats": _input_record(_stats_path(args)) or {"path": "<bundled>"},
            "anchors": _input_record(args.anchors),
        },
        "config": config.as_dict(),
    }))
    print(f"assigned {len(run.assignment.mapping)}/{len(seq)} positions, "
          f"total error {run.assignment.total_error:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_generate(args) -> int:
    stats = _load_stats(args)
    if args.sequence:
        seq = parse_sequence(_read(args.sequence), source=args.sequence)
    else:
        # separate stream from the shift generator, which is seeded with the bare seed
        seq = random_sequence(args.length, np.random.default_rng([args.seed, 1]))
    cfg = GeneratorConfig(args.noise_sigma, args.missing_prob, args.seed, args.strict)
    spins, truth = generate_dataset(seq, stats, cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "sequence.fasta", write_sequence(seq, header=f"synthetic seed={args.seed}"))
    _write(out, "spins.tsv", write_spin_table(spins))
    _write(out, "truth.tsv", write_truth(truth.mapping, seq))
    _write(out, "config.json", _dump({
        "tool": "backbone-assign",
        "version": __version__,
        "subcommand": "generate",
        "generator": asdict(cfg),
        "length": len(seq),
        "sequence": _input_record(args.sequence) or {"random": True},
        "stats": _input_record(_stats_path(args)) or {"path": "<bundled>"},
    }))
    print(f"generated {len(spins)} spin systems for {len(seq)} residues", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    seq = parse_sequence(_read(args.sequence), source=args.sequence) if args.sequence else None
    pred = parse_assignment(_read(args.assignment), seq, source=args.assignment)
    truth = GroundTruth(parse_truth(_read(args.truth), source=args.truth))
    spins = parse_spin_table(_read(args.spins), source=args.spins) if args.spins else None
    if spins is not None and seq is None:
        raise ParseError("--spins needs --sequence to score total error", args.spins)
    stats = _load_stats(args) if spins is not None else None
    try:
        report = evaluate_assignment(pred, truth, spins, seq, _scoring(args), stats,
                                     n_positions=len(seq) if seq else None)
    except ValueError as exc:
        raise ParseError(str(exc), args.assignment) from None
    sys.stdout.write(_dump(asdict(report)))
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------

def _add_stats(p) -> None:
    p.add_argument("--stats", help=f"reference statistics TSV (default: ${STATS_ENV} "
                                   "or the bundled table)")


def _add_scoring(p) -> None:
    g = p.add_argument_group("scoring")
    g.add_argument("--sigma-link", type=float, default=_S.sigma_link)
    g.add_argument("--break-penalty", type=float, default=_S.break_penalty)
    g.add_argument("--unplaced-penalty", type=float, default=_S.unplaced_penalty)
    g.add_argument("--type-weight", type=float, default=_S.type_weight)
    g.add_argument("--p-miss", type=float, default=_S.p_miss)
    g.add_argument("--tie-margin", type=float, default=_S.tie_margin)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    ap = argparse.ArgumentParser(
        prog="backbone-assign", formatter_class=fmt, epilog=DEFAULTS_TABLE,
        description="Sequential backbone assignment from Cα/Cβ spin systems.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("assign", formatter_class=fmt, epilog=DEFAULTS_TABLE,
                        help="assign spin systems to sequence positions")
    pa.add_argument("--sequence", required=True, help="FASTA-like sequence file")
    pa.add_argument("--spins", required=True, help="spin-system TSV")
    pa.add_argument("--out", required=True, help="output directory")
    pa.add_argument("--anchors", help="TSV of spin runs to pin (pos, spin_ids)")
    _add_stats(pa)
    g = pa.add_argument_group("anchors and linking")
    g.add_argument("--cutoff", type=float, default=CUTOFF)
    g.add_argument("--min-uniqueness", type=float, default=_A.min_uniqueness)
    g.add_argument("--max-subset-len", type=int, default=_A.max_len)
    g.add_argument("--max-subsets", type=int, default=_A.max_subsets)
    g.add_argument("--u-gly", type=float, default=U_GLY)
    g.add_argument("--schedule-start", type=float, default=_T.start)
    g.add_argument("--schedule-step", type=float, default=_T.step)
    g.add_argument("--schedule-max", type=float, default=_T.max)
    _add_scoring(pa)
    g = pa.add_argument_group("search")
    g.add_argument("--strategy", choices=STRATEGIES, default="greedy")
    g.add_argument("--astar-limit", type=int, default=ASTAR_LIMIT)
    g.add_argument("--threads", type=int, default=1)
    pa.set_defaults(func=cmd_assign)

    pg = sub.add_parser("generate", help="simulate a spin table with known truth")
    src = pg.add_mutually_exclusive_group(required=True)
    src.add_argument("--sequence", help="FASTA-like sequence file")
    src.add_argument("--length", type=int, help="draw a random sequence of this length")
    pg.add_argument("--out", required=True, help="output directory")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--noise-sigma", type=float, default=0.0, help="ppm")
    pg.add_argument("--missing-prob", type=float, default=0.0)
    pg.add_argument("--strict", action="store_true",
                    help="drop preceding-residue shifts after a proline")
    _add_stats(pg)
    pg.set_defaults(func=cmd_generate)

    pe = sub.add_parser("evaluate", help="score an assignment against ground truth")
    pe.add_argument("--assignment", required=True, help="assignment TSV")
    pe.add_argument("--truth", required=True, help="truth TSV")
    pe.add_argument("--sequence", help="sequence file (checks residues, enables error totals)")
    pe.add_argument("--spins", help="spin-system TSV (with --sequence: report total errors)")
    _add_stats(pe)
    _add_scoring(pe)
    pe.set_defaults(func=cmd_evaluate)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "length", None) is not None and args.length < 2:
        ap.error("--length must be at least 2")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleAnchorsError as exc:
        print(f"error: infeasible anchors: {exc}", file=sys.stderr)
        return EXIT_ANCHORS
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ValueError as exc:
        # bad flag values rejected by the config types
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
