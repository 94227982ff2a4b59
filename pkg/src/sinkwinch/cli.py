"""Command-line front end.

Subcommands::

    sinkwinch solve --lengths 20,20,21,21 [--config PATH] [--format table|json|csv]
    sinkwinch batch --input cases.txt [--workers N]
    sinkwinch check-single --lengths 20,21,22,21.5
    sinkwinch even-tension [--grid N]

Exit status: 0 definite (or a successful report), 2 single-cable suspension,
1 infeasible or runtime error, 64 bad usage, 65 bad config, 66 unreadable input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

from sinkwinch.config import RunConfig, load_run_config
from sinkwinch.equal_length import delta_t_min_grid, even_tension, tension_family
from sinkwinch.errors import ConfigError, SinkwinchError
from sinkwinch.geometry import CableLengths
from sinkwinch.single_cable import is_single_cable_suspended
from sinkwinch.traversal import Definite, FkOutcome, SingleCableIndefinite, solve

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SINGLE_CABLE = 2
EXIT_USAGE = 64
EXIT_CONFIG = 65
EXIT_NO_INPUT = 66

POINTS = ("B1", "B2", "B3", "C")
COORD_COLUMNS = tuple(f"{p}{ax}" for p in POINTS for ax in "XYZ")
BATCH_COLUMNS = (
    ("l1", "l2", "l3", "l4", "outcome", "branch", "taut")
    + COORD_COLUMNS
    + ("T1", "T2", "T3", "T4", "phi")
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_lengths(text: str) -> CableLengths:
    """Parse ``l1,l2,l3,l4`` into cable lengths; raises UsageError."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise UsageError(f"expected four comma-separated lengths, got {len(parts)}")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"bad length in {text!r}: {exc}") from None
    if not all(math.isfinite(v) and v > 0 for v in values):
        raise UsageError(f"lengths must be positive and finite, got {text!r}")
    return CableLengths.of(values)


def _lengths_arg(text: str) -> CableLengths:
    try:
        return parse_lengths(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# -- record conversion ---------------------------------------------------------


def outcome_record(lengths: CableLengths, outcome: FkOutcome) -> dict:
    """JSON-ready record of one outcome; floats are kept at full precision."""
    rec: dict = {"lengths": [float(v) for v in lengths], "outcome": outcome.outcome}
    if isinstance(outcome, Definite):
        pose = outcome.pose
        rec["taut"] = list(outcome.taut.members)
        rec["pose"] = {name: [float(v) for v in getattr(pose, name)] for name in POINTS}
        rec["tensions"] = [float(t) for t in outcome.tensions]
        rec["branch"] = outcome.branch
    elif isinstance(outcome, SingleCableIndefinite):
        rec["taut"] = [outcome.shortest]
        rec["pose"] = None
        rec["tensions"] = None
        rec["phi"] = [[lo, hi] for lo, hi in outcome.phi]
        rec["branch"] = "single-cable"
        rec["message"] = outcome.message
    else:
        rec["taut"] = []
        rec["pose"] = None
        rec["tensions"] = None
        rec["branch"] = None
    if outcome.diagnostics:
        rec["diagnostics"] = list(outcome.diagnostics)
    return rec


def _csv_row(rec: dict) -> list[str]:
    row = [repr(v) for v in rec["lengths"]]
    row.append(rec["outcome"])
    row.append(rec["branch"] or "")
    row.append("".join("1" if i in rec["taut"] else "0" for i in (1, 2, 3, 4)))
    if rec["pose"] is not None:
        row.extend(repr(v) for name in POINTS for v in rec["pose"][name])
        row.extend(repr(t) for t in rec["tensions"])
    else:
        row.extend([""] * 16)
    row.append(";".join(f"{lo!r}:{hi!r}" for lo, hi in rec.get("phi", [])))
    return row


def _csv_text(records: Sequence[dict], header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(BATCH_COLUMNS)
    for rec in records:
        writer.writerow(_csv_row(rec))
    return buf.getvalue()


def _table_text(rec: dict) -> str:
    lines = ["lengths (m): " + ", ".join(f"{v:.4f}" for v in rec["lengths"])]
    lines.append(f"outcome: {rec['outcome']}")
    if rec["outcome"] == "definite":
        lines.append(f"branch: {rec['branch']}")
        lines.append("taut cables: {" + ",".join(str(i) for i in rec["taut"]) + "}")
        lines.append(f"{'':4s}{'X (m)':>12s}{'Y (m)':>12s}{'Z (m)':>12s}")
        for name in POINTS:
            x, y, z = rec["pose"][name]
            lines.append(f"{name:4s}{x:12.4f}{y:12.4f}{z:12.4f}")
        lines.append("tensions (kN): " + ", ".join(f"{t / 1000.0:.3f}" for t in rec["tensions"]))
    elif rec["outcome"] == "single-cable":
        lines.append(f"suspension cable: {rec['taut'][0]}")
        lines.append(rec["message"])
        lines.append("phi (rad): " + _phi_text(rec["phi"]))
    for note in rec.get("diagnostics", []):
        lines.append(f"  note: {note}")
    return "\n".join(lines) + "\n"


def _phi_text(phi) -> str:
    if not phi:
        return "empty"
    return " U ".join(f"[{lo:.4f}, {hi:.4f}]" for lo, hi in phi)


def render(records: Sequence[dict], fmt: str, header: bool = True) -> str:
    if fmt == "json":
        return "".join(json.dumps(rec) + "\n" for rec in records)
    if fmt == "csv":
        return _csv_text(records, header)
    return "\n".join(_table_text(rec) for rec in records)


def _exit_for(outcome: FkOutcome) -> int:
    if isinstance(outcome, Definite):
        return EXIT_OK
    if isinstance(outcome, SingleCableIndefinite):
        return EXIT_SINGLE_CABLE
    return EXIT_ERROR


# -- commands ------------------------------------------------------------------


def cmd_solve(lengths: CableLengths, run: RunConfig, out=None) -> int:
    out = out or sys.stdout
    outcome = solve(lengths, run.mechanism, run.options)
    out.write(render([outcome_record(lengths, outcome)], run.output_format))
    return _exit_for(outcome)


def _solve_line(args):
    lengths, run = args
    return outcome_record(lengths, solve(lengths, run.mechanism, run.options))


def read_batch(text: str, err=None) -> list[CableLengths]:
    """Parse batch input; blank lines and ``#`` comments are ignored."""
    err = err or sys.stderr
    cases = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            cases.append(parse_lengths(line))
        except UsageError as exc:
            err.write(f"line {lineno}: skipped: {exc}\n")
    return cases


def cmd_batch(path: str, run: RunConfig, workers: int = 1, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        with open(path) as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        err.write(f"cannot read input {path}: {exc}\n")
        return EXIT_NO_INPUT
    cases = read_batch(text, err)
    jobs = [(lengths, run) for lengths in cases]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_solve_line, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = [_solve_line(job) for job in jobs]
    if records or run.output_format == "csv":
        out.write(render(records, run.output_format))
    return EXIT_OK


def cmd_check_single(lengths: CableLengths, run: RunConfig, out=None) -> int:
    out = out or sys.stdout
    if lengths.all_equal():
        if run.output_format == "json":
            out.write(json.dumps({"applicable": False, "reason": "equal lengths"}) + "\n")
        else:
            out.write("single-cable check: not applicable (equal lengths)\n")
        return EXIT_OK
    check = is_single_cable_suspended(lengths, run.mechanism)
    if run.output_format == "json":
        rec = {
            "applicable": True,
            "shortest": check.cable,
            "suspended": check.suspended,
            "critical": {
                str(j): [check.critical.minimum[j], check.critical.maximum[j]]
                for j in sorted(check.critical.minimum)
            },
            "phi_j": {str(j): [[lo, hi] for lo, hi in r] for j, r in sorted(check.per_cable.items())},
            "phi": [[lo, hi] for lo, hi in check.phi],
        }
        out.write(json.dumps(rec) + "\n")
        return EXIT_OK
    lines = [f"suspension candidate: cable {check.cable}"]
    for j in sorted(check.critical.minimum):
        lo, hi = check.critical.minimum[j], check.critical.maximum[j]
        lines.append(
            f"cable {j}: l = {lengths[j - 1]:.4f} m, critical [{lo:.6f}, {hi:.6f}] m, "
            f"phi_{j} = {_phi_text(list(check.per_cable[j]))}"
        )
    lines.append(f"phi = {_phi_text(list(check.phi))}")
    lines.append("single-cable suspension: " + ("yes" if check.suspended else "no"))
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_even_tension(run: RunConfig, grid: Optional[int] = None, out=None) -> int:
    out = out or sys.stdout
    cfg = run.mechanism
    if grid is not None:
        k1s, k2s, values = delta_t_min_grid(grid, cfg)
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("k1", "k2", "delta_t_min"))
        for i, k1 in enumerate(k1s):
            for j, k2 in enumerate(k2s):
                writer.writerow((repr(float(k1)), repr(float(k2)), repr(float(values[i, j]))))
        return EXIT_OK
    result = even_tension(cfg)
    family = tension_family(cfg)
    if run.output_format == "json":
        rec = {
            "k1": cfg.k1,
            "k2": cfg.k2,
            "tensions": [float(t) for t in result.tensions],
            "tensions_over_mg": [float(t / cfg.mg) for t in result.tensions],
            "delta_t": result.delta_t,
            "tau4_interval": [family.tau4_low, family.tau4_high],
            "boundary_clamped": result.boundary_clamped,
        }
        out.write(json.dumps(rec) + "\n")
    elif run.output_format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("T1", "T2", "T3", "T4", "delta_t"))
        writer.writerow([repr(float(t)) for t in result.tensions] + [repr(result.delta_t)])
    else:
        out.write(f"(k1, k2) = ({cfg.k1}, {cfg.k2})\n")
        out.write("even tensions (kN): " + ", ".join(f"{t / 1000.0:.3f}" for t in result.tensions) + "\n")
        out.write("even tensions / mg: " + ", ".join(f"{t / cfg.mg:.4f}" for t in result.tensions) + "\n")
        out.write(f"tension difference (kN): {result.delta_t / 1000.0:.3f}\n")
        out.write(
            f"tau4 interval (kN): [{family.tau4_low / 1000.0:.3f}, {family.tau4_high / 1000.0:.3f}]"
            + (" (optimum clamped to boundary)" if result.boundary_clamped else "")
            + "\n"
        )
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML config file (defaults to the packaged platform)")
    common.add_argument("--format", choices=("table", "json", "csv"), default="table")

    parser = _Parser(prog="sinkwinch", description="Forward kinematics of a four-cable sinking-winch platform.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="solve one set of cable lengths")
    p.add_argument("--lengths", required=True, type=_lengths_arg, metavar="L1,L2,L3,L4")

    p = sub.add_parser("batch", parents=[common], help="solve one case per input line")
    p.add_argument("--input", required=True, metavar="PATH")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("check-single", parents=[common], help="single-cable suspension report")
    p.add_argument("--lengths", required=True, type=_lengths_arg, metavar="L1,L2,L3,L4")

    p = sub.add_parser("even-tension", parents=[common], help="even tension design or tension-difference grid")
    p.add_argument("--grid", type=int, metavar="N", help="emit an N x N CSV grid over k1, k2 in [-1, 1]")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    if getattr(args, "grid", None) is not None and args.grid < 2:
        parser.error("--grid must be at least 2")
    try:
        run = load_run_config(args.config, args.format)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    try:
        if args.command == "solve":
            return cmd_solve(args.lengths, run)
        if args.command == "batch":
            return cmd_batch(args.input, run, args.workers)
        if args.command == "check-single":
            return cmd_check_single(args.lengths, run)
        return cmd_even_tension(run, args.grid)
    except (SinkwinchError, ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
