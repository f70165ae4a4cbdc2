"""Command-line front end.

Three commands: ``decompose`` prints the current operator's word expansion,
``current`` evaluates J exactly or by shot-based simulation (or sweeps a
range of qubit counts into a plot-ready table), and ``analyze`` recombines
externally measured outcome data.  Only the report is written to standard
output; diagnostics go to standard error, so output can be piped.

Exit codes: 2 for bad flags, 3 for computation failures, 4 for unreadable
or malformed input data.  Environment variables RINGFLOW_SHOTS,
RINGFLOW_SEED and RINGFLOW_FORMAT override the built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .engine import NormDriftError
from .experiment import (
    DEFAULT_SHOTS,
    ExperimentReport,
    backflow_coefficients,
    closed_form_current,
    exact_current,
    ingest_measurements,
    run_exact,
    run_simulation,
)
from .pauli import WeightedPauliSum, current_decomposition, dense_current_matrix

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COMPUTE = 3
EXIT_DATA = 4

_FORMATS = ("json", "csv", "table")

_EPILOG = """\
environment defaults:
  RINGFLOW_SHOTS    default for --shots (built-in: 8000)
  RINGFLOW_SEED     default for --seed (built-in: fresh entropy)
  RINGFLOW_FORMAT   default for --format (built-in: json)

exit codes:
  0  success
  2  invalid flags or flag combinations
  3  computation failed
  4  input data missing or malformed
"""


def _env_int(name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringflow",
        description="Probability-current backflow on a ring: decompose the "
        "current operator, evaluate or simulate J, analyze measured data.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"ringflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument(
            "--format",
            choices=_FORMATS,
            default=os.environ.get("RINGFLOW_FORMAT", "json"),
            help="output format (default: %(default)s)",
        )
        p.add_argument("--output", metavar="FILE", help="write to FILE instead of stdout")

    p_dec = sub.add_parser(
        "decompose", help="print the word expansion of the current operator"
    )
    p_dec.add_argument("--n", type=int, required=True, help="qubit count (>= 1)")
    p_dec.add_argument(
        "--dense", action="store_true", help="include the dense matrix (n <= 8)"
    )
    add_io(p_dec)

    p_cur = sub.add_parser(
        "current", help="evaluate J exactly or estimate it from sampled shots"
    )
    p_cur.add_argument("--n", type=int, help="qubit count (>= 1)")
    p_cur.add_argument(
        "--range",
        dest="n_range",
        metavar="A..B",
        help="sweep qubit counts A..B inclusive (exact mode only)",
    )
    p_cur.add_argument(
        "--mode", choices=("exact", "shots"), default="exact", help="evaluation mode"
    )
    p_cur.add_argument("--shots", type=int, help="shots per measurement setting")
    p_cur.add_argument("--seed", type=int, help="base seed for sampling")
    p_cur.add_argument(
        "--grouped",
        dest="grouped",
        action="store_true",
        default=True,
        help="share measurement settings across compatible words (default)",
    )
    p_cur.add_argument(
        "--per-term",
        dest="grouped",
        action="store_false",
        help="one measurement circuit per word",
    )
    p_cur.add_argument(
        "--readout-flip",
        type=float,
        default=0.0,
        metavar="P",
        help="per-bit classical readout flip probability (shots mode)",
    )
    p_cur.add_argument(
        "--theta0",
        type=float,
        default=0.0,
        help="ring angle for the exact current (exact mode only)",
    )
    add_io(p_cur)

    p_ana = sub.add_parser(
        "analyze", help="recombine measured outcome data into a current estimate"
    )
    p_ana.add_argument("--input", required=True, metavar="FILE", help="measured-data JSON")
    p_ana.add_argument("--n", type=int, help="expected qubit count")
    add_io(p_ana)

    return parser


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _sum_text(op_sum: WeightedPauliSum, fmt: str, dense) -> str:
    if fmt == "json":
        payload = op_sum.to_dict()
        if dense is not None:
            payload["dense"] = dense.tolist()
        return _json_text(payload)
    if fmt == "csv":
        lines = ["word,coeff", f"{'I' * op_sum.n_qubits},{op_sum.identity_weight:g}"]
        lines += [f"{t.word},{t.coeff:g}" for t in op_sum.terms]
        return "\n".join(lines) + "\n"
    parts = [f"{op_sum.identity_weight:g}"]
    parts += [f"{t.coeff:+g}*{t.word}" for t in op_sum.terms]
    text = " ".join(parts) + "\n"
    if dense is not None:
        text += "\n".join(" ".join(str(v) for v in row) for row in dense.tolist()) + "\n"
    return text


def _report_summary_rows(report: ExperimentReport) -> list[tuple[str, object]]:
    rows: list[tuple[str, object]] = [
        ("j_estimate", report.j_estimate),
        ("j_std_error", report.j_std_error),
        ("j_exact", report.j_exact),
        ("j_closed_form", report.j_closed_form),
        ("relative_error", report.relative_error),
    ]
    return rows


def _report_text(report: ExperimentReport, fmt: str) -> str:
    if fmt == "json":
        return _json_text(report.to_dict())
    if fmt == "csv":
        lines = ["record,word,coeff,setting,expectation,std_error"]
        for r in report.term_records:
            std = "" if r.std_error is None else repr(r.std_error)
            setting = "" if r.setting is None else r.setting
            lines.append(f"term,{r.word},{r.coeff:g},{setting},{r.expectation!r},{std}")
        for name, value in _report_summary_rows(report):
            lines.append(f"summary,{name},,,{'' if value is None else repr(value)},")
        return "\n".join(lines) + "\n"
    head = f"n={report.n_qubits} mode={report.mode} theta0={report.theta0:g}"
    if report.mode == "shots":
        head += (
            f" shots/setting={report.shots_per_setting} seed={report.seed}"
            f" grouped={report.grouped} readout_flip={report.readout_flip:g}"
        )
    lines = [head]
    if report.term_records:
        width = max(4, report.n_qubits)
        lines.append(
            f"{'word':<{width}}  {'coeff':>6}  {'setting':<{width}}  "
            f"{'expectation':>12}  {'std_error':>10}"
        )
        for r in report.term_records:
            std = "" if r.std_error is None else f"{r.std_error:10.6f}"
            setting = "-" if r.setting is None else r.setting
            lines.append(
                f"{r.word:<{width}}  {r.coeff:>+6g}  {setting:<{width}}  "
                f"{r.expectation:>12.8f}  {std:>10}"
            )
    for name, value in _report_summary_rows(report):
        if value is None:
            continue
        lines.append(f"{name:<15} = {value:.9g}")
    return "\n".join(lines) + "\n"


def _range_rows(lo: int, hi: int) -> list[dict]:
    rows = []
    for n in range(lo, hi + 1):
        rows.append(
            {
                "n": n,
                "j_exact": exact_current(backflow_coefficients(n).a, 0.0),
                "j_closed_form": closed_form_current(n),
            }
        )
    return rows


def _range_text(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return _json_text(rows)
    if fmt == "csv":
        lines = ["n,j_exact,j_closed_form"]
        lines += [f"{r['n']},{r['j_exact']!r},{r['j_closed_form']!r}" for r in rows]
        return "\n".join(lines) + "\n"
    lines = [f"{'n':>3}  {'j_exact':>16}  {'j_closed_form':>16}"]
    lines += [
        f"{r['n']:>3}  {r['j_exact']:>16.9f}  {r['j_closed_form']:>16.9f}"
        for r in rows
    ]
    return "\n".join(lines) + "\n"


def _cmd_decompose(args, parser) -> int:
    if args.n is None or args.n < 1:
        parser.error("--n must be a positive integer")
    if args.dense and args.n > 8:
        parser.error("--dense is limited to n <= 8")
    try:
        op_sum = current_decomposition(args.n)
        dense = dense_current_matrix(args.n) if args.dense else None
    except (ValueError, MemoryError) as exc:
        print(f"ringflow: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    _emit(_sum_text(op_sum, args.format, dense), args.output)
    return EXIT_OK


def _cmd_current(args, parser) -> int:
    if (args.n is None) == (args.n_range is None):
        parser.error("exactly one of --n or --range is required")
    if args.mode == "exact":
        for flag, name in ((args.shots, "--shots"), (args.seed, "--seed")):
            if flag is not None:
                parser.error(f"{name} requires --mode shots")
        if args.readout_flip != 0.0:
            parser.error("--readout-flip requires --mode shots")
    else:
        if args.theta0 != 0.0:
            parser.error("--theta0 applies to --mode exact only")
        if not 0.0 <= args.readout_flip < 0.5:
            parser.error("--readout-flip must lie in [0, 0.5)")
    if args.n_range is not None:
        if args.mode != "exact" or args.theta0 != 0.0:
            parser.error("--range supports exact mode at theta0=0 only")
        lo, sep, hi = args.n_range.partition("..")
        try:
            lo_n, hi_n = int(lo), int(hi)
        except ValueError:
            lo_n, hi_n = 0, -1
        if not sep or lo_n < 1 or hi_n < lo_n:
            parser.error("--range must look like A..B with 1 <= A <= B")
        try:
            rows = _range_rows(lo_n, hi_n)
        except (ValueError, MemoryError) as exc:
            print(f"ringflow: {exc}", file=sys.stderr)
            return EXIT_COMPUTE
        _emit(_range_text(rows, args.format), args.output)
        return EXIT_OK
    if args.n < 1:
        parser.error("--n must be a positive integer")
    shots = args.shots if args.shots is not None else _env_int("RINGFLOW_SHOTS")
    seed = args.seed if args.seed is not None else _env_int("RINGFLOW_SEED")
    try:
        if args.mode == "exact":
            report = run_exact(args.n, theta0=args.theta0, grouped=args.grouped)
        else:
            report = run_simulation(
                args.n,
                shots_per_setting=shots if shots is not None else DEFAULT_SHOTS,
                seed=seed,
                grouped=args.grouped,
                readout_flip=args.readout_flip,
            )
    except (ValueError, NormDriftError, RuntimeError, MemoryError) as exc:
        print(f"ringflow: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    _emit(_report_text(report, args.format), args.output)
    return EXIT_OK


def _cmd_analyze(args, parser) -> int:
    if args.n is not None and args.n < 1:
        parser.error("--n must be a positive integer")
    try:
        with open(args.input, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        report = ingest_measurements(args.n, data)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"ringflow: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError, TypeError) as exc:
        print(f"ringflow: malformed measured data: {exc}", file=sys.stderr)
        return EXIT_DATA
    _emit(_report_text(report, args.format), args.output)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "decompose":
        return _cmd_decompose(args, parser)
    if args.command == "current":
        return _cmd_current(args, parser)
    return _cmd_analyze(args, parser)


if __name__ == "__main__":
    sys.exit(main())
