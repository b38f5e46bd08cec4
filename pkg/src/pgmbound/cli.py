"""Command-line front end.

Exit codes: 0 success, 1 property violation, 2 input error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds, ensemble
from .suite import run_suite

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def fmt(x):
    """Shortest round-trip text for floats, plain ``str`` otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def _write_text(path, text):
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def _read_ensemble(path):
    try:
        return ensemble.read_ensemble(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_INPUT) from None
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None


def _read_gram(path):
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_INPUT) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: not valid JSON ({exc})", EXIT_INPUT) from None
    if isinstance(obj, dict):
        obj = obj.get("gram")
    try:
        # entries are numbers or [re, im] pairs
        A = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise CliError(f"{path}: Gram matrix must be a list of rows", EXIT_INPUT) from None
    if A.ndim == 3 and A.shape[-1] == 2:
        A = A[..., 0] + 1j * A[..., 1]
    if A.ndim != 2:
        raise CliError(f"{path}: Gram matrix must be square, got shape {A.shape}", EXIT_INPUT)
    return A


# -- subcommands -------------------------------------------------------------

def cmd_gen(args):
    try:
        if args.kind == "haar":
            _require(args, "d", "m")
            e = ensemble.haar_random(args.d, args.m, seed=args.seed)
        elif args.kind == "equal-overlap":
            _require(args, "m", "c")
            e = ensemble.equal_overlap_ensemble(args.m, args.c)
        elif args.kind == "from-gram":
            _require(args, "gram")
            e = ensemble.from_gram(_read_gram(args.gram), target_dim=args.d)
        else:
            e = ensemble.trine_ensemble()
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    try:
        ensemble.write_ensemble(e, args.out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc.strerror or exc}", EXIT_IO) from None
    print(f"wrote {args.kind} ensemble m={e.m} d={e.d} F={fmt(ensemble.max_pairwise_fidelity(e))} to {args.out}")
    return EXIT_OK


def _require(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise ValueError(f"{args.kind} needs {', '.join(missing)}")


EVAL_COLUMNS = [
    "m", "d", "F", "convention", "pgm", "sm", "linear", "refined", "union_term", "eq3",
    "refined_gt_linear", "pgm_ge_linear", "pgm_ge_refined", "sm_ge_eq3",
]


def eval_row(report):
    flags = report.dominance()
    return [
        report.m, report.d, report.F, report.convention, report.pgm_exact, report.sm_exact,
        report.linear, report.refined, report.union_term, report.eq3,
        flags["refined_gt_linear"], flags["pgm_ge_linear"], flags["pgm_ge_refined"],
        flags["sm_ge_eq3"],
    ]


def cmd_eval(args):
    e = _read_ensemble(args.input)
    report = bounds.evaluate(e, convention=args.convention)
    row = eval_row(report)
    for name, value in zip(EVAL_COLUMNS, row):
        print(f"{name}: {fmt(value)}")
    if args.csv:
        _write_csv(args.csv, EVAL_COLUMNS, [row])
    return EXIT_OK


SWEEP_HEADER = ["m", "F", "linear", "refined", "dominance"]


def sweep_rows(m_values, f_max, steps):
    for m in m_values:
        for k in range(1, steps + 1):
            F = f_max * k / steps
            lin, ref = bounds.linear_bound(m, F), bounds.refined_bound(m, F)
            yield [m, F, lin, ref, ref > lin]


def cmd_sweep(args):
    if not 0 < args.f_max <= 1 or args.steps < 2:
        raise CliError("need 0 < --f-max <= 1 and --steps >= 2", EXIT_INPUT)
    if any(m < 2 for m in args.m):
        raise CliError("every --m value must be >= 2", EXIT_INPUT)
    rows = list(sweep_rows(args.m, args.f_max, args.steps))
    _write_csv(args.out, SWEEP_HEADER, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_verify(args):
    if args.trials < 1:
        raise CliError("--trials must be >= 1", EXIT_INPUT)
    if args.d_range[0] < 1 or args.m_range[0] < 2:
        raise CliError("need d >= 1 and m >= 2", EXIT_INPUT)
    if args.d_range[0] > args.d_range[1] or args.m_range[0] > args.m_range[1]:
        raise CliError("ranges must be given as LOW HIGH", EXIT_INPUT)
    result = run_suite(
        trials=args.trials, d_range=tuple(args.d_range), m_range=tuple(args.m_range),
        seed=args.seed, tol=args.tol, convention=args.convention,
        independent_only=args.independent,
    )
    text = result.to_text()
    if not result.ok:
        try:
            ensemble.write_ensemble(result.counterexample, args.counterexample)
        except OSError as exc:
            raise CliError(f"cannot write {args.counterexample}: {exc.strerror or exc}", EXIT_IO) from None
        text += f"\ncounterexample: {args.counterexample}"
    print(text)
    if args.out:
        _write_text(args.out, text)
    return EXIT_OK if result.ok else EXIT_VIOLATION


def cmd_appendix(args):
    try:
        summary = bounds.verify_appendix(grid_step=args.grid_step, m_max=args.m_max, seed=args.seed)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    print(summary.to_text())
    if args.out:
        _write_csv(args.out, ["key", "value"], summary.items())
    return EXIT_OK if summary.ok else EXIT_VIOLATION


# -- parser ------------------------------------------------------------------

def _int_pair(name):
    return dict(type=int, nargs=2, metavar=("LOW", "HIGH"))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pgmbound",
        description="Worst-case PGM and sequential measurement workbench.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an ensemble file")
    p.add_argument("kind", choices=["haar", "equal-overlap", "from-gram", "trine"])
    p.add_argument("--d", type=int, help="dimension (haar) or target dimension (from-gram)")
    p.add_argument("--m", type=int, help="number of states")
    p.add_argument("--c", type=float, help="pairwise overlap for equal-overlap")
    p.add_argument("--gram", help="JSON file holding the Gram matrix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval", help="exact success probabilities and bounds for one ensemble")
    p.add_argument("input", help="ensemble file")
    p.add_argument("--csv", help="also write the report row to this CSV file")
    p.add_argument("--convention", choices=bounds.CONVENTIONS, default="squared")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="linear vs refined bound over an F grid")
    p.add_argument("--m", type=int, nargs="+", default=[2, 3, 4, 6, 8, 16])
    p.add_argument("--f-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="randomized property suite over Haar ensembles")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--d-range", default=[2, 16], **_int_pair("d"))
    p.add_argument("--m-range", default=[2, 8], **_int_pair("m"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--convention", choices=bounds.CONVENTIONS, default="squared")
    p.add_argument("--independent", action="store_true", help="skip draws with m > d")
    p.add_argument("--out", help="also write the report to this file")
    p.add_argument("--counterexample", default="verify_counterexample.json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("appendix", help="certify positivity of the dominance polynomials")
    p.add_argument("--grid-step", type=float, default=1e-3)
    p.add_argument("--m-max", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the summary as key,value CSV")
    p.set_defaults(func=cmd_appendix)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
