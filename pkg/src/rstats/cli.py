"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 degenerate data, 4 null-table
mismatch, 5 calibration fit did not converge.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bench import PowerConfig, calibrate_sigma, grid_points, qq_data, run_power_experiment
from .distributions import FAMILIES, DistributionSpec
from .errors import (
    DegenerateInputError,
    FitConvergenceError,
    InvalidInputError,
    NullFormatError,
    NullMismatchError,
)
from .null import Alternative, Variant, build_null, load_null, save_null, sigma_n
from .permutation import EqualizeStrategy
from .rng import RngSeed
from .sntest import TestConfig, r_test_single, r_test_two

THREADS_ENV = "RSTATS_THREADS"

EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_MISMATCH = 4
EXIT_NOFIT = 5


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------


def read_columns(path: str) -> list[list[float]]:
    """Rows of comma-separated numbers; '#' lines and blank lines are skipped."""
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise CliError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not rows:
        raise CliError(f"{path}: no data")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise CliError(f"{path}: inconsistent number of columns")
    return rows


def read_sample(path: str) -> np.ndarray:
    rows = read_columns(path)
    if len(rows[0]) != 1:
        raise CliError(f"{path}: expected one value per line")
    return _finite(np.array([r[0] for r in rows]), path)


def _finite(arr: np.ndarray, path: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise CliError(f"{path}: NaN or infinite values")
    return arr


def set_threads(requested: int | None) -> int:
    import numba

    if requested is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise CliError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if requested is None:
        return numba.get_num_threads()
    if requested < 1:
        raise CliError("--threads must be >= 1")
    n = min(requested, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n)
    return n


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _result_text(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(result), lineterminator="\n")
    w.writeheader()
    w.writerow({k: "" if v is None else v for k, v in result.items()})
    return buf.getvalue()


def _dist(args, theta: float | None = None) -> DistributionSpec:
    return DistributionSpec(args.dist, args.theta if theta is None else theta, args.sigma, args.nu)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_rtest(args) -> None:
    x = read_sample(args.input)
    null = load_null(args.null_table) if args.null_table else None
    cfg = TestConfig(args.permutations, args.draws, args.alternative, seed=args.seed, null=null)
    _emit(_result_text(r_test_single(x, cfg).to_dict(), args.format), args.out)


def cmd_rtest2(args) -> None:
    if args.y is None:
        rows = read_columns(args.x)
        if len(rows[0]) != 2:
            raise CliError(f"{args.x}: a single input file must have two columns (x,y)")
        arr = _finite(np.array(rows), args.x)
        x, y = arr[:, 0], arr[:, 1]
    else:
        x, y = read_sample(args.x), read_sample(args.y)
    null = load_null(args.null_table) if args.null_table else None
    cfg = TestConfig(args.permutations, args.draws, args.alternative, args.equalize, args.seed,
                     null=null, generator=_dist(args, 0.0))
    _emit(_result_text(r_test_two(x, y, args.variant, cfg).to_dict(), args.format), args.out)


def cmd_null_table(args) -> None:
    if not args.out:
        raise CliError("null-table needs --out")
    variant = Variant.parse(args.variant)
    null = build_null(args.n, variant, args.draws, args.permutations, _dist(args), args.seed,
                      args.n_y, args.equalize)
    save_null(null, args.out)
    v = null.values
    summary = {
        "variant": variant.value,
        "n": null.n,
        "n_y": null.n_y,
        "m_draws": null.m_draws,
        "p_perms": null.p_perms,
        "generator": null.generator.to_dict(),
        "seed": str(null.seed),
        "mean": float(v.mean()),
        "sd": float(v.std(ddof=1)),
        "quantiles": {str(q): float(np.quantile(v, q)) for q in (0.01, 0.025, 0.05, 0.5, 0.95, 0.975, 0.99)},
        "out": str(args.out),
    }
    if variant is Variant.SINGLE_R0:
        summary["sd_over_sigma_n"] = summary["sd"] / sigma_n(null.n)
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def cmd_power(args) -> None:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {args.config}: {exc}") from exc
    cfg = PowerConfig.from_json(text)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    result = run_power_experiment(cfg)
    _emit(result.to_csv(), args.out)
    if args.roc_out:
        Path(args.roc_out).write_text(result.roc_csv())


def cmd_calibrate(args) -> None:
    seed = args.seed if args.seed is not None else RngSeed()
    try:
        grid = [int(v) for v in args.grid.split(",")] if args.grid else grid_points(args.points)
    except ValueError:
        raise CliError(f"--grid must be comma-separated integers, got {args.grid!r}") from None
    fit = calibrate_sigma(grid, args.samples, args.permutations, seed)
    _emit(fit.to_csv(seed), args.out)


def cmd_qq(args) -> None:
    seed = args.seed if args.seed is not None else RngSeed()
    pairs = qq_data(args.n, args.draws, args.permutations, seed)
    lines = [f"# seed: {seed}", f"# n: {args.n}", "normal_q,empirical_q"]
    lines += [f"{q!r},{e!r}" for q, e in pairs.tolist()]
    _emit("\n".join(lines) + "\n", args.out)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _seed(text: str) -> RngSeed:
    try:
        return RngSeed.parse(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}: {exc}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None, help="integer seed, optionally SEED:STREAM (default 0)")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or all); never changes results")
    common.add_argument("--out", help="write output here instead of stdout")

    testing = argparse.ArgumentParser(add_help=False)
    testing.add_argument("--permutations", type=_positive, default=10_000)
    testing.add_argument("--draws", type=_positive, default=10_000, help="null draws")
    testing.add_argument("--alternative", choices=[a.value for a in Alternative], default="two_sided")
    testing.add_argument("--null-table", help="cached null table to use instead of building one")
    testing.add_argument("--format", choices=("json", "csv"), default="json")

    dist = argparse.ArgumentParser(add_help=False)
    dist.add_argument("--dist", choices=FAMILIES, default="gaussian")
    dist.add_argument("--nu", type=float, default=None, help="student_t tail parameter (> 2)")
    dist.add_argument("--sigma", type=float, default=1.0)

    equal = argparse.ArgumentParser(add_help=False)
    equal.add_argument("--equalize", type=str.upper, choices=[e.value for e in EqualizeStrategy], default="TRIM")

    p = argparse.ArgumentParser(prog="rstats", description="r-statistics: record-based SNR tests")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rtest", parents=[common, testing], help="single-sample r-test")
    s.add_argument("input", help="one value per line ('-' for stdin)")
    s.set_defaults(func=cmd_rtest)

    s = sub.add_parser("rtest2", parents=[common, testing, dist, equal], help="two-sample r-tests")
    s.add_argument("x", help="x sample, or a two-column x,y file for paired data")
    s.add_argument("y", nargs="?", help="y sample")
    s.add_argument("--variant", choices=[v.value for v in Variant if v.two_sample], default="rz_unpaired")
    s.set_defaults(func=cmd_rtest2, theta=0.0)

    s = sub.add_parser("null-table", parents=[common, dist, equal], help="build and save a null table")
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--n-y", type=_positive, default=None)
    s.add_argument("--variant", choices=[v.value for v in Variant], default="single_r0")
    s.add_argument("--draws", type=_positive, default=10_000)
    s.add_argument("--permutations", type=_positive, default=10_000)
    s.add_argument("--theta", type=float, default=0.0)
    s.set_defaults(func=cmd_null_table)

    s = sub.add_parser("power", parents=[common], help="ROC/AUC power experiment from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--roc-out", help="also write the ROC curves (method,fpr,tpr)")
    s.set_defaults(func=cmd_power)

    s = sub.add_parser("calibrate", parents=[common], help="measure sd of mean R0 and fit sigma_N")
    s.add_argument("--grid", help="comma-separated N values (default: 11 log-spaced points in [10, 1000])")
    s.add_argument("--points", type=_positive, default=11)
    s.add_argument("--samples", type=_positive, default=5000)
    s.add_argument("--permutations", type=_positive, default=1000)
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("qq", parents=[common], help="qq pairs of the standardized mean R0")
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--draws", type=_positive, default=10_000)
    s.add_argument("--permutations", type=_positive, default=1000)
    s.set_defaults(func=cmd_qq)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        set_threads(args.threads)
        if args.command in ("rtest", "rtest2", "null-table") and args.seed is None:
            args.seed = RngSeed()
        args.func(args)
    except CliError as exc:
        print(f"rstats: error: {exc}", file=sys.stderr)
        return exc.code
    except NullMismatchError as exc:
        print(f"rstats: null table mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except DegenerateInputError as exc:
        print(f"rstats: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except FitConvergenceError as exc:
        print(f"rstats: fit did not converge: {exc}", file=sys.stderr)
        for row in exc.grid or ():
            print("  n=%d sd=%r se=%r" % row, file=sys.stderr)
        return EXIT_NOFIT
    except (InvalidInputError, NullFormatError) as exc:
        print(f"rstats: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
