#!/usr/bin/env python3
"""Offline, full-size power study.

Writes plot-ready CSVs into ``--out``:

* ``auc_vs_theta.csv``: single-sample AUC (r, t, sign, Wilcoxon) against the
  signal-to-noise ratio theta for Gaussian, uniform, Student-t and
  exponential data.
* ``roc_two_sample_<family>.csv`` and ``auc_two_sample.csv``: two-sample ROC
  curves and AUCs at a theta difference of 0.15.

Default sizes are 10^4 samples per point with 10^4 permutations per sample,
which takes many hours; ``--samples``/``--permutations`` shrink the run and
``--quick`` selects a smoke-test scale.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

from rstats.bench import SINGLE_METHODS, PowerConfig, run_power_experiment
from rstats.cli import set_threads
from rstats.distributions import DistributionSpec
from rstats.rng import RngSeed

THETAS = (0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.25, 0.3)
SINGLE_FAMILIES = {
    "gaussian": DistributionSpec(),
    "uniform": DistributionSpec("uniform"),
    "exponential": DistributionSpec("exponential"),
    **{f"student_t{nu:g}": DistributionSpec("student_t", nu=nu) for nu in (2.25, 2.5, 3.0, 3.5, 4.0, 5.0)},
}
TWO_FAMILIES = ("gaussian", "uniform", "student_t3", "exponential")
TWO_METHODS = ("rplus2", "rminus2", "rd", "rz_unpaired", "mann_whitney", "welch")


def log(msg: str) -> None:
    print(f"[{time.strftime('%H:%M:%S')}] {msg}", file=sys.stderr, flush=True)


def single_sample(out: Path, n: int, samples: int, perms: int, seed: RngSeed) -> None:
    path = out / "auc_vs_theta.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["family", "method", "theta", "n", "auc", "se", "n_samples", "p_perms", "seed"])
        for i, (name, spec) in enumerate(SINGLE_FAMILIES.items()):
            for j, theta in enumerate(THETAS):
                cfg = PowerConfig(SINGLE_METHODS, spec_null=spec, spec_alt=spec.with_theta(theta), n=n,
                                  n_samples=samples, p_perms=perms, seed=seed.spawn(100 * i + j))
                res = run_power_experiment(cfg)
                for row in res.rows:
                    w.writerow([name, row.method, theta, n, repr(row.auc), repr(row.se), samples, perms,
                                row.seed])
                fh.flush()
                log(f"{name} theta={theta}: " + " ".join(f"{r.method}={r.auc:.4f}" for r in res.rows))
    log(f"wrote {path}")


def two_sample(out: Path, n: int, samples: int, perms: int, seed: RngSeed) -> None:
    summary = out / "auc_two_sample.csv"
    with summary.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["family", "method", "theta", "n", "auc", "se", "n_samples", "p_perms", "seed"])
        for i, name in enumerate(TWO_FAMILIES):
            spec = SINGLE_FAMILIES[name]
            cfg = PowerConfig(TWO_METHODS, spec_null=spec, spec_alt=spec.with_theta(0.15), n=n,
                              n_samples=samples, p_perms=perms, seed=seed.spawn(1000 + i))
            res = run_power_experiment(cfg)
            (out / f"roc_two_sample_{name}.csv").write_text(res.roc_csv())
            for row in res.rows:
                w.writerow([name, row.method, 0.15, n, repr(row.auc), repr(row.se), samples, perms, row.seed])
            log(f"two-sample {name}: " + " ".join(f"{r.method}={r.auc:.4f}" for r in res.rows))
    log(f"wrote {summary}")


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="full_scale_out")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--permutations", type=int, default=10_000)
    p.add_argument("--seed", default="0", help="SEED or SEED:STREAM")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--quick", action="store_true", help="200 samples x 50 permutations")
    p.add_argument("--only", choices=("single", "two"), default=None)
    args = p.parse_args(argv)
    if args.quick:
        args.samples, args.permutations = 200, 50
    set_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = RngSeed.parse(args.seed)
    if args.only in (None, "single"):
        single_sample(out, args.n, args.samples, args.permutations, seed)
    if args.only in (None, "two"):
        two_sample(out, args.n, args.samples, args.permutations, seed)
    return 0


if __name__ == "__main__":
    sys.exit(main())
