"""Power studies, ROC/AUC machinery, sigma_N calibration and qq diagnostics."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm, rankdata

from . import classic
from .distributions import GAUSSIAN, DistributionSpec, generate, generate_rows
from .errors import FitConvergenceError, InvalidInputError
from .null import Variant, sigma_n, variant_statistics
from .permutation import EqualizeStrategy, mean_r0_rows, record_means_rows
from .rng import RngSeed, coerce_seed, keys_for

__all__ = [
    "DistributionSpec",
    "generate",
    "RocCurve",
    "AucResult",
    "roc",
    "auc",
    "trapezoid_auc",
    "partial_auc_fpr",
    "partial_auc_tpr",
    "PowerConfig",
    "PowerRow",
    "PowerResult",
    "run_power_experiment",
    "SigmaFit",
    "fit_sigma",
    "calibrate_sigma",
    "grid_points",
    "qq_pairs",
    "qq_data",
    "max_qq_gap",
]

_VAR_COEF = 2.0 - 4.0 / math.pi

# ---------------------------------------------------------------------------
# ROC / AUC
# ---------------------------------------------------------------------------


def _scores(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise InvalidInputError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite scores")
    return arr


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    method: str = ""

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def roc(null_scores, alt_scores, method: str = "") -> RocCurve:
    """ROC staircase: one vertex per distinct score, rejecting when score >= threshold.

    Tied null and alternative scores produce a diagonal segment, which is how
    ties are split between the two rates.
    """
    null = np.sort(_scores(null_scores, "null_scores"))
    alt = np.sort(_scores(alt_scores, "alt_scores"))
    thresholds = np.unique(np.concatenate([null, alt]))[::-1]
    fpr = (null.size - np.searchsorted(null, thresholds, side="left")) / null.size
    tpr = (alt.size - np.searchsorted(alt, thresholds, side="left")) / alt.size
    return RocCurve(np.concatenate([[0.0], fpr]), np.concatenate([[0.0], tpr]), method)


@dataclass(frozen=True)
class AucResult:
    auc: float
    std_err: float
    n_null: int
    n_alt: int

    @property
    def error_bar(self) -> float:
        """Two standard errors, the convention used for plotted error bars."""
        return 2.0 * self.std_err


def auc(null_scores, alt_scores) -> AucResult:
    """P(alt > null) + P(tie)/2 by pair counting, with Hanley-McNeil standard error."""
    null = _scores(null_scores, "null_scores")
    alt = _scores(alt_scores, "alt_scores")
    nn, na = null.size, alt.size
    ranks = rankdata(np.concatenate([null, alt]))
    a = float((ranks[nn:].sum() - na * (na + 1) / 2.0) / (na * nn))
    q1 = a / (2.0 - a)
    q2 = 2.0 * a * a / (1.0 + a)
    var = (a * (1 - a) + (na - 1) * (q1 - a * a) + (nn - 1) * (q2 - a * a)) / (na * nn)
    return AucResult(a, math.sqrt(max(var, 0.0)), nn, na)


def trapezoid_auc(curve: RocCurve) -> float:
    return float(np.sum(np.diff(curve.fpr) * (curve.tpr[1:] + curve.tpr[:-1]) / 2.0))


def partial_auc_fpr(curve: RocCurve, fpr_max: float = 0.05) -> float:
    """Area under the ROC for false-positive rates in [0, fpr_max]."""
    total = 0.0
    f, t = curve.fpr, curve.tpr
    for f0, f1, t0, t1 in zip(f[:-1], f[1:], t[:-1], t[1:]):
        if f1 <= f0 or f0 >= fpr_max:
            continue
        hi = min(f1, fpr_max)
        t_hi = t0 + (t1 - t0) * (hi - f0) / (f1 - f0)
        total += (hi - f0) * (t0 + t_hi) / 2.0
    return total


def partial_auc_tpr(curve: RocCurve, tpr_min: float = 0.95) -> float:
    """Area of specificity (1 - FPR) over true-positive rates in [tpr_min, 1]."""
    total = 0.0
    f, t = curve.fpr, curve.tpr
    for f0, f1, t0, t1 in zip(f[:-1], f[1:], t[:-1], t[1:]):
        if t1 <= t0 or t1 <= tpr_min:
            continue
        lo = max(t0, tpr_min)
        f_lo = f0 + (f1 - f0) * (lo - t0) / (t1 - t0)
        total += (t1 - lo) * ((1.0 - f_lo) + (1.0 - f1)) / 2.0
    return total


# ---------------------------------------------------------------------------
# Power experiments
# ---------------------------------------------------------------------------

SINGLE_METHODS = ("r", "t", "sign", "wilcoxon")
TWO_METHODS = ("rz_paired", "rz_unpaired", "rplus2", "rminus2", "rd", "mann_whitney", "welch")


@dataclass(frozen=True)
class PowerConfig:
    """Experiment definition.

    Single-sample: null samples from ``spec_null`` (theta must be 0),
    alternative samples from ``spec_alt``.  Two-sample: under the null both x
    and y follow ``spec_null``; under the alternative x follows ``spec_alt``
    and y still follows ``spec_null``.
    """

    methods: tuple[str, ...]
    spec_null: DistributionSpec = GAUSSIAN
    spec_alt: DistributionSpec = GAUSSIAN.with_theta(0.11)
    n: int = 100
    n_samples: int = 2000
    p_perms: int = 500
    seed: RngSeed = field(default_factory=RngSeed)
    n_y: int | None = None
    equalize: EqualizeStrategy = EqualizeStrategy.TRIM

    def __post_init__(self):
        methods = tuple(self.methods)
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "seed", coerce_seed(self.seed))
        object.__setattr__(self, "equalize", EqualizeStrategy.parse(self.equalize))
        if not methods:
            raise InvalidInputError("no methods requested")
        unknown = [m for m in methods if m not in SINGLE_METHODS + TWO_METHODS]
        if unknown:
            raise InvalidInputError(f"unknown methods {unknown}")
        kinds = {m in TWO_METHODS for m in methods}
        if len(kinds) != 1:
            raise InvalidInputError("cannot mix single-sample and two-sample methods")
        if self.n < 2 or self.n_samples < 1 or self.p_perms < 1:
            raise InvalidInputError("n >= 2, n_samples >= 1 and p_perms >= 1 are required")
        if not self.two_sample:
            if self.spec_null.theta != 0:
                raise InvalidInputError("single-sample experiments need spec_null.theta == 0")
            if self.n_y is not None:
                raise InvalidInputError("n_y only applies to two-sample experiments")
        else:
            n_y = self.n if self.n_y is None else int(self.n_y)
            object.__setattr__(self, "n_y", n_y)
            if "rz_paired" in methods and n_y != self.n:
                raise InvalidInputError("rz_paired needs n_y == n")
            if self.equalize.length(self.n, n_y) < 2 or n_y < 2:
                raise InvalidInputError("both samples need at least 2 values")

    @property
    def two_sample(self) -> bool:
        return self.methods[0] in TWO_METHODS

    @classmethod
    def from_dict(cls, d: dict) -> "PowerConfig":
        allowed = {"methods", "spec_null", "spec_alt", "n", "n_samples", "p_perms", "seed", "n_y", "equalize"}
        unknown = set(d) - allowed
        if unknown:
            raise InvalidInputError(f"unknown config keys {sorted(unknown)}")
        if "methods" not in d:
            raise InvalidInputError("config needs a 'methods' list")
        kw = dict(d)
        if isinstance(kw["methods"], str):
            raise InvalidInputError("'methods' must be a list")
        for key in ("spec_null", "spec_alt"):
            if key in kw:
                if not isinstance(kw[key], dict):
                    raise InvalidInputError(f"{key} must be an object")
                kw[key] = DistributionSpec.from_dict(kw[key])
        for key in ("n", "n_samples", "p_perms", "n_y"):
            if key in kw and kw[key] is not None and not isinstance(kw[key], int):
                raise InvalidInputError(f"{key} must be an integer")
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "PowerConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"malformed config JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise InvalidInputError("config must be a JSON object")
        return cls.from_dict(d)


@dataclass(frozen=True)
class PowerRow:
    method: str
    theta: float
    nu: float | None
    n: int
    auc: float
    se: float
    n_samples: int
    p_perms: int
    seed: str


@dataclass
class PowerResult:
    config: PowerConfig
    rows: list[PowerRow]
    scores: dict[str, tuple[np.ndarray, np.ndarray]]

    def row(self, method: str) -> PowerRow:
        return next(r for r in self.rows if r.method == method)

    def auc(self, method: str) -> AucResult:
        null, alt = self.scores[method]
        return auc(null, alt)

    def roc(self, method: str) -> RocCurve:
        null, alt = self.scores[method]
        return roc(null, alt, method)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "theta", "nu", "n", "auc", "se", "n_samples", "p_perms", "seed"])
        for r in self.rows:
            w.writerow([r.method, repr(r.theta), "" if r.nu is None else repr(r.nu), r.n,
                        repr(r.auc), repr(r.se), r.n_samples, r.p_perms, r.seed])
        return buf.getvalue()

    def roc_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "fpr", "tpr"])
        for method in self.config.methods:
            curve = self.roc(method)
            for f, t in zip(curve.fpr.tolist(), curve.tpr.tolist()):
                w.writerow([method, repr(f), repr(t)])
        return buf.getvalue()


def _single_scores(cfg: PowerConfig, X: np.ndarray, keys: np.ndarray) -> dict[str, np.ndarray]:
    out = {}
    for method in cfg.methods:
        if method == "r":
            out[method] = mean_r0_rows(X, cfg.p_perms, keys) / sigma_n(cfg.n)
        elif method == "t":
            out[method] = classic.t_rows(X)
        elif method == "sign":
            out[method] = classic.sign_rows(X)
        else:
            out[method] = classic.wilcoxon_rows(X)
    return out


def _two_scores(cfg: PowerConfig, X: np.ndarray, Y: np.ndarray, keys: np.ndarray) -> dict[str, np.ndarray]:
    out = {}
    counts = None
    if {"rplus2", "rminus2", "rd"} & set(cfg.methods):
        m = cfg.equalize.length(X.shape[1], Y.shape[1])
        counts = record_means_rows(X, cfg.p_perms, keys, m) - record_means_rows(Y, cfg.p_perms, keys, m)
    for method in cfg.methods:
        if method == "rplus2":
            out[method] = counts[:, 0]
        elif method == "rminus2":
            # R- of x falls when x has the higher SNR: flip so larger means "alternative"
            out[method] = -counts[:, 1]
        elif method == "rd":
            out[method] = counts[:, 0] - counts[:, 1]
        elif method in ("rz_paired", "rz_unpaired"):
            out[method] = variant_statistics(method, X, Y, cfg.p_perms, keys, cfg.equalize)
        elif method == "mann_whitney":
            out[method] = classic.mann_whitney_rows(X, Y)
        else:
            out[method] = classic.welch_rows(X, Y)
    return out


def _arm_scores(cfg: PowerConfig, x_spec: DistributionSpec, base: RngSeed) -> dict[str, np.ndarray]:
    draws = [base.spawn(k) for k in range(cfg.n_samples)]
    X = generate_rows(x_spec, cfg.n, [d.spawn(0) for d in draws])
    keys = keys_for(d.spawn(2) for d in draws)
    if not cfg.two_sample:
        return _single_scores(cfg, X, keys)
    Y = generate_rows(cfg.spec_null, cfg.n_y, [d.spawn(1) for d in draws])
    return _two_scores(cfg, X, Y, keys)


def run_power_experiment(cfg: PowerConfig) -> PowerResult:
    """AUC of every method on the same freshly generated null/alternative samples.

    Scores are oriented so that larger means "alternative": when the
    alternative has a lower SNR than the null every score is negated.
    """
    null_scores = _arm_scores(cfg, cfg.spec_null, cfg.seed.spawn(0))
    alt_scores = _arm_scores(cfg, cfg.spec_alt, cfg.seed.spawn(1))
    sign = -1.0 if cfg.spec_alt.theta < cfg.spec_null.theta else 1.0
    rows, scores = [], {}
    for method in cfg.methods:
        s0, s1 = sign * null_scores[method], sign * alt_scores[method]
        scores[method] = (s0, s1)
        res = auc(s0, s1)
        rows.append(PowerRow(method, cfg.spec_alt.theta, cfg.spec_alt.nu, cfg.n, res.auc, res.std_err,
                             cfg.n_samples, cfg.p_perms, str(cfg.seed)))
    return PowerResult(cfg, rows, scores)


# ---------------------------------------------------------------------------
# sigma_N calibration
# ---------------------------------------------------------------------------


def grid_points(points: int = 21, n_min: int = 10, n_max: int = 1000) -> list[int]:
    """floor(n_min * (n_max / n_min) ** (k / (points - 1))) for k = 0 .. points - 1."""
    ratio = n_max / n_min
    out = []
    for k in range(points):
        n = math.floor(n_min * ratio ** (k / (points - 1)) + 1e-9)
        if n not in out:
            out.append(n)
    return out


@dataclass(frozen=True)
class SigmaFit:
    a: float
    b: float
    c: float
    se_a: float
    se_b: float
    se_c: float
    grid: tuple[tuple[int, float, float], ...]
    chi2: float = 0.0

    def sigma(self, n: float) -> float:
        return math.sqrt(_VAR_COEF * n) * self.a * (1.0 - self.b * n ** (-self.c))

    def to_csv(self, seed: RngSeed | None = None) -> str:
        lines = []
        if seed is not None:
            lines.append(f"# seed: {seed}")
        lines += [
            f"# a: {self.a!r} se_a: {self.se_a!r}",
            f"# b: {self.b!r} se_b: {self.se_b!r}",
            f"# c: {self.c!r} se_c: {self.se_c!r}",
            "n,sd,se",
        ]
        lines += [f"{n},{sd!r},{se!r}" for n, sd, se in self.grid]
        return "\n".join(lines) + "\n"


_STARTS = [(a, b, c) for a in (1.0, 1.7, 2.5) for b in (0.3, 0.9, 1.5) for c in (0.3, 0.6, 0.9)]


def fit_sigma(ns, sds, ses=None, starts=None, rel_tol: float = 1e-6) -> SigmaFit:
    """Weighted least-squares fit of sd / sqrt((2 - 4/pi) N) to a (1 - b N**-c).

    Multi-start Nelder-Mead; the best start must end with a simplex whose
    diameter is below ``rel_tol`` relative to the solution.  Standard errors
    come from the Gauss-Newton covariance scaled by the residual chi2 / dof.
    """
    ns = np.asarray(ns, dtype=float)
    sds = np.asarray(sds, dtype=float)
    grid = tuple(zip(ns.astype(int).tolist(), sds.tolist(),
                     (np.full(ns.size, np.nan) if ses is None else np.asarray(ses, float)).tolist()))
    if ns.size < 4 or ns.size != sds.size:
        raise FitConvergenceError("need at least 4 grid points to fit 3 parameters", grid)
    scale = np.sqrt(_VAR_COEF * ns)
    y = sds / scale
    w = np.ones_like(y) if ses is None else (scale / np.asarray(ses, float)) ** 2

    def model(theta):
        a, b, c = theta
        return a * (1.0 - b * ns ** (-c))

    def chi2(theta):
        r = y - model(theta)
        val = float(np.sum(w * r * r))
        return val if math.isfinite(val) else math.inf

    best = None
    for start in starts or _STARTS:
        res = minimize(chi2, np.array(start, float), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 5000, "maxfev": 5000})
        if best is None or res.fun < best.fun:
            best = res
    sim = best.final_simplex[0]
    diam = max(np.linalg.norm(u - v) for u in sim for v in sim)
    if not math.isfinite(best.fun) or diam > rel_tol * max(np.linalg.norm(best.x), 1e-12):
        raise FitConvergenceError(f"Nelder-Mead did not converge (simplex diameter {diam:.3g})", grid)
    a, b, c = best.x
    J = np.column_stack([1.0 - b * ns ** (-c), -a * ns ** (-c), a * b * ns ** (-c) * np.log(ns)])
    dof = max(ns.size - 3, 1)
    try:
        cov = np.linalg.inv(J.T @ (w[:, None] * J)) * (best.fun / dof)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        se = np.full(3, np.nan)
    return SigmaFit(float(a), float(b), float(c), *map(float, se), grid=grid, chi2=float(best.fun))


def sd_of_mean_r0(n: int, n_samples: int, p_perms: int, seed=None) -> tuple[float, float]:
    """Sample sd of mean R0 over Gaussian samples of length n, and its standard error."""
    values = null_mean_r0(n, n_samples, p_perms, seed)
    sd = float(values.std(ddof=1))
    return sd, sd / math.sqrt(2.0 * (n_samples - 1))


def null_mean_r0(n: int, n_samples: int, p_perms: int, seed=None,
                 spec: DistributionSpec = GAUSSIAN) -> np.ndarray:
    """mean R0 of n_samples independent samples (row k uses seed.spawn(k))."""
    seed = coerce_seed(seed)
    draws = [seed.spawn(k) for k in range(n_samples)]
    X = generate_rows(spec, n, [d.spawn(0) for d in draws])
    return mean_r0_rows(X, p_perms, keys_for(d.spawn(2) for d in draws))


def calibrate_sigma(n_grid=None, n_samples: int = 5000, p_perms: int = 1000, seed=None) -> SigmaFit:
    """Measure sd(mean R0) on a grid of N (Gaussian data) and fit the sigma_N law."""
    seed = coerce_seed(seed)
    n_grid = grid_points(11) if n_grid is None else [int(n) for n in n_grid]
    if not n_grid or min(n_grid) < 10 or max(n_grid) > 10_000:
        raise InvalidInputError("n_grid must lie within [10, 10000]")
    if n_samples < 1000:
        raise InvalidInputError("n_samples must be >= 1000")
    sds, ses = [], []
    for n in n_grid:
        sd, se = sd_of_mean_r0(n, n_samples, p_perms, seed.spawn(n))
        sds.append(sd)
        ses.append(se)
    return fit_sigma(n_grid, sds, ses)


# ---------------------------------------------------------------------------
# qq diagnostics
# ---------------------------------------------------------------------------


def qq_pairs(values) -> np.ndarray:
    """(m, 2) array of (standard-normal quantile, standardized sorted value).

    Plotting positions are (i - 1/2) / m; values are centered and scaled by
    their sample mean and sd.
    """
    v = np.sort(np.asarray(values, dtype=float))
    if v.size < 2:
        raise InvalidInputError("need at least 2 values")
    sd = v.std(ddof=1)
    if sd == 0:
        raise InvalidInputError("values are constant")
    z = (v - v.mean()) / sd
    q = norm.ppf((np.arange(1, v.size + 1) - 0.5) / v.size)
    return np.column_stack([q, z])


def qq_data(n: int, m_draws: int, p_perms: int, seed=None) -> np.ndarray:
    return qq_pairs(null_mean_r0(n, m_draws, p_perms, seed))


def max_qq_gap(pairs: np.ndarray, lo: float = -2.0, hi: float = 2.0) -> float:
    sel = (pairs[:, 0] >= lo) & (pairs[:, 0] <= hi)
    return float(np.max(np.abs(pairs[sel, 1] - pairs[sel, 0])))
