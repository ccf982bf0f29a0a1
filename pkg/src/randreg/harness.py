"""Experiment orchestration: sweeps, tuning protocols, and CSV emission.

Every run_* function is a pure map from (spec, seed) to a list of
ResultRecord, with all randomness derived per replication from named
streams, so any worker count and any rerun produce identical records.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from scipy.special import gammaln, logsumexp

from . import __version__
from . import datagen as dg
from . import streams
from .cart import TreeConfig
from .forest import fit_forest
from .linsel import (
    forward_stepwise,
    lambda_grid,
    lasso_path,
    ols,
    ols_subsample_ensemble,
    randfs,
    relaxed_lasso_path,
)

GENERATORS = ("linear", "mars", "marsadd")
METRICS = ("mse_diff", "rte_bayes", "rte_real", "optimal_mtry", "dof")
REAL_ALPHAS = (0.0, 0.01, 0.05, 0.1, 0.25, 0.5)
# in-bag probability used for the interpolation calculations
BOOTSTRAP_KEEP = 0.632
CSV_HEADER = "experiment,rep,param,estimator,tuned,metric,value,se"


@dataclass
class ExperimentSpec:
    """Declarative description of one sweep.

    estimators maps an estimator name to its tuning-grid overrides; the
    run functions fill in protocol defaults for anything not given.
    n names the training-set size for the surface generators; linear
    settings carry their own n.
    """

    id: str
    generator: str
    snr_grid: list
    n_reps: int
    seed: int
    metric: str
    setting: dg.LinearSetting | None = None
    n: int | None = None
    test_size: int | None = None
    n_trees: int = 500
    estimators: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValueError("experiment id must be nonempty")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        self.snr_grid = [s.nu if isinstance(s, dg.SnrLevel) else float(s)
                         for s in self.snr_grid]
        if not self.snr_grid:
            raise ValueError("snr grid must be nonempty")
        if any(s <= 0 for s in self.snr_grid):
            raise ValueError("snr values must be positive")
        if self.n_reps < 1:
            raise ValueError("n_reps must be >= 1")
        if self.seed is None:
            raise ValueError("seed must be set")
        if self.generator == "linear":
            if self.setting is None:
                raise ValueError("linear generator needs a setting")
        elif self.n is None:
            raise ValueError(f"{self.generator} generator needs n")
        for name, grids in self.estimators.items():
            for key, val in grids.items():
                if isinstance(val, (list, tuple)) and len(val) == 0:
                    raise ValueError(f"empty grid {key!r} for {name!r}")

    @property
    def train_size(self) -> int:
        return self.setting.n if self.generator == "linear" else self.n

    @property
    def n_features(self) -> int:
        return self.setting.p if self.generator == "linear" else 5


@dataclass
class ResultRecord:
    """One emitted measurement; rep is an index or the string 'mean'."""

    experiment: str
    rep: object
    param: object
    estimator: str
    tuned: str
    metric: str
    value: float
    se: float | None = None


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.10g" % float(x)


def record_lines(records) -> list[str]:
    """CSV body lines (no trailing newline) for a record list."""
    lines = [CSV_HEADER]
    for r in records:
        se = "" if r.se is None else _fmt(r.se)
        lines.append(",".join([r.experiment, _fmt(r.rep), _fmt(r.param),
                               r.estimator, r.tuned, r.metric,
                               _fmt(r.value), se]))
    return lines


def write_records(records, path, manifest: dict | None = None) -> None:
    """Write records as CSV; optionally a key=value sidecar at path.manifest.

    The CSV body is a pure function of the records; the manifest carries
    provenance (spec, seed, version, wall time) and is the only output
    allowed to differ between reruns.
    """
    with open(path, "w") as fh:
        fh.write("\n".join(record_lines(records)) + "\n")
    if manifest is not None:
        lines = [f"{k}={v}" for k, v in manifest.items()]
        with open(f"{path}.manifest", "w") as fh:
            fh.write("\n".join(lines) + "\n")


def base_manifest(command: str, seed, started: float) -> dict:
    return {
        "command": command,
        "seed": "" if seed is None else str(seed),
        "version": __version__,
        "wall_time_s": "%.3f" % (time.time() - started),
    }


def run_tasks(jobs, workers: int = 1) -> list:
    """Run (key, fn, args) jobs; results come back in ascending key order.

    Each job must derive all of its randomness from its own args, so the
    outcome is independent of scheduling and worker count.
    """
    keys = [k for k, _, _ in jobs]
    if len(set(keys)) != len(keys):
        raise ValueError("job keys must be unique")
    if workers <= 1:
        results = {k: fn(*args) for k, fn, args in jobs}
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = {k: ex.submit(fn, *args) for k, fn, args in jobs}
            results = {k: fut.result() for k, fut in futures.items()}
    return [results[k] for k in sorted(results)]


def _mean_se(values) -> tuple[float, float | None]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        return float(arr.mean()), None
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def _make_dataset(spec: ExperimentSpec, snr: float, size: int, ss) -> dg.Dataset:
    lvl = dg.SnrLevel(snr)
    if spec.generator == "linear":
        setting = spec.setting
        if size != setting.n:
            setting = replace(setting, n=size)
        return dg.gen_linear(setting, lvl, seed=ss)
    if spec.generator == "mars":
        return dg.gen_mars(size, lvl, seed=ss)
    return dg.gen_marsadd(size, lvl, seed=ss)


# --- forest SNR sweep -------------------------------------------------------

def _sweep_rep(spec: ExperimentSpec, snr: float, si: int, r: int) -> float:
    ss = streams.seed_seq(spec.seed, "sweep", si, r)
    train_ss, test_ss, bagg_ss, rf_ss = ss.spawn(4)
    train = _make_dataset(spec, snr, spec.train_size, train_ss)
    test = _make_dataset(spec, snr, spec.test_size or 1000, test_ss)
    errs = []
    for mtry, fit_ss in ((1.0, bagg_ss), (0.33, rf_ss)):
        model = fit_forest(train, TreeConfig(mtry=mtry),
                           n_trees=spec.n_trees, seed=fit_ss)
        errs.append(float(np.mean((test.y - model.predict(test.X)) ** 2)))
    return errs[0] - errs[1]


def run_snr_sweep_forest(spec: ExperimentSpec, workers: int = 1,
                         log=None) -> list[ResultRecord]:
    """Test-error gap between bagging and the mtry=0.33 forest per SNR.

    Positive values mean the randomized forest beat bagging on that
    replication's fresh test set.
    """
    if spec.metric != "mse_diff":
        raise ValueError("spec.metric must be 'mse_diff'")
    jobs = [((si, r), _sweep_rep, (spec, snr, si, r))
            for si, snr in enumerate(spec.snr_grid)
            for r in range(spec.n_reps)]
    flat = run_tasks(jobs, workers)
    records = []
    for si, snr in enumerate(spec.snr_grid):
        diffs = flat[si * spec.n_reps:(si + 1) * spec.n_reps]
        for r, d in enumerate(diffs):
            records.append(ResultRecord(spec.id, r, snr, "bagg-minus-rf", "",
                                        "mse_diff", d))
        mean, se = _mean_se(diffs)
        records.append(ResultRecord(spec.id, "mean", snr, "bagg-minus-rf", "",
                                    "mse_diff", mean, se))
        if log:
            log(f"snr={snr:g} mean_diff={mean:g}")
    return records


# --- optimal mtry -----------------------------------------------------------

def _optmtry_rep(spec: ExperimentSpec, snr: float, si: int, r: int,
                 mtry_grid: tuple) -> list[float]:
    ss = streams.seed_seq(spec.seed, "optmtry", si, r)
    train_ss, test_ss, fit_root = ss.spawn(3)
    train = _make_dataset(spec, snr, spec.train_size, train_ss)
    test = _make_dataset(spec, snr, spec.test_size or spec.train_size, test_ss)
    errs = []
    for mtry, fit_ss in zip(mtry_grid, fit_root.spawn(len(mtry_grid))):
        model = fit_forest(train, TreeConfig(mtry=mtry),
                           n_trees=spec.n_trees, seed=fit_ss)
        errs.append(float(np.mean((test.y - model.predict(test.X)) ** 2)))
    return errs


def run_optimal_mtry(spec: ExperimentSpec, workers: int = 1,
                     log=None) -> list[ResultRecord]:
    """Best mtry per SNR under both aggregation conventions.

    argmin_of_mean picks the mtry with the lowest mean test error;
    mean_of_argmin averages each replication's own best mtry. The grid
    must cover every feasible proportion k/p.
    """
    if spec.metric != "optimal_mtry":
        raise ValueError("spec.metric must be 'optimal_mtry'")
    p = spec.n_features
    grid = spec.estimators.get("forest", {}).get("mtry")
    if grid is None:
        grid = [k / p for k in range(1, p + 1)]
    grid = tuple(float(m) for m in grid)
    want = {round(k / p, 12) for k in range(1, p + 1)}
    if {round(m, 12) for m in grid} != want:
        raise ValueError(f"mtry grid must be exactly the {p} multiples of 1/{p}")
    jobs = [((si, r), _optmtry_rep, (spec, snr, si, r, grid))
            for si, snr in enumerate(spec.snr_grid)
            for r in range(spec.n_reps)]
    flat = run_tasks(jobs, workers)
    errs = np.array(flat).reshape(len(spec.snr_grid), spec.n_reps, len(grid))
    records = []
    for si, snr in enumerate(spec.snr_grid):
        for mi, mtry in enumerate(grid):
            for r in range(spec.n_reps):
                records.append(ResultRecord(spec.id, r, snr, "forest",
                                            f"mtry={_fmt(mtry)}", "test_mse",
                                            errs[si, r, mi]))
            mean, se = _mean_se(errs[si, :, mi])
            records.append(ResultRecord(spec.id, "mean", snr, "forest",
                                        f"mtry={_fmt(mtry)}", "test_mse",
                                        mean, se))
    grid_arr = np.array(grid)
    for si, snr in enumerate(spec.snr_grid):
        per_rep_best = grid_arr[np.argmin(errs[si], axis=1)]
        for r in range(spec.n_reps):
            records.append(ResultRecord(spec.id, r, snr, "forest",
                                        "per_rep_argmin", "optimal_mtry",
                                        per_rep_best[r]))
        mean, se = _mean_se(per_rep_best)
        records.append(ResultRecord(spec.id, "mean", snr, "forest",
                                    "mean_of_argmin", "optimal_mtry", mean, se))
        best = grid_arr[int(np.argmin(errs[si].mean(axis=0)))]
        records.append(ResultRecord(spec.id, "mean", snr, "forest",
                                    "argmin_of_mean", "optimal_mtry", best))
        if log:
            log(f"snr={snr:g} argmin_of_mean={best:g}")
    return records


# --- real-data noise injection ---------------------------------------------

def load_regression_csv(path, response: str | None = None):
    """Load a delimited table for regression.

    Header row required; rows with missing values are dropped; the
    response defaults to the last column and must be numeric; remaining
    non-numeric columns are one-hot encoded.
    """
    df = pd.read_csv(path)
    df = df.dropna(axis=0).reset_index(drop=True)
    if df.shape[0] == 0:
        raise ValueError(f"{path}: no complete rows after dropping missing values")
    if response is None:
        response = df.columns[-1]
    if response not in df.columns:
        raise ValueError(f"{path}: no column named {response!r}")
    y_col = df[response]
    if not pd.api.types.is_numeric_dtype(y_col):
        raise ValueError(f"{path}: response column {response!r} is not numeric")
    Xdf = pd.get_dummies(df.drop(columns=[response]), dtype=np.float64)
    X = np.ascontiguousarray(Xdf.to_numpy(dtype=np.float64))
    y = np.ascontiguousarray(y_col.to_numpy(dtype=np.float64))
    return X, y, list(Xdf.columns)


def _cv_error_pair(X, y, folds, n_trees, fit_streams, cursor) -> tuple[float, float]:
    n = len(y)
    sse = [0.0, 0.0]
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        for which, mtry in enumerate((1.0, 0.33)):
            model = fit_forest((X[mask], y[mask]), TreeConfig(mtry=mtry),
                               n_trees=n_trees, seed=fit_streams[cursor])
            cursor += 1
            pred = model.predict(X[fold])
            sse[which] += float(np.sum((y[fold] - pred) ** 2))
    return sse[0] / n, sse[1] / n


def _real_noise_rep(X, y, sig2y, alphas, n_trees, seed, r) -> list[float]:
    ss = streams.seed_seq(seed, "realnoise", r)
    fold_ss, noise_ss, fit_root = ss.spawn(3)
    n = len(y)
    perm = np.random.default_rng(fold_ss).permutation(n)
    folds = np.array_split(perm, 10)
    # one base draw per replication, scaled per alpha, keeps the contrast
    # across noise levels paired; alpha=0 leaves y untouched exactly
    z = np.random.default_rng(noise_ss).standard_normal(n)
    fit_streams = fit_root.spawn(len(alphas) * 20)
    rtes = []
    for ai, alpha in enumerate(alphas):
        ya = y if alpha == 0 else y + math.sqrt(alpha * sig2y) * z
        err_bagg, err_rf = _cv_error_pair(X, ya, folds, n_trees,
                                          fit_streams, ai * 20)
        rtes.append((err_bagg - err_rf) / sig2y * 100.0)
    return rtes


def run_real_noise(dataset_path, alphas=REAL_ALPHAS, n_reps: int = 20,
                   seed: int = 0, n_trees: int = 500,
                   response: str | None = None, workers: int = 1,
                   experiment_id: str = "realnoise", log=None,
                   ) -> list[ResultRecord]:
    """Noise-injection comparison of bagging vs the mtry=0.33 forest.

    Adds N(0, alpha * var(y)) to the response, scores both forests by
    10-fold CV, and reports the relative error gap in percent of var(y),
    both raw and shifted against the same replication's alpha=0 run.
    """
    X, y, _ = load_regression_csv(dataset_path, response)
    if len(y) < 20:
        raise ValueError(
            f"{dataset_path}: {len(y)} usable rows; 10-fold CV needs >= 20")
    alphas = sorted(set(float(a) for a in alphas))
    if any(a < 0 for a in alphas):
        raise ValueError("alpha values must be nonnegative")
    if alphas[0] != 0.0:
        raise ValueError("alpha grid must include 0 for the shifted baseline")
    sig2y = float(np.var(y, ddof=1))
    jobs = [((r,), _real_noise_rep,
             (X, y, sig2y, tuple(alphas), n_trees, seed, r))
            for r in range(n_reps)]
    flat = run_tasks(jobs, workers)
    rte = np.array(flat)  # (reps, alphas)
    shifted = rte - rte[:, :1]
    records = []
    for ai, alpha in enumerate(alphas):
        for metric, M in (("rte_real", rte), ("shifted_rte", shifted)):
            for r in range(n_reps):
                records.append(ResultRecord(experiment_id, r, alpha,
                                            "bagg-minus-rf", "", metric,
                                            M[r, ai]))
            mean, se = _mean_se(M[:, ai])
            records.append(ResultRecord(experiment_id, "mean", alpha,
                                        "bagg-minus-rf", "", metric, mean, se))
        if log:
            log(f"alpha={alpha:g} mean_shifted_rte={shifted[:, ai].mean():g}")
    return records


# --- selector benchmark -----------------------------------------------------

SELECTOR_ORDER = ("fs", "baggfs", "randfs-0.33", "randfs-tuned", "lasso",
                  "relax", "null")


def relative_test_error(intercept: float, coefs, beta, Sigma,
                        sigma2: float) -> float:
    """Expected test error of a linear fit over the Bayes noise floor.

    The intercept enters as a squared bias because the features have
    mean zero; the null model lands exactly at snr + 1.
    """
    d = np.asarray(coefs, dtype=np.float64) - np.asarray(beta, dtype=np.float64)
    return float((intercept ** 2 + d @ Sigma @ d + sigma2) / sigma2)


def _selector_grids(spec: ExperimentSpec) -> dict:
    setting = spec.setting
    d_cap = min(setting.n - 2, setting.p)
    d_default = 10 if setting.p <= 10 else 50
    depths = spec.estimators.get("fs", {}).get(
        "depth", list(range(0, min(d_default, d_cap) + 1)))
    depths = sorted(int(d) for d in depths)
    if depths[-1] > d_cap:
        raise ValueError(f"depth grid exceeds n - 2 = {setting.n - 2}")
    rf_cfg = spec.estimators.get("randfs", {})
    return {
        "depths": depths,
        "mtry": tuple(rf_cfg.get("mtry", np.linspace(0.1, 1.0, 10).tolist())),
        "ensemble_size": int(rf_cfg.get("ensemble_size", 100)),
        "n_lambda": int(spec.estimators.get("lasso", {}).get(
            "n_lambda", 50 if setting.p <= 10 else 100)),
        "gamma": tuple(spec.estimators.get("relax", {}).get(
            "gamma", np.linspace(0.0, 1.0, 10).tolist())),
    }


def _selbench_rep(spec: ExperimentSpec, snr: float, si: int, r: int,
                  grids: dict) -> dict:
    setting = spec.setting
    ss = streams.seed_seq(spec.seed, "selbench", si, r)
    train_ss, val_ss, fit_root = ss.spawn(3)
    lvl = dg.SnrLevel(snr)
    train = dg.gen_linear(setting, lvl, seed=train_ss)
    val = dg.gen_linear(setting, lvl, seed=val_ss)
    Sigma = dg.toeplitz_sigma(setting.p, setting.rho)
    beta = setting.beta()
    sigma2 = train.sigma2

    def val_mse(model):
        pred = model.intercept + val.X @ model.coefs
        return float(np.mean((val.y - pred) ** 2))

    def rte(model):
        return relative_test_error(model.intercept, model.coefs, beta,
                                   Sigma, sigma2)

    def tune(candidates):
        # candidates: list of (tuned_str, model); first minimum wins
        scores = [val_mse(m) for _, m in candidates]
        best = int(np.argmin(scores))
        return candidates[best]

    depths, B = grids["depths"], grids["ensemble_size"]
    d_max = depths[-1]
    bagg_ss, rf_ss, *tuned_ss = fit_root.spawn(2 + len(grids["mtry"]))
    out = {}

    path = forward_stepwise(train.X, train.y, d_max=d_max)
    avail = [d for d in depths if d < len(path.models)]
    tuned, model = tune([(f"d={d}", path.models[d]) for d in avail])
    out["fs"] = (tuned, rte(model))

    bg = randfs(train, B=B, d=d_max, mtry=1.0, seed=bagg_ss)
    tuned, model = tune([(f"d={d}", bg.model_at(d)) for d in depths])
    out["baggfs"] = (tuned, rte(model))

    rf = randfs(train, B=B, d=d_max, mtry=0.33, seed=rf_ss)
    tuned, model = tune([(f"d={d}", rf.model_at(d)) for d in depths])
    out["randfs-0.33"] = (tuned, rte(model))

    cands = []
    for mtry, m_ss in zip(grids["mtry"], tuned_ss):
        ens = randfs(train, B=B, d=d_max, mtry=mtry, seed=m_ss)
        cands.extend((f"d={d};mtry={_fmt(mtry)}", ens.model_at(d))
                     for d in depths)
    tuned, model = tune(cands)
    out["randfs-tuned"] = (tuned, rte(model))

    lam_grid = lambda_grid(train.X, train.y, n_values=grids["n_lambda"],
                           gamma_values=grids["gamma"])
    lpath = lasso_path(train.X, train.y, lam_grid)
    tuned, model = tune([(f"lam={_fmt(lam)}", m)
                         for lam, m in zip(lpath.keys, lpath.models)])
    out["lasso"] = (tuned, rte(model))

    rmodels = relaxed_lasso_path(train.X, train.y, lam_grid)
    tuned, model = tune([(f"lam={_fmt(lam)};gamma={_fmt(g)}", m)
                         for (lam, g), m in rmodels.items()])
    out["relax"] = (tuned, rte(model))

    out["null"] = ("", float((beta @ Sigma @ beta + sigma2) / sigma2))
    return out


def run_selector_benchmark(spec: ExperimentSpec, workers: int = 1,
                           log=None) -> list[ResultRecord]:
    """Validation-tuned RTE of the selection estimators per SNR.

    Tuning minimizes MSE on an independent validation set the size of
    the training set; the reported metric is the closed-form expected
    test error over the noise floor.
    """
    if spec.metric != "rte_bayes":
        raise ValueError("spec.metric must be 'rte_bayes'")
    if spec.generator != "linear":
        raise ValueError("selector benchmark needs the linear generator")
    grids = _selector_grids(spec)
    jobs = [((si, r), _selbench_rep, (spec, snr, si, r, grids))
            for si, snr in enumerate(spec.snr_grid)
            for r in range(spec.n_reps)]
    flat = run_tasks(jobs, workers)
    records = []
    for si, snr in enumerate(spec.snr_grid):
        reps = flat[si * spec.n_reps:(si + 1) * spec.n_reps]
        for name in SELECTOR_ORDER:
            vals = [rep[name][1] for rep in reps]
            for r, rep in enumerate(reps):
                records.append(ResultRecord(spec.id, r, snr, name,
                                            rep[name][0], "rte_bayes",
                                            rep[name][1]))
            mean, se = _mean_se(vals)
            records.append(ResultRecord(spec.id, "mean", snr, name, "",
                                        "rte_bayes", mean, se))
        if log:
            log(f"snr={snr:g} done")
    return records


# --- ensemble shrinkage checks ---------------------------------------------

def orthonormal_design(n: int, p: int, ss) -> np.ndarray:
    """n x p matrix with orthonormal, mean-zero columns."""
    if n < p + 1:
        raise ValueError("need n >= p + 1 for a mean-zero orthonormal design")
    rng = np.random.default_rng(ss)
    A = np.column_stack([np.ones(n), rng.normal(size=(n, p))])
    Q, _ = np.linalg.qr(A)
    return np.ascontiguousarray(Q[:, 1:])


def _shrinkage_deviation(X, y, beta_ols, m: int, B: int, ss) -> float:
    ens = ols_subsample_ensemble(X, y, m=m, B=B, seed=ss)
    target = (m / X.shape[1]) * beta_ols
    return float(np.max(np.abs(ens.model.coefs - target))
                 / np.max(np.abs(beta_ols)))


def run_theorem_checks(p: int, m_values, t: int | None = None,
                       b_grid=(100, 1000, 10000), n: int = 64,
                       n_reps: int = 10, seed: int = 0, beta=None,
                       ensemble_size: int = 20,
                       experiment_id: str = "theorems",
                       log=None) -> list[ResultRecord]:
    """Convergence checks for the subsampled-OLS shrinkage identities.

    Always measures, on a fixed orthonormal design, how far the
    feature-subsampled ensemble sits from the m/p-shrunk least-squares
    fit as the ensemble grows. With t given it also draws fresh data
    each replication, subsamples t rows per model, and compares the MC
    mean coefficient vector against (m/p) * beta.
    """
    m_values = [int(m) for m in (m_values if np.iterable(m_values) else [m_values])]
    b_grid = sorted(int(b) for b in b_grid)
    if beta is None:
        beta = np.ones(p)
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (p,):
        raise ValueError(f"beta must have length {p}")
    for m in m_values:
        if not 1 <= m < p:
            raise ValueError(f"m must be in [1, p), got {m}")
        if t is not None and m >= t - 1:
            raise ValueError(f"need m < t - 1 (got m={m}, t={t})")

    records = []
    X = orthonormal_design(n, p, streams.seed_seq(seed, "design"))
    y = X @ beta + np.random.default_rng(
        streams.seed_seq(seed, "noise")).standard_normal(n)
    beta_ols = ols(X, y, fit_intercept=False).coefs
    for m in m_values:
        means = []
        for B in b_grid:
            devs = [_shrinkage_deviation(
                        X, y, beta_ols, m, B,
                        streams.seed_seq(seed, "ens", m, B, r))
                    for r in range(n_reps)]
            for r, d in enumerate(devs):
                records.append(ResultRecord(experiment_id, r, B, f"ens-m{m}",
                                            "", "maxnorm_dev", d))
            mean, se = _mean_se(devs)
            means.append(mean)
            records.append(ResultRecord(experiment_id, "mean", B, f"ens-m{m}",
                                        "", "maxnorm_dev", mean, se))
            if log:
                log(f"m={m} B={B} mean_dev={mean:g}")
        if len(b_grid) >= 2:
            slope = float(np.polyfit(np.log(b_grid), np.log(means), 1)[0])
            records.append(ResultRecord(experiment_id, "mean", "", f"ens-m{m}",
                                        "", "loglog_slope", slope))
        records.append(ResultRecord(experiment_id, "mean", "", f"ens-m{m}", "",
                                    "implied_ridge_penalty", (p - m) / m))

    if t is not None:
        for m in m_values:
            coefs = np.empty((n_reps, p))
            for r in range(n_reps):
                rng = np.random.default_rng(
                    streams.seed_seq(seed, "ss-data", m, r))
                Xr = rng.standard_normal((n, p))
                yr = Xr @ beta + rng.standard_normal(n)
                ens = ols_subsample_ensemble(
                    Xr, yr, m=m, t=t, B=ensemble_size,
                    seed=streams.seed_seq(seed, "ss-ens", m, r))
                coefs[r] = ens.model.coefs
            target = (m / p) * beta
            for j in range(p):
                mean, se = _mean_se(coefs[:, j])
                records.append(ResultRecord(experiment_id, "mean", j,
                                            f"ss-ens-m{m}", f"t={t}",
                                            "coef_mean", mean, se))
                records.append(ResultRecord(experiment_id, "mean", j,
                                            f"ss-ens-m{m}", f"t={t}",
                                            "coef_target", target[j]))
            if log:
                log(f"m={m} t={t} subsampled-mean done")
    return records


# --- interpolation probabilities -------------------------------------------

def interp_prob(B: int) -> float:
    """Chance one point lands in at least half of B bootstrap resamples.

    Exact binomial tail P(X >= ceil(B/2)) with X ~ Bin(B, 0.632),
    summed in log space; at-least-half counts an exact tie on even B.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    k0 = (B + 1) // 2
    ks = np.arange(k0, B + 1, dtype=np.float64)
    logp = (gammaln(B + 1) - gammaln(ks + 1) - gammaln(B - ks + 1)
            + ks * math.log(BOOTSTRAP_KEEP)
            + (B - ks) * math.log1p(-BOOTSTRAP_KEEP))
    return float(np.exp(logsumexp(logp)))


def interp_prob_all(B: int, n: int) -> float:
    """Independence approximation of all n points being majority in-bag."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(math.exp(n * math.log(interp_prob(B))))


def interp_table(b_values, n_values, experiment_id: str = "interp",
                 ) -> list[ResultRecord]:
    """Per-point and all-points interpolation probabilities as records."""
    b_values = [int(b) for b in b_values]
    n_values = [int(n) for n in n_values]
    records = []
    for B in b_values:
        records.append(ResultRecord(experiment_id, 0, B, "bootstrap", "",
                                    "p_int", interp_prob(B)))
    for B in b_values:
        for n in n_values:
            records.append(ResultRecord(experiment_id, 0, n, f"B={B}", "",
                                        "p_int_all", interp_prob_all(B, n)))
    return records
