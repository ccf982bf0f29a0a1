"""Monte-Carlo degrees of freedom for arbitrary fit-predict procedures.

The estimator holds the design X and the signal f fixed, redraws Gaussian
noise per replication, and measures (1/sigma^2) sum_i Cov(yhat_i, y_i) with
the unbiased sample covariance across replications.  A per-replication
decomposition of the same sum supplies a Monte-Carlo standard error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import streams
from .cart import TreeConfig
from .datagen import Dataset, LinearSetting, SnrLevel, gen_linear
from .forest import fit_forest
from .linsel import forward_stepwise, lambda_grid, lasso_path, randfs, _relax

DEFAULT_N_REPS = 100


@dataclass
class DofEstimate:
    value: float
    se: float
    n_reps: int


@dataclass
class DofCurve:
    """dof along one complexity axis for one fitted procedure."""

    complexity_axis: list[float]
    dof_estimates: list[float]
    se: list[float]
    n_reps: int
    fitter_id: str

    def __post_init__(self):
        if not (len(self.complexity_axis) == len(self.dof_estimates) == len(self.se)):
            raise ValueError("curve fields must have equal lengths")
        if self.n_reps < 2:
            raise ValueError("n_reps must be >= 2")


def _dof_from_matrices(P: np.ndarray, Y: np.ndarray, sigma2: float) -> tuple[float, float]:
    """dof and MC se from stacked predictions and responses (reps x n).

    Per-rep terms a_r average exactly to the unbiased covariance sum, so
    their spread yields the standard error of the estimate.
    """
    R = P.shape[0]
    Pc = P - P.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    terms = (Pc * Yc).sum(axis=1) * (R / (R - 1)) / sigma2
    return float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(R))


def make_noise(n: int, sigma2: float, n_reps: int, seed: int) -> np.ndarray:
    """The (n_reps x n) noise matrix; row r comes from stream (seed, 'noise', r)."""
    E = np.empty((n_reps, n))
    for r in range(n_reps):
        E[r] = streams.rng_for(seed, "noise", r).normal(0.0, math.sqrt(sigma2), n)
    return E


def estimate_dof(fitter, X: np.ndarray, f: np.ndarray, sigma2: float,
                 n_reps: int = DEFAULT_N_REPS, seed: int = 0) -> DofEstimate:
    """Monte-Carlo dof of ``fitter(X, y, seed) -> in-sample predictions``.

    X and f stay fixed; replication r sees y = f + noise from its own stream
    and the fitter receives an independent derived stream.
    """
    X = np.asarray(X, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    if n_reps < 2:
        raise ValueError("n_reps must be >= 2")
    n = X.shape[0]
    E = make_noise(n, sigma2, n_reps, seed)
    P = np.empty((n_reps, n))
    for r in range(n_reps):
        y = f + E[r]
        try:
            P[r] = fitter(X, y, streams.seed_seq(seed, "fit", r))
        except Exception as e:
            raise RuntimeError(f"fitter failed on replication {r}") from e
    value, se = _dof_from_matrices(P, f + E, sigma2)
    return DofEstimate(value=value, se=se, n_reps=n_reps)


def dof_curve_forest(setting: LinearSetting | Dataset, mtry_list, maxnodes_list,
                     snr: SnrLevel | None = None, n_reps: int = DEFAULT_N_REPS,
                     seed: int = 0, n_trees: int = 200) -> list[DofCurve]:
    """dof-vs-maxnodes curves, one per mtry, on a frozen design.

    Each (rep, mtry) pair grows a single forest at the largest cap with unit
    leaves and reads off predictions at every smaller cap, which is exact
    under best-first growth.  Noise replications are shared across mtry
    values so the curves are directly comparable.
    """
    if isinstance(setting, Dataset):
        ds = setting
        if ds.f is None or ds.sigma2 is None:
            raise ValueError("dataset must carry f and sigma2")
    else:
        if snr is None:
            raise ValueError("snr is required when passing a setting")
        ds = gen_linear(setting, snr, streams.seed_seq(seed, "data"))
    caps = np.asarray(sorted(int(m) for m in maxnodes_list), dtype=np.int64)
    if caps.size == 0 or caps.min() < 1:
        raise ValueError("maxnodes_list must be positive integers")
    X, f, sigma2 = ds.X, ds.f, float(ds.sigma2)
    n = X.shape[0]
    E = make_noise(n, sigma2, n_reps, seed)
    curves = []
    for mi, mtry in enumerate(mtry_list):
        cfg = TreeConfig(mtry=float(mtry), maxnodes=int(caps.max()),
                         min_node_size=1, bootstrap=True)
        P = np.empty((n_reps, n, caps.size))
        for r in range(n_reps):
            fo = fit_forest(Dataset(X=X, y=f + E[r]), cfg, n_trees=n_trees,
                            seed=streams.seed_seq(seed, "fit", r, mi))
            P[r] = fo.predict_at_caps(X, caps)
        dofs, ses = [], []
        for c in range(caps.size):
            value, se = _dof_from_matrices(P[:, :, c], f + E, sigma2)
            dofs.append(value)
            ses.append(se)
        curves.append(DofCurve(
            complexity_axis=[float(c) for c in caps], dof_estimates=dofs,
            se=ses, n_reps=n_reps, fitter_id=f"forest-mtry-{mtry}"))
    return curves


def dof_curve_selectors(setting: LinearSetting | Dataset, depths,
                        snr: SnrLevel | None = None,
                        n_reps: int = DEFAULT_N_REPS, seed: int = 0,
                        ensemble_size: int = 100,
                        mtry_values=(0.1, 0.33, 0.67),
                        gamma_values=(0.0, 0.5, 1.0),
                        n_lambda: int = 50) -> list[DofCurve]:
    """dof curves for FS, BaggFS, RandFS, lasso, and relaxed lasso.

    The x-coordinate is the mean count of nonzero coefficients at each grid
    point (for ensembles, nonzeros of the averaged vector).  The lambda grid
    is frozen from the noiseless signal so every replication fits the same
    penalties.
    """
    if isinstance(setting, Dataset):
        ds = setting
        if ds.f is None or ds.sigma2 is None:
            raise ValueError("dataset must carry f and sigma2")
    else:
        if snr is None:
            raise ValueError("snr is required when passing a setting")
        ds = gen_linear(setting, snr, streams.seed_seq(seed, "data"))
    X, f, sigma2 = ds.X, ds.f, float(ds.sigma2)
    n, p = X.shape
    depths = sorted(int(d) for d in depths)
    if depths and (depths[0] < 0 or depths[-1] > min(n - 2, p)):
        raise ValueError("depths must lie in [0, min(n-2, p)]")
    d_max = depths[-1] if depths else 0
    E = make_noise(n, sigma2, n_reps, seed)
    Y = f + E
    grid = lambda_grid(X, f, n_values=n_lambda)

    # prediction stacks keyed by (estimator id, grid position)
    ids = (["fs", "baggfs"]
           + [f"randfs-{m:g}" for m in mtry_values]
           + ["lasso"] + [f"relax-{g:g}" for g in gamma_values])
    n_lam = grid.values.size
    axis_len = {i: len(depths) for i in ids}
    for i in ids:
        if i == "lasso" or i.startswith("relax-"):
            axis_len[i] = n_lam
    P = {i: np.empty((n_reps, n, axis_len[i])) for i in ids}
    nz = {i: np.zeros((n_reps, axis_len[i])) for i in ids}

    for r in range(n_reps):
        y = Y[r]
        path = forward_stepwise(X, y, d_max)
        for gi, d in enumerate(depths):
            model = path.models[min(d, len(path) - 1)]
            P["fs"][r, :, gi] = model.predict(X)
            nz["fs"][r, gi] = model.support.size
        for mi, (ident, mtry) in enumerate(
                [("baggfs", 1.0)] + [(f"randfs-{m:g}", m) for m in mtry_values]):
            res = randfs(Dataset(X=X, y=y), B=ensemble_size, d=d_max,
                         mtry=float(mtry), bootstrap=True,
                         seed=streams.seed_seq(seed, "fit", r, ident))
            for gi, d in enumerate(depths):
                model = res.model_at(d)
                P[ident][r, :, gi] = model.predict(X)
                nz[ident][r, gi] = model.support.size
        lpath = lasso_path(X, y, grid)
        for li, model in enumerate(lpath.models):
            P["lasso"][r, :, li] = model.predict(X)
            nz["lasso"][r, li] = model.support.size
        for g in gamma_values:
            ident = f"relax-{g:g}"
            for li, model in enumerate(lpath.models):
                rel = _relax(X, y, model, float(g))
                P[ident][r, :, li] = rel.predict(X)
                nz[ident][r, li] = rel.support.size

    curves = []
    for ident in ids:
        dofs, ses = [], []
        for gi in range(axis_len[ident]):
            value, se = _dof_from_matrices(P[ident][:, :, gi], Y, sigma2)
            dofs.append(value)
            ses.append(se)
        curves.append(DofCurve(
            complexity_axis=[float(v) for v in nz[ident].mean(axis=0)],
            dof_estimates=dofs, se=ses, n_reps=n_reps, fitter_id=ident))
    return curves
