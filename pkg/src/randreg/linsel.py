"""Linear model machinery: OLS, forward selection, randomized forward
selection, the lasso family, and subsample-OLS ensembles.

Forward selection and its randomized variant share one greedy engine built on
incrementally re-orthogonalized residuals; randomization only changes which
features are eligible at each step.  Lasso solutions come from coordinate
descent on internally standardized features with coefficients mapped back to
the original scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._cd_kernel import cd_lasso_path
from .datagen import Dataset

CD_TOL = 1e-9
CD_MAX_SWEEPS = 100_000
# relative squared-norm threshold below which a candidate is treated as
# linearly dependent on the current model
COLLINEAR_TOL = 1e-10


@dataclass
class CoefModel:
    """A linear model: intercept plus a p-vector of coefficients."""

    intercept: float
    coefs: np.ndarray
    used_pinv: bool = False

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.coefs)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + np.asarray(X) @ self.coefs


@dataclass
class SelectionPath:
    """Ordered models along a selection route.

    keys are depths (forward selection) or lambda values (lasso); rss and
    converged are populated by the respective producers.
    """

    keys: list
    models: list[CoefModel]
    rss: list[float] | None = None
    converged: list[bool] | None = None

    def __len__(self) -> int:
        return len(self.models)


@dataclass
class LambdaGrid:
    values: np.ndarray
    gamma_values: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("lambda grid must be a nonempty vector")
        if self.values.min() <= 0:
            raise ValueError("lambda values must be positive")
        if np.any(np.diff(self.values) >= 0):
            raise ValueError("lambda values must be strictly decreasing")
        if self.gamma_values is not None:
            g = np.asarray(self.gamma_values, dtype=np.float64)
            if g.min() < 0 or g.max() > 1:
                raise ValueError("gamma values must lie in [0, 1]")
            self.gamma_values = g


def _validate_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError("need X (n x p) and matching y")
    return X, y


def ols(X, y, fit_intercept: bool = True) -> CoefModel:
    """Least squares, with a pseudoinverse fallback flagged on rank loss."""
    X, y = _validate_xy(X, y)
    n, p = X.shape
    if fit_intercept:
        A = np.column_stack([np.ones(n), X])
    else:
        A = X
    sol, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    used_pinv = rank < A.shape[1]
    if fit_intercept:
        return CoefModel(intercept=float(sol[0]), coefs=sol[1:],
                         used_pinv=used_pinv)
    return CoefModel(intercept=0.0, coefs=sol, used_pinv=used_pinv)


def _refit_subset(X, y, active) -> CoefModel:
    n, p = X.shape
    if len(active) == 0:
        return CoefModel(intercept=float(y.mean()), coefs=np.zeros(p))
    A = np.column_stack([np.ones(n), X[:, active]])
    sol, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    coefs = np.zeros(p)
    coefs[list(active)] = sol[1:]
    return CoefModel(intercept=float(sol[0]), coefs=coefs,
                     used_pinv=rank < A.shape[1])


class _GreedyState:
    """Residual and candidate bookkeeping for one forward-selection run.

    Maintains an orthonormal basis of the selected columns (plus the
    constant), the residual of y on that basis, and every feature column
    orthogonalized against the basis, updated one rank at a time.
    """

    def __init__(self, X, y):
        n, p = X.shape
        self.X = X
        self.y = y
        self.n, self.p = n, p
        q0 = np.full(n, 1.0 / math.sqrt(n))
        self.Q = [q0]
        self.resid = y - q0 * (q0 @ y)
        self.Xp = X - q0[:, None] * (q0 @ X)
        self.norms2 = (self.Xp ** 2).sum(axis=0)
        self.base_norms2 = self.norms2.copy()
        self.active: list[int] = []

    def eligible(self, j: int) -> bool:
        return (j not in self.active
                and self.norms2[j] > COLLINEAR_TOL * max(self.base_norms2[j], 1e-300))

    def decrease(self, j: int) -> float:
        num = self.Xp[:, j] @ self.resid
        return num * num / self.norms2[j]

    def select(self, candidates) -> int | None:
        """Best eligible candidate by RSS decrease; ties keep lowest index."""
        best_j = -1
        best_dec = 0.0
        for j in candidates:
            if not self.eligible(j):
                continue
            dec = self.decrease(j)
            if best_j < 0 or dec > best_dec:
                best_j = j
                best_dec = dec
        if best_j < 0:
            return None
        self.add(best_j)
        return best_j

    def add(self, j: int):
        q = self.Xp[:, j].copy()
        # one extra orthogonalization pass keeps the basis tight
        for qi in self.Q:
            q -= qi * (qi @ q)
        q /= math.sqrt(q @ q)
        self.Q.append(q)
        self.resid -= q * (q @ self.resid)
        self.Xp -= q[:, None] * (q @ self.Xp)
        self.norms2 = (self.Xp ** 2).sum(axis=0)
        self.active.append(j)


def forward_stepwise(X, y, d_max: int) -> SelectionPath:
    """Greedy forward selection with an intercept always included.

    Depth 0 is the intercept-only model; each step adds the feature whose
    inclusion most reduces the RSS, refitting all coefficients by least
    squares.
    """
    X, y = _validate_xy(X, y)
    n, p = X.shape
    if not 0 <= d_max <= min(n - 1, p):
        raise ValueError(f"d_max must be in [0, min(n-1, p)] = [0, {min(n - 1, p)}]")
    state = _GreedyState(X, y)
    all_feats = np.arange(p)
    keys = [0]
    models = [_refit_subset(X, y, [])]
    rss = [float(((y - y.mean()) ** 2).sum())]
    for d in range(1, d_max + 1):
        j = state.select(all_feats)
        if j is None:
            break
        model = _refit_subset(X, y, state.active)
        keys.append(d)
        models.append(model)
        rss.append(float(((y - model.predict(X)) ** 2).sum()))
    return SelectionPath(keys=keys, models=models, rss=rss)


@dataclass
class RandFSResult:
    """Averaged randomized-forward-selection fit with its per-depth trail.

    coefs_by_depth[d] is the across-model average coefficient vector after d
    steps; selection_frequency[d, j] is the fraction of models with feature j
    active after d steps.
    """

    coefs_by_depth: np.ndarray
    intercept_by_depth: np.ndarray
    selection_frequency: np.ndarray
    orders: list[list[int]]
    n_models: int

    def model_at(self, depth: int) -> CoefModel:
        return CoefModel(intercept=float(self.intercept_by_depth[depth]),
                         coefs=self.coefs_by_depth[depth].copy())

    @property
    def model(self) -> CoefModel:
        return self.model_at(self.coefs_by_depth.shape[0] - 1)


def _candidate_count(mtry: float, p: int) -> int:
    c = int(math.ceil(mtry * p - 1e-9))
    return min(p, max(1, c))


def randfs(data, B: int, d: int, mtry: float, bootstrap: bool = True,
           seed=0) -> RandFSResult:
    """Randomized forward selection, averaged at the coefficient level.

    Each of the B runs greedily selects features for d steps; at every step
    only a fresh uniform draw of ceil(mtry * p) features is eligible, with
    already-active features discarded from the draw rather than replaced.
    bootstrap=True resamples rows per run (mtry=1 gives bagged forward
    selection); bootstrap=False runs on the original rows.
    """
    if isinstance(data, Dataset):
        X, y = data.X, data.y
    else:
        X, y = data
    X, y = _validate_xy(X, y)
    n, p = X.shape
    if not 0 < mtry <= 1:
        raise ValueError(f"mtry must be in (0, 1], got {mtry}")
    if B < 1:
        raise ValueError("B must be >= 1")
    if not 0 <= d <= n - 2:
        raise ValueError(f"d must be in [0, n-2] = [0, {n - 2}]")
    if d > p:
        raise ValueError(f"d cannot exceed p = {p}")
    c = _candidate_count(mtry, p)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = ss.spawn(B)
    coef_sum = np.zeros((d + 1, p))
    int_sum = np.zeros(d + 1)
    sel_sum = np.zeros((d + 1, p))
    orders = []
    for b in range(B):
        rng = np.random.default_rng(streams[b])
        if bootstrap:
            rows = rng.integers(0, n, size=n)
            Xb, yb = np.ascontiguousarray(X[rows]), y[rows]
        else:
            Xb, yb = X, y
        state = _GreedyState(Xb, yb)
        int_sum[0] += yb.mean()
        active_mask = np.zeros(p, dtype=bool)
        last_model = None
        for step in range(1, d + 1):
            if c >= p:
                cand = np.arange(p)
            else:
                cand = np.sort(rng.choice(p, size=c, replace=False))
            j = state.select(cand)
            if j is not None:
                active_mask[j] = True
                last_model = _refit_subset(Xb, yb, state.active)
            if last_model is None:
                int_sum[step] += yb.mean()
            else:
                coef_sum[step] += last_model.coefs
                int_sum[step] += last_model.intercept
            sel_sum[step] += active_mask
        orders.append(list(state.active))
    return RandFSResult(
        coefs_by_depth=coef_sum / B,
        intercept_by_depth=int_sum / B,
        selection_frequency=sel_sum / B,
        orders=orders,
        n_models=B,
    )


def baggfs(data, B: int, d: int, seed=0) -> RandFSResult:
    """Bagged forward selection: randfs with every feature always eligible."""
    return randfs(data, B=B, d=d, mtry=1.0, bootstrap=True, seed=seed)


# ---------------------------------------------------------------------------
# lasso family

def _standardize(X, y):
    means = X.mean(axis=0)
    Xc = X - means
    scales = np.sqrt((Xc ** 2).mean(axis=0))
    zero = scales <= 0
    safe = np.where(zero, 1.0, scales)
    Xs = Xc / safe
    Xs[:, zero] = 0.0
    ybar = y.mean()
    return np.asfortranarray(Xs), y - ybar, means, safe, zero, ybar


def lambda_max(X, y) -> float:
    """Smallest penalty at which the lasso solution is exactly zero.

    Padded by a relative 1e-9 over max_j |x_j' y| / n so the zero model holds
    at the grid head regardless of summation-order noise in the solver.
    """
    X, y = _validate_xy(X, y)
    Xs, yc, *_ = _standardize(X, y)
    lmax = float(np.abs(Xs.T @ yc).max() / X.shape[0])
    if lmax <= 0:
        raise ValueError("degenerate design: all standardized correlations are zero")
    return lmax * (1 + 1e-9)


def lambda_grid(X, y, n_values: int | None = None,
                gamma_values=None) -> LambdaGrid:
    """Log-spaced grid from lambda_max down to a shape-dependent fraction.

    The floor is 0.0001 * lambda_max when n > p and 0.01 * lambda_max
    otherwise; n_values defaults to 100 (callers pass 50 for small problems).
    """
    X, y = _validate_xy(X, y)
    n, p = X.shape
    if n_values is None:
        n_values = 100
    if n_values < 2:
        raise ValueError("n_values must be >= 2")
    lmax = lambda_max(X, y)
    ratio = 1e-4 if n > p else 1e-2
    values = np.exp(np.linspace(math.log(lmax), math.log(ratio * lmax), n_values))
    values[0] = lmax
    return LambdaGrid(values=values, gamma_values=gamma_values)


def lasso_path(X, y, grid: LambdaGrid) -> SelectionPath:
    """Coordinate-descent lasso down the grid, warm-started, on raw scale.

    Solves (1/2n)||y - b0 - X b||^2 + lam * ||b_std||_1 with internal
    standardization; returned coefficients act on the original features.
    """
    X, y = _validate_xy(X, y)
    n, p = X.shape
    Xs, yc, means, scales, zero, ybar = _standardize(X, y)
    coefs_std, sweeps, conv = cd_lasso_path(
        Xs, yc, np.ascontiguousarray(grid.values), CD_TOL, CD_MAX_SWEEPS
    )
    models = []
    for i in range(grid.values.size):
        b = coefs_std[i] / scales
        b[zero] = 0.0
        intercept = ybar - float(means @ b)
        models.append(CoefModel(intercept=intercept, coefs=b))
    return SelectionPath(keys=list(grid.values), models=models,
                         converged=[bool(c) for c in conv])


def lasso_at(X, y, lam: float) -> CoefModel:
    """Single-penalty lasso solution (one-point grid)."""
    return lasso_path(X, y, LambdaGrid(values=np.array([lam]))).models[0]


def kkt_violation(X, y, lam: float, model: CoefModel) -> float:
    """Worst stationarity violation of a lasso solution, standardized scale.

    Zero for an exact solution: off-support gradients must stay within lam,
    on-support gradients must equal lam times the coefficient sign.
    """
    X, y = _validate_xy(X, y)
    n = X.shape[0]
    Xs, yc, means, scales, zero, ybar = _standardize(X, y)
    b_std = model.coefs * scales
    grad = Xs.T @ (yc - Xs @ b_std) / n
    viol = 0.0
    for j in range(X.shape[1]):
        if zero[j]:
            continue
        if b_std[j] == 0.0:
            viol = max(viol, abs(grad[j]) - lam)
        else:
            viol = max(viol, abs(grad[j] - lam * np.sign(b_std[j])))
    return float(viol)


def relaxed_lasso(X, y, lam: float, gamma: float) -> CoefModel:
    """Blend of the lasso fit and its least-squares refit on the support."""
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    X, y = _validate_xy(X, y)
    lasso = lasso_at(X, y, lam)
    return _relax(X, y, lasso, gamma)


def _relax(X, y, lasso: CoefModel, gamma: float) -> CoefModel:
    support = lasso.support
    if support.size == 0:
        return CoefModel(intercept=float(y.mean()), coefs=np.zeros(X.shape[1]))
    refit = _refit_subset(X, y, support)
    coefs = gamma * lasso.coefs + (1 - gamma) * refit.coefs
    intercept = gamma * lasso.intercept + (1 - gamma) * refit.intercept
    return CoefModel(intercept=float(intercept), coefs=coefs)


def relaxed_lasso_path(X, y, grid: LambdaGrid) -> dict[tuple[float, float], CoefModel]:
    """All (lambda, gamma) blends, with one lasso path and one refit per lambda."""
    if grid.gamma_values is None:
        raise ValueError("grid must carry gamma_values")
    X, y = _validate_xy(X, y)
    base = lasso_path(X, y, grid)
    out = {}
    for lam, lasso in zip(base.keys, base.models):
        support = lasso.support
        refit = (_refit_subset(X, y, support) if support.size
                 else CoefModel(intercept=float(y.mean()), coefs=np.zeros(X.shape[1])))
        for gamma in grid.gamma_values:
            coefs = gamma * lasso.coefs + (1 - gamma) * refit.coefs
            intercept = gamma * lasso.intercept + (1 - gamma) * refit.intercept
            out[(float(lam), float(gamma))] = CoefModel(
                intercept=float(intercept), coefs=coefs)
    return out


# ---------------------------------------------------------------------------
# subsample-OLS ensembles

@dataclass
class SubsampleEnsemble:
    model: CoefModel
    selection_counts: np.ndarray = field(repr=False)
    n_models: int = 0


def ols_subsample_ensemble(X, y, m: int, B: int, t: int | None = None,
                           seed=0) -> SubsampleEnsemble:
    """Average of B no-intercept OLS fits on random feature subsets.

    Each model draws m of p features uniformly; with t given it also draws t
    of n rows without replacement and uses a pseudoinverse fit, which
    requires m < t - 1.
    """
    X, y = _validate_xy(X, y)
    n, p = X.shape
    if not 1 <= m <= p:
        raise ValueError(f"m must be in [1, p] = [1, {p}]")
    if t is not None:
        if not 1 <= t <= n:
            raise ValueError(f"t must be in [1, n] = [1, {n}]")
        if m >= t - 1:
            raise ValueError(
                f"need m < t - 1 (got m={m}, t={t}): the subsampled-ensemble "
                "mean identity only holds strictly below the row budget")
    if B < 1:
        raise ValueError("B must be >= 1")
    rng = np.random.default_rng(
        seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed))
    coef_sum = np.zeros(p)
    counts = np.zeros((p, p), dtype=np.int64)
    for _ in range(B):
        S = np.sort(rng.choice(p, size=m, replace=False))
        if t is None:
            Xb, yb = X[:, S], y
        else:
            T = np.sort(rng.choice(n, size=t, replace=False))
            Xb, yb = X[np.ix_(T, S)], y[T]
        sol, _, _, _ = np.linalg.lstsq(Xb, yb, rcond=None)
        coef_sum[S] += sol
        counts[np.ix_(S, S)] += 1
    return SubsampleEnsemble(
        model=CoefModel(intercept=0.0, coefs=coef_sum / B),
        selection_counts=counts,
        n_models=B,
    )
