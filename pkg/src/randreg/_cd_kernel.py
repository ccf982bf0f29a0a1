"""Cyclic coordinate descent for the lasso on standardized features."""
import numpy as np
from numba import njit


@njit(cache=True)
def cd_lasso_path(Xs, yc, lambdas, tol, max_sweeps):
    """Solve (1/2n)||yc - Xs b||^2 + lam ||b||_1 down a decreasing grid.

    Columns of Xs must have mean 0 and mean-square 1 (or be identically
    zero), so each coordinate update is a plain soft threshold.  Warm starts
    carry the previous solution to the next lambda.
    """
    n, p = Xs.shape
    nl = lambdas.shape[0]
    coefs = np.zeros((nl, p))
    sweeps = np.zeros(nl, dtype=np.int64)
    conv = np.zeros(nl, dtype=np.bool_)
    beta = np.zeros(p)
    r = yc.copy()
    for li in range(nl):
        lam = lambdas[li]
        it = 0
        while it < max_sweeps:
            it += 1
            max_delta = 0.0
            for j in range(p):
                bj = beta[j]
                dot = 0.0
                for i in range(n):
                    dot += Xs[i, j] * r[i]
                rho = bj + dot / n
                if rho > lam:
                    bnew = rho - lam
                elif rho < -lam:
                    bnew = rho + lam
                else:
                    bnew = 0.0
                if bnew != bj:
                    d = bj - bnew
                    for i in range(n):
                        r[i] += Xs[i, j] * d
                    beta[j] = bnew
                    if abs(d) > max_delta:
                        max_delta = abs(d)
            if max_delta < tol:
                conv[li] = True
                break
        sweeps[li] = it
        for j in range(p):
            coefs[li, j] = beta[j]
    return coefs, sweeps, conv
