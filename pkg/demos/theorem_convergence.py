"""Feature subsampling is ridge in disguise.

On an orthonormal design, averaging least-squares fits over random
m-of-p feature subsets converges to the full OLS solution shrunk by
m/p, which is exactly ridge regression with penalty (p-m)/m. The
deviation decays like 1/sqrt(B). Subsampling rows as well leaves the
expected coefficients at (m/p) * beta.
"""

from randreg import harness as hz


def main():
    records = hz.run_theorem_checks(p=8, m_values=(2, 4, 6), t=20,
                                    b_grid=(100, 1000, 10000), n=64,
                                    n_reps=5, seed=51, ensemble_size=40)
    print("orthonormal design, n=64, p=8, 5 reps per ensemble size\n")
    print("m   B        mean |dev| from (m/p)*ols    ")
    for r in records:
        if r.metric == "maxnorm_dev" and r.rep == "mean":
            m = r.estimator.removeprefix("ens-m")
            print("%s   %-7d  %.5f" % (m, r.param, r.value))
    print()
    for r in records:
        if r.metric == "loglog_slope":
            print("%s: log-log slope %.3f (theory: -0.5)"
                  % (r.estimator, r.value))
        if r.metric == "implied_ridge_penalty":
            print("%s: implied ridge penalty %.2f" % (r.estimator, r.value))
    print("\nrow subsampling, t=20 of n=64, coefficient means vs targets:")
    for r in records:
        if r.metric == "coef_mean":
            print("  %s beta[%d]: %+.3f" % (r.estimator, r.param, r.value))


if __name__ == "__main__":
    main()
