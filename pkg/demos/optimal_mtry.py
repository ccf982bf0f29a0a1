"""Tuning mtry is really tuning the amount of regularization.

Runs the full mtry grid at several signal-to-noise ratios and reports
the best-performing eligibility proportion per snr under both
aggregation conventions. The optimal mtry climbs from heavily
randomized toward plain bagging as the signal strengthens.
"""

from randreg import datagen as dg
from randreg import harness as hz


def main():
    snr = [lvl.nu for lvl in dg.snr_grid(5, 0.05, 6.0)]
    spec = hz.ExperimentSpec(id="demo-optmtry", generator="mars",
                             snr_grid=snr, n_reps=12, seed=31,
                             metric="optimal_mtry", n=200, n_trees=80)
    records = hz.run_optimal_mtry(spec)
    by_mode = {"mean_of_argmin": {}, "argmin_of_mean": {}}
    for r in records:
        if r.rep == "mean" and r.tuned in by_mode:
            by_mode[r.tuned][r.param] = r.value
    print("MARS surface, n=200, mtry grid = {0.2, 0.4, 0.6, 0.8, 1.0}\n")
    print("   snr    mean of per-rep argmins    argmin of mean error")
    for s in snr:
        print("%6.2f    %22.2f    %20.2f"
              % (s, by_mode["mean_of_argmin"][s], by_mode["argmin_of_mean"][s]))


if __name__ == "__main__":
    main()
