"""Can a bagged interpolator interpolate?

Even if every tree interpolates its own resample, the ensemble only
interpolates a training point when that point lands in at least half
of the B resamples. This script prints the exact per-point binomial
probability and the chance that all n points manage it at once, which
collapses toward zero for realistic n and B.
"""

from randreg import harness as hz


def main():
    print(" B     P(one point majority in-bag)")
    for b in (2, 10, 25, 50, 100, 200, 400):
        print("%4d   %.6f" % (b, hz.interp_prob(b)))
    print("\n   n    P(all points, B=100)   P(all points, B=200)")
    for n in (10, 50, 100, 500, 1000, 2000):
        print("%5d   %20.6g   %20.6g"
              % (n, hz.interp_prob_all(100, n), hz.interp_prob_all(200, n)))
    print("\nper-point odds look safe; whole-sample odds vanish")


if __name__ == "__main__":
    main()
