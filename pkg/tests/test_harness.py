import math

import numpy as np
import pandas as pd
import pytest
from scipy.stats import binom

from randreg import datagen as dg
from randreg import harness as hz
from randreg import streams
from randreg.cart import TreeConfig
from randreg.forest import fit_forest


@pytest.fixture(scope="module")
def toy_csv(tmp_path_factory):
    rng = np.random.default_rng(101)
    n = 40
    X = rng.normal(size=(n, 3))
    y = X @ np.array([1.5, -2.0, 0.0]) + rng.normal(size=n)
    df = pd.DataFrame(X, columns=["a", "b", "c"])
    df["resp"] = y
    path = tmp_path_factory.mktemp("data") / "toy.csv"
    df.to_csv(path, index=False)
    return str(path)


class TestSpecValidation:
    def test_rejects_bad_fields(self):
        ok = dict(id="x", generator="mars", snr_grid=[1.0], n_reps=2,
                  seed=0, metric="mse_diff", n=30)
        hz.ExperimentSpec(**ok)
        for patch in ({"generator": "boost"}, {"metric": "auc"},
                      {"snr_grid": []}, {"snr_grid": [0.0]}, {"n_reps": 0},
                      {"seed": None}, {"n": None}, {"id": ""}):
            with pytest.raises(ValueError):
                hz.ExperimentSpec(**{**ok, **patch})
        with pytest.raises(ValueError):
            hz.ExperimentSpec(**{**ok, "estimators": {"fs": {"depth": []}}})

    def test_linear_needs_setting(self):
        with pytest.raises(ValueError):
            hz.ExperimentSpec(id="x", generator="linear", snr_grid=[1.0],
                              n_reps=1, seed=0, metric="rte_bayes")

    def test_snr_levels_normalized(self):
        spec = hz.ExperimentSpec(id="x", generator="mars",
                                 snr_grid=[dg.SnrLevel(2.0), 3.0],
                                 n_reps=1, seed=0, metric="mse_diff", n=30)
        assert spec.snr_grid == [2.0, 3.0]


class TestRunTasks:
    def test_results_in_key_order(self):
        jobs = [((2,), int, ("7",)), ((0,), int, ("5",)), ((1,), int, ("6",))]
        assert hz.run_tasks(jobs) == [5, 6, 7]
        assert hz.run_tasks(jobs, workers=2) == [5, 6, 7]

    def test_duplicate_keys_rejected(self):
        jobs = [((0,), int, ("1",)), ((0,), int, ("2",))]
        with pytest.raises(ValueError):
            hz.run_tasks(jobs)


class TestCsvEmission:
    def test_header_and_formats(self):
        recs = [hz.ResultRecord("e", 0, 0.05, "est", "d=3", "m", 1 / 3),
                hz.ResultRecord("e", "mean", 0.05, "est", "", "m",
                                1.0, 0.25)]
        lines = hz.record_lines(recs)
        assert lines[0] == "experiment,rep,param,estimator,tuned,metric,value,se"
        assert lines[1] == "e,0,0.05,est,d=3,m,0.3333333333,"
        assert lines[2] == "e,mean,0.05,est,,m,1,0.25"

    def test_write_with_manifest(self, tmp_path):
        path = tmp_path / "out.csv"
        recs = [hz.ResultRecord("e", 0, 1, "a", "", "m", 2.0)]
        hz.write_records(recs, path, manifest={"seed": 7, "version": "x"})
        assert path.read_text().startswith(hz.CSV_HEADER + "\n")
        side = (tmp_path / "out.csv.manifest").read_text().splitlines()
        assert "seed=7" in side and "version=x" in side


@pytest.fixture(scope="module")
def sweep_spec():
    return hz.ExperimentSpec(id="sw", generator="mars",
                             snr_grid=[0.05, 6.0], n_reps=3, seed=11,
                             metric="mse_diff", n=60, test_size=80,
                             n_trees=20)


@pytest.fixture(scope="module")
def bench_spec():
    return hz.ExperimentSpec(
        id="sb", generator="linear", snr_grid=[0.09], n_reps=3, seed=6,
        metric="rte_bayes", setting=dg.LOW,
        estimators={"randfs": {"ensemble_size": 15},
                    "lasso": {"n_lambda": 8},
                    "relax": {"gamma": [0.0, 0.5, 1.0]}})


@pytest.fixture(scope="module")
def bench_records(bench_spec):
    return hz.run_selector_benchmark(bench_spec)


class TestSnrSweep:
    @pytest.fixture
    def spec(self, sweep_spec):
        return sweep_spec

    def test_row_shape_and_order(self, spec):
        recs = hz.run_snr_sweep_forest(spec)
        # per snr: n_reps rows then one mean row
        assert len(recs) == 2 * (spec.n_reps + 1)
        assert [r.rep for r in recs[:4]] == [0, 1, 2, "mean"]
        assert recs[3].se is not None

    def test_rerun_and_workers_identical(self, spec):
        a = hz.run_snr_sweep_forest(spec)
        b = hz.run_snr_sweep_forest(spec, workers=2)
        assert hz.record_lines(a) == hz.record_lines(b)

    def test_recorded_diff_matches_refit(self, spec):
        # rebuilding both forests from the same streams must reproduce the
        # recorded difference bit for bit; a forest minus itself is zero
        recs = hz.run_snr_sweep_forest(spec)
        snr, r = spec.snr_grid[0], 1
        ss = streams.seed_seq(spec.seed, "sweep", 0, r)
        train_ss, test_ss, bagg_ss, rf_ss = ss.spawn(4)
        train = dg.gen_mars(spec.n, dg.SnrLevel(snr), seed=train_ss)
        test = dg.gen_mars(spec.test_size, dg.SnrLevel(snr), seed=test_ss)
        errs = []
        for mtry, fss in ((1.0, bagg_ss), (0.33, rf_ss)):
            model = fit_forest(train, TreeConfig(mtry=mtry),
                               n_trees=spec.n_trees, seed=fss)
            errs.append(float(np.mean((test.y - model.predict(test.X)) ** 2)))
        row = next(rec for rec in recs if rec.param == snr and rec.rep == r)
        assert row.value == errs[0] - errs[1]
        assert errs[0] - errs[0] == 0.0

    def test_wrong_metric_rejected(self, spec):
        bad = hz.ExperimentSpec(id="x", generator="mars", snr_grid=[1.0],
                                n_reps=1, seed=0, metric="optimal_mtry", n=30)
        with pytest.raises(ValueError):
            hz.run_snr_sweep_forest(bad)


class TestOptimalMtry:
    def test_single_snr_gives_one_record_per_mode(self):
        spec = hz.ExperimentSpec(id="om", generator="mars", snr_grid=[1.0],
                                 n_reps=2, seed=4, metric="optimal_mtry",
                                 n=40, test_size=40, n_trees=10)
        recs = hz.run_optimal_mtry(spec)
        modes = [r.tuned for r in recs
                 if r.metric == "optimal_mtry" and r.rep == "mean"]
        assert modes == ["mean_of_argmin", "argmin_of_mean"]
        opt_vals = [r.value for r in recs if r.metric == "optimal_mtry"]
        assert all(v in {k / 5 for k in range(1, 6)} or
                   0.1 <= v <= 1.0 for v in opt_vals)

    def test_grid_must_cover_all_proportions(self):
        spec = hz.ExperimentSpec(id="om", generator="mars", snr_grid=[1.0],
                                 n_reps=1, seed=4, metric="optimal_mtry",
                                 n=40, estimators={"forest": {"mtry": [0.2, 1.0]}})
        with pytest.raises(ValueError, match="multiples"):
            hz.run_optimal_mtry(spec)

    def test_linear_wide_setup_fields(self):
        setting = dg.LinearSetting(n=500, p=20, s=10)
        assert (setting.p, setting.s, setting.rho) == (20, 10, 0.35)
        beta = setting.beta()
        assert beta[:10].tolist() == [1.0] * 10
        assert beta[10:].tolist() == [0.0] * 10


class TestRealNoise:
    def test_alpha_zero_shift_is_exactly_zero(self, toy_csv):
        recs = hz.run_real_noise(toy_csv, alphas=(0.0, 0.25), n_reps=2,
                                 seed=5, n_trees=10)
        z = [r.value for r in recs
             if r.metric == "shifted_rte" and r.param == 0.0]
        assert z and all(v == 0.0 for v in z)

    def test_deterministic_across_workers(self, toy_csv):
        a = hz.run_real_noise(toy_csv, alphas=(0.0, 0.5), n_reps=2, seed=5,
                              n_trees=10)
        b = hz.run_real_noise(toy_csv, alphas=(0.0, 0.5), n_reps=2, seed=5,
                              n_trees=10, workers=2)
        assert hz.record_lines(a) == hz.record_lines(b)

    def test_small_table_refused(self, tmp_path):
        path = tmp_path / "tiny.csv"
        pd.DataFrame({"x": range(12), "y": range(12)}).to_csv(path, index=False)
        with pytest.raises(ValueError, match="10-fold"):
            hz.run_real_noise(str(path), n_reps=1, seed=0)

    def test_alpha_grid_needs_zero(self, toy_csv):
        with pytest.raises(ValueError, match="include 0"):
            hz.run_real_noise(toy_csv, alphas=(0.1, 0.5), n_reps=1, seed=0)

    def test_response_variance_matches_hand_sum(self, tmp_path):
        path = tmp_path / "five.csv"
        vals = [1.0, 4.0, 2.0, 8.0, 5.0]
        pd.DataFrame({"x": [0.0] * 5, "y": vals}).to_csv(path, index=False)
        _, y, _ = hz.load_regression_csv(str(path))
        mean = sum(vals) / 5
        hand = sum((v - mean) ** 2 for v in vals) / 4
        assert np.var(y, ddof=1) == pytest.approx(hand, rel=1e-15)


class TestLoader:
    def test_one_hot_and_na_drop(self, tmp_path):
        path = tmp_path / "mixed.csv"
        path.write_text(
            "size,color,resp\n1,red,10\n2,blue,20\n,red,30\n3,red,40\n")
        X, y, names = hz.load_regression_csv(str(path))
        assert len(y) == 3  # NA row dropped
        assert any("color" in c for c in names)
        assert X.shape[1] == 3  # size + two dummy columns
        assert y.tolist() == [10.0, 20.0, 40.0]

    def test_named_response(self, tmp_path):
        path = tmp_path / "named.csv"
        path.write_text("a,b\n1,2\n3,4\n")
        X, y, _ = hz.load_regression_csv(str(path), response="a")
        assert y.tolist() == [1.0, 3.0]
        assert X[:, 0].tolist() == [2.0, 4.0]

    def test_non_numeric_response_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,x\n2,y\n")
        with pytest.raises(ValueError, match="not numeric"):
            hz.load_regression_csv(str(path))


class TestSelectorBenchmark:
    @pytest.fixture
    def spec(self, bench_spec):
        return bench_spec

    @pytest.fixture
    def records(self, bench_records):
        return bench_records

    def test_all_estimators_reported(self, records):
        means = {r.estimator for r in records if r.rep == "mean"}
        assert means == set(hz.SELECTOR_ORDER)

    def test_rte_never_below_bayes_floor(self, records):
        assert all(r.value >= 1.0 for r in records if r.metric == "rte_bayes")

    def test_null_model_hits_snr_plus_one(self, records):
        vals = [r.value for r in records if r.estimator == "null"]
        assert vals and all(abs(v - 1.09) < 1e-10 for v in vals)

    def test_oracle_fit_sits_on_floor(self):
        setting = dg.LOW
        Sigma = dg.toeplitz_sigma(setting.p, setting.rho)
        beta = setting.beta()
        assert hz.relative_test_error(0.0, beta, beta, Sigma, 2.0) == 1.0

    def test_tuned_column_names_choice(self, records):
        row = next(r for r in records
                   if r.estimator == "randfs-tuned" and r.rep == 0)
        assert "d=" in row.tuned and "mtry=" in row.tuned

    def test_depth_grid_guard(self):
        spec = hz.ExperimentSpec(
            id="sb", generator="linear", snr_grid=[1.0], n_reps=1, seed=0,
            metric="rte_bayes", setting=dg.LinearSetting(n=12, p=30, s=5),
            estimators={"fs": {"depth": list(range(0, 12))}})
        with pytest.raises(ValueError, match="n - 2"):
            hz.run_selector_benchmark(spec)

    def test_workers_identical(self, spec, records):
        again = hz.run_selector_benchmark(spec, workers=2)
        assert hz.record_lines(records) == hz.record_lines(again)


class TestTheoremChecks:
    def test_implied_penalty_trivial_case(self):
        recs = hz.run_theorem_checks(p=10, m_values=[5], b_grid=(50,),
                                     n=20, n_reps=2, seed=1)
        pen = next(r for r in recs if r.metric == "implied_ridge_penalty")
        assert pen.value == 1.0

    def test_deviation_shrinks_with_ensemble_size(self):
        recs = hz.run_theorem_checks(p=8, m_values=[4], b_grid=(50, 5000),
                                     n=64, n_reps=4, seed=2)
        means = [r.value for r in recs
                 if r.metric == "maxnorm_dev" and r.rep == "mean"]
        assert means[1] < means[0] / 3

    def test_row_budget_guard(self):
        with pytest.raises(ValueError, match="m < t - 1"):
            hz.run_theorem_checks(p=8, m_values=[6], t=7, n=64, n_reps=1,
                                  seed=0)

    def test_subsampled_mean_near_shrunk_beta(self):
        beta = np.array([1.0, 1.0, 1.0, 0.0, 0.0])
        recs = hz.run_theorem_checks(p=5, m_values=[3], t=30, b_grid=(50,),
                                     n=100, n_reps=200, seed=3, beta=beta,
                                     ensemble_size=10)
        target = {r.param: r.value for r in recs if r.metric == "coef_target"}
        assert target == {0: 0.6, 1: 0.6, 2: 0.6, 3: 0.0, 4: 0.0}
        for r in recs:
            if r.metric == "coef_mean":
                assert abs(r.value - target[r.param]) <= 3 * r.se + 0.02

    def test_orthonormal_design_is_orthonormal(self):
        X = hz.orthonormal_design(30, 6, streams.seed_seq(9, "d"))
        assert np.allclose(X.T @ X, np.eye(6), atol=1e-12)
        assert np.allclose(X.sum(axis=0), 0.0, atol=1e-10)


class TestInterpolation:
    def test_matches_binomial_tail(self):
        for B in (1, 2, 7, 10, 64, 101, 400):
            k0 = (B + 1) // 2
            assert hz.interp_prob(B) == pytest.approx(
                binom.sf(k0 - 1, B, 0.632), abs=1e-12)

    def test_two_resample_hand_value(self):
        # P(X >= 1) for X ~ Bin(2, 0.632): 1 - 0.368^2
        assert hz.interp_prob(2) == pytest.approx(0.864576, abs=1e-12)

    def test_monotone_over_even_b(self):
        vals = [hz.interp_prob(B) for B in range(10, 401, 2)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_all_points_decreasing_in_n(self):
        vals = [hz.interp_prob_all(100, n) for n in range(50, 2001, 50)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 0.05

    def test_power_identity(self):
        assert hz.interp_prob_all(30, 1) == pytest.approx(hz.interp_prob(30))
        assert hz.interp_prob_all(30, 4) == pytest.approx(
            hz.interp_prob(30) ** 4, rel=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            hz.interp_prob(0)
        with pytest.raises(ValueError):
            hz.interp_prob_all(10, 0)

    def test_table_records(self):
        recs = hz.interp_table([100, 150], [50, 100])
        pint = [r for r in recs if r.metric == "p_int"]
        pall = [r for r in recs if r.metric == "p_int_all"]
        assert [r.param for r in pint] == [100, 150]
        assert [(r.estimator, r.param) for r in pall] == [
            ("B=100", 50), ("B=100", 100), ("B=150", 50), ("B=150", 100)]
