import numpy as np
import pytest

from randreg import datagen as dg
from randreg.cart import TreeConfig, fit_tree, full_depth_config, predict_tree


def toy_spike():
    # eleven 1-d points, response zero except a spike at x=6
    X = np.arange(11, dtype=float).reshape(-1, 1)
    y = np.zeros(11)
    y[6] = 1.0
    return X, y


# ---------------------------------------------------------------------------
# independent greedy best-first reference, mask-based and unoptimized

def _sse(v):
    return float(((v - v.mean()) ** 2).sum()) if v.size else 0.0


def _ref_best_split(X, y, rows, min_node):
    yv = y[rows]
    m = rows.size
    sse = _sse(yv)
    if m < 2 * min_node or np.all(yv == yv[0]):
        return None
    tol = 1e-12 * sse
    best = None
    best_red = 0.0
    for j in range(X.shape[1]):
        vals = X[rows, j]
        sv = np.sort(vals)
        for t in range(m - 1):
            if sv[t + 1] <= sv[t]:
                continue
            thr = 0.5 * (sv[t] + sv[t + 1])
            lm = vals <= thr
            nl = int(lm.sum())
            if nl < min_node or m - nl < min_node:
                continue
            red = sse - _sse(yv[lm]) - _sse(yv[~lm])
            if red > best_red + tol:
                best_red = red
                best = (red, j, thr)
    if best is None or best_red <= tol:
        return None
    return best


def ref_best_first_leaves(X, y, max_leaves, min_node):
    """Greedy best-first partition as a list of row-index leaves."""
    leaves = [np.arange(X.shape[0])]
    pending = [_ref_best_split(X, y, leaves[0], min_node)]
    while len(leaves) < max_leaves:
        open_ids = [i for i, s in enumerate(pending) if s is not None]
        if not open_ids:
            break
        pick = max(open_ids, key=lambda i: pending[i][0])
        red, j, thr = pending[pick]
        rows = leaves[pick]
        lm = X[rows, j] <= thr
        lrows, rrows = rows[lm], rows[~lm]
        leaves[pick] = lrows
        pending[pick] = _ref_best_split(X, y, lrows, min_node)
        leaves.append(rrows)
        pending.append(_ref_best_split(X, y, rrows, min_node))
    return leaves


class TestTreeConfig:
    def test_candidate_count_rounding(self):
        assert TreeConfig(mtry=0.7).n_candidates(5) == 4
        assert TreeConfig(mtry=0.5).n_candidates(5) == 3
        assert TreeConfig(mtry=0.33).n_candidates(10) == 3
        assert TreeConfig(mtry=0.33).n_candidates(100) == 33
        assert TreeConfig(mtry=0.1).n_candidates(5) == 1
        assert TreeConfig(mtry=0.01).n_candidates(5) == 1
        assert TreeConfig(mtry=1.0).n_candidates(7) == 7

    def test_validation(self):
        with pytest.raises(ValueError):
            TreeConfig(mtry=0.0)
        with pytest.raises(ValueError):
            TreeConfig(mtry=1.2)
        with pytest.raises(ValueError):
            TreeConfig(maxnodes=0)
        with pytest.raises(ValueError):
            TreeConfig(min_node_size=0)


class TestFitTree:
    def test_spike_interpolation(self):
        X, y = toy_spike()
        t = fit_tree((X, y), full_depth_config(bootstrap=False), seed=0)
        np.testing.assert_array_equal(t.predict(X), y)
        assert t.predict(np.array([[6.0]]))[0] == 1.0

    def test_constant_response_single_leaf(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(40, 3))
        y = np.full(40, 3.25)
        t = fit_tree((X, y), full_depth_config(bootstrap=False), seed=1)
        assert t.n_nodes == 1
        assert t.predict(X[:5]).tolist() == [3.25] * 5

    def test_tiny_node_single_leaf(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(7, 2))
        y = rng.normal(size=7)
        cfg = TreeConfig(mtry=1.0, min_node_size=4, bootstrap=False)
        t = fit_tree((X, y), cfg, seed=0)
        assert t.n_nodes == 1
        assert t.predict(X)[0] == pytest.approx(y.mean())

    def test_maxnodes_one_predicts_mean(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(30, 4))
        y = rng.normal(size=30)
        cfg = TreeConfig(mtry=1.0, maxnodes=1, min_node_size=1, bootstrap=False)
        t = fit_tree((X, y), cfg, seed=0)
        assert t.n_leaves == 1
        assert t.predict(X[:1])[0] == pytest.approx(y.mean())

    def test_matches_reference_greedy_search(self):
        # all-features trees against the mask-based reference implementation
        rng = np.random.default_rng(7)
        X = rng.normal(size=(30, 3))
        y = rng.normal(size=30)
        for max_leaves in (2, 4, 8):
            cfg = TreeConfig(mtry=1.0, maxnodes=max_leaves, min_node_size=2,
                             bootstrap=False)
            t = fit_tree((X, y), cfg, seed=0)
            leaves = ref_best_first_leaves(X, y, max_leaves, 2)
            assert t.n_leaves == len(leaves)
            pred = t.predict(X)
            want = np.empty(30)
            for rows in leaves:
                want[rows] = y[rows].mean()
            np.testing.assert_allclose(pred, want, rtol=0, atol=1e-10)

    def test_reference_agreement_with_duplicated_feature_values(self):
        rng = np.random.default_rng(3)
        X = rng.integers(0, 4, size=(40, 3)).astype(float)
        y = rng.normal(size=40)
        cfg = TreeConfig(mtry=1.0, maxnodes=6, min_node_size=2, bootstrap=False)
        t = fit_tree((X, y), cfg, seed=0)
        leaves = ref_best_first_leaves(X, y, 6, 2)
        want = np.empty(40)
        for rows in leaves:
            want[rows] = y[rows].mean()
        np.testing.assert_allclose(t.predict(X), want, atol=1e-10)

    def test_leaf_values_replay_as_inbag_means(self):
        ds = dg.gen_linear(dg.LOW, dg.SnrLevel(1.0), seed=4)
        t = fit_tree(ds, TreeConfig(mtry=0.33, maxnodes=15), seed=11)
        # route the stored resample through the tree and recompute leaf means
        leaf_rows: dict[int, list[int]] = {}
        for i in t.inbag_indices:
            nd = 0
            while t.feature[nd] >= 0:
                j = t.feature[nd]
                nd = t.left[nd] if ds.X[i, j] <= t.threshold[nd] else t.right[nd]
            leaf_rows.setdefault(nd, []).append(i)
        for nd, rows in leaf_rows.items():
            assert t.value[nd] == pytest.approx(ds.y[rows].mean(), rel=1e-12)
            assert t.node_n[nd] == len(rows)

    def test_cap_respected_and_leaf_sizes(self):
        ds = dg.gen_linear(dg.LOW, dg.SnrLevel(0.7), seed=5)
        t = fit_tree(ds, TreeConfig(mtry=0.67, maxnodes=12, min_node_size=5), seed=2)
        assert t.n_leaves <= 12
        assert t.node_n[t.feature < 0].min() >= 5

    def test_monotone_inbag_sse_in_maxnodes(self):
        ds = dg.gen_linear(dg.LOW, dg.SnrLevel(1.0), seed=6)
        cfg = TreeConfig(mtry=1.0, min_node_size=1, bootstrap=False)
        t = fit_tree(ds, cfg, seed=0)
        caps = np.arange(1, t.n_leaves + 1)
        preds = t.predict_at_caps(ds.X, caps)
        sse = ((preds - ds.y[:, None]) ** 2).sum(axis=0)
        assert np.all(np.diff(sse) <= 1e-9)

    def test_capped_fit_equals_truncated_fit(self):
        # growing to cap m must reproduce the first m-1 splits of the big tree
        ds = dg.gen_linear(dg.LOW, dg.SnrLevel(0.42), seed=8)
        grid = dg.gen_linear(dg.LOW, dg.SnrLevel(0.42), seed=9).X
        big = fit_tree(ds, TreeConfig(mtry=0.33, maxnodes=60, min_node_size=1), seed=3)
        traj = big.predict_at_caps(grid, np.array([5, 10, 20, 40]))
        for c, cap in enumerate([5, 10, 20, 40]):
            small = fit_tree(ds, TreeConfig(mtry=0.33, maxnodes=cap, min_node_size=1), seed=3)
            np.testing.assert_array_equal(small.predict(grid), traj[:, c])

    def test_mtry_one_seed_invariant_without_bootstrap(self):
        ds = dg.gen_linear(dg.LOW, dg.SnrLevel(1.0), seed=10)
        cfg = TreeConfig(mtry=1.0, maxnodes=9, bootstrap=False)
        a = fit_tree(ds, cfg, seed=1)
        b = fit_tree(ds, cfg, seed=999)
        np.testing.assert_array_equal(a.predict(ds.X), b.predict(ds.X))

    def test_row_permutation_invariance(self):
        ds = dg.gen_linear(dg.LOW, dg.SnrLevel(1.0), seed=12)
        perm = np.random.default_rng(13).permutation(ds.n)
        cfg = TreeConfig(mtry=1.0, maxnodes=10, bootstrap=False)
        a = fit_tree((ds.X, ds.y), cfg, seed=0)
        b = fit_tree((ds.X[perm], ds.y[perm]), cfg, seed=0)
        grid = np.random.default_rng(14).normal(size=(50, ds.p))
        np.testing.assert_allclose(a.predict(grid), b.predict(grid), atol=1e-12)

    def test_determinism_same_seed(self):
        ds = dg.gen_mars(120, dg.SnrLevel(1.0), seed=15)
        cfg = TreeConfig(mtry=0.4, maxnodes=20)
        a = fit_tree(ds, cfg, seed=21)
        b = fit_tree(ds, cfg, seed=21)
        assert a.threshold.tobytes() == b.threshold.tobytes()
        assert a.feature.tobytes() == b.feature.tobytes()
        np.testing.assert_array_equal(a.inbag_indices, b.inbag_indices)

    def test_mtry_below_one_varies_with_seed(self):
        ds = dg.gen_linear(dg.MEDIUM, dg.SnrLevel(1.0), seed=16)
        cfg = TreeConfig(mtry=0.1, maxnodes=8, bootstrap=False)
        a = fit_tree(ds, cfg, seed=1)
        b = fit_tree(ds, cfg, seed=2)
        assert not np.array_equal(a.predict(ds.X), b.predict(ds.X))


class TestPredictTree:
    def test_single_leaf_constant(self):
        X = np.zeros((4, 2))
        y = np.array([1.0, 1.0, 1.0, 1.0])
        t = fit_tree((X, y), full_depth_config(bootstrap=False), seed=0)
        np.testing.assert_array_equal(
            predict_tree(t, np.random.default_rng(0).normal(size=(9, 2))),
            np.ones(9),
        )

    def test_column_mismatch_rejected(self):
        X, y = toy_spike()
        t = fit_tree((X, y), full_depth_config(bootstrap=False), seed=0)
        with pytest.raises(ValueError):
            t.predict(np.zeros((3, 2)))

    def test_empty_input(self):
        X, y = toy_spike()
        t = fit_tree((X, y), full_depth_config(bootstrap=False), seed=0)
        assert t.predict(np.empty((0, 1))).shape == (0,)

    def test_caps_validation(self):
        X, y = toy_spike()
        t = fit_tree((X, y), full_depth_config(bootstrap=False), seed=0)
        with pytest.raises(ValueError):
            t.predict_at_caps(X, [5, 3])
        with pytest.raises(ValueError):
            t.predict_at_caps(X, [0, 3])
