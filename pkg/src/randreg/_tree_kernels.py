"""Numba kernels for regression-tree growth and prediction.

Growth is best-first: the leaf with the largest achievable SSE reduction is
split next, so a tree capped at m terminal nodes is exactly the first m-1
splits of the uncapped tree (same data, same seed).  Candidate features are
drawn with a counter-based hash keyed by (tree seed, node id), which makes the
draw independent of growth order and worker count.

All split-score arithmetic is done on responses centered at the node mean:
the SSE reduction of a split is then sl^2 * m / (nl * nr) with sl the left
child's centered-response sum, which avoids the catastrophic cancellation of
the textbook sum-of-squares form.
"""
import numpy as np
from numba import njit

U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
U64_MIX1 = np.uint64(0xFF51AFD7ED558CCD)
U64_MIX2 = np.uint64(0xC4CEB9FE1A85EC53)
SHIFT33 = np.uint64(33)

# Relative tolerance declaring two split scores (or a score and zero) tied.
SSE_REL_TOL = 1e-12


@njit(cache=True)
def _hash2(a, b):
    # fmix64-style avalanche of a 128-bit key folded to 64 bits.
    x = a * U64_GOLDEN + b
    x ^= x >> SHIFT33
    x *= U64_MIX1
    x ^= x >> SHIFT33
    x *= U64_MIX2
    x ^= x >> SHIFT33
    return x


@njit(cache=True)
def _draw_candidates(tree_seed, node_id, k, p, pool, cand):
    """k distinct features into cand[:k], sorted ascending.

    pool must enter as a permutation of 0..p-1; it is restored on exit.
    """
    base = np.uint64(node_id) << np.uint64(20)
    for i in range(k):
        r = _hash2(tree_seed, base + np.uint64(i))
        j = i + int(r % np.uint64(p - i))
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp
        cand[i] = pool[i]
    # undo the swaps so pool stays the identity permutation
    for i in range(k - 1, -1, -1):
        r = _hash2(tree_seed, base + np.uint64(i))
        j = i + int(r % np.uint64(p - i))
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp
    cand[:k].sort()


@njit(cache=True)
def _prepare_node(node, y, idx, start, end, node_start, node_end, node_n,
                  node_value, node_sse, node_pure):
    node_start[node] = start
    node_end[node] = end
    m = end - start
    node_n[node] = m
    tot = 0.0
    ymin = y[idx[start]]
    ymax = ymin
    for i in range(start, end):
        v = y[idx[i]]
        tot += v
        if v < ymin:
            ymin = v
        if v > ymax:
            ymax = v
    mean = tot / m
    sse = 0.0
    for i in range(start, end):
        z = y[idx[i]] - mean
        sse += z * z
    node_value[node] = mean
    node_sse[node] = sse
    node_pure[node] = ymin == ymax


@njit(cache=True)
def _best_split_for_node(node, X, y, idx, tree_seed, k, min_node,
                         node_start, node_end, node_value, node_sse, node_pure,
                         pool, cand, vals, best_red, best_feat, best_thr):
    """Score the best (feature, threshold) for one node.

    Ties within SSE_REL_TOL * node SSE keep the first candidate encountered,
    which with ascending candidate and threshold order means lowest feature
    index, then lowest threshold.
    """
    best_red[node] = -1.0
    best_feat[node] = -1
    best_thr[node] = 0.0
    start = node_start[node]
    end = node_end[node]
    m = end - start
    if node_pure[node] or m < 2 * min_node:
        return
    sse = node_sse[node]
    tol = SSE_REL_TOL * sse
    mean = node_value[node]
    _draw_candidates(tree_seed, node, k, X.shape[1], pool, cand)
    br = 0.0
    bf = -1
    bt = 0.0
    for ci in range(k):
        j = cand[ci]
        for i in range(m):
            vals[i] = X[idx[start + i], j]
        order = np.argsort(vals[:m])
        sl = 0.0
        for t in range(m - 1):
            o = order[t]
            sl += y[idx[start + o]] - mean
            v = vals[o]
            vn = vals[order[t + 1]]
            if vn <= v:
                continue
            nl = t + 1
            nr = m - nl
            if nl < min_node or nr < min_node:
                continue
            red = sl * sl * m / (nl * nr)
            if red > br + tol:
                br = red
                bf = j
                thr = 0.5 * (v + vn)
                # guard against midpoint rounding onto the right value
                if thr >= vn:
                    thr = v
                bt = thr
    if bf >= 0 and br > tol:
        best_red[node] = br
        best_feat[node] = bf
        best_thr[node] = bt


@njit(cache=True)
def grow_tree(X, y, inbag, k, min_node, cap_leaves, tree_seed):
    """Grow one best-first tree on the in-bag rows.

    cap_leaves <= 0 means unbounded (grow until nothing is splittable).
    Returns (feature, threshold, left, right, value, split_at, node_n,
    n_nodes); feature is -1 at leaves, split_at[v] is the split event index
    at which internal node v was split (-1 for leaves), and value holds every
    node's in-bag response mean.
    """
    n_inbag = inbag.shape[0]
    p = X.shape[1]
    max_leaves = n_inbag if cap_leaves <= 0 else min(cap_leaves, n_inbag)
    alloc = 2 * max_leaves - 1

    feature = np.full(alloc, -1, dtype=np.int64)
    threshold = np.zeros(alloc)
    left = np.full(alloc, -1, dtype=np.int64)
    right = np.full(alloc, -1, dtype=np.int64)
    value = np.zeros(alloc)
    split_at = np.full(alloc, -1, dtype=np.int64)
    node_n = np.zeros(alloc, dtype=np.int64)
    node_start = np.zeros(alloc, dtype=np.int64)
    node_end = np.zeros(alloc, dtype=np.int64)
    node_sse = np.zeros(alloc)
    node_pure = np.zeros(alloc, dtype=np.bool_)
    best_red = np.full(alloc, -1.0)
    best_feat = np.full(alloc, -1, dtype=np.int64)
    best_thr = np.zeros(alloc)

    idx = inbag.copy()
    tmp = np.empty(n_inbag, dtype=np.int64)
    pool = np.arange(p)
    cand = np.empty(k, dtype=np.int64)
    vals = np.empty(n_inbag)

    _prepare_node(0, y, idx, 0, n_inbag, node_start, node_end, node_n,
                  value, node_sse, node_pure)
    _best_split_for_node(0, X, y, idx, tree_seed, k, min_node, node_start,
                         node_end, value, node_sse, node_pure, pool, cand,
                         vals, best_red, best_feat, best_thr)
    n_nodes = 1
    n_leaves = 1
    step = 0
    while n_leaves < max_leaves:
        # pick the open leaf with the largest reduction; earliest-created wins
        # exact ties (sub-tolerance score differences were already collapsed
        # during per-node search, so cross-node ties are exact-value events)
        pick = -1
        pick_red = 0.0
        for v in range(n_nodes):
            if feature[v] < 0 and best_red[v] > pick_red:
                pick = v
                pick_red = best_red[v]
        if pick < 0:
            break
        f = best_feat[pick]
        thr = best_thr[pick]
        s = node_start[pick]
        e = node_end[pick]
        nl = 0
        for i in range(s, e):
            if X[idx[i], f] <= thr:
                tmp[nl] = idx[i]
                nl += 1
        nr = nl
        for i in range(s, e):
            if X[idx[i], f] > thr:
                tmp[nr] = idx[i]
                nr += 1
        for i in range(s, e):
            idx[i] = tmp[i - s]
        lc = n_nodes
        rc = n_nodes + 1
        feature[pick] = f
        threshold[pick] = thr
        left[pick] = lc
        right[pick] = rc
        split_at[pick] = step
        _prepare_node(lc, y, idx, s, s + nl, node_start, node_end,
                      node_n, value, node_sse, node_pure)
        _best_split_for_node(lc, X, y, idx, tree_seed, k, min_node,
                             node_start, node_end, value, node_sse,
                             node_pure, pool, cand, vals, best_red,
                             best_feat, best_thr)
        _prepare_node(rc, y, idx, s + nl, e, node_start, node_end,
                      node_n, value, node_sse, node_pure)
        _best_split_for_node(rc, X, y, idx, tree_seed, k, min_node,
                             node_start, node_end, value, node_sse,
                             node_pure, pool, cand, vals, best_red,
                             best_feat, best_thr)
        n_nodes += 2
        n_leaves += 1
        step += 1
    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes],
            right[:n_nodes], value[:n_nodes], split_at[:n_nodes],
            node_n[:n_nodes], n_nodes)


@njit(cache=True)
def predict_nodes(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n)
    for i in range(n):
        nd = 0
        while feature[nd] >= 0:
            if X[i, feature[nd]] <= threshold[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        out[i] = value[nd]
    return out


@njit(cache=True)
def predict_at_caps(feature, threshold, left, right, value, split_at, X, caps):
    """Predictions of the same fitted tree truncated at several leaf caps.

    caps must be ascending.  A node split at event s exists as an internal
    node of the cap-m tree iff s <= m - 2; split events are increasing along
    any root-to-leaf path, so each row's walk advances monotonically.
    """
    n = X.shape[0]
    ncaps = caps.shape[0]
    out = np.empty((n, ncaps))
    for i in range(n):
        nd = 0
        for c in range(ncaps):
            cap = caps[c]
            while feature[nd] >= 0 and split_at[nd] <= cap - 2:
                if X[i, feature[nd]] <= threshold[nd]:
                    nd = left[nd]
                else:
                    nd = right[nd]
            out[i, c] = value[nd]
    return out


@njit(cache=True)
def accumulate_forest_at_caps(feature, threshold, left, right, value, split_at,
                              X, caps, acc):
    """Add one tree's cap-trajectory predictions into acc (n x ncaps)."""
    n = X.shape[0]
    ncaps = caps.shape[0]
    for i in range(n):
        nd = 0
        for c in range(ncaps):
            cap = caps[c]
            while feature[nd] >= 0 and split_at[nd] <= cap - 2:
                if X[i, feature[nd]] <= threshold[nd]:
                    nd = left[nd]
                else:
                    nd = right[nd]
            acc[i, c] += value[nd]
