"""CART regression trees with random feature eligibility and a leaf cap.

Splitting minimizes within-child SSE over midpoint thresholds; at each node a
fresh uniform draw of candidate features is taken.  Growth is best-first, so
``maxnodes`` caps the number of terminal nodes in a well-defined order and the
same fitted tree can be evaluated at any smaller cap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _tree_kernels as tk
from .datagen import Dataset


@dataclass(frozen=True)
class TreeConfig:
    """Tree-growing knobs.

    mtry is the proportion of features eligible at each node, in (0, 1];
    maxnodes is an optional cap on terminal nodes; min_node_size is the
    smallest allowed in-bag child; bootstrap controls resampling.
    """

    mtry: float = 1.0
    maxnodes: int | None = None
    min_node_size: int = 5
    bootstrap: bool = True

    def __post_init__(self):
        if not 0 < self.mtry <= 1:
            raise ValueError(f"mtry must be in (0, 1], got {self.mtry}")
        if self.maxnodes is not None and self.maxnodes < 1:
            raise ValueError("maxnodes must be a positive integer")
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be a positive integer")

    def n_candidates(self, p: int) -> int:
        """Features drawn per node: max(1, round(mtry * p)), capped at p.

        The round is half-up with a tiny nudge so grid fractions like 0.7
        with p=5 land on the exact-arithmetic value despite float products.
        """
        k = int(math.floor(self.mtry * p + 0.5 + 1e-9))
        return min(max(1, k), p)


def full_depth_config(mtry: float = 1.0, bootstrap: bool = True) -> TreeConfig:
    """Interpolating-tree settings: unit leaves, no cap."""
    return TreeConfig(mtry=mtry, maxnodes=None, min_node_size=1,
                      bootstrap=bootstrap)


@dataclass
class TreeModel:
    """A fitted tree as flat node arrays in creation order.

    feature[v] is -1 at leaves; split_at[v] is the split-event index at which
    internal node v was split (-1 for leaves); value[v] is the in-bag mean of
    every node, so truncating the tree at any number of leaves still predicts
    with proper means.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    split_at: np.ndarray
    node_n: np.ndarray
    inbag_indices: np.ndarray
    p: int

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def _check_columns(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.p:
            raise ValueError(f"X must have {self.p} columns")
        return X

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = self._check_columns(X)
        if X.shape[0] == 0:
            return np.empty(0)
        return tk.predict_nodes(self.feature, self.threshold, self.left,
                                self.right, self.value, X)

    def predict_at_caps(self, X: np.ndarray, caps) -> np.ndarray:
        """Predictions of this tree truncated at each leaf cap (ascending).

        Column c equals the prediction of a tree refit with maxnodes=caps[c]
        and the same seed; growth order is cap-independent.
        """
        X = self._check_columns(X)
        caps = np.asarray(caps, dtype=np.int64)
        if caps.size == 0 or np.any(np.diff(caps) < 0) or caps.min() < 1:
            raise ValueError("caps must be ascending positive integers")
        if X.shape[0] == 0:
            return np.empty((0, caps.size))
        return tk.predict_at_caps(self.feature, self.threshold, self.left,
                                  self.right, self.value, self.split_at, X,
                                  caps)


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, Dataset):
        X, y = data.X, data.y
    else:
        X, y = data
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError("need X (n x p) and matching y")
    if X.shape[0] < 1:
        raise ValueError("need at least one row")
    return X, y


def fit_tree(data, cfg: TreeConfig, seed) -> TreeModel:
    """Grow one tree.

    seed may be an integer or a SeedSequence; it drives both the bootstrap
    resample and the per-node candidate-feature draws.  Fits are pure
    functions of (data, cfg, seed).
    """
    X, y = _as_xy(data)
    n, p = X.shape
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    boot_ss, node_ss = ss.spawn(2)
    if cfg.bootstrap:
        inbag = np.random.default_rng(boot_ss).integers(0, n, size=n, dtype=np.int64)
    else:
        inbag = np.arange(n, dtype=np.int64)
    tree_seed = np.uint64(node_ss.generate_state(1, np.uint64)[0])
    k = cfg.n_candidates(p)
    cap = -1 if cfg.maxnodes is None else int(cfg.maxnodes)
    feature, threshold, left, right, value, split_at, node_n, n_nodes = tk.grow_tree(
        X, y, inbag, k, cfg.min_node_size, cap, tree_seed
    )
    return TreeModel(
        feature=feature.copy(), threshold=threshold.copy(), left=left.copy(),
        right=right.copy(), value=value.copy(), split_at=split_at.copy(),
        node_n=node_n.copy(), inbag_indices=inbag, p=p,
    )


def predict_tree(model: TreeModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)
