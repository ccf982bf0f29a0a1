"""Bootstrap-aggregated tree ensembles.

A forest is the plain average of B trees, each grown on its own bootstrap
resample with its own RNG stream.  mtry=1 with bootstrap gives bagging;
smaller mtry gives a random forest.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _tree_kernels as tk
from .cart import TreeConfig, TreeModel, fit_tree

DEFAULT_N_TREES = 500


@dataclass
class ForestModel:
    trees: list[TreeModel]
    cfg: TreeConfig

    def __post_init__(self):
        if len(self.trees) < 1:
            raise ValueError("a forest needs at least one tree")
        p = self.trees[0].p
        if any(t.p != p for t in self.trees):
            raise ValueError("all trees must share the feature count")

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def p(self) -> int:
        return self.trees[0].p

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = self.trees[0]._check_columns(X)
        if X.shape[0] == 0:
            return np.empty(0)
        acc = np.zeros(X.shape[0])
        for t in self.trees:
            acc += tk.predict_nodes(t.feature, t.threshold, t.left, t.right,
                                    t.value, X)
        return acc / self.n_trees

    def predict_at_caps(self, X: np.ndarray, caps) -> np.ndarray:
        """Forest predictions with every tree truncated at each leaf cap."""
        X = self.trees[0]._check_columns(X)
        caps = np.asarray(caps, dtype=np.int64)
        if caps.size == 0 or np.any(np.diff(caps) < 0) or caps.min() < 1:
            raise ValueError("caps must be ascending positive integers")
        acc = np.zeros((X.shape[0], caps.size))
        for t in self.trees:
            tk.accumulate_forest_at_caps(t.feature, t.threshold, t.left,
                                         t.right, t.value, t.split_at, X,
                                         caps, acc)
        return acc / self.n_trees

    def inbag_fraction(self) -> float:
        """Mean fraction of training rows appearing in a tree's resample."""
        n = self.trees[0].inbag_indices.shape[0]
        fracs = [np.unique(t.inbag_indices).size / n for t in self.trees]
        return float(np.mean(fracs))


def fit_forest(data, cfg: TreeConfig, n_trees: int = DEFAULT_N_TREES,
               seed=0) -> ForestModel:
    """Fit B trees on independent streams derived from one seed.

    Tree b always receives the b-th spawned child stream, so results do not
    depend on how the loop is scheduled.
    """
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(n_trees)
    trees = [fit_tree(data, cfg, child) for child in children]
    return ForestModel(trees=trees, cfg=cfg)


def predict_forest(model: ForestModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)
