"""Random forests over the CART trees: bootstrap rows, per-split feature
subsampling (ceil(sqrt(d)) by default), averaged leaf frequencies."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..errors import EmptyInput
from .tree import DecisionTree, TreeParams


class RandomForest:
    def __init__(self, task: str, n_classes: int = 0):
        self.task = task
        self.n_classes = n_classes
        self.trees: list[DecisionTree] = []
        self.n_trees = 0

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        n_trees: int,
        params: Optional[TreeParams] = None,
        seed: int = 0,
    ) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        n, d = X.shape
        if n == 0:
            raise EmptyInput("cannot fit a forest on zero rows")
        params = params or TreeParams()
        if params.feature_subsample is None:
            params = TreeParams(params.max_depth, params.min_leaf, math.ceil(math.sqrt(d)))
        if self.task == "classify" and self.n_classes <= 0:
            self.n_classes = int(np.max(y)) + 1

        self.n_trees = n_trees
        self.trees = []
        for child_seed in np.random.SeedSequence(seed).spawn(n_trees):
            rng = np.random.default_rng(child_seed)
            boot = rng.integers(0, n, size=n)
            tree = DecisionTree(self.task, self.n_classes)
            tree.fit(
                X[boot],
                y[boot],
                params,
                rng,
                store_leaf_samples=(self.task == "regress"),
            )
            self.trees.append(tree)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        acc = np.zeros((len(X), self.n_classes))
        for tree in self.trees:
            acc += tree.predict_proba(X)
        return acc / self.n_trees

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        acc = np.zeros(len(X))
        for tree in self.trees:
            acc += tree.predict_value(X)
        return acc / self.n_trees

    def sample_leaf_values(self, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Per row: route through one uniformly chosen tree and draw one of
        the training target values stored at the reached leaf."""
        n = len(X)
        out = np.empty(n, dtype=np.float64)
        which = rng.integers(0, self.n_trees, size=n)
        for t, tree in enumerate(self.trees):
            rows = np.flatnonzero(which == t)
            if len(rows) == 0:
                continue
            leaves = tree.apply(X[rows])
            for leaf in np.unique(leaves):
                members = rows[leaves == leaf]
                pool = tree.leaf_samples[int(leaf)]
                out[members] = pool[rng.integers(0, len(pool), size=len(members))]
        return out

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "n_classes": self.n_classes,
            "n_trees": self.n_trees,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomForest":
        forest = cls(doc["task"], doc["n_classes"])
        forest.n_trees = doc["n_trees"]
        forest.trees = [DecisionTree.from_dict(t) for t in doc["trees"]]
        return forest


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int,
    params: Optional[TreeParams] = None,
    seed: int = 0,
    task: str = "classify",
    n_classes: int = 0,
) -> RandomForest:
    return RandomForest(task, n_classes).fit(X, y, n_trees, params, seed)
