"""Gradient-boosted trees with softmax log loss (classification) or squared
loss (regression). One regression tree per class per round; leaf values are
second-order Newton steps with an L2 penalty of 1.0 on leaf weights."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import EmptyInput
from .tree import DecisionTree, TreeParams

_LEAF_L2 = 1.0
_EPS = 1e-12


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class GradientBoostedClassifier:
    def __init__(self, n_classes: int = 0):
        self.n_classes = n_classes
        self.n_rounds = 0
        self.max_depth = 0
        self.learning_rate = 0.1
        self.base_scores: Optional[np.ndarray] = None
        self.trees: list[list[DecisionTree]] = []  # [round][class]
        self.constant_class: Optional[int] = None

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        n_rounds: int = 80,
        max_depth: int = 6,
        learning_rate: float = 0.1,
        seed: int = 0,
        min_leaf: int = 1,
    ) -> "GradientBoostedClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n = len(X)
        if n == 0:
            raise EmptyInput("cannot fit on zero rows")
        if self.n_classes <= 0:
            self.n_classes = int(y.max()) + 1
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate

        present = np.unique(y)
        if len(present) == 1:
            self.constant_class = int(present[0])
            return self

        K = self.n_classes
        priors = np.bincount(y, minlength=K) / n
        self.base_scores = np.log(np.clip(priors, _EPS, None))
        onehot = np.zeros((n, K))
        onehot[np.arange(n), y] = 1.0

        params = TreeParams(max_depth=max_depth, min_leaf=min_leaf, feature_subsample=None)
        rng = np.random.default_rng(seed)
        scores = np.tile(self.base_scores, (n, 1))
        self.trees = []
        for _ in range(n_rounds):
            P = _softmax(scores)
            round_trees = []
            for k in range(K):
                residual = onehot[:, k] - P[:, k]
                hess = np.maximum(P[:, k] * (1.0 - P[:, k]), _EPS)
                tree = DecisionTree("regress")
                tree.fit(X, residual, params, rng)
                leaves = tree.apply(X)
                g_sum = np.bincount(leaves, weights=residual, minlength=len(tree.feature))
                h_sum = np.bincount(leaves, weights=hess, minlength=len(tree.feature))
                newton = {
                    int(leaf): g_sum[leaf] / (h_sum[leaf] + _LEAF_L2)
                    for leaf in np.unique(leaves)
                }
                tree.set_leaf_values(newton)
                scores[:, k] += learning_rate * tree.predict_value(X)
                round_trees.append(tree)
            self.trees.append(round_trees)
        return self

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        n = len(X)
        if self.constant_class is not None:
            scores = np.full((n, self.n_classes), -1e9)
            scores[:, self.constant_class] = 0.0
            return scores
        scores = np.tile(self.base_scores, (n, 1))
        for round_trees in self.trees:
            for k, tree in enumerate(round_trees):
                scores[:, k] += self.learning_rate * tree.predict_value(X)
        return scores

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.constant_class is not None:
            out = np.zeros((len(X), self.n_classes))
            out[:, self.constant_class] = 1.0
            return out
        return _softmax(self.decision_scores(X))

    def to_dict(self) -> dict:
        return {
            "kind": "gbt_classifier",
            "n_classes": self.n_classes,
            "n_rounds": self.n_rounds,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "constant_class": self.constant_class,
            "base_scores": None if self.base_scores is None else self.base_scores.tolist(),
            "trees": [[t.to_dict() for t in rnd] for rnd in self.trees],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GradientBoostedClassifier":
        model = cls(doc["n_classes"])
        model.n_rounds = doc["n_rounds"]
        model.max_depth = doc["max_depth"]
        model.learning_rate = doc["learning_rate"]
        model.constant_class = doc["constant_class"]
        if doc["base_scores"] is not None:
            model.base_scores = np.array(doc["base_scores"])
        model.trees = [[DecisionTree.from_dict(t) for t in rnd] for rnd in doc["trees"]]
        return model


class GradientBoostedRegressor:
    def __init__(self):
        self.n_rounds = 0
        self.max_depth = 0
        self.learning_rate = 0.1
        self.base_value = 0.0
        self.trees: list[DecisionTree] = []
        self.residual_pool: Optional[np.ndarray] = None  # y - final fit, for samplers

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        n_rounds: int = 80,
        max_depth: int = 6,
        learning_rate: float = 0.1,
        seed: int = 0,
        min_leaf: int = 1,
    ) -> "GradientBoostedRegressor":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if len(X) == 0:
            raise EmptyInput("cannot fit on zero rows")
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.base_value = float(np.mean(y))

        params = TreeParams(max_depth=max_depth, min_leaf=min_leaf, feature_subsample=None)
        rng = np.random.default_rng(seed)
        pred = np.full(len(y), self.base_value)
        self.trees = []
        for _ in range(n_rounds):
            residual = y - pred
            if np.allclose(residual, 0.0):
                break
            tree = DecisionTree("regress")
            tree.fit(X, residual, params, rng)
            pred += learning_rate * tree.predict_value(X)
            self.trees.append(tree)
        self.residual_pool = np.array(y - pred, dtype=np.float64)
        return self

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        pred = np.full(len(X), self.base_value)
        for tree in self.trees:
            pred += self.learning_rate * tree.predict_value(X)
        return pred

    def to_dict(self) -> dict:
        return {
            "kind": "gbt_regressor",
            "n_rounds": self.n_rounds,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "base_value": self.base_value,
            "residual_pool": self.residual_pool.tolist(),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GradientBoostedRegressor":
        model = cls()
        model.n_rounds = doc["n_rounds"]
        model.max_depth = doc["max_depth"]
        model.learning_rate = doc["learning_rate"]
        model.base_value = doc["base_value"]
        model.residual_pool = np.array(doc["residual_pool"])
        model.trees = [DecisionTree.from_dict(t) for t in doc["trees"]]
        return model


def fit_gbt(
    X: np.ndarray,
    y: np.ndarray,
    n_rounds: int = 80,
    max_depth: int = 6,
    learning_rate: float = 0.1,
    seed: int = 0,
    n_classes: int = 0,
) -> GradientBoostedClassifier:
    """Multiclass softmax boosting: 80 rounds, depth 6, learning rate 0.1
    by default."""
    return GradientBoostedClassifier(n_classes).fit(
        X, y, n_rounds, max_depth, learning_rate, seed
    )
