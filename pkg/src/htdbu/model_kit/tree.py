"""CART-style binary decision trees on real-encoded feature matrices.

Split search is a sorted-threshold scan, vectorized across the candidate
features of a node: Gini reduction for classification, variance (SSE)
reduction for regression. Categorical features arrive as ordinal codes, so
thresholds apply uniformly. Left branch takes x <= threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import EmptyInput

_LEAF = -1


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 12
    min_leaf: int = 2
    feature_subsample: Optional[int] = None  # candidate features per split; None = all


class DecisionTree:
    """A fitted tree stored as flat node arrays for vectorized routing.

    Classification leaves keep class-count vectors; regression leaves keep
    the mean plus (optionally) the training target values routed to them,
    which downstream samplers draw from.
    """

    def __init__(self, task: str, n_classes: int = 0):
        if task not in ("classify", "regress"):
            raise ValueError(f"bad task {task!r}")
        self.task = task
        self.n_classes = n_classes
        self.feature: np.ndarray = np.empty(0, dtype=np.int32)
        self.threshold: np.ndarray = np.empty(0, dtype=np.float64)
        self.left: np.ndarray = np.empty(0, dtype=np.int32)
        self.right: np.ndarray = np.empty(0, dtype=np.int32)
        self.class_counts: Optional[np.ndarray] = None  # (n_nodes, K), leaves only
        self.node_value: Optional[np.ndarray] = None  # (n_nodes,), leaves only
        self.leaf_samples: dict[int, np.ndarray] = {}

    # ------------------------------------------------------------------ fit

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        params: TreeParams,
        rng: Optional[np.random.Generator] = None,
        store_leaf_samples: bool = False,
    ) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        n, d = X.shape
        if n == 0:
            raise EmptyInput("cannot fit a tree on zero rows")
        if len(y) != n:
            raise ValueError("X and y length mismatch")
        if self.task == "classify":
            y = np.asarray(y, dtype=np.int64)
            if self.n_classes <= 0:
                self.n_classes = int(y.max()) + 1
        else:
            y = np.asarray(y, dtype=np.float64)
        if rng is None:
            rng = np.random.default_rng(0)

        feature, threshold, left, right = [], [], [], []
        counts_rows, value_rows = [], []
        leaf_samples: dict[int, np.ndarray] = {}

        def new_node() -> int:
            feature.append(_LEAF)
            threshold.append(0.0)
            left.append(_LEAF)
            right.append(_LEAF)
            if self.task == "classify":
                counts_rows.append(None)
            else:
                value_rows.append(0.0)
            return len(feature) - 1

        def make_leaf(node: int, idx: np.ndarray) -> None:
            if self.task == "classify":
                counts_rows[node] = np.bincount(y[idx], minlength=self.n_classes).astype(np.float64)
            else:
                value_rows[node] = float(np.mean(y[idx]))
                if store_leaf_samples:
                    leaf_samples[node] = np.array(y[idx], dtype=np.float64)

        root = new_node()
        stack = [(root, np.arange(n), 0)]
        while stack:
            node, idx, depth = stack.pop()
            n_node = len(idx)
            pure = (
                np.all(y[idx] == y[idx[0]])
                if self.task == "classify"
                else np.all(y[idx] == y[idx][0])
            )
            if depth >= params.max_depth or n_node < 2 * params.min_leaf or pure:
                make_leaf(node, idx)
                continue

            if params.feature_subsample is not None and params.feature_subsample < d:
                feats = np.sort(rng.choice(d, size=params.feature_subsample, replace=False))
            else:
                feats = np.arange(d)

            best = self._best_split(X, y, idx, feats, params.min_leaf)
            if best is None:
                make_leaf(node, idx)
                continue
            f, thr = best
            go_left = X[idx, f] <= thr
            left_idx, right_idx = idx[go_left], idx[~go_left]
            feature[node] = int(f)
            threshold[node] = float(thr)
            l, r = new_node(), new_node()
            left[node], right[node] = l, r
            # push right first so the left subtree is built first
            stack.append((r, right_idx, depth + 1))
            stack.append((l, left_idx, depth + 1))

        self.feature = np.array(feature, dtype=np.int32)
        self.threshold = np.array(threshold, dtype=np.float64)
        self.left = np.array(left, dtype=np.int32)
        self.right = np.array(right, dtype=np.int32)
        if self.task == "classify":
            mat = np.zeros((len(feature), self.n_classes), dtype=np.float64)
            for i, row in enumerate(counts_rows):
                if row is not None:
                    mat[i] = row
            self.class_counts = mat
        else:
            self.node_value = np.array(value_rows, dtype=np.float64)
            self.leaf_samples = leaf_samples
        return self

    def _best_split(self, X, y, idx, feats, min_leaf):
        n = len(idx)
        sub = X[np.ix_(idx, feats)]
        order = np.argsort(sub, axis=0, kind="stable")
        sv = np.take_along_axis(sub, order, axis=0)
        ys = y[idx][order]  # (n, f)

        left_n = np.arange(1, n, dtype=np.float64)[:, None]
        right_n = n - left_n
        valid = sv[1:] > sv[:-1]
        valid &= (left_n >= min_leaf) & (right_n >= min_leaf)
        if not valid.any():
            return None

        if self.task == "classify":
            onehot = ys[:, :, None] == np.arange(self.n_classes)
            prefix = np.cumsum(onehot, axis=0, dtype=np.float64)
            total = prefix[-1]
            lc = prefix[:-1]
            rc = total[None, :, :] - lc
            gini_l = 1.0 - np.sum((lc / left_n[:, :, None]) ** 2, axis=2)
            gini_r = 1.0 - np.sum((rc / right_n[:, :, None]) ** 2, axis=2)
            score = left_n * gini_l + right_n * gini_r  # lower is better
            parent = n * (1.0 - np.sum((total[0] / n) ** 2))
        else:
            ps = np.cumsum(ys, axis=0)
            pq = np.cumsum(ys * ys, axis=0)
            ts, tq = ps[-1], pq[-1]
            sse_l = np.maximum(pq[:-1] - ps[:-1] ** 2 / left_n, 0.0)
            sse_r = np.maximum((tq - pq[:-1]) - (ts - ps[:-1]) ** 2 / right_n, 0.0)
            score = sse_l + sse_r
            parent = max(float(tq[0] - ts[0] ** 2 / n), 0.0)

        score = np.where(valid, score, np.inf)
        flat = int(np.argmin(score))
        i, j = flat // score.shape[1], flat % score.shape[1]
        if not np.isfinite(score[i, j]) or parent - score[i, j] <= 1e-12:
            return None
        thr = 0.5 * (sv[i, j] + sv[i + 1, j])
        # guard against midpoint rounding onto the upper value
        if thr >= sv[i + 1, j]:
            thr = sv[i, j]
        return int(feats[j]), float(thr)

    # ------------------------------------------------------------- predict

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for every row."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            f = self.feature[node]
            live = f >= 0
            if not live.any():
                return node
            rows = np.flatnonzero(live)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        counts = self.class_counts[self.apply(X)]
        return counts / counts.sum(axis=1, keepdims=True)

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.node_value[self.apply(X)]

    def set_leaf_values(self, values: dict[int, float]) -> None:
        """Overwrite leaf predictions (gradient-boosting Newton steps)."""
        for node, v in values.items():
            self.node_value[node] = v

    def depth(self) -> int:
        depths = np.zeros(len(self.feature), dtype=np.int64)
        out = 0
        for i in range(len(self.feature)):
            if self.feature[i] != _LEAF:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
            else:
                out = max(out, int(depths[i]))
        return out

    def leaf_ids(self) -> np.ndarray:
        return np.flatnonzero(self.feature == _LEAF)

    # -------------------------------------------------------------- io

    def to_dict(self) -> dict:
        doc = {
            "task": self.task,
            "n_classes": self.n_classes,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
        }
        if self.task == "classify":
            doc["class_counts"] = self.class_counts.tolist()
        else:
            doc["node_value"] = self.node_value.tolist()
            doc["leaf_samples"] = {str(k): v.tolist() for k, v in self.leaf_samples.items()}
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "DecisionTree":
        tree = cls(doc["task"], doc["n_classes"])
        tree.feature = np.array(doc["feature"], dtype=np.int32)
        tree.threshold = np.array(doc["threshold"], dtype=np.float64)
        tree.left = np.array(doc["left"], dtype=np.int32)
        tree.right = np.array(doc["right"], dtype=np.int32)
        if tree.task == "classify":
            tree.class_counts = np.array(doc["class_counts"], dtype=np.float64)
        else:
            tree.node_value = np.array(doc["node_value"], dtype=np.float64)
            tree.leaf_samples = {
                int(k): np.array(v, dtype=np.float64)
                for k, v in doc.get("leaf_samples", {}).items()
            }
        return tree


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: Optional[TreeParams] = None,
    rng: Optional[np.random.Generator] = None,
    task: str = "classify",
    n_classes: int = 0,
    store_leaf_samples: bool = False,
) -> DecisionTree:
    """Fit a single decision tree (greedy Gini / variance reduction)."""
    return DecisionTree(task, n_classes).fit(
        X, y, params or TreeParams(), rng, store_leaf_samples
    )
