"""Deterministic logistic regression over tables.

Preprocessing is fitted on the training table only: numeric columns are
standardized by training mean/std (zero std passes through as zeros),
categorical columns are one-hot over training categories, and categories
unseen at prediction time map to an all-zero block. Optimization is
full-batch gradient descent on L2-regularized log loss with a fixed
iteration budget and automatic step halving whenever a step would increase
the loss, so fits are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import EmptyInput, NonBinaryTarget
from ..tabular import CATEGORICAL, NUMERIC, Table


@dataclass(frozen=True)
class LogisticParams:
    iterations: int = 500
    step: float = 0.1
    l2: float = 1e-4


@dataclass
class _FeatureEncoder:
    # per feature column: (name, kind, payload); payload is (mean, std) for
    # numeric and a label->slot dict for categorical
    columns: list

    @property
    def width(self) -> int:
        w = 0
        for _, kind, payload in self.columns:
            w += 1 if kind == NUMERIC else len(payload)
        return w

    def transform(self, table: Table) -> np.ndarray:
        n = table.row_count
        out = np.zeros((n, self.width))
        pos = 0
        for name, kind, payload in self.columns:
            if kind == NUMERIC:
                mean, std = payload
                col = table.column(name)
                out[:, pos] = (col - mean) / std if std > 0 else 0.0
                pos += 1
            else:
                # map the table's own category list onto training slots once,
                # then gather; unseen categories stay an all-zero block
                cats = table.schema.categories_of(name)
                slot_of = np.array([payload.get(lab, -1) for lab in cats], dtype=np.int64)
                slots = slot_of[table.column(name)]
                rows = np.flatnonzero(slots >= 0)
                out[rows, pos + slots[rows]] = 1.0
                pos += len(payload)
        return out


@dataclass
class LogisticModel:
    encoder: _FeatureEncoder
    weights: np.ndarray
    bias: float
    target: str
    positive_label: str
    constant_score: Optional[float] = None  # single-class training data
    losses: Optional[np.ndarray] = None  # accepted per-iteration losses


def _build_encoder(table: Table, target: str) -> _FeatureEncoder:
    cols = []
    for spec, col in zip(table.schema.columns, table.columns):
        if spec.name == target:
            continue
        if spec.kind == NUMERIC:
            cols.append((spec.name, NUMERIC, (float(np.mean(col)), float(np.std(col)))))
        else:
            cols.append((spec.name, CATEGORICAL, {lab: k for k, lab in enumerate(spec.categories)}))
    return _FeatureEncoder(cols)


def pick_positive_label(categories) -> str:
    """Category literally named "1" when present, else the least frequent
    (categories arrive frequency-descending)."""
    if "1" in categories:
        return "1"
    return categories[-1]


def fit_logistic(
    train: Table,
    target: str,
    params: Optional[LogisticParams] = None,
    positive_label: Optional[str] = None,
) -> LogisticModel:
    params = params or LogisticParams()
    if train.row_count == 0:
        raise EmptyInput("empty training table")
    if train.schema.kind_of(target) != CATEGORICAL:
        raise NonBinaryTarget(f"target {target!r} is not categorical")
    cats = train.schema.categories_of(target)
    codes = train.column(target)
    present = np.unique(codes)
    if len(cats) > 2:
        raise NonBinaryTarget(f"target {target!r} has {len(cats)} categories")

    encoder = _build_encoder(train, target)
    if positive_label is None:
        positive_label = pick_positive_label(cats)
    y = (np.asarray([cats[c] for c in codes], dtype=object) == positive_label).astype(np.float64)

    if len(present) == 1:
        prior = float(np.mean(y))
        return LogisticModel(encoder, np.zeros(encoder.width), 0.0, target,
                             positive_label, constant_score=prior)

    X = encoder.transform(train)
    n = len(y)
    w = np.zeros(X.shape[1])
    b = 0.0
    step = params.step
    sign = 2.0 * y - 1.0

    def loss_of(wv, bv):
        z = X @ wv + bv
        return float(np.mean(np.logaddexp(0.0, -sign * z)) + 0.5 * params.l2 * wv @ wv)

    loss = loss_of(w, b)
    losses = [loss]
    for _ in range(params.iterations):
        z = np.clip(X @ w + b, -35.0, 35.0)
        p = 1.0 / (1.0 + np.exp(-z))
        err = p - y
        gw = X.T @ err / n + params.l2 * w
        gb = float(np.mean(err))
        w_new = w - step * gw
        b_new = b - step * gb
        new_loss = loss_of(w_new, b_new)
        if new_loss > loss:
            step *= 0.5  # reject the step, retry smaller
        else:
            w, b, loss = w_new, b_new, new_loss
        losses.append(loss)
    return LogisticModel(encoder, w, float(b), target, positive_label,
                         losses=np.array(losses))


def predict_proba(model: LogisticModel, table: Table) -> np.ndarray:
    """Positive-class probability for every row of the table."""
    if model.constant_score is not None:
        return np.full(table.row_count, model.constant_score)
    X = model.encoder.transform(table)  # reads only its own feature columns
    z = np.clip(X @ model.weights + model.bias, -35.0, 35.0)
    return 1.0 / (1.0 + np.exp(-z))
