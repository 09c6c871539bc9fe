"""Gaussian copula over mixed columns.

Fit: numeric columns map to normal scores through their empirical CDF
(average ranks, u = (rank - 0.5)/n); categorical columns map to the latent
score of their cumulative-frequency interval midpoint. The Pearson
correlation of the scores is repaired to PSD and Cholesky-factored.

Sample: correlated normals -> uniforms -> per-column inverse transforms
(numeric: empirical quantile interpolation; categorical: interval lookup).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import EmptyInput
from ..tabular import NUMERIC, Schema, Table
from .numerics import cholesky, inv_normal_cdf, nearest_psd, normal_cdf


@dataclass
class _NumericMarginal:
    sorted_values: np.ndarray

    def quantile(self, u: np.ndarray) -> np.ndarray:
        m = len(self.sorted_values)
        points = (np.arange(m) + 0.5) / m
        return np.interp(u, points, self.sorted_values)


@dataclass
class _CategoricalMarginal:
    boundaries: np.ndarray  # cumulative frequencies, length K, last == 1

    def codes_for(self, u: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.boundaries[:-1], u, side="right")


@dataclass
class CopulaModel:
    schema: Schema
    marginals: list  # _NumericMarginal | _CategoricalMarginal per column
    correlation: np.ndarray
    chol: np.ndarray

    def to_dict(self) -> dict:
        margs = []
        for m in self.marginals:
            if isinstance(m, _NumericMarginal):
                margs.append({"kind": "numeric", "sorted_values": m.sorted_values.tolist()})
            else:
                margs.append({"kind": "categorical", "boundaries": m.boundaries.tolist()})
        return {"marginals": margs, "correlation": self.correlation.tolist()}

    @classmethod
    def from_dict(cls, doc: dict, schema: Schema) -> "CopulaModel":
        margs: list = []
        for m in doc["marginals"]:
            if m["kind"] == "numeric":
                margs.append(_NumericMarginal(np.array(m["sorted_values"])))
            else:
                margs.append(_CategoricalMarginal(np.array(m["boundaries"])))
        corr = np.array(doc["correlation"])
        return cls(schema, margs, corr, cholesky(nearest_psd(corr, unit_diagonal=True)))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    sv = values[order]
    boundary = np.flatnonzero(np.diff(sv) != 0) + 1
    starts = np.concatenate(([0], boundary))
    ends = np.concatenate((boundary, [len(sv)]))
    avg = (starts + ends + 1) / 2.0  # ranks are 1-based
    ranks = np.empty(len(sv))
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def fit_copula(table: Table) -> CopulaModel:
    n, d = table.row_count, len(table.schema.columns)
    if n < 2 or d < 1:
        raise EmptyInput("copula fit needs at least 2 rows and 1 column")

    scores = np.empty((n, d))
    marginals: list[Union[_NumericMarginal, _CategoricalMarginal]] = []
    for j, (spec, col) in enumerate(zip(table.schema.columns, table.columns)):
        if spec.kind == NUMERIC:
            u = (_average_ranks(col) - 0.5) / n
            scores[:, j] = inv_normal_cdf(u)
            marginals.append(_NumericMarginal(np.sort(col)))
        else:
            counts = np.bincount(col, minlength=len(spec.categories))
            freqs = counts / n
            bounds = np.cumsum(freqs)
            bounds[-1] = 1.0
            lower = np.concatenate(([0.0], bounds[:-1]))
            mid = np.clip((lower + bounds) / 2.0, 1e-12, 1.0 - 1e-12)
            latent = inv_normal_cdf(mid)
            scores[:, j] = latent[col]
            marginals.append(_CategoricalMarginal(bounds))

    std = scores.std(axis=0)
    centered = scores - scores.mean(axis=0)
    corr = np.eye(d)
    live = std > 0
    if live.any():
        sub = centered[:, live] / std[live]
        block = (sub.T @ sub) / n
        np.fill_diagonal(block, 1.0)
        corr[np.ix_(live, live)] = block

    repaired = nearest_psd(corr, unit_diagonal=True)
    return CopulaModel(table.schema, marginals, repaired, cholesky(repaired))


def sample_copula(model: CopulaModel, n: int, seed: int) -> Table:
    if n < 1:
        raise EmptyInput("need n >= 1 samples")
    rng = np.random.default_rng(seed)
    d = len(model.marginals)
    z = rng.standard_normal((n, d)) @ model.chol.T
    u = np.clip(normal_cdf(z), 1e-12, 1.0 - 1e-12)

    columns = []
    for j, (spec, marginal) in enumerate(zip(model.schema.columns, model.marginals)):
        if spec.kind == NUMERIC:
            columns.append(marginal.quantile(u[:, j]))
        else:
            columns.append(marginal.codes_for(u[:, j]).astype(np.int64))
    return Table(model.schema, tuple(columns))
