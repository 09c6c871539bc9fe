"""Column-major tables over mixed numeric/categorical data.

CSV in/out (RFC 4180, header row required), schema inference, stratified
splitting and dataset summaries. Tables are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateSplit,
    EmptyInput,
    EmptyTable,
    MissingFile,
    SchemaMismatch,
    UnknownColumn,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"

#: numeric-parseable columns with at most this many distinct, all-integral
#: values are treated as categorical (binary/ordinal targets stay categorical)
CATEGORICAL_MAX_DISTINCT = 20

MISSING_TOKENS = ("", "?")
MISSING_LABEL = "__missing__"

SENTIMENT_LABELS = ("positive", "neutral", "negative")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str  # NUMERIC or CATEGORICAL
    categories: Optional[tuple[str, ...]] = None  # frequency-descending

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"bad column kind {self.kind!r}")
        if self.kind == CATEGORICAL and not self.categories:
            raise ValueError(f"categorical column {self.name!r} has no categories")


@dataclass(frozen=True)
class Schema:
    columns: tuple[ColumnSpec, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise UnknownColumn(f"no column named {name!r}")

    def spec(self, name: str) -> ColumnSpec:
        return self.columns[self.index(name)]

    def kind_of(self, name: str) -> str:
        return self.spec(name).kind

    def categories_of(self, name: str) -> tuple[str, ...]:
        spec = self.spec(name)
        if spec.kind != CATEGORICAL:
            raise SchemaMismatch(f"column {name!r} is not categorical")
        return spec.categories


@dataclass(frozen=True)
class Table:
    """Column-major table: numeric columns are float64 vectors, categorical
    columns are int64 codes indexing the schema's category list."""

    schema: Schema
    columns: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.columns) != len(self.schema.columns):
            raise ValueError("column count does not match schema")
        n = self.row_count
        for spec, col in zip(self.schema.columns, self.columns):
            if len(col) != n:
                raise ValueError(f"column {spec.name!r} has length {len(col)} != {n}")
            if spec.kind == NUMERIC:
                if col.dtype != np.float64:
                    raise ValueError(f"numeric column {spec.name!r} must be float64")
                if n and not np.all(np.isfinite(col)):
                    raise ValueError(f"numeric column {spec.name!r} has non-finite values")
            else:
                if not np.issubdtype(col.dtype, np.integer):
                    raise ValueError(f"categorical column {spec.name!r} must be integer codes")
                if n and (col.min() < 0 or col.max() >= len(spec.categories)):
                    raise ValueError(f"categorical column {spec.name!r} has out-of-range codes")

    @property
    def row_count(self) -> int:
        return 0 if not self.columns else len(self.columns[0])

    def column(self, name: str) -> np.ndarray:
        return self.columns[self.schema.index(name)]

    def decode(self, name: str) -> np.ndarray:
        """Categorical codes back to their labels (object array)."""
        spec = self.schema.spec(name)
        if spec.kind != CATEGORICAL:
            raise SchemaMismatch(f"column {name!r} is not categorical")
        labels = np.asarray(spec.categories, dtype=object)
        return labels[self.column(name)]

    def take(self, indices: np.ndarray) -> "Table":
        return Table(self.schema, tuple(col[indices] for col in self.columns))

    def select(self, names: Sequence[str]) -> "Table":
        idx = [self.schema.index(n) for n in names]
        return Table(
            Schema(tuple(self.schema.columns[i] for i in idx)),
            tuple(self.columns[i] for i in idx),
        )

    def drop(self, names: Iterable[str]) -> "Table":
        drop = set(names)
        keep = [c.name for c in self.schema.columns if c.name not in drop]
        return self.select(keep)

    def with_column(self, spec: ColumnSpec, values: np.ndarray) -> "Table":
        if spec.name in self.schema:
            raise ValueError(f"column {spec.name!r} already present")
        return Table(
            Schema(self.schema.columns + (spec,)),
            self.columns + (np.asarray(values),),
        )

    def numeric_names(self) -> list[str]:
        return [c.name for c in self.schema.columns if c.kind == NUMERIC]

    def categorical_names(self) -> list[str]:
        return [c.name for c in self.schema.columns if c.kind == CATEGORICAL]


@dataclass(frozen=True)
class TextCorpus:
    """Sentiment-labeled text entries; labels are drawn from the fixed
    three-label set."""

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.entries:
            raise EmptyInput("corpus has no entries")
        for _, label in self.entries:
            if label not in SENTIMENT_LABELS:
                raise SchemaMismatch(f"unknown sentiment label {label!r}")

    def label_counts(self) -> dict[str, int]:
        counts = {label: 0 for label in SENTIMENT_LABELS}
        for _, label in self.entries:
            counts[label] += 1
        return counts

    def label_frequencies(self) -> dict[str, float]:
        n = len(self.entries)
        return {label: c / n for label, c in self.label_counts().items() if c > 0}

    def texts_by_label(self) -> dict[str, list[str]]:
        groups: dict[str, list[str]] = {}
        for text, label in self.entries:
            groups.setdefault(label, []).append(text)
        return groups


@dataclass
class DatasetSummary:
    """Compact per-column statistics used as the hand-off to rule authoring."""

    row_count: int
    numeric_stats: dict[str, dict[str, float]]  # name -> mean/std/min/max
    categorical_freqs: dict[str, dict[str, float]]  # name -> label -> freq
    target_column: Optional[str] = None
    target_distribution: Optional[dict[str, float]] = None
    sentiment_distribution: Optional[dict[str, float]] = None

    def to_dict(self) -> dict:
        doc: dict = {
            "row_count": self.row_count,
            "columns": [],
        }
        for name, stats in self.numeric_stats.items():
            doc["columns"].append({"name": name, "kind": NUMERIC, **stats})
        for name, freqs in self.categorical_freqs.items():
            doc["columns"].append({"name": name, "kind": CATEGORICAL, "frequencies": freqs})
        if self.target_distribution is not None:
            doc["target_column"] = self.target_column
            doc["target_distribution"] = self.target_distribution
        if self.sentiment_distribution is not None:
            doc["sentiment_distribution"] = self.sentiment_distribution
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _parse_float(cell: str) -> Optional[float]:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _is_missing(cell: str) -> bool:
    return cell.strip() in MISSING_TOKENS


def _ordered_categories(labels: Iterable[str]) -> tuple[str, ...]:
    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    return tuple(sorted(counts, key=lambda lab: (-counts[lab], lab)))


def _canonical_int_label(v: float) -> str:
    return str(int(round(v)))


def infer_schema(header: Sequence[str], records: Sequence[Sequence[str]]) -> Schema:
    """Infer a Schema from raw string records.

    A column is numeric iff every non-missing cell parses as a finite real
    number and it is not a small integral code set (<= CATEGORICAL_MAX_DISTINCT
    distinct values, all integral). Everything else is categorical, with
    categories ordered frequency-descending (lexicographic ties).
    """
    if not records:
        raise EmptyInput("no data rows")
    ncols = len(header)
    for rec in records:
        if len(rec) != ncols:
            raise SchemaMismatch(f"row has {len(rec)} cells, header has {ncols}")

    specs = []
    for j, name in enumerate(header):
        cells = [rec[j] for rec in records]
        present = [c for c in cells if not _is_missing(c)]
        parsed = [_parse_float(c) for c in present]
        all_numeric = all(v is not None for v in parsed)
        if all_numeric:
            distinct = set(parsed)
            integral = all(float(v).is_integer() for v in distinct)
            if len(distinct) <= CATEGORICAL_MAX_DISTINCT and integral:
                labels = [
                    MISSING_LABEL if _is_missing(c) else _canonical_int_label(_parse_float(c))
                    for c in cells
                ]
                specs.append(ColumnSpec(name, CATEGORICAL, _ordered_categories(labels)))
            else:
                specs.append(ColumnSpec(name, NUMERIC))
        else:
            labels = [MISSING_LABEL if _is_missing(c) else c for c in cells]
            specs.append(ColumnSpec(name, CATEGORICAL, _ordered_categories(labels)))
    return Schema(tuple(specs))


def _categorical_labels(spec: ColumnSpec, cells: Sequence[str]) -> list[str]:
    # integral-code columns were canonicalized during inference; mirror that
    # here so "1.0" and "1" land on the same label
    labels = []
    canonical_ints = spec.categories is not None and all(
        lab == MISSING_LABEL or (_parse_float(lab) is not None and float(lab).is_integer())
        for lab in spec.categories
    )
    for c in cells:
        if _is_missing(c):
            labels.append(MISSING_LABEL)
            continue
        v = _parse_float(c)
        if canonical_ints and v is not None and v.is_integer():
            labels.append(_canonical_int_label(v))
        else:
            labels.append(c)
    return labels


def table_from_records(
    header: Sequence[str],
    records: Sequence[Sequence[str]],
    schema: Optional[Schema] = None,
) -> Table:
    """Build a Table from string records, inferring the schema when absent.

    Missing cells ("" or "?") are imputed: numeric by column median,
    categorical by the explicit "__missing__" category.
    """
    if not records:
        raise EmptyTable("no data rows")
    inferred = schema is None
    if schema is None:
        schema = infer_schema(header, records)
    if list(header) != schema.names:
        raise SchemaMismatch(
            f"header {list(header)} does not match schema columns {schema.names}"
        )

    columns = []
    for j, spec in enumerate(schema.columns):
        cells = [rec[j] for rec in records]
        if spec.kind == NUMERIC:
            values = np.empty(len(cells), dtype=np.float64)
            missing = np.zeros(len(cells), dtype=bool)
            for i, c in enumerate(cells):
                if _is_missing(c):
                    missing[i] = True
                    values[i] = np.nan
                else:
                    v = _parse_float(c)
                    if v is None:
                        raise SchemaMismatch(
                            f"column {spec.name!r}: cell {c!r} is not numeric"
                        )
                    values[i] = v
            if missing.any():
                rest = values[~missing]
                values[missing] = float(np.median(rest)) if rest.size else 0.0
            columns.append(values)
        else:
            code_of = {lab: k for k, lab in enumerate(spec.categories)}
            labels = _categorical_labels(spec, cells)
            codes = np.empty(len(cells), dtype=np.int64)
            for i, lab in enumerate(labels):
                code = code_of.get(lab)
                if code is None:
                    if inferred:
                        raise AssertionError(f"inferred schema missed label {lab!r}")
                    raise SchemaMismatch(
                        f"column {spec.name!r}: unseen category {lab!r}"
                    )
                codes[i] = code
            columns.append(codes)
    return Table(schema, tuple(columns))


def load_table(path, schema_hint: Optional[Schema] = None) -> Table:
    """Load a comma-separated UTF-8 file (header row required) into a Table."""
    p = Path(path)
    if not p.exists():
        raise MissingFile(f"no such file: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyTable(f"{p} is empty") from None
        records = [row for row in reader if row]
    if not records:
        raise EmptyTable(f"{p} has a header but no data rows")
    return table_from_records(header, records, schema_hint)


def _format_numeric(v: float) -> str:
    return repr(float(v))


def write_table(table: Table, path) -> None:
    """Write a Table back to CSV in the same dialect load_table reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.schema.names)
        decoded = []
        for spec, col in zip(table.schema.columns, table.columns):
            if spec.kind == NUMERIC:
                decoded.append([_format_numeric(v) for v in col])
            else:
                labels = spec.categories
                decoded.append([labels[k] for k in col])
        for i in range(table.row_count):
            writer.writerow([c[i] for c in decoded])


def load_corpus(path) -> TextCorpus:
    """Load a text corpus CSV with 'text' and 'sentiment' columns."""
    p = Path(path)
    if not p.exists():
        raise MissingFile(f"no such file: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInput(f"{p} is empty") from None
        lower = [h.strip().lower() for h in header]
        if "text" not in lower or "sentiment" not in lower:
            raise SchemaMismatch("corpus needs 'text' and 'sentiment' columns")
        ti, si = lower.index("text"), lower.index("sentiment")
        entries = [(row[ti], row[si].strip().lower()) for row in reader if row]
    return TextCorpus(tuple(entries))


def split(
    table: Table,
    test_fraction: float = 0.25,
    seed: int = 0,
    target: Optional[str] = None,
) -> tuple[Table, Table]:
    """Disjoint train/test row partition, deterministic per seed.

    |test| = round(test_fraction * n). When a target column is designated
    the split is stratified on it (largest-remainder quotas per class), so
    class shares in the test side stay within one row of proportional.
    """
    n = table.row_count
    if n < 2:
        raise DegenerateSplit("need at least 2 rows to split")
    if not 0.0 < test_fraction < 1.0:
        raise DegenerateSplit(f"test_fraction {test_fraction} not in (0,1)")
    n_test = int(round(test_fraction * n))
    if n_test == 0 or n_test == n:
        raise DegenerateSplit(f"split leaves an empty side (n={n}, fraction={test_fraction})")

    rng = np.random.default_rng(seed)
    if target is None:
        perm = rng.permutation(n)
        test_idx = np.sort(perm[:n_test])
    else:
        codes = table.column(target)
        if table.schema.kind_of(target) != CATEGORICAL:
            raise SchemaMismatch(f"target column {target!r} is not categorical")
        classes = np.unique(codes)
        quotas = {}
        fracs = []
        total_floor = 0
        for c in classes:
            q = test_fraction * int(np.sum(codes == c))
            quotas[int(c)] = int(math.floor(q))
            total_floor += int(math.floor(q))
            fracs.append((-(q - math.floor(q)), int(c)))
        remainder = n_test - total_floor
        for _, c in sorted(fracs):
            if remainder <= 0:
                break
            if quotas[c] < int(np.sum(codes == c)):
                quotas[c] += 1
                remainder -= 1
        parts = []
        for c in classes:
            members = np.flatnonzero(codes == c)
            perm = rng.permutation(len(members))
            parts.append(members[perm[: quotas[int(c)]]])
        test_idx = np.sort(np.concatenate(parts)) if parts else np.array([], dtype=np.int64)

    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    train_idx = np.flatnonzero(~mask)
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise DegenerateSplit("one side of the split is empty")
    return table.take(train_idx), table.take(test_idx)


def summarize(
    table: Table,
    corpus: Optional[TextCorpus] = None,
    target_column: Optional[str] = None,
) -> DatasetSummary:
    """Per-column statistics plus optional target / corpus sentiment
    distributions; the JSON form is the rule-authoring interchange."""
    numeric_stats = {}
    categorical_freqs = {}
    n = table.row_count
    for spec, col in zip(table.schema.columns, table.columns):
        if spec.kind == NUMERIC:
            numeric_stats[spec.name] = {
                "mean": float(np.mean(col)),
                "std": float(np.std(col)),
                "min": float(np.min(col)),
                "max": float(np.max(col)),
            }
        else:
            counts = np.bincount(col, minlength=len(spec.categories))
            categorical_freqs[spec.name] = {
                lab: float(c / n) for lab, c in zip(spec.categories, counts) if c > 0
            }

    target_dist = None
    if target_column is not None:
        if target_column not in table.schema:
            raise UnknownColumn(f"no column named {target_column!r}")
        if table.schema.kind_of(target_column) != CATEGORICAL:
            raise SchemaMismatch(f"target column {target_column!r} is not categorical")
        target_dist = dict(categorical_freqs[target_column])

    sentiment_dist = corpus.label_frequencies() if corpus is not None else None
    return DatasetSummary(
        row_count=n,
        numeric_stats=numeric_stats,
        categorical_freqs=categorical_freqs,
        target_column=target_column,
        target_distribution=target_dist,
        sentiment_distribution=sentiment_dist,
    )
