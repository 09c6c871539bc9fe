"""Structural templates: target/sentiment alignment rules.

A rule names a target column and a sentiment column, and maps each target
category to the set of sentiment labels allowed to co-occur with it. Rules
are parsed from a JSON interchange document (docs/rule.schema), used to
compose weak multimodal benchmarks, and checked against synthetic output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidRule, ParseError, UnknownColumn, UnsatisfiableRule
from .tabular import (
    CATEGORICAL,
    ColumnSpec,
    Schema,
    SENTIMENT_LABELS,
    Table,
    TextCorpus,
    _ordered_categories,
)

DEFAULT_XMODAL_MAX = 0.15
DEFAULT_VIOLATION_MAX = 0.01


@dataclass(frozen=True)
class RuleThresholds:
    xmodal_max: float = DEFAULT_XMODAL_MAX
    violation_max: float = DEFAULT_VIOLATION_MAX


@dataclass(frozen=True)
class RuleSpec:
    name: str
    target_column: str
    sentiment_column: str
    alignment: dict  # target category label -> frozenset of sentiment labels
    text_column: Optional[str] = None
    alignment_weights: Optional[dict] = None  # target label -> {sentiment: weight}
    thresholds: RuleThresholds = field(default_factory=RuleThresholds)

    def allowed_pairs(self) -> frozenset:
        return frozenset(
            (t, s) for t, labels in self.alignment.items() for s in labels
        )


@dataclass(frozen=True)
class RuleFinding:
    code: str
    message: str


@dataclass(frozen=True)
class ConstraintReport:
    violation_rate: float
    per_target_violations: dict
    rows_checked: int


def parse_rule(document) -> RuleSpec:
    """Parse a rule interchange document (JSON text or an already-decoded
    mapping) into a validated RuleSpec."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"rule document is not valid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ParseError("rule document must be a JSON object")

    for key in ("name", "target_column", "sentiment_column", "alignment"):
        if key not in doc:
            raise ParseError(f"rule document missing {key!r}")
    raw_alignment = doc["alignment"]
    if not isinstance(raw_alignment, dict) or not raw_alignment:
        raise InvalidRule("alignment must be a non-empty object")

    alignment = {}
    for target_cat, labels in raw_alignment.items():
        if not labels:
            raise InvalidRule(f"alignment for target {target_cat!r} is empty")
        for lab in labels:
            if lab not in SENTIMENT_LABELS:
                raise InvalidRule(f"unknown sentiment label {lab!r}")
        alignment[str(target_cat)] = frozenset(labels)

    weights = None
    if doc.get("alignment_weights") is not None:
        weights = {}
        for target_cat, wmap in doc["alignment_weights"].items():
            target_cat = str(target_cat)
            if target_cat not in alignment:
                raise InvalidRule(f"weights given for unaligned target {target_cat!r}")
            if set(wmap) != set(alignment[target_cat]):
                raise InvalidRule(
                    f"weights for target {target_cat!r} must cover exactly its allowed set"
                )
            for lab, w in wmap.items():
                if not (float(w) > 0):
                    raise InvalidRule(f"weight for ({target_cat!r}, {lab!r}) must be positive")
            weights[target_cat] = {lab: float(w) for lab, w in wmap.items()}

    tdoc = doc.get("thresholds") or {}
    xmodal_max = float(tdoc.get("xmodal_max", DEFAULT_XMODAL_MAX))
    violation_max = float(tdoc.get("violation_max", DEFAULT_VIOLATION_MAX))
    if xmodal_max < 0:
        raise InvalidRule("xmodal_max must be >= 0")
    if not 0.0 <= violation_max <= 1.0:
        raise InvalidRule("violation_max must be in [0,1]")

    return RuleSpec(
        name=str(doc["name"]),
        target_column=str(doc["target_column"]),
        sentiment_column=str(doc["sentiment_column"]),
        alignment=alignment,
        text_column=doc.get("text_column"),
        alignment_weights=weights,
        thresholds=RuleThresholds(xmodal_max, violation_max),
    )


def serialize_rule(rule: RuleSpec) -> str:
    """Inverse of parse_rule (parse_rule(serialize_rule(r)) == r)."""
    doc: dict = {
        "name": rule.name,
        "target_column": rule.target_column,
        "sentiment_column": rule.sentiment_column,
        "alignment": {
            t: [lab for lab in SENTIMENT_LABELS if lab in labels]
            for t, labels in rule.alignment.items()
        },
        "thresholds": {
            "xmodal_max": rule.thresholds.xmodal_max,
            "violation_max": rule.thresholds.violation_max,
        },
    }
    if rule.text_column is not None:
        doc["text_column"] = rule.text_column
    if rule.alignment_weights is not None:
        doc["alignment_weights"] = rule.alignment_weights
    return json.dumps(doc, indent=2, sort_keys=True)


def load_rule(path) -> RuleSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_rule(fh.read())


def validate_rule(rule: RuleSpec, schema: Schema) -> list[RuleFinding]:
    """Check a rule against a table schema; empty list means ok."""
    findings = []
    if rule.target_column not in schema:
        findings.append(
            RuleFinding("unknown_column", f"target column {rule.target_column!r} not in schema")
        )
        return findings
    if schema.kind_of(rule.target_column) != CATEGORICAL:
        findings.append(
            RuleFinding("not_categorical", f"target column {rule.target_column!r} is not categorical")
        )
        return findings
    for cat in schema.categories_of(rule.target_column):
        if cat not in rule.alignment:
            findings.append(
                RuleFinding("missing_alignment", f"target category {cat!r} has no alignment entry")
            )
    return findings


def _sentiment_weights(rule: RuleSpec, corpus: TextCorpus) -> dict[str, tuple[list[str], np.ndarray]]:
    """Per target category: allowed labels (canonical order) and their sampling
    probabilities — corpus frequencies restricted to the allowed set, unless
    explicit alignment_weights override them."""
    freqs = corpus.label_frequencies()
    out = {}
    for target_cat, allowed in rule.alignment.items():
        labels = [lab for lab in SENTIMENT_LABELS if lab in allowed]
        missing = [lab for lab in labels if freqs.get(lab, 0.0) <= 0.0]
        if missing:
            raise UnsatisfiableRule(
                f"corpus has no entries for allowed label(s) {missing} of target {target_cat!r}"
            )
        if rule.alignment_weights and target_cat in rule.alignment_weights:
            w = np.array([rule.alignment_weights[target_cat][lab] for lab in labels])
        else:
            w = np.array([freqs[lab] for lab in labels])
        out[target_cat] = (labels, w / w.sum())
    return out


def compose_weak_benchmark(
    tabular: Table, corpus: TextCorpus, rule: RuleSpec, seed: int
) -> Table:
    """Attach a sentiment column (and optionally a text column) to a table.

    Each row's sentiment is drawn from the allowed set for its target value
    with probability proportional to the corpus label frequencies restricted
    to that set; text, when requested, is drawn uniformly among corpus
    entries bearing the drawn label. Deterministic per seed.
    """
    findings = validate_rule(rule, tabular.schema)
    if findings:
        raise InvalidRule("; ".join(f.message for f in findings))
    if rule.sentiment_column in tabular.schema:
        raise InvalidRule(f"table already has a {rule.sentiment_column!r} column")

    weights = _sentiment_weights(rule, corpus)
    rng = np.random.default_rng(seed)

    target_codes = tabular.column(rule.target_column)
    target_cats = tabular.schema.categories_of(rule.target_column)
    n = tabular.row_count
    drawn = np.empty(n, dtype=object)
    for code, cat in enumerate(target_cats):
        rows = np.flatnonzero(target_codes == code)
        if len(rows) == 0:
            continue
        labels, probs = weights[cat]
        picks = rng.choice(len(labels), size=len(rows), p=probs)
        for k, lab in enumerate(labels):
            drawn[rows[picks == k]] = lab

    sent_cats = _ordered_categories(drawn)
    sent_code = {lab: k for k, lab in enumerate(sent_cats)}
    sent_col = np.array([sent_code[lab] for lab in drawn], dtype=np.int64)
    out = tabular.with_column(ColumnSpec(rule.sentiment_column, CATEGORICAL, sent_cats), sent_col)

    if rule.text_column is not None:
        if rule.text_column in tabular.schema:
            raise InvalidRule(f"table already has a {rule.text_column!r} column")
        pools = corpus.texts_by_label()
        texts = np.empty(n, dtype=object)
        for lab in SENTIMENT_LABELS:
            rows = np.flatnonzero(drawn == lab)
            if len(rows) == 0:
                continue
            pool = pools[lab]
            idx = rng.integers(0, len(pool), size=len(rows))
            texts[rows] = [pool[i] for i in idx]
        text_cats = _ordered_categories(texts)
        text_code = {t: k for k, t in enumerate(text_cats)}
        text_col = np.array([text_code[t] for t in texts], dtype=np.int64)
        out = out.with_column(ColumnSpec(rule.text_column, CATEGORICAL, text_cats), text_col)
    return out


def check_constraints(rule: RuleSpec, table: Table) -> ConstraintReport:
    """Fraction of rows whose (target, sentiment) pair falls outside the
    rule's alignment."""
    for col in (rule.target_column, rule.sentiment_column):
        if col not in table.schema:
            raise UnknownColumn(f"no column named {col!r}")
    targets = table.decode(rule.target_column)
    sentiments = table.decode(rule.sentiment_column)
    n = table.row_count
    per_target: dict[str, int] = {}
    violations = 0
    for t, s in zip(targets, sentiments):
        allowed = rule.alignment.get(t)
        if allowed is None or s not in allowed:
            violations += 1
            per_target[t] = per_target.get(t, 0) + 1
    return ConstraintReport(
        violation_rate=violations / n if n else 0.0,
        per_target_violations=per_target,
        rows_checked=n,
    )


_BUILTIN_RULES = {
    "manual": {
        "name": "manual",
        "target_column": "y",
        "sentiment_column": "sentiment",
        "text_column": None,
        "alignment": {
            "1": ["positive", "neutral"],
            "0": ["neutral", "negative"],
        },
    },
    "gemini": {
        "name": "gemini",
        "target_column": "y",
        "sentiment_column": "sentiment",
        "text_column": None,
        "alignment": {
            "1": ["positive"],
            "0": ["neutral", "negative"],
        },
    },
}


def builtin_rule(kind: str) -> RuleSpec:
    """The two fixture rules; identical copies ship at rules/<kind>.json."""
    if kind not in _BUILTIN_RULES:
        raise InvalidRule(f"no builtin rule {kind!r} (choose from {sorted(_BUILTIN_RULES)})")
    return parse_rule(dict(_BUILTIN_RULES[kind]))
