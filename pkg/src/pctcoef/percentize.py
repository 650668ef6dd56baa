"""Scale transforms onto conceptual percentage scales, plus dummy expansion.

``percentize_value`` maps an original-scale score onto the 0-1 scale spanned
by its conceptual anchors; ``percent_value_100`` is the 0-100 variant and
``minmax_value`` the general linear rescaling both reduce to.  Observed data
may legitimately fall outside the conceptual anchors (a 104-year-old on a
0-100 age scale lands at 1.04), so out-of-anchor values pass through with a
warning unless strict mode is requested.

``build_design_matrix`` applies the transforms to a cleaned Dataset and
expands nominal variables into reference-coded dummies.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dataset import Column, Dataset, VariableSpec
from .errors import (
    AnchorError,
    CollinearityError,
    ConfigError,
    DataError,
    DegenerateVariableError,
    SchemaError,
)

log = logging.getLogger(__name__)


def percentize_value(o_s, c_n, c_x):
    """Map an original score onto the conceptual 0-1 percentage scale.

    Values and anchors may be scalars or broadcastable arrays.  Values
    outside [c_n, c_x] map outside [0, 1].
    """
    if not np.all(np.asarray(c_x) > np.asarray(c_n)):
        raise AnchorError(f"conceptual max must exceed min (got {c_n}, {c_x})")
    return (o_s - c_n) / (c_x - c_n)


def percent_value_100(o_s, m_n, m_x):
    """Map an original score onto a 0-100 percent scale."""
    if not np.all(np.asarray(m_x) > np.asarray(m_n)):
        raise AnchorError(f"measurement max must exceed min (got {m_n}, {m_x})")
    return (o_s - m_n) / (m_x - m_n) * 100


def minmax_value(v, min_o, max_o, min_n, max_n):
    """General min-max rescaling from [min_o, max_o] onto [min_n, max_n].

    With a (0, 1) target this reduces to ``percentize_value``; with (0, 100)
    it reduces to ``percent_value_100``.
    """
    if not np.all(np.asarray(max_o) > np.asarray(min_o)):
        raise AnchorError(f"original max must exceed min (got {min_o}, {max_o})")
    if not np.all(np.asarray(max_n) >= np.asarray(min_n)):
        raise AnchorError(f"new max must be >= new min (got {min_n}, {max_n})")
    return ((v - min_o) / (max_o - min_o)) * (max_n - min_n) + min_n


@dataclass
class PercentizedColumn:
    """A column on the 0-1 scale together with its provenance."""

    name: str
    values: np.ndarray
    source_spec: VariableSpec
    observed_min: float
    observed_max: float

    @classmethod
    def from_values(cls, name, values, source_spec):
        values = np.asarray(values, dtype=np.float64)
        return cls(name, values, source_spec, float(values.min()), float(values.max()))


@dataclass(frozen=True)
class ColumnTag:
    """Placement metadata for one IV column of the design matrix."""

    batch: str  # "numeric_binary" | "nominal"
    source: str | None = None  # nominal source variable
    category: str | None = None  # nominal category this dummy marks
    indicator_for: str | None = None  # source variable of a missing indicator


@dataclass
class BatchTags:
    """Per-IV tags plus reference-group bookkeeping for nominal variables."""

    tags: list[ColumnTag]
    nominal_refs: dict[str, str] = field(default_factory=dict)
    nominal_categories: dict[str, list[str]] = field(default_factory=dict)


@dataclass(eq=False)
class DesignMatrix:
    """Percentized DV and IVs side by side with their raw-scale copies."""

    dv: PercentizedColumn
    ivs: list[PercentizedColumn]
    raw_dv: np.ndarray
    raw_ivs: list[np.ndarray]
    batch_tags: BatchTags

    def __post_init__(self):
        lengths = {len(self.raw_dv), len(self.dv.values)}
        lengths.update(len(c.values) for c in self.ivs)
        lengths.update(len(v) for v in self.raw_ivs)
        if len(lengths) != 1:
            raise SchemaError("design matrix vectors have unequal lengths")

    @property
    def n_rows(self) -> int:
        return len(self.raw_dv)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.ivs]

    @cached_property
    def y_raw(self) -> np.ndarray:
        return np.ascontiguousarray(self.raw_dv, dtype=np.float64)

    @cached_property
    def y_pct(self) -> np.ndarray:
        return np.ascontiguousarray(self.dv.values, dtype=np.float64)

    @cached_property
    def X_raw(self) -> np.ndarray:
        return np.ascontiguousarray(np.column_stack(self.raw_ivs))

    @cached_property
    def X_pct(self) -> np.ndarray:
        return np.ascontiguousarray(np.column_stack([c.values for c in self.ivs]))

    def anchor_ranges(self) -> np.ndarray:
        """Conceptual scale width of every IV, in original units."""
        return np.array([c.source_spec.anchor_range for c in self.ivs])

    @property
    def dv_range(self) -> float:
        return self.dv.source_spec.anchor_range


def _expand_nominal(column, dv, spec: VariableSpec):
    """Dummy-code a nominal column; returns (dummies, categories, reference)."""
    labels = np.asarray(column, dtype=object)
    dv = np.asarray(dv, dtype=np.float64)
    categories = sorted({str(v) for v in labels})
    if len(categories) < 2:
        raise DegenerateVariableError(
            f"nominal variable {spec.name!r} has {len(categories)} category"
        )

    rule = spec.reference_rule or "highest_dv_mean"
    if rule == "explicit":
        reference = spec.reference_group
        if reference not in categories:
            raise SchemaError(
                f"variable {spec.name!r}: explicit reference {reference!r} not "
                f"among observed categories {categories}"
            )
    else:
        means = {c: dv[labels == c].mean() for c in categories}
        pick = max if rule == "highest_dv_mean" else min
        extreme = pick(means.values())
        # candidates tied at the extreme: lexicographically smallest wins
        reference = sorted(c for c in categories if means[c] == extreme)[0]
    log.info("variable %s: reference group %r (rule %s)", spec.name, reference, rule)

    dummies = []
    for cat in categories:
        if cat == reference:
            continue
        dummy_spec = VariableSpec(
            name=f"{spec.name}_{cat}",
            role=spec.role,
            kind="binary",
            missing_policy="forbid",
        )
        values = (labels == cat).astype(np.float64)
        dummies.append(
            (PercentizedColumn.from_values(dummy_spec.name, values, dummy_spec), cat)
        )
    return dummies, categories, reference


def expand_nominal(column, dv, spec: VariableSpec) -> list[PercentizedColumn]:
    """Expand a nominal column into G-1 reference-coded 0/1 dummies.

    The omitted reference group is picked by ``spec.reference_rule``: the
    category with the highest (or lowest) mean DV, or an explicit label.
    Ties break on the lexicographically smallest category label.
    """
    dummies, _, _ = _expand_nominal(column, dv, spec)
    return [col for col, _ in dummies]


def _percentize_column(col: Column, strict: bool) -> PercentizedColumn:
    spec = col.spec
    values = percentize_value(col.values, spec.conceptual_min, spec.conceptual_max)
    outside = (values < 0.0) | (values > 1.0)
    if outside.any():
        msg = (
            f"variable {spec.name!r}: {int(outside.sum())} values fall outside "
            f"the conceptual anchors ({spec.conceptual_min}, {spec.conceptual_max})"
        )
        if strict:
            raise DataError(msg)
        log.warning("%s; passing through", msg)
    return PercentizedColumn(
        spec.name, values, spec, float(values.min()), float(values.max())
    )


def _check_binary(col: Column) -> None:
    bad = ~np.isin(col.values, (0.0, 1.0))
    if bad.any():
        raise DataError(
            f"binary variable {col.name!r} contains values other than 0/1 "
            f"in {int(bad.sum())} rows"
        )


def build_design_matrix(d: Dataset, strict_anchors: bool = False) -> DesignMatrix:
    """Percentize every variable of a cleaned Dataset and expand nominals.

    Numeric/ordinal variables map through their conceptual anchors; binary
    and dummy variables pass through unchanged (their anchors are already
    0/1).  Raw-scale copies are retained for the raw-coefficient fit.
    """
    for c in d.columns:
        if c.missing_mask().any():
            raise DataError(
                f"variable {c.name!r} has unresolved missing values; "
                "apply the missing policy first"
            )

    dv_col = d.dependent()
    if dv_col.spec.is_nominal:
        raise ConfigError("the dependent variable cannot be nominal")
    dv = _percentize_column(dv_col, strict_anchors)
    if dv_col.spec.kind == "binary":
        _check_binary(dv_col)

    ivs: list[PercentizedColumn] = []
    raw_ivs: list[np.ndarray] = []
    tags: list[ColumnTag] = []
    nominal_refs: dict[str, str] = {}
    nominal_categories: dict[str, list[str]] = {}

    for col in d.columns:
        spec = col.spec
        if spec.role == "dependent":
            continue
        if spec.is_nominal:
            dummies, categories, reference = _expand_nominal(
                col.values, dv_col.values, spec
            )
            nominal_refs[spec.name] = reference
            nominal_categories[spec.name] = categories
            for dummy, cat in dummies:
                ivs.append(dummy)
                raw_ivs.append(dummy.values)
                tags.append(ColumnTag("nominal", source=spec.name, category=cat))
        else:
            if spec.kind == "binary":
                _check_binary(col)
                pct = PercentizedColumn.from_values(spec.name, col.values, spec)
            else:
                pct = _percentize_column(col, strict_anchors)
            ivs.append(pct)
            raw_ivs.append(np.asarray(col.values, dtype=np.float64))
            tags.append(ColumnTag("numeric_binary", indicator_for=spec.indicator_for))

    if not ivs:
        raise ConfigError("no independent variables declared")

    for iv, raw in zip(ivs, raw_ivs):
        if np.ptp(raw) == 0.0:
            raise DegenerateVariableError(f"variable {iv.name!r} is constant")
    for i in range(len(ivs)):
        for j in range(i + 1, len(ivs)):
            if np.array_equal(raw_ivs[i], raw_ivs[j]):
                raise CollinearityError(
                    f"IV columns {ivs[i].name!r} and {ivs[j].name!r} are identical"
                )

    return DesignMatrix(
        dv=dv,
        ivs=ivs,
        raw_dv=np.asarray(dv_col.values, dtype=np.float64),
        raw_ivs=raw_ivs,
        batch_tags=BatchTags(tags, nominal_refs, nominal_categories),
    )


__all__ = [
    "BatchTags",
    "ColumnTag",
    "DesignMatrix",
    "PercentizedColumn",
    "build_design_matrix",
    "expand_nominal",
    "minmax_value",
    "percent_value_100",
    "percentize_value",
]
