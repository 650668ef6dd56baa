"""Tabular ingestion: variable specs, CSV loading, and missing-data policy.

A :class:`VariableSpec` declares what a column *means* (role, kind, and the
conceptual scale anchors used later by the percentage transform).  A
:class:`Dataset` is the validated, parsed table.  ``apply_missing_policy``
resolves every missing cell before any transformation happens, so downstream
modules never see missing markers.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, SchemaError

log = logging.getLogger(__name__)

ROLES = ("dependent", "independent", "control")
KINDS = ("numeric", "binary", "ordinal", "nominal")
MISSING_POLICIES = ("drop_row", "dummy_adjust", "forbid")
REFERENCE_RULES = ("highest_dv_mean", "lowest_dv_mean", "explicit")

#: Cell contents parsed as missing, exactly as written (case-sensitive).
MISSING_MARKERS = frozenset({"", "NA", "."})


@dataclass(frozen=True)
class VariableSpec:
    """Declares a column's role, kind, conceptual anchors, and policies.

    ``conceptual_min``/``conceptual_max`` are the theoretical endpoints of the
    scale in original units, which may differ from whatever extremes the data
    happens to contain.  Binary variables are fixed at (0, 1).  Nominal
    variables carry no numeric anchors; their dummies are 0/1 by construction.
    """

    name: str
    role: str
    kind: str
    conceptual_min: float | None = None
    conceptual_max: float | None = None
    missing_policy: str = "drop_row"
    reference_group: str | None = None
    reference_rule: str | None = None
    missing_category: str | None = None
    indicator_for: str | None = None

    def __post_init__(self):
        if not self.name:
            raise ConfigError("variable spec requires a non-empty name")
        if self.role not in ROLES:
            raise ConfigError(f"variable {self.name!r}: unknown role {self.role!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"variable {self.name!r}: unknown kind {self.kind!r}")
        if self.missing_policy not in MISSING_POLICIES:
            raise ConfigError(
                f"variable {self.name!r}: unknown missing_policy {self.missing_policy!r}"
            )

        if self.kind == "binary":
            cn = 0.0 if self.conceptual_min is None else self.conceptual_min
            cx = 1.0 if self.conceptual_max is None else self.conceptual_max
            if (cn, cx) != (0.0, 1.0):
                raise ConfigError(
                    f"variable {self.name!r}: binary anchors are fixed at (0, 1)"
                )
            object.__setattr__(self, "conceptual_min", 0.0)
            object.__setattr__(self, "conceptual_max", 1.0)
        elif self.kind == "nominal":
            if self.conceptual_min is not None or self.conceptual_max is not None:
                raise ConfigError(
                    f"variable {self.name!r}: nominal variables take no anchors"
                )
            rule = self.reference_rule or "highest_dv_mean"
            if rule not in REFERENCE_RULES:
                raise ConfigError(
                    f"variable {self.name!r}: unknown reference_rule {rule!r}"
                )
            if rule == "explicit" and self.reference_group is None:
                raise ConfigError(
                    f"variable {self.name!r}: reference_rule 'explicit' needs "
                    "a reference_group"
                )
            if rule != "explicit" and self.reference_group is not None:
                raise ConfigError(
                    f"variable {self.name!r}: reference_group is only valid "
                    "with reference_rule 'explicit'"
                )
            if self.missing_policy == "dummy_adjust":
                raise ConfigError(
                    f"variable {self.name!r}: dummy_adjust applies to numeric "
                    "variables; nominal missing values need missing_category "
                    "or drop_row"
                )
            object.__setattr__(self, "reference_rule", rule)
        else:  # numeric / ordinal
            if self.conceptual_min is None or self.conceptual_max is None:
                raise ConfigError(
                    f"variable {self.name!r}: numeric/ordinal kinds need "
                    "conceptual_min and conceptual_max"
                )
            if not self.conceptual_max > self.conceptual_min:
                raise ConfigError(
                    f"variable {self.name!r}: conceptual_max must exceed "
                    f"conceptual_min (got {self.conceptual_min}, {self.conceptual_max})"
                )

        if self.kind != "nominal":
            if self.reference_group is not None or self.reference_rule is not None:
                raise ConfigError(
                    f"variable {self.name!r}: reference settings are only "
                    "valid for nominal variables"
                )
            if self.missing_category is not None:
                raise ConfigError(
                    f"variable {self.name!r}: missing_category is only valid "
                    "for nominal variables"
                )

    @property
    def is_nominal(self) -> bool:
        return self.kind == "nominal"

    @property
    def anchor_range(self) -> float:
        return float(self.conceptual_max) - float(self.conceptual_min)


@dataclass
class Column:
    """One parsed column: float vector (NaN = missing) or label list for nominal."""

    spec: VariableSpec
    values: np.ndarray  # float64 for numeric kinds, object array of labels for nominal

    @property
    def name(self) -> str:
        return self.spec.name

    def missing_mask(self) -> np.ndarray:
        if self.spec.is_nominal:
            return np.array([v is None for v in self.values], dtype=bool)
        return np.isnan(self.values)


@dataclass
class Dataset:
    """An ingested table: one Column per declared variable, equal lengths."""

    columns: list[Column]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise SchemaError(f"duplicate column names: {sorted(dupes)}")
        lengths = {len(c.values) for c in self.columns}
        if len(lengths) > 1:
            raise SchemaError(f"columns have unequal lengths: {sorted(lengths)}")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0].values) if self.columns else 0

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column named {name!r}")

    def dependent(self) -> Column:
        deps = [c for c in self.columns if c.spec.role == "dependent"]
        if len(deps) != 1:
            raise ConfigError(
                "exactly one dependent variable required, found "
                f"{[c.name for c in deps] or 'none'}"
            )
        return deps[0]


@dataclass
class MissingEntry:
    variable: str
    missing_count: int
    resolution: str  # "none" | "rows_dropped" | "indicator:<name>" | "category:<label>"


@dataclass
class MissingReport:
    entries: list[MissingEntry] = field(default_factory=list)
    rows_dropped: int = 0

    def entry(self, variable: str) -> MissingEntry:
        for e in self.entries:
            if e.variable == variable:
                return e
        raise KeyError(variable)


def _parse_cell(text: str, nominal: bool):
    text = text.strip()
    if text in MISSING_MARKERS:
        return None if nominal else math.nan
    if nominal:
        return text
    try:
        return float(text)
    except ValueError:
        return math.nan  # unparseable numeric cell counts as missing


def load_csv(path, specs: list[VariableSpec]) -> Dataset:
    """Parse a CSV file against the declared specs.

    The header row must contain every spec'd name; extra columns are ignored.
    Cells equal to one of :data:`MISSING_MARKERS` (or unparseable numerics)
    become missing markers for ``apply_missing_policy`` to resolve.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        positions = {}
        for spec in specs:
            if spec.name not in header:
                raise SchemaError(f"{path}: column {spec.name!r} not found in header")
            positions[spec.name] = header.index(spec.name)

        raw: dict[str, list] = {spec.name: [] for spec in specs}
        for row in reader:
            if not row or all(cell.strip() == "" for cell in row):
                continue
            for spec in specs:
                pos = positions[spec.name]
                cell = row[pos] if pos < len(row) else ""
                raw[spec.name].append(_parse_cell(cell, spec.is_nominal))

    columns = []
    for spec in specs:
        if spec.is_nominal:
            values = np.array(raw[spec.name], dtype=object)
        else:
            values = np.array(raw[spec.name], dtype=np.float64)
        columns.append(Column(spec, values))
    return Dataset(columns)


def _impute_at_mean(column: Column) -> tuple[Column, Column]:
    """Mean-fill a numeric column and build its 0/1 missing indicator."""
    mask = column.missing_mask()
    observed = column.values[~mask]
    fill = float(observed.mean())
    filled = column.values.copy()
    filled[mask] = fill
    indicator_spec = VariableSpec(
        name=f"{column.name}_mis",
        role=column.spec.role if column.spec.role != "dependent" else "control",
        kind="binary",
        missing_policy="forbid",
        indicator_for=column.name,
    )
    indicator = Column(indicator_spec, mask.astype(np.float64))
    return Column(column.spec, filled), indicator


def apply_missing_policy(d: Dataset) -> tuple[Dataset, MissingReport]:
    """Resolve all missing cells per each variable's declared policy.

    Order of operations: forbid checks, nominal missing-category mapping,
    listwise deletion for every drop_row variable at once, then mean
    imputation with indicator creation for dummy_adjust variables.  The
    result contains no missing markers.
    """
    report = MissingReport()
    masks = {c.name: c.missing_mask() for c in d.columns}

    for c in d.columns:
        if c.spec.missing_policy == "forbid" and masks[c.name].any():
            rows = np.flatnonzero(masks[c.name]).tolist()
            raise DataError(
                f"variable {c.name!r} forbids missing values; offending rows "
                f"(0-based): {rows}"
            )

    columns = []
    for c in d.columns:
        if c.spec.is_nominal and c.spec.missing_category is not None:
            mask = masks[c.name]
            if mask.any():
                values = c.values.copy()
                values[mask] = c.spec.missing_category
                c = Column(c.spec, values)
                masks[c.name] = np.zeros(len(values), dtype=bool)
                report.entries.append(
                    MissingEntry(c.name, int(mask.sum()), f"category:{c.spec.missing_category}")
                )
        columns.append(c)

    drop = np.zeros(d.n_rows, dtype=bool)
    for c in columns:
        if c.spec.missing_policy == "drop_row" or (
            c.spec.is_nominal and c.spec.missing_category is None
        ):
            mask = masks[c.name]
            if mask.any():
                report.entries.append(MissingEntry(c.name, int(mask.sum()), "rows_dropped"))
                drop |= mask
    report.rows_dropped = int(drop.sum())
    if drop.any():
        keep = ~drop
        columns = [Column(c.spec, c.values[keep]) for c in columns]
        log.info("dropped %d rows with missing values (listwise)", report.rows_dropped)

    result = []
    for c in columns:
        if c.spec.missing_policy == "dummy_adjust" and not c.spec.is_nominal:
            mask = c.missing_mask()
            n_missing = int(mask.sum())
            if n_missing == 0:
                # a zero-variance indicator would make the design rank deficient
                report.entries.append(MissingEntry(c.name, 0, "none"))
                result.append(c)
                continue
            filled, indicator = _impute_at_mean(c)
            if any(existing.name == indicator.name for existing in columns):
                raise SchemaError(
                    f"cannot create indicator {indicator.name!r}: name already in use"
                )
            report.entries.append(MissingEntry(c.name, n_missing, f"indicator:{indicator.name}"))
            log.info(
                "variable %s: imputed %d missing cells at observed mean %.6g, "
                "added indicator %s",
                c.name, n_missing, float(c.values[~mask].mean()), indicator.name,
            )
            result.append(filled)
            result.append(indicator)
        else:
            result.append(c)

    out = Dataset(result)
    for c in out.columns:
        if c.missing_mask().any():
            raise DataError(f"variable {c.name!r} still has missing values")
    return out, report


__all__ = [
    "Column",
    "Dataset",
    "MISSING_MARKERS",
    "MissingEntry",
    "MissingReport",
    "VariableSpec",
    "apply_missing_policy",
    "load_csv",
]
