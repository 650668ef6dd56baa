"""Publication-style report assembly and rendering.

Row ordering follows the presentation rules: the numeric/binary batch comes
first, each missing indicator sits directly after its source variable, each
nominal variable's dummies form one contiguous batch headed by a labeled
reference-group line, and within a batch rows sort by descending |b_p|
(indicator pinning wins over the sort).

Outputs are Markdown for reading and CSV at full precision for reuse.
Rendering is deterministic: the same bundle always produces the same bytes.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from .bootstrap import BootstrapDistribution, ComparisonMatrix, stars_for
from .dataset import MissingReport
from .errors import ConfigError
from .percentize import BatchTags
from .regression import CoefficientRecord, FitResult


@dataclass(frozen=True)
class ReportRow:
    kind: str  # "coefficient" | "reference"
    name: str  # column name, or "<var>_<ref>" for reference lines
    label: str
    record: CoefficientRecord | None = None


@dataclass(frozen=True)
class NominalSummary:
    variable: str
    pair_count: int
    largest_pair: tuple[str, str]
    largest_gap: float
    mean_abs_gap: float


@dataclass(frozen=True)
class RatioNote:
    kind: str  # "differential" | "proportional"
    form: str  # "difference" | "excess" | "multiple"
    i: str
    j: str
    value: float


@dataclass(eq=False)
class ReportBundle:
    rows: list[ReportRow]
    dists: dict[str, BootstrapDistribution]
    scalar_matrix: ComparisonMatrix
    directional_matrix: ComparisonMatrix
    nominal_summaries: list[NominalSummary]
    ratio_notes: list[RatioNote]
    fit: FitResult
    dv_name: str
    dv_pct_mean: float
    alpha_levels: tuple[float, ...]
    n_bootstrap: int
    seed: int
    ci_level: float
    missing_report: MissingReport | None = None
    redraw_count: int = 0
    reference_groups: dict[str, str] = field(default_factory=dict)


def order_rows(fit: FitResult, batch_tags: BatchTags) -> list[ReportRow]:
    """Order coefficient rows for presentation (see module docstring)."""
    by_name = {r.name: r for r in fit.rows}
    names = fit.names
    tags = dict(zip(names, batch_tags.tags))

    numeric = [n for n in names if tags[n].batch == "numeric_binary"]
    plain = [n for n in numeric if tags[n].indicator_for is None]
    indicators = [n for n in numeric if tags[n].indicator_for is not None]
    # stable sort: ties keep spec declaration order
    plain.sort(key=lambda n: -abs(by_name[n].b_p))
    ordered = list(plain)
    for ind in indicators:
        source = tags[ind].indicator_for
        at = ordered.index(source) + 1 if source in ordered else len(ordered)
        ordered.insert(at, ind)

    rows = [
        ReportRow(
            "coefficient",
            n,
            f"{n} (1=missing)" if tags[n].indicator_for is not None else n,
            by_name[n],
        )
        for n in ordered
    ]

    seen: list[str] = []
    for n in names:
        tag = tags[n]
        if tag.batch != "nominal" or tag.source in seen:
            continue
        seen.append(tag.source)
        ref = batch_tags.nominal_refs[tag.source]
        rows.append(
            ReportRow(
                "reference",
                f"{tag.source}_{ref}",
                f"{tag.source}_{ref} ({ref} as reference)",
            )
        )
        dummies = [m for m in names if tags[m].batch == "nominal" and tags[m].source == tag.source]
        dummies.sort(key=lambda m: -abs(by_name[m].b_p))
        rows.extend(
            ReportRow(
                "coefficient",
                m,
                f"{m} ({tags[m].category} vs {ref})",
                by_name[m],
            )
            for m in dummies
        )
    return rows


def nominal_pairwise(
    fit: FitResult, batch_tags: BatchTags, variable: str
) -> NominalSummary:
    """All-pairs group gaps for one nominal variable.

    Group effects are the fitted dummy coefficients with the reference group
    at 0; gaps are coefficient differences across all (G^2 - G)/2 pairs.
    """
    tags = dict(zip(fit.names, batch_tags.tags))
    coefs = {
        tags[n].category: fit.row(n).b_p
        for n in fit.names
        if tags[n].batch == "nominal" and tags[n].source == variable
    }
    if not coefs:
        raise ConfigError(f"no fitted dummies for nominal variable {variable!r}")
    coefs[batch_tags.nominal_refs[variable]] = 0.0

    pairs = list(combinations(sorted(coefs), 2))
    gaps = {(a, b): abs(coefs[a] - coefs[b]) for a, b in pairs}
    largest = max(pairs, key=lambda ab: gaps[ab])
    a, b = largest
    if coefs[a] > coefs[b]:  # report as (lower group, higher group)
        a, b = b, a
    return NominalSummary(
        variable=variable,
        pair_count=len(pairs),
        largest_pair=(a, b),
        largest_gap=gaps[largest],
        mean_abs_gap=sum(gaps.values()) / len(pairs),
    )


def ratio_notes(fit: FitResult, pairs: list[tuple[str, str]]) -> list[RatioNote]:
    """Differential and proportional efficiency comparisons for IV pairs.

    Per pair (i, j): the differential |b_p(i)| - |b_p(j)|, the excess ratio
    (|b_p(i)| - |b_p(j)|) / |b_p(j)|, and the multiple |b_p(i)| / |b_p(j)|.
    Proportional notes are suppressed when |b_p(j)| is zero.
    """
    notes: list[RatioNote] = []
    for i, j in pairs:
        bi = abs(fit.row(i).b_p)
        bj = abs(fit.row(j).b_p)
        notes.append(RatioNote("differential", "difference", i, j, bi - bj))
        if bj == 0.0:
            warnings.warn(
                f"proportional notes for ({i}, {j}) suppressed: |b_p({j})| is zero"
            )
            continue
        notes.append(RatioNote("proportional", "excess", i, j, (bi - bj) / bj))
        notes.append(RatioNote("proportional", "multiple", i, j, bi / bj))
    return notes


def default_ratio_pairs(fit: FitResult) -> list[tuple[str, str]]:
    """Every unordered IV pair oriented so the larger |b_p| comes first."""
    pairs = []
    for i, j in combinations(fit.names, 2):
        if abs(fit.row(j).b_p) > abs(fit.row(i).b_p):
            i, j = j, i
        pairs.append((i, j))
    return pairs


def build_report_bundle(
    fit,
    batch_tags,
    dists,
    scalar_matrix,
    directional_matrix,
    cfg,
    dv_name,
    dv_pct_mean,
    missing_report=None,
    redraw_count=0,
) -> ReportBundle:
    rows = order_rows(fit, batch_tags)
    if not any(r.kind == "coefficient" for r in rows):
        raise ConfigError("nothing to report: no fitted coefficients")
    summaries = [
        nominal_pairwise(fit, batch_tags, var) for var in batch_tags.nominal_refs
    ]
    return ReportBundle(
        rows=rows,
        dists=dists,
        scalar_matrix=scalar_matrix,
        directional_matrix=directional_matrix,
        nominal_summaries=summaries,
        ratio_notes=ratio_notes(fit, default_ratio_pairs(fit)),
        fit=fit,
        dv_name=dv_name,
        dv_pct_mean=dv_pct_mean,
        alpha_levels=cfg.alpha_levels,
        n_bootstrap=cfg.n_bootstrap,
        seed=cfg.seed,
        ci_level=cfg.ci_level,
        missing_report=missing_report,
        redraw_count=redraw_count,
        reference_groups=dict(batch_tags.nominal_refs),
    )


# --- formatting helpers ----------------------------------------------------

def _coef(v: float) -> str:
    """3 decimals, leading zero suppressed: -0.269 -> '-.269'."""
    s = f"{v:.3f}"
    return s.replace("0.", ".", 1) if s.startswith(("0.", "-0.")) else s


def _num(v: float) -> str:
    return f"{v:.3f}"


def _ci(d: BootstrapDistribution) -> str:
    return f"[{d.ci_low:.3f}, {d.ci_high:.3f}]"


def _star_text(stars: int) -> str:
    return "*" * stars


def _dist_stars(d: BootstrapDistribution, alphas) -> str:
    return _star_text(stars_for(d.p_value, alphas))


def _dist_cell(d: BootstrapDistribution, alphas=None) -> str:
    parts = [_coef(d.point_estimate), _ci(d)]
    if alphas is not None:
        parts.append(_dist_stars(d, alphas))
    return " ".join(p for p in parts if p)


def _alpha_footnote(alphas) -> str:
    parts = [f"{'*' * (i + 1)} p < {a:g}" for i, a in enumerate(alphas[:3])]
    return "; ".join(parts) + "."


# --- markdown rendering ----------------------------------------------------

def _coefficients_md(b: ReportBundle) -> str:
    lines = [
        f"# Coefficients predicting {b.dv_name}",
        "",
        "| | b_w | beta | b_p |",
        "|---|---|---|---|",
    ]
    lines.append(
        "| Intercept | "
        f"{_dist_cell(b.dists['intercept_raw'], b.alpha_levels)} | | "
        f"{_dist_cell(b.dists['intercept_p'], b.alpha_levels)} |"
    )
    for row in b.rows:
        if row.kind == "reference":
            lines.append(f"| {row.label} | — | — | — |")
            continue
        lines.append(
            f"| {row.label} | "
            f"{_dist_cell(b.dists[f'b_w:{row.name}'], b.alpha_levels)} | "
            f"{_dist_cell(b.dists[f'beta:{row.name}'])} | "
            f"{_dist_cell(b.dists[f'b_p:{row.name}'], b.alpha_levels)} |"
        )
    lines.append(f"| Total r² | {_coef(b.fit.r_squared)} | | |")
    lines += ["", _alpha_footnote(b.alpha_levels), ""]
    return "\n".join(lines)


def _matrix_md(matrix: ComparisonMatrix, alphas, title: str, formula: str) -> str:
    """Publication layout: rows are the j index, columns the i index."""
    names = matrix.iv_names
    lines = [
        f"# {title}",
        "",
        f"Cell (row j, column i) holds {formula}.",
        "",
        "| j \\ i | " + " | ".join(names) + " |",
        "|---|" + "---|" * len(names),
    ]
    for r, rname in enumerate(names):
        cells = []
        for c in range(len(names)):
            cell = matrix.cells[c][r]
            cells.append("--" if cell is None else f"{_num(cell.estimate)}{_star_text(cell.stars)}")
        lines.append(f"| {rname} | " + " | ".join(cells) + " |")
    lines += ["", _alpha_footnote(alphas), ""]
    return "\n".join(lines)


def _summary_md(b: ReportBundle) -> str:
    lines = [
        "# Run summary",
        "",
        f"- dependent variable: {b.dv_name} (percentized mean {b.dv_pct_mean:.4f})",
        f"- rows used: {b.fit.n_used}",
        f"- r²: {b.fit.r_squared:.4f}",
        f"- bootstrap: {b.n_bootstrap} replicates, seed {b.seed}, "
        f"{b.ci_level:g} CI level, {b.redraw_count} redraws",
        "",
    ]
    if b.missing_report is not None and b.missing_report.entries:
        lines.append("## Missing data")
        lines.append("")
        for e in b.missing_report.entries:
            lines.append(f"- {e.variable}: {e.missing_count} missing -> {e.resolution}")
        if b.missing_report.rows_dropped:
            lines.append(f"- rows dropped listwise: {b.missing_report.rows_dropped}")
        lines.append("")
    if b.reference_groups:
        lines.append("## Reference groups")
        lines.append("")
        lines.extend(f"- {var}: {ref}" for var, ref in sorted(b.reference_groups.items()))
        lines.append("")
    if b.nominal_summaries:
        lines.append("## Nominal group gaps")
        lines.append("")
        for s in b.nominal_summaries:
            lines.append(
                f"- {s.variable}: {s.pair_count} pairs; largest gap "
                f"{s.largest_pair[0]} vs {s.largest_pair[1]} = {s.largest_gap:.4f}"
                + (
                    f" ({100 * s.largest_gap / b.dv_pct_mean:.1f}% of the DV mean)"
                    if b.dv_pct_mean > 0
                    else ""
                )
            )
            lines.append(
                f"  mean |gap| {s.mean_abs_gap:.4f}"
                + (
                    f" ({100 * s.mean_abs_gap / b.dv_pct_mean:.1f}% of the DV mean)"
                    if b.dv_pct_mean > 0
                    else ""
                )
            )
        lines.append("")
    if b.ratio_notes:
        lines.append("## Efficiency comparisons")
        lines.append("")
        lines.append("| kind | form | i | j | value |")
        lines.append("|---|---|---|---|---|")
        lines.extend(
            f"| {n.kind} | {n.form} | {n.i} | {n.j} | {n.value:.3f} |"
            for n in b.ratio_notes
        )
        lines.append("")
    return "\n".join(lines)


# --- csv rendering ----------------------------------------------------------

def _coefficients_csv(b: ReportBundle, path: Path) -> None:
    fields = ["label", "name", "kind"]
    for flavor in ("b_w", "beta", "b_p"):
        fields += [flavor, f"{flavor}_boot_mean", f"{flavor}_se",
                   f"{flavor}_ci_low", f"{flavor}_ci_high", f"{flavor}_p"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(fields)

        def dist_cells(d):
            return [repr(float(v)) for v in
                    (d.point_estimate, d.mean, d.se, d.ci_low, d.ci_high, d.p_value)]

        w.writerow(
            ["Intercept", "intercept", "intercept"]
            + dist_cells(b.dists["intercept_raw"]) + [""] * 6
            + dist_cells(b.dists["intercept_p"])
        )
        for row in b.rows:
            if row.kind == "reference":
                w.writerow([row.label, row.name, "reference"] + [""] * 18)
                continue
            w.writerow(
                [row.label, row.name, "coefficient"]
                + dist_cells(b.dists[f"b_w:{row.name}"])
                + dist_cells(b.dists[f"beta:{row.name}"])
                + dist_cells(b.dists[f"b_p:{row.name}"])
            )
        w.writerow(
            ["Total r2", "r_squared", "statistic", repr(float(b.fit.r_squared))]
            + [""] * 17
        )


def _matrix_csv(matrix: ComparisonMatrix, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "estimate", "p_value", "stars"])
        for a, iname in enumerate(matrix.iv_names):
            for b_, jname in enumerate(matrix.iv_names):
                cell = matrix.cells[a][b_]
                if cell is None:
                    continue
                w.writerow([iname, jname, repr(float(cell.estimate)),
                            repr(float(cell.p_value)), cell.stars])


def render(bundle: ReportBundle, formats=("md", "csv"), out_dir=".") -> list[Path]:
    """Write the report files; returns the paths written."""
    formats = tuple(formats)
    unknown = set(formats) - {"md", "csv"}
    if unknown:
        raise ConfigError(f"unknown output formats: {sorted(unknown)}")
    if not formats:
        raise ConfigError("no output formats requested")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if "md" in formats:
        targets = {
            "coefficients.md": _coefficients_md(bundle),
            "scalar_matrix.md": _matrix_md(
                bundle.scalar_matrix, bundle.alpha_levels,
                "Scalar comparison of efficiencies",
                "d_s = |b_p(i)| - |b_p(j)|",
            ),
            "directional_matrix.md": _matrix_md(
                bundle.directional_matrix, bundle.alpha_levels,
                "Directional comparison of efficiencies",
                "d_d = b_p(i) - b_p(j)",
            ),
            "summary.md": _summary_md(bundle),
        }
        for name, text in targets.items():
            path = out / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
    if "csv" in formats:
        path = out / "coefficients.csv"
        _coefficients_csv(bundle, path)
        written.append(path)
        path = out / "scalar_matrix.csv"
        _matrix_csv(bundle.scalar_matrix, path)
        written.append(path)
        path = out / "directional_matrix.csv"
        _matrix_csv(bundle.directional_matrix, path)
        written.append(path)
    return written


__all__ = [
    "NominalSummary",
    "RatioNote",
    "ReportBundle",
    "ReportRow",
    "build_report_bundle",
    "default_ratio_pairs",
    "nominal_pairwise",
    "order_rows",
    "ratio_notes",
    "render",
]
