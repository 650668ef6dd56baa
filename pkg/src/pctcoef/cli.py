"""Batch command-line entry point.

One run = one JSON config (data path, variable specs, bootstrap settings)
plus optional flag overrides.  The pipeline is load -> missing policy ->
percentize -> fit -> bootstrap -> report; everything that affects the
numbers (imputation, reference groups, redraws) is logged to stderr.

Exit codes: 0 success, 1 schema/config errors, 2 data errors, 3 numeric
errors (collinearity, insufficient data).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace

from . import backend
from .bootstrap import (
    BootstrapConfig,
    ComparisonMatrix,
    bootstrap_fits,
    coefficient_inference,
    comparison_matrices,
)
from .dataset import VariableSpec, apply_missing_policy, load_csv
from .errors import ConfigError, PctcoefError, exit_code_for
from .percentize import build_design_matrix
from .regression import fit_three_ways
from .report import build_report_bundle, render

log = logging.getLogger("pctcoef")

_SPEC_KEYS = {
    "name", "role", "kind", "conceptual_min", "conceptual_max",
    "missing_policy", "reference_group", "reference_rule", "missing_category",
}
_BOOTSTRAP_KEYS = {"n_bootstrap", "seed", "ci_level", "alpha_levels"}
_CONFIG_KEYS = {"data", "variables", "bootstrap", "output_dir", "formats", "strict_anchors"}


@dataclass
class RunConfig:
    data_path: str
    variables: list[VariableSpec]
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    output_dir: str = "pctcoef_out"
    output_formats: tuple[str, ...] = ("md", "csv")
    strict_anchors: bool = False

    def __post_init__(self):
        dependents = [v.name for v in self.variables if v.role == "dependent"]
        if len(dependents) != 1:
            raise ConfigError(
                "config must declare exactly one dependent variable; found "
                f"{dependents or 'none'}"
            )
        if not any(v.role in ("independent", "control") for v in self.variables):
            raise ConfigError("config must declare at least one independent variable")

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        unknown = set(doc) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "data" not in doc:
            raise ConfigError("config requires a 'data' path")
        if "variables" not in doc or not isinstance(doc["variables"], list):
            raise ConfigError("config requires a 'variables' list")
        variables = [_spec_from_dict(v) for v in doc["variables"]]
        boot = doc.get("bootstrap", {})
        unknown = set(boot) - _BOOTSTRAP_KEYS
        if unknown:
            raise ConfigError(f"unknown bootstrap keys: {sorted(unknown)}")
        if "alpha_levels" in boot:
            boot = dict(boot, alpha_levels=tuple(boot["alpha_levels"]))
        return cls(
            data_path=doc["data"],
            variables=variables,
            bootstrap=BootstrapConfig(**boot),
            output_dir=doc.get("output_dir", "pctcoef_out"),
            output_formats=tuple(doc.get("formats", ("md", "csv"))),
            strict_anchors=bool(doc.get("strict_anchors", False)),
        )

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(doc)


def _spec_from_dict(doc) -> VariableSpec:
    if not isinstance(doc, dict):
        raise ConfigError("each variable spec must be a JSON object")
    unknown = set(doc) - _SPEC_KEYS
    if unknown:
        raise ConfigError(
            f"variable {doc.get('name', '?')!r}: unknown keys {sorted(unknown)}"
        )
    return VariableSpec(**doc)


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("PCTCOEF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PCTCOEF_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def run(config_path, args: argparse.Namespace | None = None) -> int:
    """Execute one batch run; returns the process exit code."""
    try:
        cfg = RunConfig.load(config_path)
        if args is not None:
            cfg = _apply_overrides(cfg, args)
        threads = _resolve_threads(getattr(args, "threads", None))

        dataset = load_csv(cfg.data_path, cfg.variables)
        dataset, missing_report = apply_missing_policy(dataset)
        for entry in missing_report.entries:
            log.info(
                "missing: %s had %d missing -> %s",
                entry.variable, entry.missing_count, entry.resolution,
            )
        dm = build_design_matrix(dataset, strict_anchors=cfg.strict_anchors)
        for var, ref in dm.batch_tags.nominal_refs.items():
            log.info("reference group: %s -> %r", var, ref)

        fit = fit_three_ways(dm)
        log.info("fit: n=%d, %d IVs, r²=%.4f", fit.n_used, len(fit.rows), fit.r_squared)

        reps = bootstrap_fits(dm, cfg.bootstrap, threads=threads)
        log.info(
            "bootstrap: %d replicates (seed %d, %d threads, backend %s), %d redraws",
            cfg.bootstrap.n_bootstrap, cfg.bootstrap.seed, threads,
            backend.BACKEND, reps.redraw_count,
        )
        dists = coefficient_inference(reps, fit, cfg.bootstrap)
        if len(dm.names) >= 2:
            scalar, directional = comparison_matrices(reps, fit, cfg.bootstrap)
        else:
            log.info("single IV: comparison matrices are empty")
            scalar = ComparisonMatrix("scalar", list(dm.names), [[None]])
            directional = ComparisonMatrix("directional", list(dm.names), [[None]])

        bundle = build_report_bundle(
            fit=fit,
            batch_tags=dm.batch_tags,
            dists=dists,
            scalar_matrix=scalar,
            directional_matrix=directional,
            cfg=cfg.bootstrap,
            dv_name=dm.dv.name,
            dv_pct_mean=float(dm.dv.values.mean()),
            missing_report=missing_report,
            redraw_count=reps.redraw_count,
        )
        written = render(bundle, cfg.output_formats, cfg.output_dir)
        for path in written:
            log.info("wrote %s", path)
        return 0
    except (PctcoefError, OSError) as exc:
        log.error("%s", exc)
        return exit_code_for(exc)


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    boot = cfg.bootstrap
    boot_fields = {}
    if getattr(args, "bootstrap", None) is not None:
        boot_fields["n_bootstrap"] = args.bootstrap
    if getattr(args, "seed", None) is not None:
        boot_fields["seed"] = args.seed
    if getattr(args, "ci", None) is not None:
        boot_fields["ci_level"] = args.ci
    if boot_fields:
        boot = replace(boot, **boot_fields)

    fields = {"bootstrap": boot}
    if getattr(args, "data", None) is not None:
        fields["data_path"] = args.data
    if getattr(args, "out", None) is not None:
        fields["output_dir"] = args.out
    if getattr(args, "format", None) is not None:
        fields["output_formats"] = tuple(
            f.strip() for f in args.format.split(",") if f.strip()
        )
    if getattr(args, "strict_anchors", False):
        fields["strict_anchors"] = True
    return replace(cfg, **fields)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pctcoef",
        description=(
            "Percentage-scale regression coefficients with percentile-bootstrap "
            "inference and publication-style report tables."
        ),
    )
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--data", help="override the CSV data path")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--bootstrap", type=int, metavar="N",
                        help="override the bootstrap replicate count")
    parser.add_argument("--seed", type=int, help="override the bootstrap seed")
    parser.add_argument("--ci", type=float, help="override the CI level (e.g. 0.95)")
    parser.add_argument("--format", help="comma-separated output formats (md,csv)")
    parser.add_argument("--strict-anchors", action="store_true", dest="strict_anchors",
                        help="reject values outside the conceptual anchors")
    parser.add_argument("--threads", type=int,
                        help="bootstrap worker threads (default: machine parallelism, "
                             "or PCTCOEF_THREADS)")
    parser.add_argument("-q", "--quiet", action="store_true", help="log warnings only")
    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    sys.exit(run(args.config, args))


if __name__ == "__main__":
    main()
