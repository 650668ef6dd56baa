"""Percentile-bootstrap inference for coefficients and efficiency differences.

Replicates resample whole rows with replacement and refit the model through
the kernel backend.  Replicate k draws its indices from an RNG stream derived
from ``(seed, k)``, so results are bit-identical for a fixed seed no matter
how many worker threads run the refits.  Rank-deficient resamples (a rare
dummy category can vanish from a resample) are redrawn from the same stream.

Inference follows the percentile recipe: the bootstrap SE is the standard
deviation of the replicates, the confidence interval takes nearest-rank
percentiles of the sorted replicates, and the two-sided p-value is twice the
smaller of the proportions of replicates at or below / at or above zero.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import (
    ConfigError,
    InsufficientDataError,
    NameLookupError,
    PathologicalDataError,
)
from .percentize import DesignMatrix
from .regression import CoefficientRecord, FitResult

log = logging.getLogger(__name__)

#: Replicates per kernel call; fixed so chunking never depends on thread count.
_CHUNK = 256

#: Spec'd total-draw budget is 100 x n_bootstrap; enforced per replicate so the
#: failure point does not depend on scheduling.
_MAX_DRAWS_PER_REPLICATE = 100


@dataclass(frozen=True)
class BootstrapConfig:
    n_bootstrap: int = 10_000
    seed: int = 0
    ci_level: float = 0.95
    alpha_levels: tuple[float, ...] = (0.05, 0.01, 0.001)

    def __post_init__(self):
        if self.n_bootstrap < 1:
            raise ConfigError("n_bootstrap must be at least 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not 0.0 < self.ci_level < 1.0:
            raise ConfigError("ci_level must lie strictly between 0 and 1")
        levels = tuple(self.alpha_levels)
        if any(not 0.0 < a < 1.0 for a in levels):
            raise ConfigError("alpha levels must lie strictly between 0 and 1")
        if any(b >= a for a, b in zip(levels, levels[1:])):
            raise ConfigError("alpha levels must be strictly decreasing")
        object.__setattr__(self, "alpha_levels", levels)


def two_sided_p(replicates: np.ndarray) -> float:
    """Twice the smaller zero-crossing proportion, capped at 1.

    Replicates exactly at zero count on both sides.  A value of 0 means no
    replicate reached the other side of zero; display code reports that as
    "< 2/n_bootstrap" rather than as an exact zero.
    """
    m = replicates.size
    le = int(np.count_nonzero(replicates <= 0.0))
    ge = int(np.count_nonzero(replicates >= 0.0))
    return min(1.0, 2.0 * min(le, ge) / m)


def stars_for(p_value: float, alpha_levels=(0.05, 0.01, 0.001)) -> int:
    """Number of alpha thresholds the p-value passes (0-3)."""
    return min(3, sum(1 for a in alpha_levels if p_value < a))


def _nearest_rank(sorted_values: np.ndarray, q: float) -> float:
    n = len(sorted_values)
    k = min(n, max(1, math.ceil(q * n)))
    return float(sorted_values[k - 1])


def percentile_ci(replicates: np.ndarray, ci_level: float) -> tuple[float, float]:
    """Nearest-rank percentile interval at the requested coverage."""
    tail = (1.0 - ci_level) / 2.0
    s = np.sort(replicates)
    return _nearest_rank(s, tail), _nearest_rank(s, 1.0 - tail)


@dataclass(eq=False)
class BootstrapDistribution:
    """Replicate vector for one statistic with its percentile summaries."""

    statistic_name: str
    replicates: np.ndarray
    point_estimate: float
    mean: float
    se: float
    ci_low: float
    ci_high: float
    p_value: float

    @classmethod
    def from_replicates(cls, name, replicates, point_estimate, ci_level):
        replicates = np.asarray(replicates, dtype=np.float64)
        if replicates.size == 0:
            raise ConfigError("cannot summarize an empty replicate vector")
        lo, hi = percentile_ci(replicates, ci_level)
        se = float(replicates.std(ddof=1)) if replicates.size > 1 else 0.0
        return cls(
            statistic_name=name,
            replicates=replicates,
            point_estimate=float(point_estimate),
            mean=float(replicates.mean()),
            se=se,
            ci_low=lo,
            ci_high=hi,
            p_value=two_sided_p(replicates),
        )

    @property
    def n_replicates(self) -> int:
        return int(self.replicates.size)

    @property
    def p_display(self) -> str:
        """Resolution-honest p-value text for report tables."""
        if self.p_value == 0.0:
            return f"< {2.0 / self.n_replicates:g}"
        return f"{self.p_value:g}"


@dataclass(eq=False)
class ReplicateFits:
    """Array-backed sequence of per-replicate fit results.

    Column 0 of ``bw``/``bp`` would be the intercept; it is kept separately
    so coefficient arrays align with ``names``.  Indexing materializes a
    :class:`FitResult` view for callers that want one.
    """

    names: list[str]
    intercept_raw: np.ndarray  # (m,)
    bw: np.ndarray  # (m, p)
    intercept_p: np.ndarray  # (m,)
    bp: np.ndarray  # (m, p)
    beta: np.ndarray  # (m, p)
    r2: np.ndarray  # (m,)
    n_used: int
    redraw_count: int = 0

    def __len__(self) -> int:
        return len(self.r2)

    def __getitem__(self, k: int) -> FitResult:
        rows = [
            CoefficientRecord(
                name, float(self.bw[k, j]), float(self.beta[k, j]), float(self.bp[k, j])
            )
            for j, name in enumerate(self.names)
        ]
        return FitResult(
            intercept_raw=float(self.intercept_raw[k]),
            intercept_p=float(self.intercept_p[k]),
            rows=rows,
            r_squared=float(self.r2[k]),
            n_used=self.n_used,
        )

    def column(self, flavor: str, name: str) -> np.ndarray:
        try:
            j = self.names.index(name)
        except ValueError:
            raise NameLookupError(f"no IV named {name!r} in the fit") from None
        return {"b_w": self.bw, "beta": self.beta, "b_p": self.bp}[flavor][:, j]


def _replicate_stream(seed: int, k: int) -> np.random.Generator:
    """The RNG stream owned by replicate k; independent of thread layout."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, k))))


def _run_chunk(kernel, data, seed, lo, hi, out, rank_tol):
    """Draw, fit, and redraw replicates [lo, hi); returns total draws made."""
    y_raw, x_raw, y_pct, x_pct = data
    n = len(y_raw)
    count = hi - lo
    gens = [_replicate_stream(seed, k) for k in range(lo, hi)]
    idx = np.empty((count, n), dtype=np.int64)
    for loc in range(count):
        idx[loc] = gens[loc].integers(0, n, size=n, dtype=np.int64)
    draws = count

    out_bw, out_bp, out_beta, out_r2, out_ok = (a[lo:hi] for a in out)
    kernel.fit_replicate_batch(
        y_raw, x_raw, y_pct, x_pct, idx,
        out_bw, out_bp, out_beta, out_r2, out_ok, rank_tol,
    )

    per_replicate = np.ones(count, dtype=np.int64)
    while True:
        bad = np.flatnonzero(out_ok == 0)
        if bad.size == 0:
            return draws
        for loc in bad:
            per_replicate[loc] += 1
            if per_replicate[loc] > _MAX_DRAWS_PER_REPLICATE:
                raise PathologicalDataError(
                    f"replicate {lo + int(loc)} stayed rank deficient after "
                    f"{_MAX_DRAWS_PER_REPLICATE} draws"
                )
            idx[loc] = gens[loc].integers(0, n, size=n, dtype=np.int64)
        draws += int(bad.size)
        sub_idx = np.ascontiguousarray(idx[bad])
        nb = bad.size
        p = x_raw.shape[1]
        t_bw = np.empty((nb, p + 1))
        t_bp = np.empty((nb, p + 1))
        t_beta = np.empty((nb, p))
        t_r2 = np.empty(nb)
        t_ok = np.zeros(nb, dtype=np.uint8)
        kernel.fit_replicate_batch(
            y_raw, x_raw, y_pct, x_pct, sub_idx,
            t_bw, t_bp, t_beta, t_r2, t_ok, rank_tol,
        )
        out_bw[bad] = t_bw
        out_bp[bad] = t_bp
        out_beta[bad] = t_beta
        out_r2[bad] = t_r2
        out_ok[bad] = t_ok


def bootstrap_fits(
    dm: DesignMatrix,
    cfg: BootstrapConfig,
    threads: int | None = None,
    _kernel=None,
) -> ReplicateFits:
    """Resample-and-refit the design matrix ``cfg.n_bootstrap`` times.

    ``threads`` sizes the worker pool (None or 1 runs inline).  Results are
    identical for a fixed seed at any thread count.
    """
    kernel = _kernel if _kernel is not None else backend.active()
    n = dm.n_rows
    p = len(dm.ivs)
    if n <= p + 1:
        raise InsufficientDataError(
            f"need more than {p + 1} rows to bootstrap {p} IVs; got {n}"
        )
    m = cfg.n_bootstrap
    data = (dm.y_raw, dm.X_raw, dm.y_pct, dm.X_pct)
    out = (
        np.empty((m, p + 1)),  # bw with intercept in column 0
        np.empty((m, p + 1)),  # bp with intercept in column 0
        np.empty((m, p)),  # beta
        np.empty(m),  # r2
        np.zeros(m, dtype=np.uint8),  # ok flags
    )
    rank_tol = backend.RANK_TOL

    bounds = [(lo, min(lo + _CHUNK, m)) for lo in range(0, m, _CHUNK)]
    if threads is None or threads <= 1 or len(bounds) == 1:
        draws = sum(
            _run_chunk(kernel, data, cfg.seed, lo, hi, out, rank_tol)
            for lo, hi in bounds
        )
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_run_chunk, kernel, data, cfg.seed, lo, hi, out, rank_tol)
                for lo, hi in bounds
            ]
            draws = sum(f.result() for f in futures)

    if draws > _MAX_DRAWS_PER_REPLICATE * m:
        raise PathologicalDataError(
            f"bootstrap needed {draws} draws for {m} replicates; data is pathological"
        )
    redraws = draws - m
    if redraws:
        log.info("bootstrap: %d rank-deficient resamples redrawn", redraws)

    out_bw, out_bp, out_beta, out_r2, _ = out
    return ReplicateFits(
        names=list(dm.names),
        intercept_raw=out_bw[:, 0].copy(),
        bw=out_bw[:, 1:].copy(),
        intercept_p=out_bp[:, 0].copy(),
        bp=out_bp[:, 1:].copy(),
        beta=out_beta,
        r2=np.clip(out_r2, 0.0, 1.0),
        n_used=n,
        redraw_count=redraws,
    )


def coefficient_inference(
    replicates: ReplicateFits, full_fit: FitResult, cfg: BootstrapConfig
) -> dict[str, BootstrapDistribution]:
    """One percentile-bootstrap summary per intercept and per coefficient flavor."""
    if len(replicates) == 0:
        raise ConfigError("no replicates to summarize")
    ci = cfg.ci_level
    dists: dict[str, BootstrapDistribution] = {
        "intercept_raw": BootstrapDistribution.from_replicates(
            "intercept_raw", replicates.intercept_raw, full_fit.intercept_raw, ci
        ),
        "intercept_p": BootstrapDistribution.from_replicates(
            "intercept_p", replicates.intercept_p, full_fit.intercept_p, ci
        ),
    }
    for j, name in enumerate(replicates.names):
        record = full_fit.row(name)
        dists[f"b_w:{name}"] = BootstrapDistribution.from_replicates(
            f"b_w:{name}", replicates.bw[:, j], record.b_w, ci
        )
        dists[f"beta:{name}"] = BootstrapDistribution.from_replicates(
            f"beta:{name}", replicates.beta[:, j], record.beta, ci
        )
        dists[f"b_p:{name}"] = BootstrapDistribution.from_replicates(
            f"b_p:{name}", replicates.bp[:, j], record.b_p, ci
        )
    return dists


def scalar_difference(bp_i: float, bp_j: float) -> float:
    """Efficiency gap ignoring direction: |b_p(i)| - |b_p(j)|."""
    return abs(bp_i) - abs(bp_j)


def directional_difference(bp_i: float, bp_j: float) -> float:
    """Sign-aware efficiency gap: b_p(i) - b_p(j)."""
    return bp_i - bp_j


def pairwise_differences(
    replicates: ReplicateFits,
    full_fit: FitResult,
    i: str,
    j: str,
    cfg: BootstrapConfig,
) -> tuple[BootstrapDistribution, BootstrapDistribution]:
    """Scalar and directional difference distributions for one IV pair.

    Point estimates come from the full-sample fit; the replicate vectors
    supply SE, CI, and the two-sided p-value.
    """
    if i == j:
        raise ConfigError("pairwise difference needs two distinct IVs")
    col_i = replicates.column("b_p", i)
    col_j = replicates.column("b_p", j)
    bp_i = full_fit.row(i).b_p
    bp_j = full_fit.row(j).b_p
    ds = BootstrapDistribution.from_replicates(
        f"d_s({i},{j})",
        np.abs(col_i) - np.abs(col_j),
        scalar_difference(bp_i, bp_j),
        cfg.ci_level,
    )
    dd = BootstrapDistribution.from_replicates(
        f"d_d({i},{j})",
        col_i - col_j,
        directional_difference(bp_i, bp_j),
        cfg.ci_level,
    )
    return ds, dd


@dataclass(frozen=True)
class Cell:
    estimate: float
    p_value: float
    stars: int


@dataclass(eq=False)
class ComparisonMatrix:
    """Square matrix of pairwise differences; ``cells[i][j]`` compares IV i
    against IV j (diagonal is None)."""

    kind: str  # "scalar" | "directional"
    iv_names: list[str]
    cells: list[list[Cell | None]]

    def cell(self, i: str, j: str) -> Cell:
        a = self.iv_names.index(i)
        b = self.iv_names.index(j)
        cell = self.cells[a][b]
        if cell is None:
            raise NameLookupError(f"no comparison cell for ({i}, {j})")
        return cell

    @property
    def filled_count(self) -> int:
        return sum(1 for row in self.cells for c in row if c is not None)


def comparison_matrices(
    replicates: ReplicateFits, full_fit: FitResult, cfg: BootstrapConfig
) -> tuple[ComparisonMatrix, ComparisonMatrix]:
    """All-pairs scalar and directional difference matrices with stars."""
    names = replicates.names
    if len(names) < 2:
        raise ConfigError("comparison matrices need at least 2 IVs")
    bp_cols = replicates.bp
    abs_cols = np.abs(bp_cols)
    bp_full = np.array([full_fit.row(n).b_p for n in names])

    p = len(names)
    scalar: list[list[Cell | None]] = [[None] * p for _ in range(p)]
    directional: list[list[Cell | None]] = [[None] * p for _ in range(p)]
    for a in range(p):
        for b in range(p):
            if a == b:
                continue
            est_s = float(scalar_difference(bp_full[a], bp_full[b]))
            p_s = two_sided_p(abs_cols[:, a] - abs_cols[:, b])
            scalar[a][b] = Cell(est_s, p_s, stars_for(p_s, cfg.alpha_levels))
            est_d = float(directional_difference(bp_full[a], bp_full[b]))
            p_d = two_sided_p(bp_cols[:, a] - bp_cols[:, b])
            directional[a][b] = Cell(est_d, p_d, stars_for(p_d, cfg.alpha_levels))
    return (
        ComparisonMatrix("scalar", list(names), scalar),
        ComparisonMatrix("directional", list(names), directional),
    )


__all__ = [
    "BootstrapConfig",
    "BootstrapDistribution",
    "Cell",
    "ComparisonMatrix",
    "ReplicateFits",
    "bootstrap_fits",
    "coefficient_inference",
    "comparison_matrices",
    "directional_difference",
    "pairwise_differences",
    "percentile_ci",
    "scalar_difference",
    "stars_for",
    "two_sided_p",
]
