"""Ordinary least squares fitted three ways on the same model.

One fit on original scales yields the raw coefficients (b_w), standardized
betas derive from the raw fit and sample SDs, and one fit on percentage
scales yields the percentage coefficients (b_p).  All three share signs and
the model r-squared; b_p relates to b_w through the ratio of conceptual
scale widths.

The production solver goes through an orthogonal decomposition (LAPACK QR
via the selected backend).  The explicit normal-equations path exists only
as an independent oracle inside the test suite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import CollinearityError, DegenerateVariableError, InsufficientDataError
from .percentize import DesignMatrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoefficientRecord:
    """The three coefficient flavors for one IV."""

    name: str
    b_w: float
    beta: float
    b_p: float


@dataclass(eq=False)
class FitResult:
    """Full-sample fit: intercepts on both scales, per-IV coefficients, r²."""

    intercept_raw: float
    intercept_p: float
    rows: list[CoefficientRecord]
    r_squared: float
    n_used: int

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.rows]

    def row(self, name: str) -> CoefficientRecord:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def bp_vector(self) -> np.ndarray:
        return np.array([r.b_p for r in self.rows])


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, np.ndarray) and x.ndim == 2:
        return np.ascontiguousarray(x, dtype=np.float64)
    return np.ascontiguousarray(np.column_stack([np.asarray(c) for c in x]))


def _dependent_column_set(a: np.ndarray, names: list[str]) -> list[str]:
    """Name the columns involved in a rank deficiency via the SVD null space."""
    _, s, vt = np.linalg.svd(a, full_matrices=False)
    tol = backend.RANK_TOL * s.max() if s.size else 0.0
    involved: set[str] = set()
    for i, sv in enumerate(s):
        if sv <= tol:
            weights = np.abs(vt[i])
            for j in np.flatnonzero(weights > 1e-8 * weights.max()):
                involved.add(names[j])
    return sorted(involved)


def fit_ols(y, x) -> tuple[float, np.ndarray, float]:
    """Least squares of y on x plus an intercept.

    Returns ``(intercept, coefficients, r_squared)``.  r² is defined as 0
    when the response has no variance.  Rank deficiency raises
    :class:`CollinearityError` naming a dependent column set.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    xm = _as_matrix(x)
    n, p = xm.shape
    if len(y) != n:
        raise ValueError("y and X have different lengths")
    if n <= p + 1:
        raise InsufficientDataError(
            f"need more than {p + 1} rows to fit {p} IVs plus intercept; got {n}"
        )
    a = np.empty((n, p + 1))
    a[:, 0] = 1.0
    a[:, 1:] = xm
    coef, ok, rss = backend.active().ols_qr(a, y)
    if not ok:
        names = ["intercept"] + [f"x{j}" for j in range(p)]
        dependent = _dependent_column_set(a, names)
        raise CollinearityError(f"design matrix is rank deficient: {dependent}")
    tss = float(((y - y.mean()) ** 2).sum())
    if tss == 0.0:
        log.warning("response has zero variance; r_squared defined as 0")
        r2 = 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - rss / tss))
    return float(coef[0]), coef[1:], r2


def standardized_beta(b_w: float, sd_x: float, sd_y: float) -> float:
    """Rescale a raw coefficient into SD units on both sides."""
    if not sd_x > 0.0 or not sd_y > 0.0:
        raise DegenerateVariableError(
            f"standardized beta needs positive SDs (got sd_x={sd_x}, sd_y={sd_y})"
        )
    return b_w * sd_x / sd_y


def fit_three_ways(dm: DesignMatrix) -> FitResult:
    """Fit the model on raw and on percentage scales and derive betas.

    The raw fit supplies b_w and the raw-scale intercept; the percentized
    fit supplies b_p and the percentage-scale intercept.  Both necessarily
    agree on r² (an affine reparameterization of the same model), which is
    reported once.
    """
    try:
        int_raw, bw, r2_raw = fit_ols(dm.y_raw, dm.X_raw)
        int_p, bp, r2_pct = fit_ols(dm.y_pct, dm.X_pct)
    except CollinearityError as exc:
        # re-run the diagnosis with real column names
        names = ["intercept"] + dm.names
        a = np.column_stack([np.ones(dm.n_rows), dm.X_raw])
        dependent = _dependent_column_set(a, names)
        raise CollinearityError(
            f"design matrix is rank deficient: {dependent}"
        ) from exc

    if abs(r2_raw - r2_pct) > 1e-8:
        log.warning(
            "raw and percentized fits disagree on r_squared (%.3e); "
            "the design is badly conditioned", abs(r2_raw - r2_pct),
        )

    sd_y = float(dm.y_raw.std(ddof=1))
    sds = dm.X_raw.std(axis=0, ddof=1)
    rows = [
        CoefficientRecord(
            name=name,
            b_w=float(bw[j]),
            beta=standardized_beta(float(bw[j]), float(sds[j]), sd_y),
            b_p=float(bp[j]),
        )
        for j, name in enumerate(dm.names)
    ]
    return FitResult(
        intercept_raw=float(int_raw),
        intercept_p=float(int_p),
        rows=rows,
        r_squared=float(r2_raw),
        n_used=dm.n_rows,
    )


__all__ = [
    "CoefficientRecord",
    "FitResult",
    "fit_ols",
    "fit_three_ways",
    "standardized_beta",
]
