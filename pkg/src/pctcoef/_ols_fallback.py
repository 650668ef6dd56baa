"""Pure-NumPy least-squares kernels: the fallback used when the compiled
extension is unavailable.  Semantics match ``_ols_kernel`` exactly; only the
per-replicate overhead differs.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular

NAME = "pure"

RANK_TOL = 1e-10


def _qr_solve(a, y, rank_tol):
    """Householder-QR least squares with a relative rank check on diag(R)."""
    q, r = np.linalg.qr(a, mode="reduced")
    d = np.abs(np.diag(r))
    dmax = d.max()
    if not (dmax > 0.0 and d.min() > rank_tol * dmax):
        return np.zeros(a.shape[1]), False, 0.0
    coef = solve_triangular(r, q.T @ y, lower=False)
    resid = y - a @ coef
    return coef, True, float(resid @ resid)


def ols_qr(x, y, rank_tol=RANK_TOL):
    """Least squares of y on the columns of x (no implicit intercept).

    Returns ``(coef, ok, rss)`` where ``ok`` is False when the triangular
    factor fails the relative rank tolerance (coef is then meaningless).
    """
    a = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if a.shape[0] < a.shape[1]:
        raise ValueError("underdetermined system: more columns than rows")
    return _qr_solve(a, y, rank_tol)


def fit_replicate_batch(
    y_raw, x_raw, y_pct, x_pct, indices,
    out_bw, out_bp, out_beta, out_r2, out_ok,
    rank_tol=RANK_TOL,
):
    """Refit one bootstrap replicate per row of ``indices``.

    For each replicate the resampled rows are fitted twice (raw scales for
    the raw coefficients, percentage scales for the percentage coefficients);
    standardized betas use the resample's own n-1 standard deviations.
    ``out_ok`` is 0 where either fit is rank deficient and the replicate must
    be redrawn.  Output rows beyond ``out_ok == 1`` carry unusable values.
    """
    n, p = x_raw.shape
    a = np.empty((n, p + 1))
    a[:, 0] = 1.0
    for r in range(indices.shape[0]):
        idx = indices[r]
        yr = y_raw[idx]
        a[:, 1:] = x_raw[idx]
        sdx = a[:, 1:].std(axis=0, ddof=1)
        tss = float(((yr - yr.mean()) ** 2).sum())
        sdy = math.sqrt(tss / (n - 1))
        ok = sdy > 0.0 and bool((sdx > 0.0).all())

        coef, solved, rss = _qr_solve(a, yr, rank_tol)
        ok = ok and solved
        out_bw[r] = coef
        out_beta[r] = coef[1:] * sdx / sdy if sdy > 0.0 else 0.0
        out_r2[r] = 1.0 - rss / tss if tss > 0.0 else 0.0

        a[:, 1:] = x_pct[idx]
        coef_p, solved_p, _ = _qr_solve(a, y_pct[idx], rank_tol)
        out_bp[r] = coef_p
        out_ok[r] = 1 if (ok and solved_p) else 0
