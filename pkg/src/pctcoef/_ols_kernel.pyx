# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled least-squares kernels for the bootstrap hot loop.

Each replicate gathers its resampled rows into a Fortran-layout work matrix
and solves two intercept-augmented least-squares systems (raw scales, then
percentage scales) through LAPACK's QR driver ``dgels``.  A replicate is
flagged not-ok when the triangular factor fails a relative rank tolerance,
so the caller can redraw it.  The batch loop runs without the GIL; callers
hand in disjoint output slices, one batch per worker thread.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from scipy.linalg.cython_lapack cimport dgels

cnp.import_array()

NAME = "compiled"

RANK_TOL = 1e-10


cdef inline bint _diag_ok(double* a, int n, int k, double rank_tol) noexcept nogil:
    """Relative rank check on the R factor dgels left in a's upper triangle."""
    cdef double dmax = 0.0, dmin = 0.0, v
    cdef int j
    for j in range(k):
        v = fabs(a[j * n + j])
        if j == 0 or v > dmax:
            dmax = v
        if j == 0 or v < dmin:
            dmin = v
    return dmax > 0.0 and dmin > rank_tol * dmax


cdef inline bint _solve_inplace(double* a, double* b, double* work,
                                int n, int k, int lwork, double rank_tol) noexcept nogil:
    """QR least squares on the (n, k) column-major matrix at ``a``.

    On success b[0:k] holds the solution and b[k:n] the residual tail.
    """
    cdef char trans = b'N'
    cdef int nrhs = 1, info = 0
    dgels(&trans, &n, &k, &nrhs, a, &n, b, &n, work, &lwork, &info)
    if info != 0:
        return False
    return _diag_ok(a, n, k, rank_tol)


cdef int _query_lwork(int n, int k) except -1:
    cdef char trans = b'N'
    cdef int nrhs = 1, info = 0, lwork = -1
    cdef double wkopt = 0.0
    cdef double a0 = 0.0, b0 = 0.0
    dgels(&trans, &n, &k, &nrhs, &a0, &n, &b0, &n, &wkopt, &lwork, &info)
    if info != 0:
        raise RuntimeError(f"dgels workspace query failed (info={info})")
    return <int>wkopt


def ols_qr(x, y, double rank_tol=RANK_TOL):
    """Least squares of y on the columns of x (no implicit intercept).

    Returns ``(coef, ok, rss)``; ``ok`` is False when the triangular factor
    fails the relative rank tolerance (coef is then meaningless).
    """
    a_arr = np.array(x, dtype=np.float64, order="F", copy=True)
    b_arr = np.array(y, dtype=np.float64, copy=True)
    cdef int n = a_arr.shape[0], k = a_arr.shape[1]
    if n < k:
        raise ValueError("underdetermined system: more columns than rows")
    cdef int lwork = _query_lwork(n, k)
    work_arr = np.empty(lwork, dtype=np.float64)
    cdef double[::1, :] a = a_arr
    cdef double[::1] b = b_arr
    cdef double[::1] work = work_arr
    cdef bint ok
    cdef double rss = 0.0
    cdef Py_ssize_t i
    with nogil:
        ok = _solve_inplace(&a[0, 0], &b[0], &work[0], n, k, lwork, rank_tol)
        if ok:
            for i in range(k, n):
                rss += b[i] * b[i]
    if not ok:
        return np.zeros(k), False, 0.0
    return b_arr[:k].copy(), True, rss


def fit_replicate_batch(double[::1] y_raw, double[:, ::1] x_raw,
                        double[::1] y_pct, double[:, ::1] x_pct,
                        cnp.int64_t[:, ::1] indices,
                        double[:, ::1] out_bw, double[:, ::1] out_bp,
                        double[:, ::1] out_beta, double[::1] out_r2,
                        cnp.uint8_t[::1] out_ok,
                        double rank_tol=RANK_TOL):
    """Refit one bootstrap replicate per row of ``indices``.

    Matches ``_ols_fallback.fit_replicate_batch``: raw fit feeds out_bw /
    out_beta / out_r2, percentized fit feeds out_bp, and out_ok marks rows
    whose fits were full rank.  Intercepts sit in column 0 of out_bw/out_bp.
    """
    cdef int n = <int>y_raw.shape[0]
    cdef int p = <int>x_raw.shape[1]
    cdef int k = p + 1
    cdef Py_ssize_t m = indices.shape[0]
    if n <= k:
        raise ValueError("need more rows than coefficients")
    cdef int lwork = _query_lwork(n, k)

    a_arr = np.empty(n * k, dtype=np.float64)  # column-major work matrix
    b_arr = np.empty(n, dtype=np.float64)
    sdx_arr = np.empty(p, dtype=np.float64)
    work_arr = np.empty(lwork, dtype=np.float64)
    cdef double[::1] a = a_arr
    cdef double[::1] b = b_arr
    cdef double[::1] sdx = sdx_arr
    cdef double[::1] work = work_arr

    cdef Py_ssize_t r, i, j
    cdef cnp.int64_t row
    cdef double s, d, mean_j, tss, sdy, rss, v
    cdef bint ok

    with nogil:
        for r in range(m):
            ok = True

            # raw response: mean and total sum of squares in two passes
            s = 0.0
            for i in range(n):
                v = y_raw[indices[r, i]]
                b[i] = v
                s += v
            mean_j = s / n
            tss = 0.0
            for i in range(n):
                d = b[i] - mean_j
                tss += d * d
            sdy = sqrt(tss / (n - 1))
            if sdy == 0.0:
                ok = False

            # intercept column, then raw predictors with two-pass SDs
            for i in range(n):
                a[i] = 1.0
            for j in range(p):
                s = 0.0
                for i in range(n):
                    v = x_raw[indices[r, i], j]
                    a[(j + 1) * n + i] = v
                    s += v
                mean_j = s / n
                s = 0.0
                for i in range(n):
                    d = a[(j + 1) * n + i] - mean_j
                    s += d * d
                sdx[j] = sqrt(s / (n - 1))
                if sdx[j] == 0.0:
                    ok = False

            if not _solve_inplace(&a[0], &b[0], &work[0], n, k, lwork, rank_tol):
                ok = False
            rss = 0.0
            for i in range(k, n):
                rss += b[i] * b[i]
            out_bw[r, 0] = b[0]
            for j in range(p):
                out_bw[r, j + 1] = b[j + 1]
                out_beta[r, j] = b[j + 1] * sdx[j] / sdy if sdy > 0.0 else 0.0
            out_r2[r] = 1.0 - rss / tss if tss > 0.0 else 0.0

            # percentized fit
            for i in range(n):
                row = indices[r, i]
                a[i] = 1.0
                b[i] = y_pct[row]
            for j in range(p):
                for i in range(n):
                    a[(j + 1) * n + i] = x_pct[indices[r, i], j]
            if not _solve_inplace(&a[0], &b[0], &work[0], n, k, lwork, rank_tol):
                ok = False
            out_bp[r, 0] = b[0]
            for j in range(p):
                out_bp[r, j + 1] = b[j + 1]

            out_ok[r] = 1 if ok else 0
