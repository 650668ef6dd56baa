"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; a summary block of all
criterion outcomes is printed at the end of the session.
"""

import functools
import json
import time
from itertools import combinations

import numpy as np
import pytest

from pctcoef.bootstrap import (
    BootstrapConfig,
    bootstrap_fits,
    coefficient_inference,
    comparison_matrices,
    two_sided_p,
)
from pctcoef.cli import build_parser, run
from pctcoef.percentize import minmax_value, percent_value_100, percentize_value
from pctcoef.regression import fit_ols, fit_three_ways
from pctcoef.report import nominal_pairwise, ratio_notes

from .conftest import ACCEPTANCE_LINES, numeric_dm, random_regression
from .test_bootstrap import PUBLISHED_BP, PUBLISHED_NAMES, make_fit, make_replicates
from .test_cli import base_config, synthetic_csv, tree_bytes, write_config
from .test_report import PUBLISHED_TAGS, published_fit


def criterion(num, desc):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                ACCEPTANCE_LINES.append(f"criterion {num:2d}  FAIL  {desc}")
                raise
            ACCEPTANCE_LINES.append(f"criterion {num:2d}  PASS  {desc}")
        return wrapper
    return deco


@criterion(1, "percentize reproduces the published observed values")
def test_c01_percentize_spot_checks():
    checks = [
        # (raw value, anchors, published percentized value)
        (18.0, (0, 100), 0.18),     # AGE observed min
        (104.0, (0, 100), 1.04),    # AGE observed max
        (57.01, (0, 100), 0.57),    # AGE mean
        (1.0, (1, 4), 0.00),        # PSD observed min
        (4.0, (1, 4), 1.00),        # PSD observed max
        (1.50, (1, 4), 0.17),       # PSD mean
        (5.59, (1, 9), 0.57),       # INC mean
        (4.93, (1, 7), 0.66),       # EDU mean
    ]
    for raw, (lo, hi), published in checks:
        got = percentize_value(raw, lo, hi)
        assert abs(got - published) <= 0.005 + 1e-9, (raw, got, published)


@criterion(2, "min-max transform reduces to the 0-1 and 0-100 transforms")
def test_c02_reduction_identities():
    rng = np.random.default_rng(202)
    n = 100_000
    lo = rng.uniform(-100, 100, n)
    hi = lo + rng.uniform(0.5, 200, n)
    v = rng.uniform(lo - 50, hi + 50)
    diff_unit = np.abs(
        minmax_value(v, lo, hi, 0, 1) - percentize_value(v, lo, hi)
    )
    diff_cent = np.abs(
        minmax_value(v, lo, hi, 0, 100) - percent_value_100(v, lo, hi)
    )
    assert diff_unit.max() <= 1e-12
    assert diff_cent.max() <= 1e-12


@criterion(3, "b_p equals b_w scaled by the anchor-range ratio")
def test_c03_conversion_identity():
    rng = np.random.default_rng(303)
    for _ in range(200):
        y, xcols, ya, xa, _ = random_regression(rng)
        fit = fit_three_ways(numeric_dm(y, xcols, ya, xa))
        ry = ya[1] - ya[0]
        for row, (lo, hi) in zip(fit.rows, xa):
            assert abs(row.b_p - row.b_w * (hi - lo) / ry) <= 1e-10
    # published consistency: a slope printed as -.008 (so within +-0.0005)
    # and a 100/3 range ratio bound the published percentage coefficient
    lo_bound = -0.0085 * 100.0 / 3.0
    hi_bound = -0.0075 * 100.0 / 3.0
    assert lo_bound <= -0.269 <= hi_bound
    assert lo_bound == pytest.approx(-0.2833, abs=1e-4)
    assert hi_bound == pytest.approx(-0.25, abs=1e-12)


@criterion(4, "betas and r² are invariant under affine rescalings")
def test_c04_invariance_suite():
    rng = np.random.default_rng(404)
    start = time.perf_counter()
    for _ in range(200):
        y, xcols, ya, xa, _ = random_regression(rng, noise=1.0)
        dm = numeric_dm(y, xcols, ya, xa)
        fit = fit_three_ways(dm)

        p = len(xcols)
        alphas = rng.uniform(0.1, 10, size=p)
        gammas = rng.uniform(-100, 100, size=p)
        ay = float(rng.uniform(0.1, 10))
        gy = float(rng.uniform(-100, 100))
        xcols2 = [a * np.asarray(c) + g for c, a, g in zip(xcols, alphas, gammas)]
        xa2 = [(a * lo + g, a * hi + g) for (lo, hi), a, g in zip(xa, alphas, gammas)]
        y2 = ay * np.asarray(y) + gy
        ya2 = (ay * ya[0] + gy, ay * ya[1] + gy)
        fit2 = fit_three_ways(numeric_dm(y2, xcols2, ya2, xa2))

        for r1, r2 in zip(fit.rows, fit2.rows):
            assert abs(r1.beta - r2.beta) <= 1e-10
        assert abs(fit.r_squared - fit2.r_squared) <= 1e-10

        # raw and percentized fits agree on r²
        _, _, r2_raw = fit_ols(dm.y_raw, dm.X_raw)
        _, _, r2_pct = fit_ols(dm.y_pct, dm.X_pct)
        assert abs(r2_raw - r2_pct) <= 1e-10
    assert time.perf_counter() - start < 10.0


@criterion(5, "QR fit matches the normal-equations oracle")
def test_c05_ols_oracle_equivalence():
    rng = np.random.default_rng(505)
    for _ in range(500):
        p = int(rng.integers(1, 11))
        n = int(rng.integers(p + 3, 201))
        x = rng.normal(size=(n, p))
        y = x @ rng.uniform(-2, 2, p) + rng.normal(size=n)
        intercept, coef, r2 = fit_ols(y, x)
        a = np.column_stack([np.ones(n), x])
        oracle = np.linalg.solve(a.T @ a, a.T @ y)
        assert abs(intercept - oracle[0]) <= 1e-8
        assert np.abs(coef - oracle[1:]).max() <= 1e-8


@criterion(6, "the bootstrap p-value rule matches a brute-force count")
def test_c06_p_value_rule():
    def brute(values):
        m = len(values)
        le = sum(1 for v in values if v <= 0)
        ge = sum(1 for v in values if v >= 0)
        return min(1.0, 2.0 * min(le, ge) / m)

    hand_cases = [
        [-1.0, -2.0, -3.0, -4.0],  # one-sided: p = 0, displayed as < 2/4
        [-1.0, 1.0],               # split: p = 1.0
        [0.0, 1.0, 2.0, 3.0],      # zero counts on both sides
        [0.0, 0.0, 0.0],
        [5.0],
    ]
    for case in hand_cases:
        assert two_sided_p(np.asarray(case)) == pytest.approx(brute(case))
    assert two_sided_p(np.array([-1.0, 1.0])) == 1.0
    assert two_sided_p(np.array([-1.0, -2.0, -3.0, -4.0])) == 0.0

    rng = np.random.default_rng(606)
    for _ in range(200):
        m = int(rng.integers(1, 400))
        values = rng.normal(rng.uniform(-1, 1), 1.0, size=m)
        if rng.random() < 0.3:
            values[rng.random(m) < 0.2] = 0.0
        assert two_sided_p(values) == pytest.approx(brute(values.tolist()))


@criterion(7, "difference matrices reproduce the published spot values")
def test_c07_difference_arithmetic():
    reps = make_replicates(PUBLISHED_NAMES, np.tile(PUBLISHED_BP, (10, 1)))
    fit = make_fit(PUBLISHED_NAMES, PUBLISHED_BP)
    cfg = BootstrapConfig(n_bootstrap=10, seed=0)
    scalar, directional = comparison_matrices(reps, fit, cfg)

    assert scalar.cell("AGE", "INC").estimate == pytest.approx(0.105, abs=1e-12)
    assert scalar.cell("INC", "AGE").estimate == pytest.approx(-0.105, abs=1e-12)
    assert abs(abs(scalar.cell("INC", "RAC_wht").estimate) - 0.091) <= 0.001 + 1e-12
    assert abs(directional.cell("GEN", "AGE").estimate - 0.302) <= 0.001 + 1e-12

    for matrix in (scalar, directional):
        assert matrix.filled_count == 72
        for a in range(9):
            assert matrix.cells[a][a] is None
            for b in range(9):
                if a != b:
                    assert (
                        matrix.cells[a][b].estimate == -matrix.cells[b][a].estimate
                    )


@criterion(8, "nominal pairwise summary and ratio notes reproduce published arithmetic")
def test_c08_nominal_summary():
    s = nominal_pairwise(published_fit(), PUBLISHED_TAGS, "RAC")
    assert s.pair_count == 10
    assert s.largest_gap == pytest.approx(0.073, abs=1e-12)
    assert round(s.mean_abs_gap, 4) == 0.0372
    # brute force over the published group coefficients
    coefs = {"otr": 0.0, "wht": -0.073, "blk": -0.071, "hsp": -0.047, "asn": -0.031}
    gaps = [abs(coefs[a] - coefs[b]) for a, b in combinations(sorted(coefs), 2)]
    assert s.mean_abs_gap == pytest.approx(sum(gaps) / 10, abs=1e-12)

    notes = ratio_notes(published_fit(), [("AGE", "INC"), ("AGE", "EDU")])
    by_key = {(n.i, n.j, n.form): n.value for n in notes}
    assert round(by_key[("AGE", "EDU", "multiple")], 3) == 7.686  # 0.269 / 0.035
    # the published "0.105/0.164" figure: the formula value from those
    # operands (see the strict xfail below for the printed 0.616)
    assert round(by_key[("AGE", "INC", "excess")], 3) == round(0.105 / 0.164, 3)


@pytest.mark.xfail(
    strict=True,
    reason=(
        "the published text prints 0.105/0.164 = 0.616, but 0.105/0.164 is "
        "0.640 to three decimals; the printed ratio evidently used unrounded "
        "coefficients that are not recoverable from the published table"
    ),
)
def test_c08_published_ratio_literal():
    notes = ratio_notes(published_fit(), [("AGE", "INC")])
    excess = next(n.value for n in notes if n.form == "excess")
    assert round(excess, 3) == 0.616


@criterion(9, "full CLI runs are byte-identical across seeds and thread counts")
def test_c09_cli_determinism(tmp_path):
    data = synthetic_csv(tmp_path / "data.csv", n=1000, seed=99)
    out_serial = tmp_path / "serial"
    out_threaded = tmp_path / "threaded"
    doc = base_config(data, out_serial, n_bootstrap=10_000, seed=42)
    cfg_a = write_config(tmp_path, doc, "a.json")
    doc_b = dict(doc, output_dir=str(out_threaded))
    cfg_b = write_config(tmp_path, doc_b, "b.json")

    parser = build_parser()
    start = time.perf_counter()
    code_a = run(cfg_a, parser.parse_args(["--config", str(cfg_a), "--threads", "1"]))
    t_serial = time.perf_counter() - start
    start = time.perf_counter()
    code_b = run(cfg_b, parser.parse_args(["--config", str(cfg_b), "--threads", "4"]))
    t_threaded = time.perf_counter() - start

    assert code_a == 0 and code_b == 0
    assert len(list(out_serial.iterdir())) == 7
    assert tree_bytes(out_serial) == tree_bytes(out_threaded)
    assert t_serial < 60.0 and t_threaded < 60.0, (t_serial, t_threaded)


@criterion(10, "95% percentile intervals cover the truth 90-98% of the time")
def test_c10_statistical_coverage():
    rng = np.random.default_rng(1010)
    n, datasets, replicates = 300, 500, 600
    slope = 0.5
    x_anchors, y_anchors = (0.0, 10.0), (-4.0, 16.0)
    true_bp = slope * (x_anchors[1] - x_anchors[0]) / (y_anchors[1] - y_anchors[0])

    covered = 0
    for i in range(datasets):
        x = rng.uniform(*x_anchors, n)
        y = 2.0 + slope * x + rng.normal(0, 1.0, n)
        dm = numeric_dm(y, [x], y_anchors, [x_anchors])
        fit = fit_three_ways(dm)
        cfg = BootstrapConfig(n_bootstrap=replicates, seed=i)
        reps = bootstrap_fits(dm, cfg)
        d = coefficient_inference(reps, fit, cfg)["b_p:x0"]
        if d.ci_low <= true_bp <= d.ci_high:
            covered += 1
    rate = covered / datasets
    assert 0.90 <= rate <= 0.98, rate
