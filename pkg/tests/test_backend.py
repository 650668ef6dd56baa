import numpy as np
import pytest

from pctcoef import available_backends, get_backend


def make_problem(rng, n=80, p=4):
    x_raw = rng.uniform(0, 10, size=(n, p))
    y_raw = 1.0 + x_raw @ rng.uniform(-0.3, 0.3, size=p) + rng.normal(0, 0.5, n)
    x_pct = x_raw / 10.0
    y_pct = (y_raw - y_raw.min()) / np.ptp(y_raw)
    return y_raw, x_raw, y_pct, x_pct


def run_batch(kernel, problem, indices):
    y_raw, x_raw, y_pct, x_pct = problem
    m = indices.shape[0]
    p = x_raw.shape[1]
    bw = np.empty((m, p + 1))
    bp = np.empty((m, p + 1))
    beta = np.empty((m, p))
    r2 = np.empty(m)
    ok = np.zeros(m, dtype=np.uint8)
    kernel.fit_replicate_batch(y_raw, x_raw, y_pct, x_pct, indices, bw, bp, beta, r2, ok)
    return bw, bp, beta, r2, ok


def test_backend_registry():
    names = available_backends()
    assert "pure" in names
    with pytest.raises(ValueError):
        get_backend("nonsense")


def test_ols_qr_underdetermined_raises(kernel):
    with pytest.raises(ValueError):
        kernel.ols_qr(np.ones((2, 3)), np.ones(2))


def test_ols_qr_flags_rank_deficiency(kernel):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(20, 2))
    a = np.column_stack([np.ones(20), x, x[:, 0] * 2.0])
    _, ok, _ = kernel.ols_qr(a, rng.normal(size=20))
    assert not ok


def test_ols_qr_exact_solution(kernel):
    rng = np.random.default_rng(1)
    a = np.column_stack([np.ones(30), rng.normal(size=(30, 3))])
    truth = np.array([0.5, 1.0, -2.0, 0.25])
    y = a @ truth
    coef, ok, rss = kernel.ols_qr(a, y)
    assert ok
    np.testing.assert_allclose(coef, truth, atol=1e-10)
    assert rss == pytest.approx(0.0, abs=1e-18)


@pytest.mark.skipif(len(available_backends()) < 2, reason="compiled kernel not built")
class TestBackendEquivalence:
    def test_single_fit(self):
        rng = np.random.default_rng(2)
        a = np.column_stack([np.ones(60), rng.normal(size=(60, 5))])
        y = rng.normal(size=60)
        results = [get_backend(n).ols_qr(a, y) for n in available_backends()]
        for (c1, ok1, rss1), (c2, ok2, rss2) in zip(results, results[1:]):
            assert ok1 == ok2
            np.testing.assert_allclose(c1, c2, atol=1e-10)
            assert rss1 == pytest.approx(rss2, rel=1e-10)

    def test_replicate_batch(self):
        rng = np.random.default_rng(3)
        problem = make_problem(rng)
        n = len(problem[0])
        indices = rng.integers(0, n, size=(32, n), dtype=np.int64)
        outs = [run_batch(get_backend(n_), problem, indices) for n_ in available_backends()]
        for a, b in zip(outs, outs[1:]):
            for arr_a, arr_b in zip(a, b):
                np.testing.assert_allclose(
                    np.asarray(arr_a, dtype=float), np.asarray(arr_b, dtype=float),
                    atol=1e-10,
                )

    def test_deficiency_flag_agreement(self):
        rng = np.random.default_rng(4)
        problem = make_problem(rng, n=30)
        n = 30
        # an all-identical resample makes every column constant
        indices = np.vstack([
            np.full(n, 7, dtype=np.int64),
            rng.integers(0, n, size=n, dtype=np.int64),
        ])
        flags = [
            run_batch(get_backend(name), problem, indices)[4].tolist()
            for name in available_backends()
        ]
        assert flags[0] == flags[1]
        assert flags[0][0] == 0
        assert flags[0][1] == 1
