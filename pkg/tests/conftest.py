import hypothesis
import numpy as np
import pytest

from pctcoef import available_backends, get_backend
from pctcoef.dataset import Column, Dataset, VariableSpec
from pctcoef.percentize import build_design_matrix

hypothesis.settings.register_profile(
    "suite", deadline=None, derandomize=True, max_examples=100
)
hypothesis.settings.load_profile("suite")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(params=available_backends())
def kernel(request):
    return get_backend(request.param)


def numeric_dataset(y, xcols, y_anchors, x_anchors, names=None, dv_name="y"):
    """Dataset with one numeric DV and numeric IVs, no missing values."""
    names = names or [f"x{j}" for j in range(len(xcols))]
    columns = [
        Column(
            VariableSpec(dv_name, "dependent", "numeric", *y_anchors),
            np.asarray(y, dtype=np.float64),
        )
    ]
    for name, col, anchors in zip(names, xcols, x_anchors):
        columns.append(
            Column(
                VariableSpec(name, "independent", "numeric", *anchors),
                np.asarray(col, dtype=np.float64),
            )
        )
    return Dataset(columns)


def numeric_dm(y, xcols, y_anchors, x_anchors, names=None, dv_name="y"):
    return build_design_matrix(
        numeric_dataset(y, xcols, y_anchors, x_anchors, names, dv_name)
    )


def random_regression(rng, n=None, p=None, noise=0.5):
    """A random numeric design with known raw coefficients and anchors."""
    n = n or int(rng.integers(40, 200))
    p = p or int(rng.integers(1, 5))
    x_anchors = []
    xcols = []
    for _ in range(p):
        lo = float(rng.uniform(-20, 20))
        width = float(rng.uniform(1, 100))
        x_anchors.append((lo, lo + width))
        xcols.append(rng.uniform(lo, lo + width, size=n))
    y_lo = float(rng.uniform(-10, 10))
    y_width = float(rng.uniform(1, 20))
    y_anchors = (y_lo, y_lo + y_width)
    # scale slopes so the systematic part stays inside the DV anchors
    coefs = rng.uniform(-1, 1, size=p) * y_width / (2 * p) / np.array(
        [hi - lo for lo, hi in x_anchors]
    )
    centered = [c - (lo + hi) / 2 for c, (lo, hi) in zip(xcols, x_anchors)]
    y = y_lo + 0.5 * y_width + np.column_stack(centered) @ coefs
    y = y + rng.normal(0, noise * y_width / 20, size=n)
    return y, xcols, y_anchors, x_anchors, coefs
