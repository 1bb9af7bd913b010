import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marginlab.bounds import (
    BoundInputs,
    all_bounds,
    gap_ratio,
    kth_margin_bound,
    min_margin_bound,
    phi,
    phi_checks,
    schapire_bound,
)
from marginlab.errors import ParameterError

# 40-digit mpmath evaluations
PHI_2_HALF = 0.075611267392463115245
PHI_NEAR_ZERO = 0.24999985566243270261  # x = 1e-12, y = 0.5


def with_ratio(r, emp=0.0, m=3000, theta=1.0):
    """Inputs whose complexity ratio equals ``r``."""
    lnH = r * theta**2 * m / math.log(m)
    return BoundInputs(theta, m, math.exp(lnH), emp)


def test_ratio_reconstruction():
    assert with_ratio(0.04).ratio == pytest.approx(0.04, rel=1e-12)


def test_schapire_examples():
    assert schapire_bound(with_ratio(0.04)) == pytest.approx(0.2, rel=1e-12)
    assert schapire_bound(with_ratio(0.04, emp=1.0)) >= 1
    vals = [schapire_bound(BoundInputs(0.1, m, 1000)) for m in (3, 10, 100, 10**4, 10**6)]
    assert vals == sorted(vals, reverse=True)


def test_min_margin_examples():
    b = BoundInputs(0.1, 10_000, math.exp(5))
    assert min_margin_bound(b) == pytest.approx(0.4605170185988091, rel=1e-12)
    assert min_margin_bound(b) == pytest.approx(0.4605, abs=1e-4)
    b2 = BoundInputs(0.2, 10_000, math.exp(5))
    assert min_margin_bound(b2) == pytest.approx(min_margin_bound(b) / 4, rel=1e-12)
    # without emp the minimum-margin bound is the square of the Schapire bound
    assert min_margin_bound(b) == pytest.approx(schapire_bound(b) ** 2, rel=1e-12)


def test_kth_examples():
    assert kth_margin_bound(with_ratio(0.01, emp=0.1)) == pytest.approx(0.1 + 0.01 + math.sqrt(0.001), rel=1e-12)
    assert kth_margin_bound(with_ratio(0.01, emp=0.1)) == pytest.approx(0.1416, abs=1e-4)
    b = with_ratio(0.3)
    assert kth_margin_bound(b) == pytest.approx(min_margin_bound(b), rel=1e-12)


def test_kth_below_schapire_region():
    # kth - schapire = sqrt(r) * (sqrt(r) + sqrt(emp) - 1) at unit constants
    for r in np.linspace(0.002, 1, 25):
        for emp in np.linspace(0, 1, 25):
            b = with_ratio(r, emp)
            diff = kth_margin_bound(b) - schapire_bound(b)
            assert diff == pytest.approx(math.sqrt(r) * (math.sqrt(r) + math.sqrt(emp) - 1), abs=1e-12)
            if math.sqrt(r) + math.sqrt(emp) <= 1:
                assert diff <= 1e-12


def test_kth_above_schapire_example():
    b = with_ratio(0.5, emp=0.5)
    assert kth_margin_bound(b) > schapire_bound(b)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 1), st.integers(2, 10**6), st.floats(2, 1e9), st.floats(0, 1), st.floats(0, 1))
def test_monotone_in_emp_and_size(theta, m, size, e1, e2):
    lo, hi = sorted((e1, e2))
    a, b = all_bounds(BoundInputs(theta, m, size, lo)), all_bounds(BoundInputs(theta, m, size, hi))
    assert all(a[k] <= b[k] + 1e-12 for k in a)
    c = all_bounds(BoundInputs(theta, m, size * 2, lo))
    assert all(a[k] <= c[k] + 1e-12 for k in a)


@pytest.mark.parametrize("kw", [dict(theta=0), dict(theta=1.5), dict(emp=1.1), dict(m=0), dict(H_size=1),
                                dict(constant=-1)])
def test_inputs_reject(kw):
    args = dict(theta=0.1, m=100, H_size=10, emp=0.0) | kw
    with pytest.raises(ParameterError):
        BoundInputs(**args)


def test_gap_ratio():
    assert gap_ratio(0.3, 0.1, 0.5) == pytest.approx(0.5)
    assert math.isnan(gap_ratio(0.3, 0.5, 0.5))


def test_phi_values():
    assert phi(2, 0.5) == pytest.approx(PHI_2_HALF, abs=1e-15)
    assert phi(1e-12, 0.5) == pytest.approx(PHI_NEAR_ZERO, abs=1e-15)
    assert phi(1e-300, 0.3) == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("x,y", [(0, 0.5), (-1, 0.5), (1, 0), (1, 1), (1, 1 - 1e-10)])
def test_phi_rejects(x, y):
    with pytest.raises(ParameterError):
        phi(x, y)


@pytest.mark.parametrize("y", [0.1, 0.5, 0.9])
def test_phi_monotone_convex_in_x(y):
    xs = np.linspace(0.2, 20, 100)
    v = np.array([phi(x, y) for x in xs])
    assert np.all(np.diff(v) < 0)
    assert np.all(np.diff(v, 2) >= -1e-9)
    assert np.all((v > 0) & (v < 0.25))


def test_phi_decreasing_in_y():
    ys = np.linspace(0.05, 0.95, 50)
    for x in (0.5, 2, 8):
        v = np.array([phi(x, y) for y in ys])
        assert np.all(np.diff(v) < 0)


def test_phi_checks():
    assert phi_checks(0.0, 100, 10, 0.3) is None
    assert phi_checks(0.2, 100, 10, 0.0) is None
    c = phi_checks(0.2, 10_000, 200, 0.05)
    assert c["phi8"] == pytest.approx(phi(80, 0.05)) and c["phi4"] >= c["phi8"]
