import math

import numpy as np
import pytest

from marginlab.errors import ParameterError
from marginlab.xlab.scenarios import ScenarioConfig, majority_view, run_scenario, wilson_interval
from marginlab.harddist import Sample


def test_wilson():
    lo, hi = wilson_interval(0, 100)
    assert lo == pytest.approx(0, abs=1e-15) and hi == pytest.approx(3.841458820694124 / 103.84145882069412, rel=1e-12)
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.403832, abs=1e-6) and hi == pytest.approx(0.596168, abs=1e-6)
    with pytest.raises(ParameterError):
        wilson_interval(0, 0)


def test_config_validation():
    with pytest.raises(ParameterError):
        ScenarioConfig("nope")
    with pytest.raises(ParameterError, match="49/100"):
        ScenarioConfig("lemma1", tau=0.5)
    with pytest.raises(ParameterError):
        ScenarioConfig("lemma1", seed=2**64)
    with pytest.raises(ParameterError):
        ScenarioConfig("lemma1", trials=0)


def test_majority_view():
    s = Sample(np.array([3, 3, 3, 1, 1, 4]), np.array([1, -1, -1, 1, -1, 1], dtype=np.int8), 6)
    pts, y = majority_view(s)
    assert pts.tolist() == [1, 3, 4] and y.tolist() == [1, -1, 1]


def test_lemma1_all_positive_never_fails():
    rows, summary = run_scenario(ScenarioConfig("lemma1", u=50, d=0, trials=5, seed=1), workers=1)
    assert all(r.success and r.min_margin == 1.0 for r in rows)
    assert summary["failure_fraction"] == 0


def test_lemma1_success_rows_respect_theta():
    rows, summary = run_scenario(ScenarioConfig("lemma1", u=60, d=4, c_exp=300, trials=8, seed=2), workers=1)
    assert any(r.success for r in rows)
    for r in rows:
        assert (r.min_margin >= 0.02) if r.success else math.isnan(r.min_margin)
    lo, hi = summary["wilson95"]
    assert lo <= summary["failure_fraction"] <= hi


def test_theorem1_small():
    cfg = ScenarioConfig("theorem1", u=60, m=1200, tau=0.1, trials=3, seed=4, learner_rounds=30)
    rows, summary = run_scenario(cfg, workers=1)
    assert summary["branch"] == "large-tau" and summary["phi8_at_least_one_sixth"]
    for r in rows:
        assert r.exact_risk >= r.claim1_rhs - 1e-12
        assert 0 <= r.emp_margin_err <= 1
        assert r.kthmargin >= r.emp_margin_err


def test_theorem1_zero_tau_reference_margin():
    # beta = 0: every sample label is the planted one, so a successful reference has no margin errors
    cfg = ScenarioConfig("theorem1", u=40, d=2, m=400, tau=0.0, trials=4, seed=0, c_exp=400,
                         learner_rounds=10)
    rows, summary = run_scenario(cfg, workers=1)
    assert summary["branch"] == "small-tau" and summary["phi"] is None
    for r in rows:
        assert r.exact_risk >= r.psi1 - 1e-12 and r.exact_risk >= 0
        if r.success:
            assert r.extras["reference_emp_margin_err"] == 0


def test_theorem2_small():
    cfg = ScenarioConfig("theorem2", m=800, d=3, tau=0.0, trials=4, seed=5, c_exp=1)
    rows, summary = run_scenario(cfg, workers=1)
    assert summary["u"] == math.ceil(40 * 800 / math.log(800))
    for r in rows:
        assert r.exact_risk >= r.extras["flipped_mass"] - 1e-12
        assert r.exact_risk >= r.claim1_rhs - 1e-12
        if r.success:
            assert r.emp_margin_err == 0
    with pytest.raises(ParameterError):
        run_scenario(ScenarioConfig("theorem2", m=800, d=3, u=10), workers=1)


def test_sampler_and_coupon():
    rows, s = run_scenario(ScenarioConfig("sampler-fidelity", u=20, d=5, m=100_000, trials=2), workers=1)
    assert all(r.success for r in rows) and s["max_abs_dev"]["max"] < 5e-3
    rows, s = run_scenario(ScenarioConfig("coupon", m=2000, d=50, trials=10), workers=1)
    assert s["fraction_at_least_d"] == 1.0 and s["passes"]
