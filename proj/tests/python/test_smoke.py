import math
import os
from pathlib import Path

import numpy as np
import pytest

import vpsde


def test_families_have_unit_variance():
    assert len(vpsde.noise_families) == 7
    for family in vpsde.noise_families:
        x = vpsde.sample_noise(family, 200_000, seed=1)
        assert x.shape == (200_000,)
        assert abs(x.mean()) < 0.01
        assert abs(x.var() - 1.0) < 0.02
        assert vpsde.analytic_moments(family)["variance"] == pytest.approx(1.0)


def test_sampling_is_seeded():
    a = vpsde.sample_noise("rademacher", 100, seed=5)
    b = vpsde.sample_noise("rademacher", 100, seed=5)
    assert np.array_equal(a, b)
    assert set(np.unique(a)) == {-1.0, 1.0}


def test_schedule_tables():
    s = vpsde.schedule(1000)
    assert s["beta"][1000] == pytest.approx(0.02)
    assert s["alpha_bar"][0] == 1.0
    e = vpsde.schedule(8, signal="exponential")
    assert e["alpha_bar"][8] == pytest.approx(math.exp(-(0.1 + 9.95)))


def test_reverse_sample_recovers_target():
    x = vpsde.reverse_sample([3.0], [1.0], steps=256, family="rademacher", n=5000, seed=2)
    assert x.shape == (5000, 1)
    assert abs(x.mean() - 3.0) < 0.1
    assert abs(x.var() - 1.0) < 0.1


def test_metrics():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(2000)
    assert vpsde.distance("w1", a, a + 0.5) == pytest.approx(0.5)
    b = rng.standard_normal((500, 2))
    assert vpsde.distance("sliced", b, b) == 0.0
    assert vpsde.distance("energy", b, b + 1.0) > 0.0


def test_strong_sweep_and_gronwall():
    rep = vpsde.strong_error_sweep([3.0], [0.25], [1 / 16, 1 / 32, 1 / 64], refine=8, n_paths=200, seed=3)
    assert rep["fitted_slope"] > 0.3
    assert len(rep["error"]) == 3
    bound = vpsde.gronwall_discrete_bound(1.0, [0.1] * 5)
    assert bound[-1] == pytest.approx(1.1**5)
    assert vpsde.gronwall_continuous_bound(2.0, [0.5, 0.5]) == pytest.approx(2.0 * math.exp(0.5))
    st = vpsde.gronwall_selftest(50, 5, seed=1)
    assert st["discrete_failures"] == 0 and st["continuous_failures"] == 0


def test_run_experiment_from_config():
    configs = Path(os.environ.get("VPSDE_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))
    summary = vpsde.run_experiment(str(configs / "small" / "schedule_check.yaml"))
    assert summary["max_alpha_bar"] < 1e-3
