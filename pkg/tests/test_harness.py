import itertools
import json
import math

import numpy as np
import pytest

from socialhc.errors import ConfigurationError, DomainError
from socialhc.geometry import NetworkConfig, deploy
from socialhc.harness import (HC_COLUMNS, SWEEP_COLUMNS, SweepSpec, estimate_slope,
                              fig8_experiment, fig8_subnets, format_table, hc_slot_rows, run_sweep,
                              trial_seed, write_table)
from socialhc.hc import decompose_by_count, simulate_hc
from socialhc.social import SocialParams, assign_social


def test_slope_of_square():
    xs = [1, 2, 4, 8]
    est = estimate_slope(xs, [x * x for x in xs])
    assert est.slope == pytest.approx(2.0, abs=1e-12)
    assert est.r_squared == pytest.approx(1.0)
    assert est.n_points == 4


def test_slope_of_constant():
    est = estimate_slope([1, 10, 100], [3, 3, 3])
    assert est.slope == pytest.approx(0.0, abs=1e-12)


def test_slope_with_log_factor():
    xs = 2.0 ** np.arange(8, 15)
    est = estimate_slope(xs, xs ** -0.5 * np.log(xs))
    assert -0.5 <= est.slope <= -0.35


def test_slope_rescale_invariant():
    xs = np.array([3.0, 7.0, 20.0, 55.0])
    ys = np.array([1.0, 0.4, 0.3, 0.08])
    a = estimate_slope(xs, ys).slope
    assert estimate_slope(5 * xs, 0.1 * ys).slope == pytest.approx(a, abs=1e-12)


def test_slope_errors():
    with pytest.raises(ConfigurationError):
        estimate_slope([1, 2], [1, 2])
    with pytest.raises(DomainError):
        estimate_slope([1, 2, 3], [1, 0, 2])
    with pytest.raises(DomainError):
        estimate_slope([-1, 2, 3], [1, 1, 2])
    with pytest.raises(ConfigurationError):
        estimate_slope([1, 2, 3], [1, 2])


def test_trial_seed_injective():
    seen = {trial_seed(b, p, t) for b, p, t in itertools.product((0, 1, 7), range(5), range(5))}
    assert len(seen) == 75
    assert trial_seed(1, 0, 0) == 1 << 32
    with pytest.raises(ConfigurationError):
        trial_seed(0, 1 << 16, 0)
    with pytest.raises(ConfigurationError):
        trial_seed(-1, 0, 0)


def _spec(**kw):
    base = dict(variable="n", values=(256, 512), trials_per_point=2,
                network=NetworkConfig(256, seed=3), social=SocialParams(1.0))
    base.update(kw)
    return SweepSpec(**base)


def test_sweep_shape_and_repeatability():
    rows = run_sweep(_spec())
    assert len(rows) == 4
    assert [(r["point"], r["trial"]) for r in rows] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert all(r["status"] == "ok" for r in rows)
    assert [r["n"] for r in rows] == [256, 256, 512, 512]
    assert all(set(r) >= set(SWEEP_COLUMNS) for r in rows)
    assert len({r["seed"] for r in rows}) == 4
    first = format_table(rows, SWEEP_COLUMNS)
    assert format_table(run_sweep(_spec()), SWEEP_COLUMNS) == first


def test_sweep_parallel_matches_serial():
    spec = _spec()
    assert format_table(run_sweep(spec, workers=2), SWEEP_COLUMNS) == \
        format_table(run_sweep(spec), SWEEP_COLUMNS)


def test_sweep_error_row():
    rows = run_sweep(_spec(variable="cell_area", values=(1e-5, 0.05), trials_per_point=1))
    assert rows[0]["status"] == "error:EmptyCellError"
    assert rows[0]["message"]
    assert rows[1]["status"] == "ok" and rows[1]["throughput"] > 0


def test_sweep_hc_and_social():
    rows = run_sweep(_spec(protocol="hc", values=(256,), trials_per_point=1, subnets=4, hc_trials=3,
                           social=SocialParams(2.5)))
    assert rows[0]["status"] == "ok"
    assert rows[0]["subnets"] == 4 and rows[0]["throughput"] > 0
    assert rows[0]["delay"] == pytest.approx(0.125)
    rows = run_sweep(_spec(protocol="social", variable="gamma", values=(0.0, 4.0), trials_per_point=1))
    assert rows[0]["mean_sd_distance"] > rows[1]["mean_sd_distance"]
    assert rows[0]["throughput"] == ""


def test_sweep_spec_errors():
    with pytest.raises(ConfigurationError):
        _spec(variable="colour")
    with pytest.raises(ConfigurationError):
        _spec(protocol="flood")
    with pytest.raises(ConfigurationError):
        _spec(values=())


def test_fig8_single_subnet_is_one_link():
    rows = fig8_experiment([3.0], [2.0], seeds=[5], trials=4, n=64, side=100.0)
    d = deploy(NetworkConfig(64, side_length=100.0, seed=5, path_loss_alpha=3.0))
    social = assign_social(d, SocialParams(2.0, 1))
    res = simulate_hc(d, social, decompose_by_count(d, 1), 0.5, 4)
    assert rows[0]["throughput_mean"] == pytest.approx(res.total_throughput, rel=1e-12)
    assert rows[0]["subnets"] == 1
    assert rows[0]["analytic_delay_exponent"] == pytest.approx(0.25)
    assert rows[0]["throughput_stderr"] > 0


def test_fig8_two_seeds():
    rows = fig8_experiment([2.0, 3.0], [2.0, 2.5], seeds=[0, 1], trials=2, n=64)
    assert len(rows) == 4
    assert all(r["deployments"] == 2 and r["throughput_stderr"] > 0 for r in rows)
    assert all(r["analytic_delay_exponent"] == pytest.approx(0.25) for r in rows)


def test_fig8_needs_epsilon_off_grid():
    assert fig8_subnets(2.25) == 4 and fig8_subnets(2.1) is None
    with pytest.raises(ConfigurationError):
        fig8_experiment([3.0], [2.1], seeds=[0], trials=1, n=64)
    rows = fig8_experiment([3.0], [2.1], seeds=[0], trials=1, n=64, epsilon=0.05)
    assert rows[0]["throughput_mean"] > 0


def test_format_table_roundtrip(tmp_path):
    rows = [dict(a=1, b=0.1, c="x"), dict(a=np.int64(2), b=np.float64(1 / 3))]
    text = format_table(rows, ("a", "b", "c"))
    assert text.splitlines() == ["a,b,c", "1,0.1,x", f"2,{1 / 3!r},"]
    data = json.loads(format_table(rows, ("a", "b", "c"), "json"))
    assert data[1] == {"a": 2, "b": 1 / 3, "c": ""}
    with pytest.raises(ConfigurationError):
        format_table(rows, ("a",), "xml")
    write_table(rows, ("a", "b", "c"), tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text() == text


def test_hc_slot_rows():
    d = deploy(NetworkConfig(64, side_length=100.0, seed=1))
    social = assign_social(d, SocialParams(2.0))
    res = simulate_hc(d, social, decompose_by_count(d, 4), 0.5, 2)
    rows = hc_slot_rows(res, 1, 64, 2.0, 3.0, 4)
    assert [r["slot"] for r in rows] == [0, 1, 2, 3, "total"]
    assert rows[-1]["throughput"] == pytest.approx(res.total_throughput)
    assert math.isclose(sum(r["throughput"] for r in rows[:4]), res.total_throughput, rel_tol=1e-12)
    assert all(set(r) == set(HC_COLUMNS) for r in rows)
