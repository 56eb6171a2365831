import numpy as np
import pytest

from lerbeam.config import Scenario, reduced_config
from lerbeam.evaluation import (
    achievable_power_map,
    evaluate,
    run_method,
    threshold_sweep,
    timing_benchmark,
)
from lerbeam.precoder import Method, ThresholdSpec


@pytest.fixture(scope="module")
def small():
    return Scenario(reduced_config(n_antennas=32, samples_per_side=13))


def test_mrt_report(small):
    res, pre, real = run_method(small, "mrt")
    rep = evaluate(res, small, realtime_seconds=real)
    assert rep.p_us_rel_mrt == pytest.approx(1.0)
    assert pre == 0.0 and rep.k_used is None
    # fine grid contains the coarse grid, so its maximum cannot be lower
    assert rep.fine_grid_max_power >= rep.grid_max_power * (1 - 1e-12)
    d = rep.to_dict()
    assert d["method"] == "mrt" and d["p_us_db"] == pytest.approx(0.0, abs=1e-9)


def test_dosp_report(small):
    th = ThresholdSpec(-40.0)
    res, pre, _ = run_method(small, Method.DOSP, th)
    rep = evaluate(res, small, th, precompute_seconds=pre)
    assert rep.meets_threshold
    assert rep.fine_grid_max_power >= rep.grid_max_power * (1 - 1e-12)
    assert 0 < rep.p_us_rel_mrt < 1
    assert np.isnan(evaluate(res, small, th, fine=False).fine_grid_max_power)


def test_sweep_rows(small):
    rows = threshold_sweep(small, ["dosp", "zf"], [-30.0, -40.0])
    assert [r.method for r in rows[:4]] == ["t", "alpha", "dosp", "zf"]
    assert rows[1].fine_max_db == -20.0
    # zf is impossible when A has full row rank; the cell is recorded, not raised
    zf_rows = [r for r in rows if r.method == "zf"]
    assert all(r.status == "error" and "NullProjectionError" in r.note for r in zf_rows)
    assert all("," not in r.note for r in rows)
    dosp_rows = [r for r in rows if r.method == "dosp"]
    assert all(r.status == "ok" and r.grid_max_db <= r.t_db + 1e-6 for r in dosp_rows)
    with pytest.raises(ValueError):
        threshold_sweep(small, ["dosp"], [])


def test_sweep_socp_status(small):
    rows = threshold_sweep(small, ["socp"], [-30.0])
    assert rows[-1].status in ("certified", "uncertified")


def test_map_at_user_matches_run(small):
    seen = []
    vals = achievable_power_map(small, [small.config.user], on_cell=lambda i, r, v: seen.append(v))
    res, _, _ = run_method(small, "dosp")
    assert vals[0] == pytest.approx(10 * np.log10(res.diagnostics["user_power"]), abs=1e-9)
    assert seen == [vals[0]]


def test_map_inside_ler_is_bounded(small):
    c = small.config
    centre = ((c.ler.x_min + c.ler.x_max) / 2, (c.ler.y_min + c.ler.y_max) / 2)
    v = achievable_power_map(small, [centre])[0]
    assert np.isnan(v) or v <= c.threshold_db + 10.0


def test_timing(small):
    rows = timing_benchmark(small, ["mrt", "dosp", "zf"], repetitions=2)
    assert rows[0]["method"] == "mrt" and rows[0]["precompute_seconds"] == 0.0
    assert rows[1]["precompute_seconds"] > 0
    assert "error" in rows[2]
    with pytest.raises(ValueError):
        timing_benchmark(small, ["mrt"], repetitions=0)
