import warnings

import numpy as np
import pytest

from lerbeam.config import (
    ConfigError,
    Scenario,
    ScenarioConfig,
    load_config,
    default_config,
    parse_config,
    reduced_config,
)
from lerbeam.region import RectRegion


def test_reference_defaults():
    c = default_config()
    assert c == ScenarioConfig()
    assert c.n_antennas == 1000 and c.spacing == 0.5
    assert c.user == (2200.0, -200.0) and c.threshold_db == -80.0
    assert c.ler == RectRegion(2000.0, 2500.0, 0.0, 500.0)


def test_cfg_round_trip(tmp_path):
    c = reduced_config(carrier_ghz=28.0, seed=3)
    p = tmp_path / "s.cfg"
    p.write_text(c.to_cfg())
    back = load_config(p)
    assert back == c
    assert back.config_hash() == c.config_hash()


def test_hash_changes_with_content():
    c = ScenarioConfig()
    assert c.config_hash() != c.replace(threshold_db=-70.0).config_hash()
    assert len(c.config_hash()) == 16


@pytest.mark.parametrize("text", [
    "[array]\nn_antennas = 8\n",  # missing sections
    "[array]\nn_antennas = x\n",
    "[bogus]\na = 1\n",
    "not an ini file",
])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_unknown_key():
    text = ScenarioConfig().to_cfg().replace("[user]", "[user]\nz = 1")
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config(text)


@pytest.mark.parametrize("changes", [
    {"threshold_db": 0.0}, {"threshold_db": 5.0}, {"delta_fine": 10.0}, {"delta_fine": 0.0},
    {"sigma_th_rel": 0.0},
])
def test_validation(changes):
    with pytest.raises(ConfigError):
        ScenarioConfig().replace(**changes)


def test_bad_geometry_is_config_error():
    text = ScenarioConfig().to_cfg().replace("x_max = 2500.0", "x_max = 1000.0")
    with pytest.raises(ConfigError):
        parse_config(text)


def test_user_inside_ler_warns():
    with pytest.warns(UserWarning, match="inside the LER"):
        ScenarioConfig(user=(2200.0, 200.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ScenarioConfig()


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/x.cfg")


def test_reduced_scenario(reduced):
    c = reduced.config
    assert c.n_antennas == 64
    assert reduced.grid.n_points == 625
    # the coarse grid is a subset of the fine grid
    ratio = c.delta / c.delta_fine
    assert ratio == pytest.approx(round(ratio))
    assert reduced.A.shape == (64, 625)
    assert np.linalg.norm(reduced.a_us) == pytest.approx(1.0)
    assert reduced.precompute_seconds > 0


def test_scenario_caches(reduced):
    assert reduced.A is reduced.A
    assert reduced.basis is reduced.basis
    s = Scenario(reduced_config(n_antennas=16, samples_per_side=5))
    assert s.grid.n_points == 25
