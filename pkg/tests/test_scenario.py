"""Scenario-file parsing and environment construction."""

import numpy as np
import pytest

from mmwlan.radio import PropagationParams
from mmwlan.scenario import (Scenario, ScenarioError, auto_ap_positions,
                             build_environment, build_mcs_table,
                             build_sim_config, load_scenario,
                             lp_grid_positions, scenario_from_dict)


def test_empty_document_is_reference_scenario():
    sc = scenario_from_dict({})
    assert sc.room == (40.0, 30.0)
    assert sc.num_aps == 8
    assert sc.lp_grid == (10, 9)
    env = build_environment(sc)
    assert env.num_aps == 8 and env.num_lps == 90


def test_unknown_section_and_key_rejected():
    with pytest.raises(ScenarioError):
        scenario_from_dict({"radio": {}})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"environment": {"rooom": [1, 1]}})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"simulation": {"quantum": 3}})


def test_bad_toml_reports_location(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[environment\nroom = [1, 1]\n")
    with pytest.raises(ScenarioError):
        load_scenario(path)


def test_overrides_flow_through(tmp_path):
    path = tmp_path / "sc.toml"
    path.write_text("""
[environment]
room = [20.0, 10.0]
num_aps = 2
[propagation]
pathloss_exp_60 = 3.2
[simulation]
num_ues = 7
grant_quantum = 5
[timing]
bid = 4e-5
[sweep]
ap_counts = [1, 2]
seeds = [3, 4]
""")
    sc = load_scenario(path)
    env = build_environment(sc)
    assert env.room_width == 20.0 and env.num_aps == 2
    assert env.prop_params.pathloss_exp_60 == 3.2
    cfg = build_sim_config(sc, mode="dcf", seed=9)
    assert cfg.num_ues == 7 and cfg.grant_quantum == 5
    assert cfg.timing.bid == 4e-5
    assert cfg.mac_mode == "dcf" and cfg.seed == 9
    assert sc.ap_counts == [1, 2] and sc.seeds == [3, 4]


def test_explicit_ap_tables(tmp_path):
    path = tmp_path / "aps.toml"
    path.write_text("""
[environment]
room = [10.0, 10.0]
num_aps = 2
aps = [ { position = [1.0, 1.0] }, { position = [9.0, 9.0], beam_gain = 20.0 } ]
""")
    env = build_environment(load_scenario(path))
    assert env.ap_list[0].position == (1.0, 1.0)
    assert env.ap_list[1].beam_gain == 20.0
    # requesting more APs than listed fails
    with pytest.raises(ScenarioError):
        build_environment(load_scenario(path), num_aps=3)


def test_custom_mcs_table():
    sc = scenario_from_dict(
        {"mcs_table": {"entries": [[1, 2.0, 1e9], [2, 6.0, 2e9]]}})
    table = build_mcs_table(sc)
    assert len(table.entries) == 2
    assert table.rate(2) == 2e9
    with pytest.raises(ScenarioError):
        build_mcs_table(scenario_from_dict(
            {"mcs_table": {"entries": [[1, "x", 1e9]]}}))


def test_auto_ap_positions_grid():
    for n in (1, 2, 4, 6, 8):
        pts = auto_ap_positions((40.0, 30.0), n)
        assert len(pts) == n
        assert len(set(pts)) == n
        for x, y in pts:
            assert 0 < x < 40 and 0 < y < 30
    # placement fills from the room center outward
    first = auto_ap_positions((40.0, 30.0), 8)[0]
    center_d2 = (first[0] - 20) ** 2 + (first[1] - 15) ** 2
    last = auto_ap_positions((40.0, 30.0), 8)[-1]
    assert center_d2 <= (last[0] - 20) ** 2 + (last[1] - 15) ** 2


def test_lp_grid_positions_cover_room():
    pts = lp_grid_positions((10.0, 6.0), (5, 3))
    assert pts.shape == (15, 2)
    assert pts[:, 0].min() == 1.0 and pts[:, 0].max() == 9.0
    assert pts[:, 1].min() == 1.0 and pts[:, 1].max() == 5.0


def test_packaged_scenario_loads():
    import os
    path = os.path.join(os.path.dirname(__file__), "..", "scenarios",
                        "dense_office.toml")
    sc = load_scenario(path)
    assert sc.room == (32.0, 24.0)
    assert sc.prop.pathloss_exp_60 == 3.5
    cfg = build_sim_config(sc, mode="coordinated", seed=1)
    assert cfg.grant_quantum == 3 and cfg.grants_per_txop == 5
    assert cfg.retry_holdoff == pytest.approx(1e-2)
    assert not cfg.fst_enabled
