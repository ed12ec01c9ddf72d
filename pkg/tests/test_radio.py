"""Radio-layer oracles: every vectorized result is checked against an
independent scalar re-derivation (math module, explicit loops)."""

import math

import numpy as np
import pytest

from mmwlan.radio import (ApConfig, Environment, McsEntry, McsTable,
                          PropagationParams, RadioTables, antenna_gain,
                          default_mcs_table, dbm_to_mw, link_rate,
                          mcs_from_sinr, mw_to_dbm, path_loss_5, path_loss_60,
                          rx_power_5, rx_power_5_grid, rx_power_60,
                          rx_power_60_grid, sinr, sinr_with_interference_mw,
                          wrap_angle, MIN_DISTANCE_M)


def make_env(num_aps=2, num_sectors=8, room=(12.0, 9.0), **prop_kw):
    aps = [ApConfig(id=i, position=(2.0 + 4.0 * i, 3.0),
                    num_sectors=num_sectors, beamwidth_az=360.0 / num_sectors)
           for i in range(num_aps)]
    lps = np.array([[1.0, 1.0], [6.0, 4.0], [11.0, 8.0]])
    return Environment(room_width=room[0], room_depth=room[1], ap_list=aps,
                       lp_list=lps, prop_params=PropagationParams(**prop_kw))


# --- path loss -----------------------------------------------------------


def test_path_loss_60_matches_hand_formula():
    prop = PropagationParams(pathloss_exp_60=3.5, ref_loss_60=68.0,
                             oxygen_absorption=15.0)
    for d in (0.5, 1.0, 3.0, 17.4, 120.0):
        dc = max(d, MIN_DISTANCE_M)
        expected = 68.0 + 10.0 * 3.5 * math.log10(dc) + 15.0 * dc / 1000.0
        assert path_loss_60(prop, d) == pytest.approx(expected, rel=1e-12)


def test_path_loss_5_matches_hand_formula():
    prop = PropagationParams(pathloss_exp_5=2.2, ref_loss_5=46.4)
    for d in (1.0, 2.5, 40.0):
        expected = 46.4 + 22.0 * math.log10(d)
        assert path_loss_5(prop, d) == pytest.approx(expected, rel=1e-12)


def test_path_loss_clamps_near_field():
    prop = PropagationParams()
    assert path_loss_60(prop, 0.0) == path_loss_60(prop, MIN_DISTANCE_M)
    assert path_loss_5(prop, 0.01) == path_loss_5(prop, MIN_DISTANCE_M)


def test_propagation_params_validation():
    with pytest.raises(ValueError):
        PropagationParams(pathloss_exp_60=1.0)
    with pytest.raises(ValueError):
        PropagationParams(ref_loss_5=0.0)


# --- antenna pattern -----------------------------------------------------


def test_antenna_gain_boresight_and_rolloff():
    prop = PropagationParams(sidelobe_level=-10.0)
    ap = ApConfig(id=0, position=(0, 0), beam_gain=25.0, beamwidth_az=30.0)
    bore = ap.sector_boresight(3)
    assert antenna_gain(ap, prop, 3, bore) == pytest.approx(25.0)
    # 3 dB down at half the 3-dB beamwidth
    assert antenna_gain(ap, prop, 3, bore + 15.0) == pytest.approx(22.0)
    assert antenna_gain(ap, prop, 3, bore - 15.0) == pytest.approx(22.0)
    # far off boresight the pattern floors at the sidelobe level
    assert antenna_gain(ap, prop, 3, bore + 180.0) == -10.0


def test_antenna_gain_wraps_angles():
    prop = PropagationParams()
    ap = ApConfig(id=0, position=(0, 0), num_sectors=36)
    bore = ap.sector_boresight(1)  # 0 degrees
    assert antenna_gain(ap, prop, 1, bore + 5.0) == pytest.approx(
        antenna_gain(ap, prop, 1, bore + 5.0 - 360.0))
    assert wrap_angle(181.0) == pytest.approx(-179.0)
    assert wrap_angle(-180.0) == pytest.approx(180.0)


def test_sector_boresight_spacing_and_bounds():
    ap = ApConfig(id=0, position=(0, 0), num_sectors=8, boresight_offset=10.0)
    assert ap.sector_boresight(1) == 10.0
    assert ap.sector_boresight(2) == 55.0
    with pytest.raises(ValueError):
        ap.sector_boresight(0)
    with pytest.raises(ValueError):
        ap.sector_boresight(9)


# --- received power ------------------------------------------------------


def test_rx_power_60_matches_hand_computation():
    env = make_env()
    ap = env.ap_list[0]
    point = (7.0, 6.5)
    dist = math.hypot(point[0] - ap.position[0], point[1] - ap.position[1])
    az = math.degrees(math.atan2(point[1] - ap.position[1],
                                 point[0] - ap.position[0]))
    for beam in (1, 4, 8):
        off = az - ap.sector_boresight(beam)
        off = 180.0 - (180.0 - off) % 360.0
        gain = max(ap.beam_gain - 12.0 * (off / ap.beamwidth_az) ** 2,
                   env.prop_params.sidelobe_level)
        loss = (env.prop_params.ref_loss_60
                + 20.0 * math.log10(dist)  # default exponent 2.0
                + env.prop_params.oxygen_absorption * dist / 1000.0)
        expected = ap.tx_power_60 + gain - loss
        assert rx_power_60(env, ap, beam, point) == pytest.approx(expected, rel=1e-12)


def test_rx_power_scalar_equals_grid():
    env = make_env()
    pts = np.array([[1.5, 2.5], [9.0, 7.0]])
    for ap in env.ap_list:
        grid = rx_power_60_grid(env, ap, pts)
        for j, p in enumerate(pts):
            for beam in range(1, ap.num_sectors + 1):
                assert grid[beam - 1, j] == rx_power_60(env, ap, beam, p)
    grid5 = rx_power_5_grid(env, pts)
    for m, ap in enumerate(env.ap_list):
        for j, p in enumerate(pts):
            assert grid5[m, j] == rx_power_5(env, ap, p)


def test_rx_power_60_rejects_bad_sector():
    env = make_env()
    with pytest.raises(ValueError):
        rx_power_60(env, env.ap_list[0], 0, (1.0, 1.0))


# --- SINR and units ------------------------------------------------------


def test_dbm_mw_round_trip():
    vals = np.array([-90.0, -40.0, 0.0, 10.0])
    assert np.allclose(mw_to_dbm(dbm_to_mw(vals)), vals)


def test_sinr_matches_linear_arithmetic():
    signal, noise = -55.0, -74.0
    interferers = [-60.0, -72.5]
    denom = 10 ** (noise / 10) + sum(10 ** (i / 10) for i in interferers)
    expected = 10 * math.log10(10 ** (signal / 10) / denom)
    assert sinr(signal, interferers, noise) == pytest.approx(expected, rel=1e-12)
    # no interference degenerates to exact SNR
    assert sinr(signal, [], noise) == signal - noise


def test_sinr_vectorized_agrees_with_scalar():
    signal = np.array([-50.0, -60.0])
    interference_mw = dbm_to_mw(-65.0) + dbm_to_mw(-70.0)
    got = sinr_with_interference_mw(signal, interference_mw, -74.0)
    for s, g in zip(signal, got):
        assert g == pytest.approx(sinr(s, [-65.0, -70.0], -74.0), rel=1e-12)


# --- MCS ladder ----------------------------------------------------------


def test_default_mcs_table_shape():
    table = default_mcs_table()
    assert len(table.entries) == 12
    assert table.entries[0].sinr_threshold == 1.0
    assert table.entries[-1].sinr_threshold == pytest.approx(21.0)
    assert table.entries[0].phy_rate == 385e6
    assert table.entries[-1].phy_rate == 4620e6
    assert table.min_index == 1


def test_mcs_from_sinr_thresholds():
    table = default_mcs_table()
    assert mcs_from_sinr(table, 0.99) is None
    assert mcs_from_sinr(table, 1.0) == 1  # at-threshold inclusive
    assert mcs_from_sinr(table, 50.0) == 12
    # vector path agrees with the scalar path everywhere on a fine sweep
    sweep = np.linspace(-5.0, 30.0, 701)
    vec = table.indices_for_sinr(sweep)
    for s, v in zip(sweep, vec):
        scalar = mcs_from_sinr(table, float(s))
        assert int(v) == (scalar if scalar is not None else 0)


def test_mcs_table_rejects_non_monotone():
    with pytest.raises(ValueError):
        McsTable([McsEntry(1, 1.0, 2e9), McsEntry(2, 0.5, 3e9)])
    with pytest.raises(ValueError):
        McsTable([McsEntry(1, 1.0, 2e9), McsEntry(2, 2.0, 1e9)])
    with pytest.raises(ValueError):
        McsTable([])


def test_mcs_table_rate_lookup():
    table = default_mcs_table()
    assert table.rate(3) == 962.5e6
    with pytest.raises(KeyError):
        table.rate(13)


def test_link_rate_caps_at_load():
    assert link_rate(4620e6, 1e9) == 1e9
    assert link_rate(385e6, 1e9) == 385e6
    with pytest.raises(ValueError):
        link_rate(-1.0, 1e9)


# --- environment / tables ------------------------------------------------


def test_environment_validation():
    ap = ApConfig(id=0, position=(1.0, 1.0))
    with pytest.raises(ValueError):
        Environment(room_width=5, room_depth=5, ap_list=[ap],
                    lp_list=np.array([[9.0, 9.0]]))  # LP outside
    with pytest.raises(ValueError):
        Environment(room_width=5, room_depth=5,
                    ap_list=[ApConfig(id=1, position=(1, 1))],  # bad id
                    lp_list=np.array([[1.0, 1.0]]))
    with pytest.raises(ValueError):
        Environment(room_width=5, room_depth=5, ap_list=[],
                    lp_list=np.array([[1.0, 1.0]]))


def test_best_sector_all_matches_loop():
    env = make_env(num_aps=3)
    tables = RadioTables(env)
    sec, pwr = tables.best_sector_all()
    for j in range(env.num_lps):
        for m, ap in enumerate(env.ap_list):
            powers = [rx_power_60(env, ap, b, env.lp_list[j])
                      for b in range(1, ap.num_sectors + 1)]
            assert sec[j, m] == int(np.argmax(powers)) + 1
            assert pwr[j, m] == pytest.approx(max(powers), rel=1e-12)
