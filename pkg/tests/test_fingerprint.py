"""Offline-survey oracles: the DB matrices are re-derived LP by LP with the
scalar radio primitives, and serialization must round-trip bit-exactly."""

import numpy as np
import pytest

from mmwlan.fingerprint import (NULL_ID, _kmeans, best_sector,
                                build_offline_db, cluster_exemplars,
                                cluster_offline_mcs, env_checksum, load_db,
                                save_db)
from mmwlan.radio import (ApConfig, Environment, PropagationParams,
                          mcs_from_sinr, rx_power_5, rx_power_60)
from mmwlan.verify import make_verify_env


# --- best_sector ---------------------------------------------------------


def test_best_sector_is_power_argmax(small_env):
    for ap in small_env.ap_list:
        for lp in small_env.lp_list:
            powers = [rx_power_60(small_env, ap, b, lp)
                      for b in range(1, ap.num_sectors + 1)]
            sector, power = best_sector(small_env, ap, lp)
            assert power == pytest.approx(max(powers), rel=1e-12)
            if sector is not None:
                assert sector == int(np.argmax(powers)) + 1


def test_best_sector_null_when_snr_below_ladder():
    # one AP in a huge room with a very lossy channel: the far corner LP
    # cannot reach MCS1 at any sector
    prop = PropagationParams(pathloss_exp_60=4.5)
    ap = ApConfig(id=0, position=(1.0, 1.0), num_sectors=8, beamwidth_az=45.0)
    env = Environment(room_width=500.0, room_depth=500.0, ap_list=[ap],
                      lp_list=np.array([[499.0, 499.0]]), prop_params=prop)
    sector, power = best_sector(env, ap, env.lp_list[0])
    assert sector is None
    assert mcs_from_sinr(env.mcs_table, power - env.noise_floor_60) is None


# --- offline matrices ----------------------------------------------------


def test_db_matrices_match_scalar_rederivation(small_env, small_db):
    db = small_db
    for l, lp in enumerate(small_env.lp_list):
        for m, ap in enumerate(small_env.ap_list):
            assert db.psi[l, m] == pytest.approx(
                rx_power_5(small_env, ap, lp), rel=1e-12)
            sector, power = best_sector(small_env, ap, lp)
            assert db.p_off[l, m] == pytest.approx(power, rel=1e-12)
            if sector is None:
                assert db.phi[l, m] == NULL_ID
                assert db.mcs_off[l, m] == NULL_ID
            else:
                assert db.phi[l, m] == sector
                expected = mcs_from_sinr(
                    small_env.mcs_table, power - small_env.noise_floor_60)
                assert db.mcs_off[l, m] == expected


def test_null_coverage_coupling(small_db):
    # phi and mcs_off agree on where coverage is missing
    assert np.array_equal(small_db.phi == NULL_ID, small_db.mcs_off == NULL_ID)


def test_p_off_dominates_every_sector(small_env, small_db, small_tables):
    for m in range(small_env.num_aps):
        assert np.all(small_db.p_off[:, m] >= small_tables.rx60[m].max(axis=0) - 1e-12)


def test_rebuild_is_bit_identical(small_env, small_db):
    again = build_offline_db(small_env)
    assert np.array_equal(again.psi, small_db.psi)
    assert np.array_equal(again.phi, small_db.phi)
    assert np.array_equal(again.p_off, small_db.p_off)
    assert np.array_equal(again.mcs_off, small_db.mcs_off)
    assert again.exemplars.keys() == small_db.exemplars.keys()
    for key in small_db.exemplars:
        assert np.array_equal(again.exemplars[key], small_db.exemplars[key])
        assert again.exemplar_mcs[key] == small_db.exemplar_mcs[key]


# --- clustering ----------------------------------------------------------


def test_kmeans_is_seeded_and_sorted(rng):
    rows = np.random.default_rng(5).normal(size=(30, 3))
    a = _kmeans(rows, 4, np.random.default_rng(9))
    b = _kmeans(rows, 4, np.random.default_rng(9))
    assert np.array_equal(a, b)
    # centers come out in lexicographic order
    assert np.array_equal(a, a[np.lexsort(a.T[::-1])])


def test_kmeans_handles_fewer_rows_than_k():
    rows = np.array([[0.0, 0.0], [1.0, 1.0]])
    centers = _kmeans(rows, 5, np.random.default_rng(0))
    assert len(centers) == 2


def test_kmeans_recovers_separated_clusters():
    g = np.random.default_rng(3)
    blob = lambda c: c + 0.05 * g.normal(size=(20, 2))
    rows = np.vstack([blob(np.array([0.0, 0.0])), blob(np.array([10.0, 10.0]))])
    centers = _kmeans(rows, 2, np.random.default_rng(1))
    assert np.allclose(centers[0], [0.0, 0.0], atol=0.2)
    assert np.allclose(centers[1], [10.0, 10.0], atol=0.2)


def test_exemplars_are_cluster_means_of_members(small_env, small_db):
    # every exemplar vector lies inside the bounding box of its member
    # fingerprints, and the per-exemplar MCS values come from member LPs
    for (ap_id, sector), ex in small_db.exemplars.items():
        members = small_db.member_lps(ap_id, sector)
        rows = small_db.psi[members]
        assert ex.shape[1] == small_db.num_aps
        assert len(ex) <= small_db.cluster_k
        assert np.all(ex >= rows.min(axis=0) - 1e-9)
        assert np.all(ex <= rows.max(axis=0) + 1e-9)
        member_mcs = set(int(v) for v in small_db.mcs_off[members, ap_id])
        for v in small_db.exemplar_mcs[(ap_id, sector)]:
            assert v in member_mcs or v == NULL_ID


def test_cluster_offline_mcs_descending_distinct(small_db):
    for (ap_id, sector) in small_db.exemplars:
        vals = cluster_offline_mcs(small_db, ap_id, sector)
        assert vals == sorted(set(vals), reverse=True)
        assert NULL_ID not in vals
        assert small_db.mcs_clusters[(ap_id, sector)] == vals
        assert small_db.max_offline_mcs(ap_id, sector) == vals[0]


def test_cluster_exemplars_matches_stored(small_db):
    for (ap_id, sector), ex in small_db.exemplars.items():
        assert np.array_equal(cluster_exemplars(small_db, ap_id, sector), ex)


def test_exemplar_stack_is_consistent(small_db):
    for ap_id in range(small_db.num_aps):
        stack, sectors, mcs = small_db.exemplar_stack(ap_id)
        assert len(stack) == len(sectors) == len(mcs)
        i = 0
        for sector in small_db.covered_sectors(ap_id):
            ex = small_db.exemplars[(ap_id, sector)]
            assert np.array_equal(stack[i:i + len(ex)], ex)
            assert np.all(sectors[i:i + len(ex)] == sector)
            i += len(ex)
        assert i == len(stack)


# --- serialization -------------------------------------------------------


def test_save_load_round_trip(tmp_path, small_db):
    path = tmp_path / "fp.db"
    save_db(small_db, path)
    back = load_db(path)
    assert back.checksum == small_db.checksum
    assert back.cluster_k == small_db.cluster_k
    assert back.seed == small_db.seed
    assert np.array_equal(back.psi, small_db.psi)
    assert np.array_equal(back.phi, small_db.phi)
    assert np.array_equal(back.p_off, small_db.p_off)
    assert np.array_equal(back.mcs_off, small_db.mcs_off)
    for key in small_db.exemplars:
        assert np.array_equal(back.exemplars[key], small_db.exemplars[key])
        assert back.exemplar_mcs[key] == small_db.exemplar_mcs[key]
    assert back.mcs_clusters == small_db.mcs_clusters


def test_load_rejects_malformed_file(tmp_path):
    path = tmp_path / "bad.db"
    path.write_text("checksum abc\nnonsense\n")
    with pytest.raises(ValueError):
        load_db(path)


def test_checksum_tracks_environment(small_env):
    base = env_checksum(small_env)
    moved = make_verify_env(lp_grid=(6, 5), room=(12.0, 9.5))
    assert env_checksum(moved) != base
    assert env_checksum(make_verify_env(lp_grid=(6, 5))) == base
