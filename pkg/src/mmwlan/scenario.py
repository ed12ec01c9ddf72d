"""Scenario files: TOML documents describing the environment, propagation,
MCS ladder, fingerprint survey and simulation/sweep settings. Every key is
optional; missing keys take the documented defaults, so an empty file is the
desk-scale reference scenario (8 APs, 90 LPs, 50 UEs)."""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .radio import (ApConfig, Environment, McsEntry, McsTable,
                    PropagationParams, default_mcs_table)
from .sim import ProtocolTiming, SimConfig


class ScenarioError(Exception):
    """Fatal scenario-file problem (syntax, unknown key, bad value)."""


@dataclass
class Scenario:
    room: tuple = (40.0, 30.0)
    explicit_aps: list | None = None   # raw AP tables from the file, if any
    num_aps: int = 8
    lp_grid: tuple = (10, 9)           # 90 LPs
    ap_num_sectors: int = 36
    ap_beam_gain: float = 25.0
    ap_beamwidth: float = 30.0
    ap_tx_power_60: float = 10.0
    ap_tx_power_5: float = 20.0
    prop: PropagationParams = field(default_factory=PropagationParams)
    noise_floor_60: float = -74.0
    noise_floor_5: float = -94.0
    rss_noise_sigma: float = 2.0
    mcs_entries: list | None = None    # [[index, threshold_db, rate_bps], ...]
    cluster_k: int = 3
    best_beam_limit: int = 6
    db_seed: int = 0
    simulation: dict = field(default_factory=dict)  # SimConfig overrides
    timing: dict = field(default_factory=dict)      # ProtocolTiming overrides
    ap_counts: list = field(default_factory=lambda: [1, 2, 4, 6, 8])
    seeds: list = field(default_factory=lambda: [1, 2, 3, 4, 5])


_SECTIONS = {"environment", "propagation", "mcs_table", "fingerprint",
             "simulation", "sweep", "timing"}


def _take(table: dict, section: str, key: str, default):
    return table.get(key, default)


def _check_keys(table: dict, section: str, allowed):
    for key in table:
        if key not in allowed:
            raise ScenarioError(f"unknown key {key!r} in [{section}]")


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:  # carries line/column info
        raise ScenarioError(f"{path}: {exc}") from exc
    return scenario_from_dict(doc, origin=str(path))


def scenario_from_dict(doc: dict, origin: str = "<dict>") -> Scenario:
    for section in doc:
        if section not in _SECTIONS:
            raise ScenarioError(f"{origin}: unknown section [{section}]")
    sc = Scenario()

    envd = doc.get("environment", {})
    _check_keys(envd, "environment", {"room", "num_aps", "aps", "lp_grid",
                                      "num_sectors", "beam_gain", "beamwidth_az",
                                      "tx_power_60", "tx_power_5",
                                      "noise_floor_60", "noise_floor_5"})
    sc.room = tuple(envd.get("room", sc.room))
    sc.num_aps = int(envd.get("num_aps", sc.num_aps))
    sc.explicit_aps = envd.get("aps")
    sc.lp_grid = tuple(envd.get("lp_grid", sc.lp_grid))
    sc.ap_num_sectors = int(envd.get("num_sectors", sc.ap_num_sectors))
    sc.ap_beam_gain = float(envd.get("beam_gain", sc.ap_beam_gain))
    sc.ap_beamwidth = float(envd.get("beamwidth_az", sc.ap_beamwidth))
    sc.ap_tx_power_60 = float(envd.get("tx_power_60", sc.ap_tx_power_60))
    sc.ap_tx_power_5 = float(envd.get("tx_power_5", sc.ap_tx_power_5))
    sc.noise_floor_60 = float(envd.get("noise_floor_60", sc.noise_floor_60))
    sc.noise_floor_5 = float(envd.get("noise_floor_5", sc.noise_floor_5))

    propd = doc.get("propagation", {})
    prop_fields = {f.name for f in dc_fields(PropagationParams)}
    _check_keys(propd, "propagation", prop_fields)
    try:
        sc.prop = PropagationParams(**{k: float(v) for k, v in propd.items()})
    except ValueError as exc:
        raise ScenarioError(f"{origin}: [propagation] {exc}") from exc

    mcsd = doc.get("mcs_table", {})
    _check_keys(mcsd, "mcs_table", {"entries"})
    if "entries" in mcsd:
        sc.mcs_entries = [list(e) for e in mcsd["entries"]]

    fpd = doc.get("fingerprint", {})
    _check_keys(fpd, "fingerprint", {"cluster_k", "best_beam_limit",
                                     "rss_noise_sigma", "db_seed"})
    sc.cluster_k = int(fpd.get("cluster_k", sc.cluster_k))
    sc.best_beam_limit = int(fpd.get("best_beam_limit", sc.best_beam_limit))
    sc.rss_noise_sigma = float(fpd.get("rss_noise_sigma", sc.rss_noise_sigma))
    sc.db_seed = int(fpd.get("db_seed", sc.db_seed))

    simd = doc.get("simulation", {})
    sim_fields = {f.name for f in dc_fields(SimConfig)} - {"timing"}
    _check_keys(simd, "simulation", sim_fields)
    sc.simulation = dict(simd)

    timd = doc.get("timing", {})
    _check_keys(timd, "timing", {f.name for f in dc_fields(ProtocolTiming)})
    sc.timing = dict(timd)

    swd = doc.get("sweep", {})
    _check_keys(swd, "sweep", {"ap_counts", "seeds"})
    sc.ap_counts = [int(v) for v in swd.get("ap_counts", sc.ap_counts)]
    sc.seeds = [int(v) for v in swd.get("seeds", sc.seeds)]
    return sc


def auto_ap_positions(room, n) -> list:
    """Evenly spaced grid placement, ordered from the room center outward."""
    w, d = room
    rows = 1 if n <= 2 else 2
    cols = int(np.ceil(n / rows))
    pts = [(w * (i + 0.5) / cols, d * (j + 0.5) / rows)
           for j in range(rows) for i in range(cols)]
    center = (w / 2.0, d / 2.0)
    pts.sort(key=lambda p: ((p[0] - center[0]) ** 2 + (p[1] - center[1]) ** 2,
                            p[0], p[1]))
    return pts[:n]


def lp_grid_positions(room, grid) -> np.ndarray:
    w, d = room
    nx, ny = grid
    xs = [(i + 0.5) * w / nx for i in range(nx)]
    ys = [(j + 0.5) * d / ny for j in range(ny)]
    return np.array([(x, y) for y in ys for x in xs])


def build_mcs_table(scenario: Scenario) -> McsTable:
    if scenario.mcs_entries is None:
        return default_mcs_table()
    try:
        return McsTable(McsEntry(int(i), float(t), float(r))
                        for i, t, r in scenario.mcs_entries)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"[mcs_table] entries invalid: {exc}") from exc


def build_environment(scenario: Scenario, num_aps: int | None = None) -> Environment:
    n = num_aps if num_aps is not None else scenario.num_aps
    if scenario.explicit_aps is not None:
        raw = scenario.explicit_aps[:n]
        if len(raw) < n:
            raise ScenarioError(f"scenario lists {len(raw)} APs, {n} requested")
        aps = [ApConfig(id=i,
                        position=tuple(a["position"]),
                        boresight_offset=float(a.get("boresight_offset", 0.0)),
                        num_sectors=int(a.get("num_sectors", scenario.ap_num_sectors)),
                        beam_gain=float(a.get("beam_gain", scenario.ap_beam_gain)),
                        beamwidth_az=float(a.get("beamwidth_az", scenario.ap_beamwidth)),
                        tx_power_60=float(a.get("tx_power_60", scenario.ap_tx_power_60)),
                        tx_power_5=float(a.get("tx_power_5", scenario.ap_tx_power_5)))
               for i, a in enumerate(raw)]
    else:
        aps = [ApConfig(id=i, position=pos,
                        num_sectors=scenario.ap_num_sectors,
                        beam_gain=scenario.ap_beam_gain,
                        beamwidth_az=scenario.ap_beamwidth,
                        tx_power_60=scenario.ap_tx_power_60,
                        tx_power_5=scenario.ap_tx_power_5)
               for i, pos in enumerate(auto_ap_positions(scenario.room, n))]
    try:
        return Environment(room_width=scenario.room[0],
                           room_depth=scenario.room[1],
                           ap_list=aps,
                           lp_list=lp_grid_positions(scenario.room, scenario.lp_grid),
                           prop_params=scenario.prop,
                           noise_floor_60=scenario.noise_floor_60,
                           noise_floor_5=scenario.noise_floor_5,
                           rss_noise_sigma=scenario.rss_noise_sigma,
                           mcs_table=build_mcs_table(scenario))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def build_sim_config(scenario: Scenario, mode: str | None = None,
                     seed: int | None = None,
                     num_aps: int | None = None) -> SimConfig:
    kwargs = dict(scenario.simulation)
    kwargs.setdefault("candidate_limit", 2)
    kwargs.setdefault("best_beam_limit", scenario.best_beam_limit)
    if mode is not None:
        kwargs["mac_mode"] = mode
    if seed is not None:
        kwargs["seed"] = int(seed)
    kwargs["num_aps_active"] = num_aps if num_aps is not None else \
        kwargs.get("num_aps_active", scenario.num_aps)
    timing = ProtocolTiming(**{k: v for k, v in scenario.timing.items()})
    try:
        return SimConfig(timing=timing, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"[simulation] {exc}") from exc
