"""Dual-band radio environment model.

Deterministic log-distance propagation for the 5 GHz (omni) and 60 GHz
(sectorized) bands, a quadratic-rolloff sector antenna pattern, SINR
arithmetic and the SINR -> MCS -> PHY-rate ladder. Everything downstream
(fingerprint database, link selection, MAC simulation) consumes these
primitives, so the scalar entry points are thin wrappers around the
vectorized ones to keep results bit-identical between paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Near-field clamp: below this distance the log-distance law blows up.
MIN_DISTANCE_M = 0.1


@dataclass(frozen=True)
class PropagationParams:
    """Log-distance LOS path-loss parameters for both bands."""

    pathloss_exp_60: float = 2.0
    pathloss_exp_5: float = 2.2
    ref_loss_60: float = 68.0      # dB at 1 m
    ref_loss_5: float = 46.4       # dB at 1 m
    oxygen_absorption: float = 15.0  # dB/km, 60 GHz only
    sidelobe_level: float = -10.0    # dBi floor of the sector pattern

    def __post_init__(self):
        if self.pathloss_exp_60 < 1.5 or self.pathloss_exp_5 < 1.5:
            raise ValueError("path-loss exponents must be >= 1.5")
        if self.ref_loss_60 <= 0 or self.ref_loss_5 <= 0:
            raise ValueError("reference losses must be positive")


@dataclass(frozen=True)
class ApConfig:
    """One dual-band AP with a switched sector antenna at 60 GHz."""

    id: int
    position: tuple[float, float]
    boresight_offset: float = 0.0  # degrees, azimuth of sector 1
    num_sectors: int = 36
    beam_gain: float = 25.0        # dBi at boresight
    beamwidth_az: float = 30.0     # degrees, 3-dB beamwidth
    tx_power_60: float = 10.0      # dBm
    tx_power_5: float = 20.0       # dBm

    def __post_init__(self):
        if self.num_sectors < 1:
            raise ValueError("num_sectors must be >= 1")

    def sector_boresight(self, beam: int) -> float:
        """Azimuth (degrees) of the given 1-based sector id."""
        if not 1 <= beam <= self.num_sectors:
            raise ValueError(f"sector id {beam} outside [1, {self.num_sectors}]")
        return self.boresight_offset + (beam - 1) * 360.0 / self.num_sectors


@dataclass(frozen=True)
class McsEntry:
    index: int
    sinr_threshold: float  # dB
    phy_rate: float        # bits/s


class McsTable:
    """Ordered MCS ladder, strictly increasing in threshold and rate."""

    def __init__(self, entries):
        entries = list(entries)
        if not entries:
            raise ValueError("MCS table is empty")
        for prev, cur in zip(entries, entries[1:]):
            if cur.sinr_threshold <= prev.sinr_threshold or cur.phy_rate <= prev.phy_rate:
                raise ValueError("MCS table must be strictly increasing")
        self.entries = tuple(entries)
        self._thresholds = np.array([e.sinr_threshold for e in entries])
        self._rates = np.array([e.phy_rate for e in entries])
        self._indices = np.array([e.index for e in entries])

    @property
    def min_index(self) -> int:
        return self.entries[0].index

    def rate(self, mcs_index: int) -> float:
        for e in self.entries:
            if e.index == mcs_index:
                return e.phy_rate
        raise KeyError(f"unknown MCS index {mcs_index}")

    def indices_for_sinr(self, sinr_db: np.ndarray) -> np.ndarray:
        """Vectorized lookup; 0 marks 'below MCS1' (no valid MCS)."""
        pos = np.searchsorted(self._thresholds, np.asarray(sinr_db), side="right")
        out = np.where(pos > 0, self._indices[np.maximum(pos - 1, 0)], 0)
        return out


def default_mcs_table() -> McsTable:
    """802.11ad SC PHY rate ladder with evenly spaced stand-in thresholds."""
    rates = [385e6, 770e6, 962.5e6, 1155e6, 1251.25e6, 1540e6,
             1925e6, 2310e6, 2502.5e6, 3080e6, 3850e6, 4620e6]
    step = 20.0 / 11.0  # MCS1 at 1 dB up to MCS12 at 21 dB
    return McsTable(
        McsEntry(i + 1, 1.0 + i * step, r) for i, r in enumerate(rates)
    )


@dataclass
class Environment:
    """Room geometry, AP deployment, LP survey grid and radio constants."""

    room_width: float
    room_depth: float
    ap_list: list[ApConfig]
    lp_list: np.ndarray  # (L, 2) positions in meters
    prop_params: PropagationParams = field(default_factory=PropagationParams)
    noise_floor_60: float = -74.0  # dBm over the 2.16 GHz channel
    noise_floor_5: float = -94.0   # dBm
    rss_noise_sigma: float = 2.0   # dB std-dev of online Wi-Fi RSS noise
    mcs_table: McsTable = field(default_factory=default_mcs_table)

    def __post_init__(self):
        self.lp_list = np.asarray(self.lp_list, dtype=float).reshape(-1, 2)
        if len(self.ap_list) < 1:
            raise ValueError("need at least one AP")
        if len(self.lp_list) < 1:
            raise ValueError("need at least one learning point")
        for i, ap in enumerate(self.ap_list):
            if ap.id != i:
                raise ValueError("AP ids must equal their index in ap_list")
            if not self._inside(ap.position):
                raise ValueError(f"AP {ap.id} outside the room")
        for p in self.lp_list:
            if not self._inside(p):
                raise ValueError(f"LP at {tuple(p)} outside the room")

    def _inside(self, p) -> bool:
        return 0.0 <= p[0] <= self.room_width and 0.0 <= p[1] <= self.room_depth

    @property
    def num_aps(self) -> int:
        return len(self.ap_list)

    @property
    def num_lps(self) -> int:
        return len(self.lp_list)


def wrap_angle(deg):
    """Wrap angles to (-180, 180]."""
    return 180.0 - np.mod(180.0 - np.asarray(deg, dtype=float), 360.0)


def _geometry(ap: ApConfig, points: np.ndarray):
    """Distances (clamped) and azimuths from an AP to an (N, 2) point array."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    dx = pts[:, 0] - ap.position[0]
    dy = pts[:, 1] - ap.position[1]
    dist = np.maximum(np.sqrt(dx * dx + dy * dy), MIN_DISTANCE_M)
    az = np.degrees(np.arctan2(dy, dx))
    return dist, az


def antenna_gain_array(ap: ApConfig, prop: PropagationParams, beam: int,
                       directions_deg: np.ndarray) -> np.ndarray:
    """Main-lobe gain (dBi) of one sector toward an array of azimuths.

    Quadratic-in-angle rolloff (Gaussian in dB): 3 dB down at half the
    3-dB beamwidth, floored at the sidelobe level.
    """
    off = wrap_angle(np.asarray(directions_deg, dtype=float) - ap.sector_boresight(beam))
    gain = ap.beam_gain - 12.0 * (off / ap.beamwidth_az) ** 2
    return np.maximum(gain, prop.sidelobe_level)


def antenna_gain(ap: ApConfig, prop: PropagationParams, beam: int,
                 direction_deg: float) -> float:
    """Sector gain (dBi) toward a single azimuth. Invalid sector -> ValueError."""
    return float(antenna_gain_array(ap, prop, beam, np.array([direction_deg]))[0])


def path_loss_60(prop: PropagationParams, dist_m: np.ndarray) -> np.ndarray:
    d = np.maximum(np.asarray(dist_m, dtype=float), MIN_DISTANCE_M)
    return (prop.ref_loss_60 + 10.0 * prop.pathloss_exp_60 * np.log10(d)
            + prop.oxygen_absorption * d / 1000.0)


def path_loss_5(prop: PropagationParams, dist_m: np.ndarray) -> np.ndarray:
    d = np.maximum(np.asarray(dist_m, dtype=float), MIN_DISTANCE_M)
    return prop.ref_loss_5 + 10.0 * prop.pathloss_exp_5 * np.log10(d)


def rx_power_60_grid(env: Environment, ap: ApConfig,
                     points: np.ndarray) -> np.ndarray:
    """(num_sectors, N) received power in dBm at each point, per sector."""
    dist, az = _geometry(ap, points)
    loss = path_loss_60(env.prop_params, dist)
    out = np.empty((ap.num_sectors, len(dist)))
    for beam in range(1, ap.num_sectors + 1):
        gain = antenna_gain_array(ap, env.prop_params, beam, az)
        out[beam - 1] = ap.tx_power_60 + gain - loss
    return out


def rx_power_60(env: Environment, ap: ApConfig, beam: int, point) -> float:
    """60 GHz received power (dBm) from one sector at one point."""
    if not 1 <= beam <= ap.num_sectors:
        raise ValueError(f"sector id {beam} outside [1, {ap.num_sectors}]")
    dist, az = _geometry(ap, np.asarray(point).reshape(1, 2))
    gain = antenna_gain_array(ap, env.prop_params, beam, az)
    loss = path_loss_60(env.prop_params, dist)
    return float(ap.tx_power_60 + gain[0] - loss[0])


def rx_power_5_grid(env: Environment, points: np.ndarray) -> np.ndarray:
    """(M, N) omnidirectional 5 GHz received power in dBm."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.empty((env.num_aps, len(pts)))
    for m, ap in enumerate(env.ap_list):
        dist, _ = _geometry(ap, pts)
        out[m] = ap.tx_power_5 - path_loss_5(env.prop_params, dist)
    return out


def rx_power_5(env: Environment, ap: ApConfig, point) -> float:
    """5 GHz received power (dBm) at one point, 0 dBi antennas."""
    dist, _ = _geometry(ap, np.asarray(point).reshape(1, 2))
    return float(ap.tx_power_5 - path_loss_5(env.prop_params, dist)[0])


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(mw)


def sinr(signal_dbm: float, interferers_dbm, noise_floor_dbm: float) -> float:
    """SINR in dB from a signal, a list of interferer powers and noise."""
    interferers_dbm = list(interferers_dbm)
    if not interferers_dbm:
        return float(signal_dbm - noise_floor_dbm)  # exact SNR, no rounding trip
    denom = dbm_to_mw(noise_floor_dbm)
    for i in interferers_dbm:
        denom = denom + dbm_to_mw(i)
    return float(mw_to_dbm(dbm_to_mw(signal_dbm) / denom))


def sinr_with_interference_mw(signal_dbm, interference_mw, noise_floor_dbm):
    """Vectorized SINR (dB) given pre-summed linear interference in mW."""
    denom = interference_mw + dbm_to_mw(noise_floor_dbm)
    return mw_to_dbm(dbm_to_mw(signal_dbm) / denom)


def mcs_from_sinr(table: McsTable, sinr_db: float):
    """Largest MCS index whose threshold <= sinr; None below MCS1."""
    idx = int(table.indices_for_sinr(np.array([sinr_db]))[0])
    return idx if idx > 0 else None


def link_rate(phy_rate: float, load: float) -> float:
    """User rate: achievable PHY rate capped by the offered load."""
    if phy_rate < 0 or load < 0:
        raise ValueError("rates must be non-negative")
    return min(phy_rate, load)


class RadioTables:
    """Precomputed per-sector power grids at the LPs (and optional extra points).

    rx60[m] has shape (num_sectors_m, L); rx5 has shape (M, L). These are the
    single source of truth for every DB and oracle computation, so scalar and
    vector code paths agree bit-for-bit at the LPs.
    """

    def __init__(self, env: Environment, points: np.ndarray | None = None):
        self.env = env
        pts = env.lp_list if points is None else np.asarray(points, dtype=float).reshape(-1, 2)
        self.points = pts
        self.rx60 = [rx_power_60_grid(env, ap, pts) for ap in env.ap_list]
        self.rx5 = rx_power_5_grid(env, pts)

    def best_sector_all(self):
        """(best_sector, best_power) arrays of shape (N, M); ties -> lowest id."""
        n = len(self.points)
        m = self.env.num_aps
        sec = np.zeros((n, m), dtype=int)
        pwr = np.full((n, m), -np.inf)
        for j, grid in enumerate(self.rx60):
            sec[:, j] = np.argmax(grid, axis=0) + 1  # argmax takes first max
            pwr[:, j] = grid[sec[:, j] - 1, np.arange(n)]
        return sec, pwr
