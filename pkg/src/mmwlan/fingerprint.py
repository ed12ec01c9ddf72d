"""Offline fingerprint database.

Builds the four radio-map matrices over the LP survey grid (Wi-Fi RSS,
best 60 GHz sector per AP, received power at that sector, and the
interference-free MCS), then clusters Wi-Fi fingerprints into per-sector
exemplars and the covered LPs into per-sector MCS sets. The database is
immutable after construction and can be round-tripped through a plain
text file carrying a checksum of the environment it was surveyed in.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .radio import Environment, ApConfig, RadioTables

# Sentinel used in the integer matrices: 0 = "no coverage" / "no MCS".
NULL_ID = 0


def env_checksum(env: Environment) -> str:
    """Stable digest of everything the offline survey depends on."""
    buf = io.StringIO()
    buf.write(f"room {env.room_width!r} {env.room_depth!r}\n")
    p = env.prop_params
    buf.write(f"prop {p.pathloss_exp_60!r} {p.pathloss_exp_5!r} {p.ref_loss_60!r} "
              f"{p.ref_loss_5!r} {p.oxygen_absorption!r} {p.sidelobe_level!r}\n")
    buf.write(f"noise {env.noise_floor_60!r} {env.noise_floor_5!r}\n")
    for ap in env.ap_list:
        buf.write(f"ap {ap.id} {ap.position[0]!r} {ap.position[1]!r} "
                  f"{ap.boresight_offset!r} {ap.num_sectors} {ap.beam_gain!r} "
                  f"{ap.beamwidth_az!r} {ap.tx_power_60!r} {ap.tx_power_5!r}\n")
    for lp in env.lp_list:
        buf.write(f"lp {lp[0]!r} {lp[1]!r}\n")
    for e in env.mcs_table.entries:
        buf.write(f"mcs {e.index} {e.sinr_threshold!r} {e.phy_rate!r}\n")
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()


def best_sector(env: Environment, ap: ApConfig, lp):
    """Best 60 GHz sector id and its power at a point; (None, power) if the
    interference-free SNR falls below the MCS1 threshold for every sector."""
    from .radio import rx_power_60_grid, mcs_from_sinr

    powers = rx_power_60_grid(env, ap, np.asarray(lp).reshape(1, 2))[:, 0]
    sector = int(np.argmax(powers)) + 1  # ties -> lowest id
    power = float(powers[sector - 1])
    snr = power - env.noise_floor_60
    if mcs_from_sinr(env.mcs_table, snr) is None:
        return None, power
    return sector, power


def _kmeans(rows: np.ndarray, k: int, rng: np.random.Generator,
            restarts: int = 20, max_iters: int = 100) -> np.ndarray:
    """Seeded Lloyd's k-means with restarts; returns centers sorted
    lexicographically so output order is independent of the restart that won."""
    n = len(rows)
    k = min(k, n)
    best_obj, best_centers = None, None
    for _ in range(restarts):
        centers = rows[rng.choice(n, size=k, replace=False)].copy()
        for _ in range(max_iters):
            d2 = ((rows[:, None, :] - centers[None]) ** 2).sum(axis=2)
            assign = d2.argmin(axis=1)
            new = centers.copy()
            for c in range(k):
                members = rows[assign == c]
                if len(members):
                    new[c] = members.mean(axis=0)
            if np.array_equal(new, centers):
                break
            centers = new
        d2 = ((rows[:, None, :] - centers[None]) ** 2).sum(axis=2)
        obj = d2.min(axis=1).sum()
        if best_obj is None or obj < best_obj:
            best_obj, best_centers = obj, centers
    order = np.lexsort(best_centers.T[::-1])
    return best_centers[order]


@dataclass
class FingerprintDB:
    """The four offline matrices plus derived clusters.

    psi:     (L, M) Wi-Fi RSS in dBm (noise-free offline averages)
    phi:     (L, M) best sector ids, NULL_ID where the AP cannot cover the LP
    p_off:   (L, M) 60 GHz power at the best sector (max over sectors)
    mcs_off: (L, M) MCS at the interference-free SNR, NULL_ID if none
    exemplars:    {(ap_id, sector): (C, M) exemplar RSS vectors}
    exemplar_mcs: {(ap_id, sector): per-exemplar max offline MCS, aligned}
    mcs_clusters: {(ap_id, sector): descending distinct offline MCS list}
    """

    psi: np.ndarray
    phi: np.ndarray
    p_off: np.ndarray
    mcs_off: np.ndarray
    exemplars: dict
    exemplar_mcs: dict
    mcs_clusters: dict
    checksum: str
    cluster_k: int = 3
    seed: int = 0
    _exemplar_stacks: dict = field(default_factory=dict, repr=False)

    @property
    def num_lps(self) -> int:
        return self.psi.shape[0]

    @property
    def num_aps(self) -> int:
        return self.psi.shape[1]

    def covered_sectors(self, ap_id: int):
        """Distinct best-sector ids this AP serves, ascending."""
        col = self.phi[:, ap_id]
        return sorted(int(s) for s in np.unique(col) if s != NULL_ID)

    def member_lps(self, ap_id: int, sector: int) -> np.ndarray:
        return np.flatnonzero(self.phi[:, ap_id] == sector)

    def max_offline_mcs(self, ap_id: int, sector: int):
        vals = self.mcs_clusters.get((ap_id, sector))
        return vals[0] if vals else None

    def exemplar_stack(self, ap_id: int):
        """(matrix (n_ex, M), sector_ids (n_ex,), exemplar MCS (n_ex,)) of all
        exemplars of one AP."""
        if ap_id not in self._exemplar_stacks:
            mats, secs, mcss = [], [], []
            for sector in self.covered_sectors(ap_id):
                ex = self.exemplars[(ap_id, sector)]
                mats.append(ex)
                secs.extend([sector] * len(ex))
                mcss.extend(self.exemplar_mcs[(ap_id, sector)])
            if mats:
                self._exemplar_stacks[ap_id] = (np.vstack(mats), np.array(secs),
                                                np.array(mcss, dtype=int))
            else:
                self._exemplar_stacks[ap_id] = (np.empty((0, self.num_aps)),
                                                np.array([], dtype=int),
                                                np.array([], dtype=int))
        return self._exemplar_stacks[ap_id]


def _exemplars_for(psi, mcs_off, phi, ap_id, sector, k, base_seed):
    """(exemplar matrix, per-exemplar max offline MCS) for one (AP, sector)."""
    members = np.flatnonzero(phi[:, ap_id] == sector)
    if len(members) == 0:
        return np.empty((0, psi.shape[1])), []
    # Per-group stream so results do not depend on build order.
    rng = np.random.default_rng(np.random.SeedSequence([base_seed, ap_id, sector]))
    centers = _kmeans(psi[members], k, rng)
    d2 = ((psi[members][:, None, :] - centers[None]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    ex_mcs = []
    for c in range(len(centers)):
        vals = mcs_off[members[assign == c], ap_id]
        ex_mcs.append(int(vals.max()) if len(vals) else NULL_ID)
    return centers, ex_mcs


def cluster_exemplars(db: FingerprintDB, ap_id: int, sector: int,
                      k: int | None = None):
    """Per-cluster mean RSS vectors of the LPs whose best sector is `sector`."""
    return _exemplars_for(db.psi, db.mcs_off, db.phi, ap_id, sector,
                          k if k is not None else db.cluster_k, db.seed)[0]


def cluster_offline_mcs(db: FingerprintDB, ap_id: int, sector: int):
    """Sorted (descending) distinct offline MCS values of the member LPs."""
    members = db.member_lps(ap_id, sector)
    vals = db.mcs_off[members, ap_id]
    return sorted({int(v) for v in vals if v != NULL_ID}, reverse=True)


def build_offline_db(env: Environment, cluster_k: int = 3, seed: int = 0,
                     tables: RadioTables | None = None) -> FingerprintDB:
    """Run the offline survey analytically over the LP grid."""
    tables = tables or RadioTables(env)
    psi = tables.rx5.T.copy()                       # (L, M)
    sec, pwr = tables.best_sector_all()             # (L, M)
    snr = pwr - env.noise_floor_60
    mcs = env.mcs_table.indices_for_sinr(snr)
    phi = np.where(mcs > 0, sec, NULL_ID)
    mcs_off = np.where(mcs > 0, mcs, NULL_ID)

    db = FingerprintDB(psi=psi, phi=phi, p_off=pwr, mcs_off=mcs_off,
                       exemplars={}, exemplar_mcs={}, mcs_clusters={},
                       checksum=env_checksum(env), cluster_k=cluster_k, seed=seed)
    for ap in env.ap_list:
        for sector in db.covered_sectors(ap.id):
            ex, ex_mcs = _exemplars_for(psi, mcs_off, phi, ap.id, sector,
                                        cluster_k, seed)
            db.exemplars[(ap.id, sector)] = ex
            db.exemplar_mcs[(ap.id, sector)] = ex_mcs
            db.mcs_clusters[(ap.id, sector)] = cluster_offline_mcs(db, ap.id, sector)
    return db


# --- serialization -----------------------------------------------------------

def _fmt_row(row):
    return " ".join(f"{v:.17g}" for v in row)


def save_db(db: FingerprintDB, path):
    lines = ["# mmwlan fingerprint database v1",
             f"checksum {db.checksum}",
             f"dims {db.num_lps} {db.num_aps} {db.cluster_k} {db.seed}"]
    lines.append("psi")
    lines += [_fmt_row(r) for r in db.psi]
    lines.append("phi")
    lines += [" ".join(str(int(v)) for v in r) for r in db.phi]
    lines.append("p_off")
    lines += [_fmt_row(r) for r in db.p_off]
    lines.append("mcs_off")
    lines += [" ".join(str(int(v)) for v in r) for r in db.mcs_off]
    keys = sorted(db.exemplars)
    lines.append(f"exemplars {len(keys)}")
    for ap_id, sector in keys:
        ex = db.exemplars[(ap_id, sector)]
        lines.append(f"group {ap_id} {sector} {len(ex)}")
        lines += [_fmt_row(r) for r in ex]
        lines.append("exmcs " + " ".join(
            str(int(v)) for v in db.exemplar_mcs[(ap_id, sector)]))
    keys = sorted(db.mcs_clusters)
    lines.append(f"mcs_clusters {len(keys)}")
    for ap_id, sector in keys:
        vals = " ".join(str(v) for v in db.mcs_clusters[(ap_id, sector)])
        lines.append(f"{ap_id} {sector} {vals}".rstrip())
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_db(path) -> FingerprintDB:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    it = iter(ln for ln in lines if ln and not ln.startswith("#"))

    def expect(tag):
        ln = next(it)
        if not ln.startswith(tag):
            raise ValueError(f"malformed DB file: expected {tag!r}, got {ln!r}")
        return ln.split()[1:]

    checksum = expect("checksum")[0]
    dims = expect("dims")
    L, M, cluster_k, seed = (int(v) for v in dims)

    def read_matrix(tag, dtype):
        expect(tag)
        return np.array([[dtype(v) for v in next(it).split()] for _ in range(L)])

    psi = read_matrix("psi", float)
    phi = read_matrix("phi", int)
    p_off = read_matrix("p_off", float)
    mcs_off = read_matrix("mcs_off", int)

    n_groups = int(expect("exemplars")[0])
    exemplars = {}
    exemplar_mcs = {}
    for _ in range(n_groups):
        ap_id, sector, c = (int(v) for v in expect("group"))
        rows = np.array([[float(v) for v in next(it).split()] for _ in range(c)])
        exemplars[(ap_id, sector)] = rows.reshape(c, M)
        exemplar_mcs[(ap_id, sector)] = [int(v) for v in expect("exmcs")]

    n_groups = int(expect("mcs_clusters")[0])
    mcs_clusters = {}
    for _ in range(n_groups):
        parts = next(it).split()
        mcs_clusters[(int(parts[0]), int(parts[1]))] = [int(v) for v in parts[2:]]

    return FingerprintDB(psi=psi, phi=phi, p_off=p_off, mcs_off=mcs_off,
                         exemplars=exemplars, exemplar_mcs=exemplar_mcs,
                         mcs_clusters=mcs_clusters, checksum=checksum,
                         cluster_k=cluster_k, seed=seed)
