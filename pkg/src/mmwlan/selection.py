"""Online link selection.

Implements the distributed pipeline that picks an unused AP and beam for a
UE's TXOP: noisy Wi-Fi fingerprint measurement, exemplar matching to
estimate best beams per unused AP, candidate-AP ranking by highest offline
MCS, elimination of beams that would degrade existing links at overlapped
LPs, and simulated beam training against the true channel. A brute-force
enumeration of the global optimum serves as the verification oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .fingerprint import NULL_ID, FingerprintDB
from .radio import (Environment, RadioTables, dbm_to_mw, link_rate,
                    rx_power_5_grid, rx_power_60_grid,
                    sinr_with_interference_mw)

# Width of the received-power window that maps a link's BID-broadcast power
# back onto candidate receiver LPs during bad-beam elimination.
POWER_MATCH_TOL_DB = 3.0


@dataclass(frozen=True)
class ActiveLink:
    """One established 60 GHz link as known WLAN-wide from its BID broadcast."""

    ap: int
    ue: int
    beam: int
    mcs: int        # MCS announced at establishment
    rx_power: float
    load: float     # offered traffic of the served UE, bits/s
    ue_pos: tuple = (0.0, 0.0)
    lp: int | None = None  # LP index when the UE sits exactly on a survey point


class LinkTable:
    """Currently active links; at most one per AP and one per UE."""

    def __init__(self, entries=()):
        self.entries: list[ActiveLink] = []
        for e in entries:
            self.add(e)

    def add(self, link: ActiveLink):
        if link.ap in self.used_aps():
            raise ValueError(f"AP {link.ap} already has a link")
        if any(e.ue == link.ue for e in self.entries):
            raise ValueError(f"UE {link.ue} already has a link")
        self.entries.append(link)

    def remove_ap(self, ap: int):
        self.entries = [e for e in self.entries if e.ap != ap]

    def used_aps(self) -> set:
        return {e.ap for e in self.entries}

    def unused_aps(self, num_aps: int) -> list:
        used = self.used_aps()
        return [m for m in range(num_aps) if m not in used]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass
class Candidate:
    ap: int
    beams: list          # estimated best beams, best first
    bad_beams: set = field(default_factory=set)
    expected_mcs: int = 0

    @property
    def trainable(self):
        return [b for b in self.beams if b not in self.bad_beams]


@dataclass
class CandidateSet:
    """Candidate APs for one TXOP, highest expected MCS first."""

    ranked: list


@dataclass(frozen=True)
class Assignment:
    ap: int
    beam: int
    mcs: int
    rx_power: float = float("nan")
    lp: int | None = None  # LP whose offline RSS best matches the fingerprint


def measure_online_fingerprint(env: Environment, ue_position,
                               rng: np.random.Generator) -> np.ndarray:
    """Per-AP Wi-Fi RSS vector with Gaussian measurement noise."""
    clean = rx_power_5_grid(env, np.asarray(ue_position).reshape(1, 2))[:, 0]
    return clean + rng.normal(0.0, env.rss_noise_sigma, size=len(clean))


def estimate_best_beams(db: FingerprintDB, psi_r: np.ndarray, ap_id: int,
                        limit: int = 6) -> list:
    """Sectors of one unused AP sorted by min squared distance of the online
    fingerprint to that sector's exemplars; ties break toward lower ids."""
    stack, sector_ids, _ = db.exemplar_stack(ap_id)
    if len(stack) == 0:
        return []
    d2 = ((stack - np.asarray(psi_r)) ** 2).sum(axis=1)
    scores = {}
    for s, d in zip(sector_ids, d2):
        s = int(s)
        if s not in scores or d < scores[s]:
            scores[s] = d
    ordered = sorted(scores, key=lambda s: (scores[s], s))
    return ordered[:limit]


def matched_expected_mcs(db: FingerprintDB, psi_r: np.ndarray, ap_id: int,
                         theta) -> int | None:
    """Expected MCS of one AP given the online fingerprint: for each sector in
    theta take the offline MCS of its nearest-exemplar cluster, then the max.
    The matched cluster localizes the UE, so far-away APs score low even when
    their sectors also sweep past high-MCS LPs near the AP."""
    stack, sector_ids, mcs_ids = db.exemplar_stack(ap_id)
    if len(stack) == 0:
        return None
    d2 = ((stack - np.asarray(psi_r)) ** 2).sum(axis=1)
    best = {}
    for s, d, m in zip(sector_ids, d2, mcs_ids):
        s = int(s)
        if s not in best or d < best[s][0]:
            best[s] = (d, int(m))
    vals = [best[b][1] for b in theta if b in best]
    return max(vals) if vals else None


def select_candidate_aps(db: FingerprintDB, thetas: dict, limit: int = 2,
                         psi_r: np.ndarray | None = None) -> CandidateSet:
    """Rank unused APs by expected MCS over their estimated beams.

    With psi_r the expectation is read from the matched exemplar's cluster;
    without it, from the sector-wide highest offline MCS."""
    ranked = []
    for ap_id in sorted(thetas):
        theta = thetas[ap_id]
        if not theta:
            continue
        if psi_r is not None:
            key = matched_expected_mcs(db, psi_r, ap_id, theta)
        else:
            keys = [db.max_offline_mcs(ap_id, b) for b in theta]
            keys = [k for k in keys if k is not None]
            key = max(keys) if keys else None
        if key is None:
            continue
        ranked.append(Candidate(ap=ap_id, beams=list(theta), expected_mcs=key))
    if psi_r is not None:
        # expected-MCS ties are common (several APs top out the ladder);
        # prefer the AP the UE hears loudest on the Wi-Fi band
        ranked.sort(key=lambda c: (-c.expected_mcs, -float(psi_r[c.ap]), c.ap))
    else:
        ranked.sort(key=lambda c: (-c.expected_mcs, c.ap))
    return CandidateSet(ranked=ranked[:limit])


def _interference_mw_at_lps(tables: RadioTables, links, skip_ap, lps) -> np.ndarray:
    """Summed linear interference at LP indices from all links except skip_ap.

    Summation order follows the link-table order so every caller that also
    adds a candidate term afterwards computes bit-identical SINRs.
    """
    total = np.zeros(len(lps))
    for w in links:
        if w.ap == skip_ap:
            continue
        total = total + dbm_to_mw(tables.rx60[w.ap][w.beam - 1, lps])
    return total


def eliminate_bad_beams(env: Environment, db: FingerprintDB, tables: RadioTables,
                        ap_id: int, theta, links: LinkTable) -> set:
    """Beams of a candidate AP that would degrade an existing link.

    The victim's BID broadcast carries its received power, and the offline
    survey is noise-free, so the receiver can only sit at a covered LP whose
    P_OFF entry matches that power (within POWER_MATCH_TOL_DB for off-grid
    UEs). Those LPs are the protection set: a beam is bad when the victim's
    MCS recomputed there with the candidate transmitting drops below the
    broadcast MCS. Sidelobe-level interference counts too.
    """
    bad = set()
    table = env.mcs_table
    for v in links:
        lps = db.member_lps(v.ap, v.beam)
        signal = db.p_off[lps, v.ap]
        keep = np.abs(signal - v.rx_power) <= POWER_MATCH_TOL_DB
        lps, signal = lps[keep], signal[keep]
        if v.lp is not None and v.lp not in lps:
            # the victim's own fingerprint localized it to this LP; protect it
            # with the serving beam's power even if the window missed it
            lps = np.append(lps, v.lp)
            signal = np.append(signal, tables.rx60[v.ap][v.beam - 1, v.lp])
        if len(lps) == 0:
            continue
        base_mw = _interference_mw_at_lps(tables, links, v.ap, lps)
        mcs_without = table.indices_for_sinr(
            sinr_with_interference_mw(signal, base_mw, env.noise_floor_60))
        for b in theta:
            if b in bad:
                continue
            cand_mw = dbm_to_mw(tables.rx60[ap_id][b - 1, lps])
            mcs_with = table.indices_for_sinr(
                sinr_with_interference_mw(signal, base_mw + cand_mw,
                                          env.noise_floor_60))
            # a drop already present without the candidate is not its fault
            if np.any((mcs_with < v.mcs) & (mcs_with < mcs_without)):
                bad.add(b)
    return bad


def _powers_at_point(env: Environment, tables: RadioTables, ap_id: int, pos,
                     lp: int | None):
    """All-sector powers of one AP at a point, grid-backed when it is an LP."""
    if lp is not None:
        return tables.rx60[ap_id][:, lp]
    return rx_power_60_grid(env, env.ap_list[ap_id], np.asarray(pos).reshape(1, 2))[:, 0]


def victim_mcs_after(env: Environment, tables: RadioTables, links,
                     victim: ActiveLink, extra_ap: int | None = None,
                     extra_beam: int | None = None) -> int:
    """Victim link's MCS at its UE with all current interference, optionally
    plus one extra (candidate) transmitter. NULL_ID when below MCS1."""
    powers = _powers_at_point(env, tables, victim.ap, victim.ue_pos, victim.lp)
    signal = np.array([powers[victim.beam - 1]])
    if victim.lp is not None:
        base = _interference_mw_at_lps(tables, links, victim.ap, np.array([victim.lp]))
    else:
        base = np.zeros(1)
        for w in links:
            if w.ap == victim.ap:
                continue
            base = base + dbm_to_mw(
                _powers_at_point(env, tables, w.ap, victim.ue_pos, None)[w.beam - 1])
    if extra_ap is not None:
        base = base + dbm_to_mw(
            _powers_at_point(env, tables, extra_ap, victim.ue_pos, victim.lp)[extra_beam - 1])
    mcs = env.mcs_table.indices_for_sinr(
        sinr_with_interference_mw(signal, base, env.noise_floor_60))
    return int(mcs[0])


def train_and_pick(env: Environment, ap_id: int, beams, ue_pos,
                   links: LinkTable, next_expected_mcs: int | None = None,
                   power_lookup=None):
    """Simulated BRP training over the trainable beams against the true channel.

    Picks the max-power beam at the UE's actual position, maps its SINR under
    current interference to an MCS, and returns None (link declined) when the
    MCS is infeasible or not strictly above the next candidate's expected MCS.
    power_lookup(ap_id) -> per-sector powers at the UE; defaults to computing
    them from the environment.
    """
    beams = list(beams)
    if not beams:
        return None
    if power_lookup is None:
        def power_lookup(m):
            return rx_power_60_grid(env, env.ap_list[m],
                                    np.asarray(ue_pos).reshape(1, 2))[:, 0]
    ue_powers = power_lookup(ap_id)
    best_beam = min(beams, key=lambda b: (-ue_powers[b - 1], b))
    signal = float(ue_powers[best_beam - 1])
    interference = np.zeros(1)
    for w in links:
        interference = interference + dbm_to_mw(power_lookup(w.ap)[w.beam - 1])
    mcs = int(env.mcs_table.indices_for_sinr(sinr_with_interference_mw(
        np.array([signal]), interference, env.noise_floor_60))[0])
    if mcs == NULL_ID:
        return None
    if next_expected_mcs is not None and not mcs > next_expected_mcs:
        return None
    return Assignment(ap=ap_id, beam=best_beam, mcs=mcs, rx_power=signal)


def distributed_select(env: Environment, db: FingerprintDB, tables: RadioTables,
                       links: LinkTable, ue_pos, rng: np.random.Generator,
                       theta_limit: int = 6, cand_limit: int = 2,
                       psi_r: np.ndarray | None = None, power_lookup=None):
    """Full online pipeline for one TXOP.

    Returns (assignment_or_None, candidate_set, attempts) where attempts is
    the number of candidates that ran beam training (handover count is
    attempts - 1 on success, attempts on exhaustion).
    """
    if psi_r is None:
        psi_r = measure_online_fingerprint(env, ue_pos, rng)
    matched_lp = int(np.argmin(((db.psi - np.asarray(psi_r)) ** 2).sum(axis=1)))
    thetas = {m: estimate_best_beams(db, psi_r, m, theta_limit)
              for m in links.unused_aps(env.num_aps)}
    cset = select_candidate_aps(db, thetas, cand_limit, psi_r=psi_r)
    for cand in cset.ranked:
        cand.bad_beams = eliminate_bad_beams(env, db, tables, cand.ap,
                                             cand.beams, links)
    fallback = None
    for i, cand in enumerate(cset.ranked):
        nxt = cset.ranked[i + 1].expected_mcs if i + 1 < len(cset.ranked) else None
        asg = train_and_pick(env, cand.ap, cand.trainable, ue_pos, links,
                             power_lookup=power_lookup)
        if asg is None:
            continue
        asg = replace(asg, lp=matched_lp)
        if nxt is None or asg.mcs > nxt:
            return asg, cset, i + 1
        if fallback is None:
            fallback = asg  # declined by the strict rule but feasible
    if fallback is not None:
        # every later candidate failed training; revert to the feasible one
        return fallback, cset, len(cset.ranked)
    return None, cset, len(cset.ranked)


def total_objective(env: Environment, tables: RadioTables, links: LinkTable,
                    assignment: Assignment | None, ue_load: float) -> float:
    """Eq.-style total rate: new link's capped rate plus every existing link's
    capped rate at its MCS recomputed with the new transmitter active."""
    table = env.mcs_table
    total = 0.0
    if assignment is not None:
        total += link_rate(table.rate(assignment.mcs), ue_load)
    for v in links:
        if assignment is None:
            mcs_after = victim_mcs_after(env, tables, links, v)
        else:
            mcs_after = victim_mcs_after(env, tables, links, v,
                                         assignment.ap, assignment.beam)
        if mcs_after != NULL_ID:
            total += link_rate(table.rate(mcs_after), v.load)
    return total


def brute_force_optimal(env: Environment, tables: RadioTables, links: LinkTable,
                        ue_pos, ue_load: float):
    """Exhaustive search over every (unused AP, beam) pair.

    Keeps pairs whose true SINR yields a valid MCS and degrades no existing
    link's MCS below its broadcast value; returns (best Assignment or None,
    best objective). Ties break toward the lowest (ap, beam).
    """
    table = env.mcs_table
    best, best_obj = None, -np.inf
    for a in links.unused_aps(env.num_aps):
        powers = _powers_at_point(env, tables, a, ue_pos, None)
        interference = np.zeros(1)
        for w in links:
            interference = interference + dbm_to_mw(
                _powers_at_point(env, tables, w.ap, ue_pos, None)[w.beam - 1])
        sinr_db = sinr_with_interference_mw(powers, interference, env.noise_floor_60)
        mcs_new = table.indices_for_sinr(sinr_db)
        for b in range(1, env.ap_list[a].num_sectors + 1):
            if mcs_new[b - 1] == NULL_ID:
                continue
            if any(victim_mcs_after(env, tables, links, v, a, b) < v.mcs
                   for v in links):
                continue
            asg = Assignment(ap=a, beam=b, mcs=int(mcs_new[b - 1]),
                             rx_power=float(powers[b - 1]))
            obj = total_objective(env, tables, links, asg, ue_load)
            if obj > best_obj:
                best, best_obj = asg, obj
    if best is None:
        return None, total_objective(env, tables, links, None, ue_load)
    return best, best_obj
