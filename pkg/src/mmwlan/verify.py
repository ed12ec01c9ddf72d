"""Instance-level verification of the distributed selection pipeline.

Generates random small scenarios (a few APs, few sectors, an LP grid),
plants existing links on learning points, then lets the online pipeline pick
an AP/beam for a fresh UE and judges the result against the brute-force
optimum: any degradation of an existing link's MCS is a feasibility
violation, and the achieved total rate is reported as a fraction of the
optimal one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fingerprint import NULL_ID, FingerprintDB
from .radio import ApConfig, Environment, PropagationParams, RadioTables
from .selection import (ActiveLink, LinkTable, brute_force_optimal,
                        distributed_select, total_objective, victim_mcs_after)


@dataclass
class VerifyReport:
    instances: int
    violations: int
    established: int
    mean_ratio: float

    def summary(self) -> str:
        return (f"instances={self.instances} violations={self.violations} "
                f"established={self.established} mean_ratio={self.mean_ratio:.4f}")


def make_verify_env(num_aps: int = 3, num_sectors: int = 8,
                    lp_grid=(5, 4), room=(12.0, 9.0),
                    prop: PropagationParams | None = None,
                    mcs_table=None) -> Environment:
    """Small dense environment used for oracle cross-checks."""
    from .scenario import auto_ap_positions, lp_grid_positions

    aps = [ApConfig(id=i, position=pos, num_sectors=num_sectors,
                    beamwidth_az=360.0 / num_sectors)
           for i, pos in enumerate(auto_ap_positions(room, num_aps))]
    kwargs = {}
    if prop is not None:
        kwargs["prop_params"] = prop
    if mcs_table is not None:
        kwargs["mcs_table"] = mcs_table
    return Environment(room_width=room[0], room_depth=room[1], ap_list=aps,
                       lp_list=lp_grid_positions(room, lp_grid), **kwargs)


def random_instance(env: Environment, db: FingerprintDB, tables: RadioTables,
                    rng: np.random.Generator, max_existing: int = 2):
    """One random instance: a few existing links pinned to LPs plus a new UE.

    Existing UEs sit exactly on learning points so the offline power matrices
    match the true channel at their positions; their broadcast MCS accounts
    for mutual interference within the existing set.
    """
    links = LinkTable()
    n_existing = int(rng.integers(0, max_existing + 1))
    aps = list(rng.permutation(env.num_aps))[:n_existing]
    for i, ap in enumerate(aps):
        covered = np.flatnonzero(db.phi[:, ap] != NULL_ID)
        if len(covered) == 0:
            continue
        lp = int(rng.choice(covered))
        beam = int(db.phi[lp, ap])
        link = ActiveLink(ap=int(ap), ue=100 + i, beam=beam, mcs=1,
                          rx_power=float(db.p_off[lp, ap]),
                          load=float(rng.uniform(0.5e9, 5e9)),
                          ue_pos=tuple(env.lp_list[lp]), lp=lp)
        links.add(link)
    # rebroadcast each link's MCS under the final mutual interference
    rebroadcast = []
    for v in links:
        mcs = victim_mcs_after(env, tables, links, v)
        if mcs != NULL_ID:
            rebroadcast.append(replace(v, mcs=mcs))
    links = LinkTable(rebroadcast)
    ue_pos = rng.uniform([0.0, 0.0], [env.room_width, env.room_depth])
    ue_load = float(rng.uniform(0.5e9, 5e9))
    return links, ue_pos, ue_load


def verify_instances(env: Environment, db: FingerprintDB, n_instances: int,
                     seed: int = 0, theta_limit: int = 6, cand_limit: int = 2,
                     tables: RadioTables | None = None) -> VerifyReport:
    """Run the pipeline on random instances and judge it with the oracle."""
    if n_instances < 1:
        raise ValueError("need at least one instance")
    tables = tables or RadioTables(env)
    rng = np.random.default_rng(seed)
    violations = established = 0
    ratios = []
    for _ in range(n_instances):
        links, ue_pos, ue_load = random_instance(env, db, tables, rng)
        asg, _, _ = distributed_select(env, db, tables, links, ue_pos, rng,
                                       theta_limit=theta_limit,
                                       cand_limit=cand_limit)
        if asg is not None:
            established += 1
            if any(victim_mcs_after(env, tables, links, v, asg.ap, asg.beam) < v.mcs
                   for v in links):
                violations += 1
        achieved = total_objective(env, tables, links, asg, ue_load)
        _, optimal = brute_force_optimal(env, tables, links, ue_pos, ue_load)
        ratios.append(achieved / optimal if optimal > 0 else 1.0)
    return VerifyReport(instances=n_instances, violations=violations,
                        established=established,
                        mean_ratio=float(np.mean(ratios)))


def corrupt_db(db: FingerprintDB, rng: np.random.Generator) -> FingerprintDB:
    """Negative control: shuffle the best-sector map (and rebuild the derived
    clusters consistently) so the pipeline protects the wrong LPs."""
    from .fingerprint import _exemplars_for, cluster_offline_mcs

    perm = rng.permutation(db.num_lps)
    bad = FingerprintDB(psi=db.psi.copy(), phi=db.phi[perm].copy(),
                        p_off=db.p_off.copy(), mcs_off=db.mcs_off[perm].copy(),
                        exemplars={}, exemplar_mcs={}, mcs_clusters={},
                        checksum=db.checksum, cluster_k=db.cluster_k, seed=db.seed)
    for ap_id in range(bad.num_aps):
        for sector in bad.covered_sectors(ap_id):
            ex, ex_mcs = _exemplars_for(bad.psi, bad.mcs_off, bad.phi,
                                        ap_id, sector, bad.cluster_k, bad.seed)
            bad.exemplars[(ap_id, sector)] = ex
            bad.exemplar_mcs[(ap_id, sector)] = ex_mcs
            bad.mcs_clusters[(ap_id, sector)] = cluster_offline_mcs(bad, ap_id, sector)
    return bad
