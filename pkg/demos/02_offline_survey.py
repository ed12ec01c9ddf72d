#!/usr/bin/env python3
"""The offline phase: survey the LP grid, inspect the four radio maps and the
per-sector exemplar clusters that the online selector matches against."""

import numpy as np

from mmwlan import build_offline_db
from mmwlan.fingerprint import NULL_ID
from mmwlan.scenario import Scenario, build_environment

sc = Scenario()
sc.room = (32.0, 24.0)
sc.num_aps = 4
env = build_environment(sc)
db = build_offline_db(env)

print(f"surveyed {db.num_lps} learning points x {db.num_aps} APs")
print()
print("=== coverage: best sector per (LP, AP), NULL = cannot reach MCS1 ===")
for ap in range(env.num_aps):
    covered = np.count_nonzero(db.phi[:, ap] != NULL_ID)
    sectors = db.covered_sectors(ap)
    print(f"AP {ap}: {covered}/{db.num_lps} LPs covered "
          f"through {len(sectors)} distinct sectors")

lp = db.num_lps // 2
print()
print(f"=== one learning point (LP {lp} at {tuple(env.lp_list[lp])}) ===")
print(f"Wi-Fi fingerprint psi: {np.round(db.psi[lp], 1)} dBm")
for ap in range(env.num_aps):
    s = int(db.phi[lp, ap])
    if s == NULL_ID:
        print(f"AP {ap}: no coverage")
    else:
        print(f"AP {ap}: best sector {s:>2}, {db.p_off[lp, ap]:6.1f} dBm, "
              f"offline MCS {db.mcs_off[lp, ap]}")

ap = 0
sector = db.covered_sectors(ap)[0]
members = db.member_lps(ap, sector)
ex = db.exemplars[(ap, sector)]
print()
print(f"=== exemplars of (AP {ap}, sector {sector}) ===")
print(f"{len(members)} member LPs clustered into {len(ex)} exemplars "
      f"(k-means on the Wi-Fi fingerprints):")
for row, mcs in zip(ex, db.exemplar_mcs[(ap, sector)]):
    print(f"  exemplar {np.round(row, 1)} -> expected MCS {mcs}")
print(f"descending offline MCS set of the sector: "
      f"{db.mcs_clusters[(ap, sector)]}")
print()
print("At run time a UE's noisy fingerprint is matched against these "
      "exemplars to guess its best sectors without any 60 GHz sweeping.")
