#!/usr/bin/env python3
"""Coordinated MAC vs 802.11ad DCF across AP counts: the headline result.

Runs a shortened version of the dense-office scenario (0.3 s, 2 seeds) so the
whole comparison finishes in well under a minute; the packaged scenario file
runs the full 1 s x 5 seed grid via `mmwlan sweep`."""

import os

import numpy as np

from mmwlan import build_offline_db
from mmwlan.radio import RadioTables
from mmwlan.scenario import build_environment, build_sim_config, load_scenario
from mmwlan.sim import COORDINATED, DCF, SimConfig, Simulator

HERE = os.path.dirname(os.path.abspath(__file__))
scenario = load_scenario(os.path.join(HERE, "..", "scenarios",
                                      "dense_office.toml"))
SEEDS = (1, 2)

print("50 UEs, loads U[0.5, 5] Gb/s, 32 m x 24 m office, 0.3 s x 2 seeds\n")
print(f"{'APs':>4} | {'coordinated':>22} | {'dcf':>22} | {'ratios':>14}")
print(f"{'':>4} | {'Gb/s':>10} {'delay ms':>11} | {'Gb/s':>10} "
      f"{'delay ms':>11} | {'tput':>6} {'delay':>7}")

for n in (1, 2, 4, 8):
    env = build_environment(scenario, num_aps=n)
    db = build_offline_db(env)
    tables = RadioTables(env)
    stats = {}
    for mode in (COORDINATED, DCF):
        tput, delay = [], []
        for seed in SEEDS:
            cfg = build_sim_config(scenario, mode=mode, seed=seed, num_aps=n)
            cfg = SimConfig(**{**cfg.__dict__, "sim_duration": 0.3})
            rep = Simulator(env, db, cfg, tables=tables).run()
            tput.append(rep.total_throughput_bps / 1e9)
            delay.append(rep.avg_delay_s * 1e3)
        stats[mode] = (np.mean(tput), np.mean(delay))
    c, d = stats[COORDINATED], stats[DCF]
    print(f"{n:>4} | {c[0]:>10.2f} {c[1]:>11.1f} | {d[0]:>10.2f} "
          f"{d[1]:>11.1f} | {c[0] / d[0]:>6.1f} {d[1] / c[1]:>7.1f}")

print()
print("DCF throughput barely moves past 4 APs: every new link is another")
print("deaf 36-sector sweep corrupting its neighbours, while the")
print("fingerprint-coordinated MAC keeps adding concurrent links that the")
print("bad-beam check has certified as non-interfering.")
