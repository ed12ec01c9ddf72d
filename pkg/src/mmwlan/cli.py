"""Command-line front end: survey / run / sweep / verify.

survey  builds the offline fingerprint DB for a scenario and serializes it.
run     runs one seeded simulation against a previously surveyed DB.
sweep   runs both MAC modes over an AP-count x seed grid, writing a results
        CSV and a self-contained plotting script.
verify  cross-checks the distributed pipeline against the brute-force oracle
        on random small instances.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import os
import sys

import numpy as np

from .fingerprint import NULL_ID, build_offline_db, env_checksum, load_db, save_db
from .radio import RadioTables
from .scenario import (Scenario, ScenarioError, build_environment,
                       build_sim_config, load_scenario)
from .sim import COORDINATED, DCF, run_simulation
from .verify import make_verify_env, verify_instances

CSV_HEADER = ("mac_mode,num_aps,seed,total_throughput_bps,avg_delay_s,"
              "collisions,handovers,fst_fallbacks,bf_airtime_s")


def _outpath(path):
    """Relative output paths land in $MMWLAN_OUTDIR when it is set."""
    outdir = os.environ.get("MMWLAN_OUTDIR")
    if outdir and not os.path.isabs(path):
        os.makedirs(outdir, exist_ok=True)
        return os.path.join(outdir, path)
    return path


def _load(args) -> Scenario:
    if args.scenario:
        return load_scenario(args.scenario)
    return Scenario()


def format_row(mode, num_aps, seed, report) -> str:
    delay = "" if report.avg_delay_s is None else f"{report.avg_delay_s:.9e}"
    return (f"{mode},{num_aps},{seed},{report.total_throughput_bps:.9e},{delay},"
            f"{report.collisions},{report.handovers},{report.fst_fallbacks},"
            f"{report.bf_airtime_s:.9e}")


def cmd_survey(args) -> int:
    scenario = _load(args)
    env = build_environment(scenario)
    db = build_offline_db(env, cluster_k=scenario.cluster_k, seed=scenario.db_seed)
    out = _outpath(args.out)
    save_db(db, out)
    print(f"surveyed {db.num_lps} LPs x {db.num_aps} APs -> {out}")
    for ap in env.ap_list:
        null_frac = float(np.mean(db.phi[:, ap.id] == NULL_ID))
        print(f"  AP {ap.id}: uncovered LP fraction {null_frac:.3f}")
    return 0


def _prepared(scenario, num_aps):
    env = build_environment(scenario, num_aps=num_aps)
    db = build_offline_db(env, cluster_k=scenario.cluster_k, seed=scenario.db_seed)
    return env, db, RadioTables(env)


def cmd_run(args) -> int:
    scenario = _load(args)
    num_aps = scenario.simulation.get("num_aps_active", scenario.num_aps)
    env = build_environment(scenario, num_aps=num_aps)
    db = load_db(args.db)
    if db.checksum != env_checksum(env):
        raise ScenarioError("DB/scenario mismatch: the fingerprint DB was "
                            "surveyed in a different environment")
    config = build_sim_config(scenario, mode=args.mode, seed=args.seed,
                              num_aps=num_aps)
    trace = _outpath(args.trace) if args.trace else None
    report, _ = run_simulation(env, db, config, trace_path=trace)
    row = format_row(config.mac_mode, num_aps, config.seed, report)
    out = _outpath(args.out)
    _append_rows(out, [row])
    print(row)
    return 0


def _append_rows(path, rows):
    new_file = not os.path.exists(path)
    with open(path, "a") as fh:
        if new_file:
            fh.write(f"# generated {datetime.datetime.now().isoformat()}\n")
            fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row + "\n")


# module-level cache so pool workers survey each AP count once
_WORKER_CACHE = {}


def _sweep_task(scenario_path, mode, ap_count, seed):
    scenario = load_scenario(scenario_path) if scenario_path else Scenario()
    key = (scenario_path, ap_count)
    if key not in _WORKER_CACHE:
        _WORKER_CACHE[key] = _prepared(scenario, ap_count)
    env, db, tables = _WORKER_CACHE[key]
    config = build_sim_config(scenario, mode=mode, seed=seed, num_aps=ap_count)
    report, _ = run_simulation(env, db, config, tables=tables)
    return format_row(mode, ap_count, seed, report)


def cmd_sweep(args) -> int:
    scenario = _load(args)
    if not scenario.seeds:
        raise ScenarioError("sweep requires a non-empty seeds list")
    if not scenario.ap_counts:
        raise ScenarioError("sweep requires a non-empty ap_counts list")
    tasks = [(args.scenario, mode, ap_count, seed)
             for mode in (COORDINATED, DCF)
             for ap_count in scenario.ap_counts
             for seed in scenario.seeds]
    out = _outpath(args.out)
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_task, *zip(*tasks)))
    else:
        rows = []
        for task in tasks:
            row = _sweep_task(*task)
            rows.append(row)
            _append_rows(out, [row])  # flush progressively
            print(row)
    if args.jobs > 1:
        _append_rows(out, rows)
        for row in rows:
            print(row)
    plot_path = os.path.join(os.path.dirname(out) or ".", "plot_results.py")
    with open(plot_path, "w") as fh:
        fh.write(PLOT_SCRIPT.format(csv=os.path.basename(out)))
    print(f"wrote {out} and {plot_path}")
    return 0


def cmd_verify(args) -> int:
    scenario = _load(args)
    env = make_verify_env(prop=scenario.prop)
    db = build_offline_db(env, cluster_k=scenario.cluster_k, seed=scenario.db_seed)
    report = verify_instances(env, db, args.instances, seed=args.seed,
                              theta_limit=scenario.best_beam_limit)
    print(report.summary())
    return 0 if report.violations == 0 else 1


PLOT_SCRIPT = '''#!/usr/bin/env python3
"""Plot mean throughput and delay curves (min/max bands) from {csv}."""
import csv
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

groups = defaultdict(lambda: ([], []))  # (mode, num_aps) -> (tputs, delays)
with open("{csv}") as fh:
    for row in csv.DictReader(r for r in fh if not r.startswith("#")):
        key = (row["mac_mode"], int(row["num_aps"]))
        groups[key][0].append(float(row["total_throughput_bps"]) / 1e9)
        if row["avg_delay_s"]:
            groups[key][1].append(float(row["avg_delay_s"]) * 1e3)

for metric, idx, ylabel, fname in [
    ("throughput", 0, "Average total throughput [Gbps]", "throughput.png"),
    ("delay", 1, "Average packet delay [ms]", "delay.png"),
]:
    fig, ax = plt.subplots()
    for mode, marker in [("coordinated", "o"), ("dcf", "s")]:
        xs = sorted(n for m, n in groups if m == mode)
        mean = [sum(groups[(mode, n)][idx]) / len(groups[(mode, n)][idx]) for n in xs]
        lo = [min(groups[(mode, n)][idx]) for n in xs]
        hi = [max(groups[(mode, n)][idx]) for n in xs]
        ax.plot(xs, mean, marker=marker, label=mode)
        ax.fill_between(xs, lo, hi, alpha=0.2)
    ax.set_xlabel("Number of APs")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.savefig(fname, dpi=150, bbox_inches="tight")
    print("wrote", fname)
'''


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmwlan",
        description="Coordinated Wi-Fi/WiGig WLAN simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("survey", help="build and serialize the fingerprint DB")
    p.add_argument("--scenario", help="scenario TOML file (defaults built in)")
    p.add_argument("--out", default="fingerprints.db")
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("run", help="one seeded simulation run")
    p.add_argument("--scenario")
    p.add_argument("--db", required=True)
    p.add_argument("--mode", choices=[COORDINATED, DCF], default=COORDINATED)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default="results.csv")
    p.add_argument("--trace", help="write newline-delimited event trace here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="both modes x ap_counts x seeds")
    p.add_argument("--scenario")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="pipeline-vs-oracle feasibility check")
    p.add_argument("--scenario")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
