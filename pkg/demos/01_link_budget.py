#!/usr/bin/env python3
"""A tour of the radio layer: path loss, sector antennas, SINR and the MCS
ladder. Everything downstream of the simulator rests on these few formulas."""

import numpy as np

from mmwlan import (ApConfig, Environment, PropagationParams, antenna_gain,
                    default_mcs_table, mcs_from_sinr, rx_power_60, sinr)

prop = PropagationParams(pathloss_exp_60=3.5)
ap = ApConfig(id=0, position=(0.0, 0.0), num_sectors=36)
env = Environment(room_width=40.0, room_depth=30.0, ap_list=[ap],
                  lp_list=np.array([[1.0, 1.0]]), prop_params=prop)

print("=== 60 GHz link budget along the boresight of sector 1 ===")
print(f"{'d [m]':>6} {'rx [dBm]':>9} {'SNR [dB]':>9} {'MCS':>4} {'rate':>10}")
table = default_mcs_table()
for d in (1, 2, 4, 8, 16, 32):
    rx = rx_power_60(env, ap, 1, (d, 0.0))
    snr = rx - env.noise_floor_60
    mcs = mcs_from_sinr(table, snr)
    rate = f"{table.rate(mcs) / 1e9:.2f} Gb/s" if mcs else "-"
    print(f"{d:>6} {rx:>9.1f} {snr:>9.1f} {mcs if mcs else '-':>4} {rate:>10}")

print()
print("=== sector pattern: gain vs angle off boresight ===")
for off in (0, 5, 10, 15, 30, 60, 180):
    g = antenna_gain(ap, prop, 1, ap.sector_boresight(1) + off)
    bar = "#" * max(int(g + 11), 0)
    print(f"{off:>4} deg  {g:>6.1f} dBi  {bar}")
print("(floored at the -10 dBi sidelobe level away from the main lobe)")

print()
print("=== interference: one main-lobe interferer vs one sidelobe ===")
signal = rx_power_60(env, ap, 1, (6.0, 0.0))
for name, interferer in (("none", []),
                         ("sidelobe (-85 dBm)", [-85.0]),
                         ("main lobe (-55 dBm)", [-55.0])):
    s = sinr(signal, interferer, env.noise_floor_60)
    mcs = mcs_from_sinr(table, s)
    print(f"{name:>20}: SINR {s:6.1f} dB -> MCS {mcs if mcs else 'none'}")
print("A main-lobe hit drops the link several MCS steps; sidelobes land "
      "well below the noise floor and cost nothing.")
