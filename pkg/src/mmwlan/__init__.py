"""Coordinated dual-band (5/60 GHz) WLAN simulator.

Library layout:
  radio        propagation, antennas, SINR, MCS ladder
  fingerprint  offline radio maps, exemplar/MCS clustering, DB files
  selection    online best-beam / candidate-AP pipeline and the brute-force
               optimum oracle
  sim          discrete-event MAC simulation (coordinated and DCF modes)
  verify       random-instance cross-checks against the oracle
  scenario     TOML scenario files and environment construction
  cli          survey / run / sweep / verify subcommands
"""

from .radio import (ApConfig, Environment, McsEntry, McsTable,
                    PropagationParams, RadioTables, antenna_gain,
                    default_mcs_table, link_rate, mcs_from_sinr, rx_power_5,
                    rx_power_60, sinr)
from .fingerprint import (FingerprintDB, best_sector, build_offline_db,
                          cluster_exemplars, cluster_offline_mcs, env_checksum,
                          load_db, save_db)
from .selection import (ActiveLink, Assignment, Candidate, CandidateSet,
                        LinkTable, brute_force_optimal, distributed_select,
                        eliminate_bad_beams, estimate_best_beams,
                        measure_online_fingerprint, select_candidate_aps,
                        train_and_pick)
from .sim import (COORDINATED, DCF, MetricsReport, ProtocolTiming, SimConfig,
                  Simulator, collect_metrics, generate_traffic, run_simulation)
from .verify import VerifyReport, make_verify_env, verify_instances

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
