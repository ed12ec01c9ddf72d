"""Seeded discrete-event MAC simulation.

Runs either the coordinated dual-band MAC (Wi-Fi signaling drives
fingerprint-based 60 GHz link establishment) or an IEEE 802.11ad-style DCF
baseline (max-power association, exhaustive sector sweep, deaf directional
carrier sense) over one Environment/FingerprintDB pair, and accumulates
throughput and delay metrics.

Time advances in TXOP-interval boundaries. Within an interval, per-link
packet service is evaluated in closed form (vectorized over the Poisson
arrival stream), while control signaling occupies the shared 5 GHz medium
as a serialized busy-until timeline, which is what enforces NAVset mutual
exclusion. Everything is a deterministic function of (config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fingerprint import NULL_ID, FingerprintDB, env_checksum
from .radio import Environment, RadioTables, dbm_to_mw, sinr_with_interference_mw
from .selection import (ActiveLink, LinkTable, distributed_select,
                        measure_online_fingerprint,
                        train_and_pick)

COORDINATED = "coordinated"
DCF = "dcf"


@dataclass(frozen=True)
class ProtocolTiming:
    """Frame airtimes (seconds) and CSMA parameters. The paper's MAC names
    the frames but not their durations; these are order-of-magnitude 802.11
    values and all configurable."""

    m_req: float = 50e-6
    m_resp: float = 50e-6
    switch_on: float = 50e-6
    navset: float = 50e-6
    bid: float = 50e-6
    nack: float = 50e-6
    brp_slot: float = 20e-6       # per trained beam
    fbk: float = 50e-6
    sweep_slot: float = 15e-6     # per sector in the DCF exhaustive sweep
    ssw_feedback: float = 50e-6
    slot_5: float = 9e-6
    difs_5: float = 34e-6
    sifs_5: float = 16e-6
    pifs_5: float = 25e-6
    cwmin: int = 16
    cwmax: int = 1024
    slot_60: float = 5e-6
    difs_60: float = 13e-6
    beacon_airtime: float = 100e-6

    def __post_init__(self):
        for name in ("m_req", "m_resp", "switch_on", "navset", "bid", "nack",
                     "brp_slot", "fbk", "sweep_slot", "ssw_feedback", "slot_5",
                     "difs_5", "sifs_5", "slot_60", "difs_60", "beacon_airtime"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    num_aps_active: int = 8
    num_ues: int = 50
    mac_mode: str = COORDINATED
    sim_duration: float = 1.0
    beacon_interval: float = 20e-3
    txop_interval: float = 1e-3
    packet_size: int = 12000          # bits (1500 octets)
    load_min: float = 0.5e9           # bits/s
    load_max: float = 5.0e9
    candidate_limit: int = 2          # |A(k)|
    best_beam_limit: int = 6          # |theta|
    seed: int = 1
    timing: ProtocolTiming = field(default_factory=ProtocolTiming)
    fst_enabled: bool = True
    fst_rate: float = 300e6
    cs_threshold: float = -68.0       # dBm, DCF directional carrier sense
    blockage_rate: float = 0.0        # mean blockage events per link-second
    outage_limit: int = 3             # consecutive collided TXOPs before a link drops
    grant_quantum: int = 20           # TXOPs a link may hold its AP before re-grant
    grants_per_txop: int = 1          # coordinated establishment attempts per TXOP
    queue_limit: int = 2000           # per-UE buffer, packets (drop-tail)
    retry_holdoff: float | None = None  # s before a failed UE retries; None = beacon

    def __post_init__(self):
        if self.mac_mode not in (COORDINATED, DCF):
            raise ValueError(f"unknown mac_mode {self.mac_mode!r}")
        if self.sim_duration < 0 or self.txop_interval <= 0 or self.beacon_interval <= 0:
            raise ValueError("durations must be positive")
        if not 0 < self.load_min <= self.load_max:
            raise ValueError("load range must be positive and ordered")
        if self.num_ues < 1 or self.num_aps_active < 1:
            raise ValueError("need at least one UE and one AP")


@dataclass
class MetricsReport:
    total_throughput_bps: float
    avg_delay_s: float | None
    delivered_bits: float
    generated_bits: float
    collisions: int
    handovers: int
    fst_fallbacks: int
    bf_airtime_s: float
    dropped_packets: int


class MetricsAccumulator:
    def __init__(self, num_ues):
        self.delivered_bits = np.zeros(num_ues)
        self.generated_bits = np.zeros(num_ues)
        self.delay_sum = 0.0
        self.delay_count = 0
        self.collisions = 0
        self.handovers = 0
        self.fst_fallbacks = 0
        self.bf_airtime = 0.0
        self.dropped_packets = 0


def collect_metrics(acc: MetricsAccumulator, sim_duration: float) -> MetricsReport:
    """Throughput over the run plus mean per-packet delay of delivered packets."""
    delivered = float(acc.delivered_bits.sum())
    avg_delay = acc.delay_sum / acc.delay_count if acc.delay_count else None
    duration = sim_duration if sim_duration > 0 else 1.0
    return MetricsReport(
        total_throughput_bps=delivered / duration,
        avg_delay_s=avg_delay,
        delivered_bits=delivered,
        generated_bits=float(acc.generated_bits.sum()),
        collisions=acc.collisions,
        handovers=acc.handovers,
        fst_fallbacks=acc.fst_fallbacks,
        bf_airtime_s=acc.bf_airtime,
        dropped_packets=acc.dropped_packets,
    )


def generate_traffic(config: SimConfig, rng: np.random.Generator):
    """Per-UE offered loads (uniform once) and Poisson arrival timestamps."""
    loads = rng.uniform(config.load_min, config.load_max, size=config.num_ues)
    arrivals = []
    for load in loads:
        rate = load / config.packet_size
        times = []
        t = 0.0
        # draw in chunks; cumulative sum of exponential inter-arrivals
        while t < config.sim_duration:
            chunk = rng.exponential(1.0 / rate, size=max(int(rate * config.sim_duration * 0.2) + 64, 64))
            chunk = t + np.cumsum(chunk)
            times.append(chunk)
            t = chunk[-1]
        arr = np.concatenate(times) if times else np.empty(0)
        arrivals.append(arr[arr < config.sim_duration])
    return loads, arrivals


def serve_queue(arrivals: np.ndarray, head: int, t0: float, t1: float,
                rate_bps: float, packet_bits: int):
    """Closed-form FIFO service of one link over [t0, t1).

    Returns (new_head, packets_served, delay_sum, last_completion). Packets
    must finish inside the window; a straddling packet is retried next window.
    """
    if rate_bps <= 0 or t1 <= t0:
        return head, 0, 0.0, t0
    tau = packet_bits / rate_bps
    n_cap = int(np.floor((t1 - t0) / tau + 1e-12))
    if n_cap <= 0:
        return head, 0, 0.0, t0
    a = arrivals[head:head + n_cap]
    a = a[a < t1]
    if len(a) == 0:
        return head, 0, 0.0, t0
    idx = np.arange(len(a))
    # completion recurrence c_i = max(c_{i-1}, a_i) + tau, c_{-1} = t0
    c = tau * (idx + 1) + np.maximum(t0, np.maximum.accumulate(a - tau * idx))
    n = int(np.searchsorted(c, t1, side="right"))
    if n == 0:
        return head, 0, 0.0, t0
    delay_sum = float((c[:n] - a[:n]).sum())
    return head + n, n, delay_sum, float(c[n - 1])


class _LinkRuntime:
    """Mutable per-link bookkeeping the LinkTable entry does not carry."""

    def __init__(self, link, t_est, cset=None, cand_idx=0, block_at=np.inf,
                 expire_at=np.inf):
        self.link = link
        self.t_est = t_est
        self.expire_at = expire_at
        self.cset = cset
        self.cand_idx = cand_idx
        self.block_at = block_at
        self.penalty = 0.0  # service time lost to sweep corruption this interval
        self.outage = 0     # consecutive collided TXOPs


class Simulator:
    """One seeded run of either MAC mode over a fixed environment and DB."""

    def __init__(self, env: Environment, db: FingerprintDB, config: SimConfig,
                 tables: RadioTables | None = None, collect_events: bool = False):
        if db.checksum != env_checksum(env):
            raise ValueError("fingerprint DB does not match this environment")
        if config.num_aps_active != env.num_aps:
            raise ValueError("num_aps_active must equal the environment's AP count")
        self.env = env
        self.db = db
        self.config = config
        self.tables = tables or RadioTables(env)
        self.collect_events = collect_events
        self.events = []          # structured trace, also serialized on demand
        self.nav_intervals = []   # (start, end, ap)

    # --- trace ---------------------------------------------------------------

    def _event(self, t, kind, **fields):
        if self.collect_events:
            self.events.append((round(t, 12), kind, fields))

    def trace_lines(self):
        lines = []
        for t, kind, fields in self.events:
            parts = [f"{t:.9f}", kind]
            for k in sorted(fields):
                parts.append(f"{k}={fields[k]}")
            lines.append(" ".join(parts))
        return lines

    # --- run -----------------------------------------------------------------

    def run(self) -> MetricsReport:
        env, cfg = self.env, self.config
        tm = cfg.timing
        self.rng = rng = np.random.default_rng(cfg.seed)
        n = cfg.num_ues

        self.ue_pos = rng.uniform([0.0, 0.0], [env.room_width, env.room_depth], (n, 2))
        self.loads, self.arrivals = generate_traffic(cfg, rng)
        self.head = np.zeros(n, dtype=int)
        self.tail = np.zeros(n, dtype=int)   # next arrival index to admit
        self.adm = [np.empty_like(a) for a in self.arrivals]
        self.adm_count = np.zeros(n, dtype=int)
        self.ue_tables = RadioTables(env, self.ue_pos)
        ap_positions = np.array([ap.position for ap in env.ap_list])
        self.ap_tables = RadioTables(env, ap_positions)
        # max-power autonomous association (DCF); ties toward the lowest AP id
        best_by_ap = np.stack([g.max(axis=0) for g in self.ue_tables.rx60])  # (M, n)
        self.assoc = np.argmax(best_by_ap, axis=0)

        self.links = LinkTable()
        self.runtime = {}         # ap -> _LinkRuntime
        self.blocked = set()      # (ap, ue, beam) pairs ruled out by blockage
        self.metrics = MetricsAccumulator(n)
        for ue in range(n):
            self.metrics.generated_bits[ue] = len(self.arrivals[ue]) * cfg.packet_size
        self.m5_busy = 0.0
        self._rr = 0
        # next time a UE may request again after a failed establishment
        self.next_try = np.zeros(n)
        self.psi_cache = {}       # ue -> (fingerprint, valid-until)

        n_boundaries = int(np.ceil(cfg.sim_duration / cfg.txop_interval))
        beacon_every = max(1, int(round(cfg.beacon_interval / cfg.txop_interval)))

        for k in range(n_boundaries):
            t = k * cfg.txop_interval
            t_end = min((k + 1) * cfg.txop_interval, cfg.sim_duration)
            if k % beacon_every == 0:
                self.m5_busy = max(self.m5_busy, t) + tm.beacon_airtime
                self._event(t, "beacon")
            self._admit(t)
            self._teardown_idle(t)
            if cfg.mac_mode == COORDINATED:
                self._grant_coordinated(t, t_end)
            elif k % beacon_every == 0:
                # 802.11ad sector sweeps run in the beacon header interval
                # (BTI/A-BFT), so a DCF AP only trains a new UE per beacon;
                # the coordinated APC signals over Wi-Fi at any TXOP instead
                self._grant_dcf(t, t_end)
            self._serve_interval(t, t_end)

        return collect_metrics(self.metrics, cfg.sim_duration)

    # --- scheduling ----------------------------------------------------------

    def _admit(self, t):
        """Drop-tail admission: arrivals enter a finite per-UE buffer at TXOP
        boundaries; packets that find the buffer full are lost."""
        cap = self.config.queue_limit
        for ue in range(self.config.num_ues):
            avail = int(np.searchsorted(self.arrivals[ue], t, side="right"))
            new = avail - int(self.tail[ue])
            if new <= 0:
                continue
            room = cap - (int(self.adm_count[ue]) - int(self.head[ue]))
            k = min(new, max(room, 0))
            if k > 0:
                lo = int(self.adm_count[ue])
                src = int(self.tail[ue])
                self.adm[ue][lo:lo + k] = self.arrivals[ue][src:src + k]
                self.adm_count[ue] = lo + k
            self.metrics.dropped_packets += new - k
            self.tail[ue] = avail

    def _queue_len(self, ue, t):
        return int(self.adm_count[ue]) - int(self.head[ue])

    def _linked_ues(self):
        return {e.ue for e in self.links}

    def _teardown_idle(self, t):
        """Drop links whose queue drained or whose service quantum expired,
        so APs rotate across backlogged UEs instead of being held forever.
        An expired coordinated link is renewed in place (no signaling) when
        no other backlogged UE is waiting for that AP."""
        cfg = self.config
        linked = self._linked_ues()
        for ap in sorted(self.runtime):
            rt = self.runtime[ap]
            link = rt.link
            if self._queue_len(link.ue, t) == 0:
                pass
            elif t < rt.expire_at:
                continue
            elif cfg.mac_mode == COORDINATED and not any(
                    int(self.assoc[u]) == ap and u not in linked
                    and self.next_try[u] <= t and self._queue_len(u, t) > 0
                    for u in range(cfg.num_ues) if u != link.ue):
                rt.expire_at = t + cfg.grant_quantum * cfg.txop_interval
                continue
            self.links.remove_ap(ap)
            del self.runtime[ap]
            self._event(t, "teardown", ap=ap, ue=link.ue)

    def _grant_order(self, t):
        n = self.config.num_ues
        linked = self._linked_ues()
        order = []
        for i in range(n):
            ue = (self._rr + i) % n
            if ue in linked or self._queue_len(ue, t) == 0:
                continue
            if self.next_try[ue] > t:
                continue
            order.append(ue)
        return order

    def _backoff60(self):
        return self.config.timing.difs_60 + int(self.rng.integers(0, self.config.timing.cwmin)) * self.config.timing.slot_60

    def _grant_coordinated(self, t, t_end):
        # the APC paces establishment: the full M.Req..BID exchange costs a
        # large slice of the shared Wi-Fi medium, so attempts are rationed
        free = min(len(self.links.unused_aps(self.env.num_aps)),
                   self.config.grants_per_txop)
        granted = 0
        order = self._grant_order(t)
        # prefer UEs whose strongest AP is idle: a TXOP spent dragging a
        # far AP across the room blocks it for the UEs it could serve well.
        # Among those, grant heavier flows first: the APC maximizes the
        # load-weighted sum rate, and the heavy queues dominate the backlog
        order.sort(key=lambda u: (int(self.assoc[u]) in self.runtime,
                                  -self.loads[u]))
        for ue in order:
            if granted >= free:
                break
            granted += 1
            self._rr = (ue + 1) % self.config.num_ues
            self._establish_coordinated(ue, t, t_end)

    def _establish_coordinated(self, ue, t, t_end):
        env, cfg, tm = self.env, self.config, self.config.timing
        pos = self.ue_pos[ue]
        lookup = lambda m: self.ue_tables.rx60[m][:, ue]
        # the APC schedules all signaling itself, so its frames win the
        # medium after a PIFS instead of a full contention backoff
        cur = max(t, self.m5_busy) + tm.pifs_5
        # UEs are static, so the APC reuses a fingerprint measured within the
        # last beacon period instead of re-running the measurement exchange
        psi_r, expiry = self.psi_cache.get(ue, (None, -1.0))
        if psi_r is None or t >= expiry:
            cur += tm.m_req + tm.sifs_5 + tm.m_resp + tm.sifs_5 + tm.switch_on
            psi_r = measure_online_fingerprint(env, pos, self.rng)
            self.psi_cache[ue] = (psi_r, t + cfg.beacon_interval)
        asg, cset, attempts = distributed_select(
            env, self.db, self.tables, self.links, pos, self.rng,
            theta_limit=cfg.best_beam_limit, cand_limit=cfg.candidate_limit,
            psi_r=psi_r, power_lookup=lookup)
        for i in range(attempts):
            cand = cset.ranked[i]
            trainable = cand.trainable
            # APC-scheduled management frames follow each other SIFS-spaced;
            # only the initial medium acquisition above pays a full backoff
            cur += tm.sifs_5
            if trainable:
                cur += tm.navset
                nav_dur = tm.brp_slot * len(trainable) + tm.fbk
                self.nav_intervals.append((cur, cur + nav_dur, cand.ap))
                self._event(cur, "navset", ap=cand.ap, dur=f"{nav_dur:.9f}")
                self.metrics.bf_airtime += tm.brp_slot * len(trainable)
                cur += nav_dur
            if asg is not None and i == attempts - 1:
                cur += tm.bid
            else:
                cur += tm.nack
        self.m5_busy = cur
        self.metrics.handovers += max(attempts - 1, 0)
        if asg is None:
            # hold off before retrying; re-signaling every TXOP against an
            # unchanged link table would saturate the Wi-Fi band
            hold = cfg.retry_holdoff if cfg.retry_holdoff is not None \
                else cfg.beacon_interval
            self.next_try[ue] = t + hold
            self._fst_fallback(ue, cur, t_end)
            return
        prior = tuple((e.ap, e.ue, e.beam, e.mcs) for e in self.links)
        link = ActiveLink(ap=asg.ap, ue=ue, beam=asg.beam, mcs=asg.mcs,
                          rx_power=asg.rx_power, load=float(self.loads[ue]),
                          ue_pos=tuple(pos), lp=asg.lp)
        self.links.add(link)
        self.runtime[asg.ap] = _LinkRuntime(
            link, cur, cset=cset, cand_idx=attempts - 1,
            block_at=self._draw_block(cur),
            expire_at=cur + cfg.grant_quantum * cfg.txop_interval)
        self._event(cur, "establish", ap=asg.ap, ue=ue, beam=asg.beam,
                    mcs=asg.mcs, prior=prior)

    def _draw_block(self, t):
        if self.config.blockage_rate <= 0:
            return np.inf
        return t + self.rng.exponential(1.0 / self.config.blockage_rate)

    def _fst_fallback(self, ue, t0, t_end):
        """Serve the TXOP over the Wi-Fi band when no WiGig candidate worked."""
        self.metrics.fst_fallbacks += 1
        self._event(t0, "fst", ue=ue)
        if not self.config.fst_enabled:
            return
        start = max(t0, self.m5_busy)
        new_head, served, delay_sum, last = serve_queue(
            self.adm[ue][:self.adm_count[ue]], self.head[ue], start, t_end,
            self.config.fst_rate, self.config.packet_size)
        self.head[ue] = new_head
        self.metrics.delivered_bits[ue] += served * self.config.packet_size
        self.metrics.delay_sum += delay_sum
        self.metrics.delay_count += served
        if served:
            self.m5_busy = max(self.m5_busy, last)

    def _grant_dcf(self, t, t_end):
        attempts = 0
        for ue in self._grant_order(t):
            if attempts >= self.env.num_aps:
                break
            ap = int(self.assoc[ue])
            if ap in self.runtime:
                continue  # association target busy; UE waits
            attempts += 1
            self._rr = (ue + 1) % self.config.num_ues
            self._establish_dcf(ue, ap, t)

    def _cs_busy(self, ap):
        for w in self.links:
            if self.ap_tables.rx60[w.ap][w.beam - 1, ap] > self.config.cs_threshold:
                return True
        return False

    def _establish_dcf(self, ue, ap, t):
        env, tm = self.env, self.config.timing
        if self._cs_busy(ap):
            self._event(t, "cs_defer", ap=ap, ue=ue)
            return
        cur = t + self._backoff60()
        num_sectors = env.ap_list[ap].num_sectors
        sweep = num_sectors * tm.sweep_slot
        # deaf sweep: corrupt any active link whose receiver the sweep hits
        tries = 1
        for w in self.links:
            worst = float(self.ue_tables.rx60[ap][:, w.ue].max())
            base = np.zeros(1)
            for v in self.links:
                if v.ap == w.ap:
                    continue
                base = base + dbm_to_mw(self.ue_tables.rx60[v.ap][v.beam - 1, w.ue])
            signal = np.array([self.ue_tables.rx60[w.ap][w.beam - 1, w.ue]])
            s = sinr_with_interference_mw(signal, base + dbm_to_mw(worst),
                                          env.noise_floor_60)
            if int(env.mcs_table.indices_for_sinr(s)[0]) < w.mcs:
                tries = 2  # both frames corrupted; sweep retried once
                self.metrics.collisions += 1
                self.runtime[w.ap].penalty += sweep
                self._event(cur, "collision", ap=ap, victim=w.ap, ue=w.ue)
        cur += tries * (sweep + tm.ssw_feedback)
        self.metrics.bf_airtime += tries * sweep
        powers = self.ue_tables.rx60[ap][:, ue].copy()
        for (bap, bue, bbeam) in self.blocked:
            if bap == ap and bue == ue:
                powers[bbeam - 1] = -np.inf
        beam = int(np.argmax(powers)) + 1
        # deaf: the sweep measures SNR only, so the agreed MCS ignores any
        # concurrent transmissions and collisions surface later as corruption
        snr = np.array([powers[beam - 1] - env.noise_floor_60])
        mcs = int(env.mcs_table.indices_for_sinr(snr)[0])
        if mcs == NULL_ID:
            self._event(cur, "assoc_fail", ap=ap, ue=ue)
            return
        link = ActiveLink(ap=ap, ue=ue, beam=beam, mcs=mcs,
                          rx_power=float(powers[beam - 1]),
                          load=float(self.loads[ue]), ue_pos=tuple(self.ue_pos[ue]))
        prior = tuple((e.ap, e.ue, e.beam, e.mcs) for e in self.links)
        self.links.add(link)
        self.runtime[ap] = _LinkRuntime(
            link, cur, block_at=self._draw_block(cur),
            expire_at=t + self.config.grant_quantum * self.config.txop_interval)
        self._event(cur, "establish", ap=ap, ue=ue, beam=beam, mcs=mcs, prior=prior)

    # --- data plane ----------------------------------------------------------

    def _collided_aps(self, links):
        """Links whose data frames are corrupted this TXOP.

        Without per-frame rate adaptation a transmitter keeps sending at the
        MCS agreed at establishment, so interference that drags the receiver
        below that MCS corrupts the frame. Any single interferer that alone
        causes such a drop loses its own overlapping frame as well.
        """
        out = set()
        for w in links:
            signal = np.array([self.ue_tables.rx60[w.ap][w.beam - 1, w.ue]])
            per = [(v, dbm_to_mw(self.ue_tables.rx60[v.ap][v.beam - 1, w.ue]))
                   for v in links if v.ap != w.ap]
            total = np.zeros(1)
            for _, mw in per:
                total = total + mw
            s = sinr_with_interference_mw(signal, total, self.env.noise_floor_60)
            if int(self.env.mcs_table.indices_for_sinr(s)[0]) >= w.mcs:
                continue
            out.add(w.ap)
            for v, mw in per:
                s1 = sinr_with_interference_mw(signal, np.array([mw]),
                                               self.env.noise_floor_60)
                if int(self.env.mcs_table.indices_for_sinr(s1)[0]) < w.mcs:
                    out.add(v.ap)
        return out

    def _transmitting(self, t):
        """Links that get on air this TXOP, and the APs deferring to them.

        Coordinated links are APC-scheduled and always transmit. DCF links
        carrier-sense before their TXOP: an AP that does hear an already
        transmitting neighbor's directional frame defers (exposed terminal);
        the deaf ones proceed and risk collision. Contention order is drawn
        per TXOP.
        """
        aps = sorted(self.runtime)
        if self.config.mac_mode != DCF or len(aps) < 2:
            return [self.runtime[ap].link for ap in aps], set()
        active, deferred = [], set()
        for ap in (int(a) for a in self.rng.permutation(aps)):
            heard = any(
                self.ap_tables.rx60[v.ap][v.beam - 1, ap] > self.config.cs_threshold
                for v in active)
            if heard:
                deferred.add(ap)
            else:
                active.append(self.runtime[ap].link)
        return active, deferred

    def _serve_interval(self, t, t_end):
        cfg, tm = self.config, self.config.timing
        active, deferred = self._transmitting(t)
        collided = self._collided_aps(active)
        for ap in sorted(self.runtime):
            rt = self.runtime[ap]
            link = rt.link
            if ap in deferred:
                self._event(t, "cs_defer", ap=ap, ue=link.ue)
                continue
            start = max(t, rt.t_est)
            if cfg.mac_mode == DCF and rt.t_est <= t:
                start += self._backoff60()  # per-TXOP channel access
            start += rt.penalty
            rt.penalty = 0.0
            if ap in collided:
                self.metrics.collisions += 1
                rt.outage += 1
                self._event(t, "collision", ap=ap, ue=link.ue)
                # only the coordinated MAC has a feedback path (the UE's
                # 5 GHz NACK) to notice persistent corruption and release
                # the AP; a deaf DCF transmitter keeps retrying at the
                # agreed MCS until its service quantum expires
                if (cfg.mac_mode == COORDINATED
                        and rt.outage >= cfg.outage_limit):
                    self.links.remove_ap(ap)
                    del self.runtime[ap]
                    self._event(t, "drop", ap=ap, ue=link.ue)
                continue
            rt.outage = 0
            stop = min(t_end, rt.block_at)
            rate = self.env.mcs_table.rate(link.mcs)
            new_head, served, delay_sum, _ = serve_queue(
                self.adm[link.ue][:self.adm_count[link.ue]],
                self.head[link.ue], start, stop, rate, cfg.packet_size)
            self.head[link.ue] = new_head
            self.metrics.delivered_bits[link.ue] += served * cfg.packet_size
            self.metrics.delay_sum += delay_sum
            self.metrics.delay_count += served
            if rt.block_at < t_end:
                self._handle_block(rt, rt.block_at, t_end)

    # --- blockage ------------------------------------------------------------

    def _handle_block(self, rt, tb, t_end):
        """NACK-driven recovery: coordinated hands over to the next candidate,
        DCF re-runs the exhaustive sweep without the blocked beam."""
        cfg, tm, env = self.config, self.config.timing, self.env
        link = rt.link
        self.blocked.add((link.ap, link.ue, link.beam))
        self.links.remove_ap(link.ap)
        del self.runtime[link.ap]
        self._event(tb, "block", ap=link.ap, ue=link.ue)
        self.m5_busy = max(self.m5_busy, tb) + tm.nack

        if cfg.mac_mode == DCF:
            self._establish_dcf(link.ue, link.ap, tb)
            if link.ap in self.runtime:
                self.metrics.handovers += 1
            return

        cset = rt.cset
        idx = rt.cand_idx + 1
        while cset is not None and idx < len(cset.ranked):
            cand = cset.ranked[idx]
            if cand.ap in self.runtime:
                idx += 1
                continue
            lookup = lambda m: self.ue_tables.rx60[m][:, link.ue]
            asg = train_and_pick(env, cand.ap, cand.trainable, link.ue_pos,
                                 self.links, power_lookup=lookup)
            if asg is not None:
                cur = max(tb, self.m5_busy) + tm.pifs_5 + tm.navset
                nav_dur = tm.brp_slot * len(cand.trainable) + tm.fbk
                self.nav_intervals.append((cur, cur + nav_dur, cand.ap))
                self.metrics.bf_airtime += tm.brp_slot * len(cand.trainable)
                cur += nav_dur + tm.bid
                self.m5_busy = cur
                prior = tuple((e.ap, e.ue, e.beam, e.mcs) for e in self.links)
                new_link = ActiveLink(ap=asg.ap, ue=link.ue, beam=asg.beam,
                                      mcs=asg.mcs, rx_power=asg.rx_power,
                                      load=link.load, ue_pos=link.ue_pos,
                                      lp=link.lp)
                self.links.add(new_link)
                self.runtime[asg.ap] = _LinkRuntime(
                    new_link, cur, cset=cset, cand_idx=idx,
                    block_at=self._draw_block(cur),
                    expire_at=tb + cfg.grant_quantum * cfg.txop_interval)
                self.metrics.handovers += 1
                self._event(cur, "establish", ap=asg.ap, ue=link.ue,
                            beam=asg.beam, mcs=asg.mcs, prior=prior)
                return
            idx += 1
        self._fst_fallback(link.ue, tb, t_end)


def run_simulation(env: Environment, db: FingerprintDB, config: SimConfig,
                   tables: RadioTables | None = None, trace_path=None):
    """Convenience wrapper: run one seeded simulation, optionally writing the
    newline-delimited event trace, and return (report, simulator)."""
    sim = Simulator(env, db, config, tables=tables,
                    collect_events=trace_path is not None)
    report = sim.run()
    if trace_path is not None:
        with open(trace_path, "w") as fh:
            fh.write("\n".join(sim.trace_lines()) + "\n")
    return report, sim
