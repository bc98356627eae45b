"""Discrete-event simulation of contention-based random access.

All UEs wake up at absolute subframe 0 and send their first preamble at the
serving cell's next RA opportunity. Every subframe with pending work is
visited in order; preambles sent in the same subframe are resolved together
at every cell that listens in that subframe.
"""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .assignment import (assign_alternating_rows, assign_greedy_coloring, assign_same,
                         load_assignment)
from .prach import (USABLE_INDICES, ConfigurationError, RadioTime, RaParameters,
                    check_index, is_ra_opportunity, next_opportunity_abs, occasion_rule)
from .radio import (UE_MAX_POWER_DBM, URBAN_EXPONENT, BucketState, PathLossModel,
                    PreambleTransmission, path_loss_db, preamble_tx_power, resolve_opportunity)
from .topology import grid_rows, hex_grid, neighbor_graph, place_ues_uniform, simulation_region

# The RA response window opens this many subframes after the preamble.
RAR_WINDOW_OFFSET_SF = 3
DEFAULT_DETECTION_THRESHOLD_DBM = -112.0
_MASK64 = (1 << 64) - 1
_PLACEMENT_STREAM = 1 << 63


def mix64(x: int) -> int:
    """SplitMix64 finalizer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def substream_seed(master_seed: int, stream: int) -> int:
    return mix64(mix64(master_seed & _MASK64) ^ stream)


def ue_rng(master_seed: int, ue_id: int) -> np.random.Generator:
    return np.random.default_rng(substream_seed(master_seed, ue_id))


@dataclass(frozen=True)
class Scheme:
    """How cells get their PRACH-ConfigIndex: same, different, coloring or file."""

    kind: str
    index: int = 1
    path: str | None = None

    KINDS = ("same", "different", "coloring", "file")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f"unknown scheme {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise ConfigurationError("file scheme needs a path")
        check_index(self.index)

    @classmethod
    def parse(cls, text) -> "Scheme":
        if isinstance(text, Scheme):
            return text
        text = str(text).strip()
        kind, _, arg = text.partition(":")
        kind = kind.strip().lower()
        if kind == "file":
            return cls("file", path=arg)
        if kind == "same" and arg:
            return cls("same", index=int(arg))
        if arg:
            raise ConfigurationError(f"scheme {kind!r} takes no argument")
        return cls(kind)

    def __str__(self):
        if self.kind == "same" and self.index != 1:
            return f"same:{self.index}"
        if self.kind == "file":
            return f"file:{self.path}"
        return self.kind


@dataclass(frozen=True)
class Timeline:
    rar_delay_sf: int = 3
    msg3_delay_sf: int = 6
    msg4_delay_sf: int = 4


@dataclass(frozen=True)
class ScenarioConfig:
    n_cells: int = 2
    n_ues: int = 10
    isd_m: float = 200.0
    carrier_hz: float = 740e6
    scheme: Scheme = Scheme("same")
    palette: tuple = USABLE_INDICES
    ra: RaParameters = RaParameters()
    sim_time_ms: int = 5000
    seed: int = 0
    repetitions: int = 5
    timeline: Timeline = Timeline()
    capture_margin_db: float | None = None
    # Calibrated so neighbouring cells hear each other's preambles at the
    # 200 m grid; ``None`` falls back to the initial target power.
    detection_threshold_dbm: float | None = DEFAULT_DETECTION_THRESHOLD_DBM
    path_loss_exponent: float = URBAN_EXPONENT
    ue_height_m: float = 1.0
    cell_height_m: float = 30.0
    ue_max_power_dbm: float = UE_MAX_POWER_DBM

    def __post_init__(self):
        if self.n_cells < 1:
            raise ConfigurationError("n_cells must be >= 1")
        if self.n_ues < 0:
            raise ConfigurationError("n_ues must be >= 0")
        if self.sim_time_ms < 1:
            raise ConfigurationError("sim_time_ms must be >= 1")
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be >= 1")
        for name in ("rar_delay_sf", "msg3_delay_sf", "msg4_delay_sf"):
            if getattr(self.timeline, name) < 1:
                raise ConfigurationError(f"timeline.{name} must be >= 1")
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        object.__setattr__(self, "palette", tuple(check_index(p) for p in self.palette))

    @property
    def threshold_dbm(self) -> float:
        if self.detection_threshold_dbm is None:
            return self.ra.preamble_initial_target_power_dbm
        return self.detection_threshold_dbm

    @property
    def path_loss_model(self) -> PathLossModel:
        return PathLossModel(self.carrier_hz, self.path_loss_exponent)

    def replace(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


class SessionState(enum.Enum):
    WAITING_OPPORTUNITY = "waiting_opportunity"
    WAITING_RAR = "waiting_rar"
    WAITING_MSG4 = "waiting_msg4"
    CONNECTED = "connected"
    FAILED = "failed"


@dataclass
class UeSession:
    ue_id: int
    serving_cell: int
    state: SessionState = SessionState.WAITING_OPPORTUNITY
    attempt_no: int = 1
    chosen_seq: int | None = None
    first_tx_time: int | None = None
    backoff_until: int = 0
    deadline: int | None = None
    delay_ms: int | None = None
    fail_reason: str | None = None


@dataclass(frozen=True)
class EventRecord:
    """One non-idle (cell, preamble) bucket of one RA opportunity."""

    time: int
    cell: int
    seq: int
    outcome: str
    ue_ids: tuple
    n_arrivals: int

    @property
    def lost(self) -> int:
        return self.n_arrivals - (self.outcome == "detected")


@dataclass
class RunResult:
    scheme: str
    n_cells: int
    n_ues: int
    seed: int
    collisions: int
    delays_ms: list
    connected_ues: list
    failed_ues: list
    fail_reasons: dict
    event_log: list
    transmissions: list = field(default_factory=list)
    flagged: bool = False

    @property
    def collided_buckets(self) -> int:
        return sum(1 for e in self.event_log if e.outcome == "collided")

    @property
    def delay_median_ms(self):
        return float(np.median(self.delays_ms)) if self.delays_ms else None

    @property
    def delay_mean_ms(self):
        return float(np.mean(self.delays_ms)) if self.delays_ms else None

    @property
    def delay_p95_ms(self):
        return float(np.percentile(self.delays_ms, 95)) if self.delays_ms else None

    @property
    def n_failed(self) -> int:
        return len(self.failed_ues)


def build_assignment(cfg: ScenarioConfig, sites) -> dict:
    scheme = cfg.scheme
    if scheme.kind == "same":
        return assign_same(sites, scheme.index)
    if scheme.kind == "different":
        return assign_alternating_rows(grid_rows(sites), cfg.palette)
    if scheme.kind == "coloring":
        return assign_greedy_coloring(neighbor_graph(sites, cfg.isd_m), cfg.palette)
    return load_assignment(scheme.path, [s.id for s in sites], cfg.palette)


class RandomAccessSimulation:
    """One run of the random access procedure for a scenario and seed.

    ``seq_chooser(ue_id, attempt_no, rng)`` may replace the uniform preamble
    draw, and ``ues`` may replace the random UE drop; both exist for tests.
    """

    def __init__(self, cfg: ScenarioConfig, seed: int | None = None, *, ues=None,
                 seq_chooser=None):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.model = cfg.path_loss_model
        self.sites = hex_grid(cfg.n_cells, cfg.isd_m, cfg.cell_height_m)
        self.assignment = build_assignment(cfg, self.sites)
        for s in self.sites:
            s.prach_index = self.assignment[s.id]
        self.rules = {s.id: occasion_rule(s.prach_index) for s in self.sites}
        if ues is None:
            region = simulation_region(self.sites, cfg.isd_m)
            placement = np.random.default_rng(substream_seed(self.seed, _PLACEMENT_STREAM))
            ues = place_ues_uniform(cfg.n_ues, region, placement, cfg.ue_height_m)
        self.ues = {u.id: u for u in ues}
        self.seq_chooser = seq_chooser
        self.path_loss = self._path_loss_matrix()
        serving = (np.argmin(self.path_loss, axis=1) if len(self.ues)
                   else np.empty(0, dtype=int))
        self.sessions = {uid: UeSession(uid, int(serving[uid])) for uid in sorted(self.ues)}
        self.rngs = {uid: ue_rng(self.seed, uid) for uid in self.sessions}

    def _path_loss_matrix(self):
        n = max(self.ues, default=-1) + 1
        site_xy = np.array([s.position for s in self.sites], dtype=float)
        site_h = np.array([s.antenna_height_m for s in self.sites], dtype=float)
        pl = np.full((n, len(self.sites)), np.inf)
        for uid, ue in self.ues.items():
            dx = site_xy[:, 0] - ue.position[0]
            dy = site_xy[:, 1] - ue.position[1]
            dz = site_h - ue.height_m
            pl[uid] = path_loss_db(self.model, np.sqrt(dx * dx + dy * dy + dz * dz))
        return pl

    def run(self) -> RunResult:
        cfg = self.cfg
        horizon = cfg.sim_time_ms
        self._heap = []
        self._counter = 0
        self.event_log = []
        self.tx_log = []
        self.collisions = 0
        for uid in self.sessions:
            self._schedule_tx(uid, 0)

        while self._heap and self._heap[0][0] < horizon:
            now = self._heap[0][0]
            batch = []
            while self._heap and self._heap[0][0] == now:
                _, _, kind, uid = heapq.heappop(self._heap)
                if kind == "tx":
                    batch.append(uid)
                elif kind == "connect":
                    self._connect(uid, now)
                else:
                    self._retry(uid, now, kind)
            if batch:
                self._transmit(sorted(batch), now)

        return self._result()

    def _push(self, time, kind, uid):
        heapq.heappush(self._heap, (time, self._counter, kind, uid))
        self._counter += 1

    def _schedule_tx(self, uid, earliest):
        s = self.sessions[uid]
        s.state = SessionState.WAITING_OPPORTUNITY
        s.backoff_until = earliest
        self._push(next_opportunity_abs(self.rules[s.serving_cell], earliest - 1), "tx", uid)

    def _transmit(self, uids, now):
        cfg = self.cfg
        txs = []
        for uid in uids:
            s = self.sessions[uid]
            rule = self.rules[s.serving_cell]
            assert is_ra_opportunity(rule, RadioTime.from_absolute(now))
            rng = self.rngs[uid]
            if self.seq_chooser is not None:
                seq = int(self.seq_chooser(uid, s.attempt_no, rng))
            else:
                seq = int(rng.integers(cfg.ra.num_ra_preambles))
            s.chosen_seq = seq
            if s.first_tx_time is None:
                s.first_tx_time = now
            power = preamble_tx_power(cfg.ra, s.attempt_no, self.path_loss[uid, s.serving_cell],
                                      cfg.ue_max_power_dbm)
            tx = PreambleTransmission(uid, s.serving_cell, seq, s.attempt_no, power)
            txs.append(tx)
            self.tx_log.append((now, tx))

        rt = RadioTime.from_absolute(now)
        listening = [c for c in self.sites if is_ra_opportunity(self.rules[c.id], rt)]
        outcome = resolve_opportunity(txs, listening, self.ues, self.model,
                                      threshold_dbm=cfg.threshold_dbm,
                                      capture_margin_db=cfg.capture_margin_db,
                                      path_loss=self.path_loss)
        for (cell, seq), b in sorted(outcome.buckets.items()):
            ids = tuple(sorted(b.collided + ((b.detected,) if b.detected is not None else ())))
            self.event_log.append(EventRecord(now, cell, seq, b.state.value, ids, b.arrivals))
        self.collisions += outcome.collisions

        tl = cfg.timeline
        window_end = now + RAR_WINDOW_OFFSET_SF + cfg.ra.ra_response_window_sf - 1
        for tx in txs:
            s = self.sessions[tx.ue_id]
            rar_ok = RAR_WINDOW_OFFSET_SF <= tl.rar_delay_sf <= window_end - now
            if outcome.detected_at(tx.target_cell_id, tx.preamble_seq, tx.ue_id) and rar_ok:
                msg3 = now + tl.rar_delay_sf + tl.msg3_delay_sf
                if tl.msg4_delay_sf <= cfg.ra.contention_resolution_timer_sf:
                    s.state = SessionState.WAITING_MSG4
                    s.deadline = msg3 + cfg.ra.contention_resolution_timer_sf
                    self._push(msg3 + tl.msg4_delay_sf, "connect", tx.ue_id)
                else:
                    s.state = SessionState.WAITING_MSG4
                    s.deadline = msg3 + cfg.ra.contention_resolution_timer_sf
                    self._push(s.deadline + 1, "cr_expired", tx.ue_id)
            else:
                s.state = SessionState.WAITING_RAR
                s.deadline = window_end
                self._push(window_end + 1, "rar_expired", tx.ue_id)

    def _connect(self, uid, now):
        s = self.sessions[uid]
        s.state = SessionState.CONNECTED
        s.delay_ms = now - s.first_tx_time

    def _retry(self, uid, now, reason):
        s = self.sessions[uid]
        s.attempt_no += 1
        if s.attempt_no > self.cfg.ra.preamble_trans_max:
            s.state = SessionState.FAILED
            s.fail_reason = "max_attempts"
            return
        backoff = int(self.rngs[uid].integers(0, self.cfg.ra.backoff_max_sf + 1))
        self._schedule_tx(uid, now + backoff)

    def _result(self) -> RunResult:
        delays, connected, failed, reasons = [], [], [], {}
        flagged = False
        for uid, s in self.sessions.items():
            if s.state is SessionState.CONNECTED:
                connected.append(uid)
                delays.append(s.delay_ms)
                continue
            if s.state is not SessionState.FAILED:
                s.state = SessionState.FAILED
                s.fail_reason = "timeout"
                flagged = True
            failed.append(uid)
            reasons[uid] = s.fail_reason
        return RunResult(
            scheme=str(self.cfg.scheme), n_cells=self.cfg.n_cells, n_ues=len(self.ues),
            seed=self.seed, collisions=self.collisions, delays_ms=delays,
            connected_ues=connected, failed_ues=failed, fail_reasons=reasons,
            event_log=self.event_log, transmissions=self.tx_log, flagged=flagged)


def run_scenario(cfg: ScenarioConfig, seed: int | None = None, **kwargs) -> RunResult:
    return RandomAccessSimulation(cfg, seed, **kwargs).run()


def percent_decrease(base, new):
    """100 * (base - new) / base, or None when base is not positive or missing."""
    if base is None or new is None or not base > 0:
        return None
    return 100.0 * (base - new) / base


@dataclass(frozen=True)
class SummaryRow:
    scheme: str
    n_cells: int
    n_ues: int
    runs: int
    mean_collisions: float
    min_collisions: int
    max_collisions: int
    mean_median_delay_ms: float | None
    min_median_delay_ms: float | None
    max_median_delay_ms: float | None
    delay_runs: int
    pct_decrease_collisions: float | None
    pct_decrease_delay: float | None


@dataclass
class SummaryReport:
    rows: list

    def get(self, scheme, n_cells, n_ues) -> SummaryRow:
        for r in self.rows:
            if (r.scheme, r.n_cells, r.n_ues) == (str(scheme), n_cells, n_ues):
                return r
        raise KeyError((scheme, n_cells, n_ues))

    def for_scheme(self, scheme, n_cells):
        return sorted((r for r in self.rows if r.scheme == str(scheme) and r.n_cells == n_cells),
                      key=lambda r: r.n_ues)


def aggregate_runs(results, baseline: str = "same") -> SummaryReport:
    """Average per-run metrics over repetitions of each (scheme, n_cells, n_ues).

    ``results`` holds anything with scheme, n_cells, n_ues, collisions and
    delay_median_ms attributes. Runs without a median delay (all UEs failed)
    are left out of the delay mean. Percent decreases compare each scheme to
    ``baseline`` at the same point.
    """
    groups = {}
    for r in results:
        groups.setdefault((str(r.scheme), int(r.n_cells), int(r.n_ues)), []).append(r)
    sizes = {len(g) for g in groups.values()}
    if len(sizes) > 1:
        raise ValueError(f"unequal repetitions across sweep points: {sorted(sizes)}")

    stats = {}
    for key, runs in groups.items():
        cols = [int(r.collisions) for r in runs]
        meds = [r.delay_median_ms for r in runs if r.delay_median_ms is not None]
        stats[key] = (
            len(runs), math.fsum(cols) / len(cols), min(cols), max(cols),
            math.fsum(meds) / len(meds) if meds else None,
            min(meds) if meds else None, max(meds) if meds else None, len(meds))

    rows = []
    for (scheme, n_cells, n_ues), st in stats.items():
        base = stats.get((baseline, n_cells, n_ues))
        if base is None:
            pc = pd = None
        else:
            pc = percent_decrease(base[1], st[1])
            pd = percent_decrease(base[4], st[4])
        rows.append(SummaryRow(scheme, n_cells, n_ues, *st, pc, pd))
    return SummaryReport(rows)
