"""Parameter sweeps over UE counts, schemes and repetitions, with CSV I/O."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .engine import RunResult, ScenarioConfig, Scheme, SummaryReport, aggregate_runs, run_scenario

RUNS_COLUMNS = ("run_id", "seed", "scheme", "n_cells", "n_ues", "collisions", "n_failed",
                "delay_median_ms", "delay_mean_ms", "delay_p95_ms")
SUMMARY_COLUMNS = ("scheme", "n_cells", "n_ues", "runs", "mean_collisions", "min_collisions",
                   "max_collisions", "mean_median_delay_ms", "min_median_delay_ms",
                   "max_median_delay_ms", "delay_runs", "pct_decrease_collisions",
                   "pct_decrease_delay")
EVENTS_COLUMNS = ("run_id", "time_sf", "sfn", "subframe", "cell", "seq", "outcome",
                  "n_arrivals", "ue_ids")

DEFAULT_UE_COUNTS = (10, 25, 50, 100, 200, 400)
DEFAULT_CELL_COUNTS = (2, 19)


@dataclass(frozen=True)
class SweepSpec:
    """UE counts x schemes x cell counts, everything else from ``base``.

    ``ue_counts`` are UEs per cell when ``per_cell`` is set, otherwise totals.
    """

    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    ue_counts: tuple = DEFAULT_UE_COUNTS
    schemes: tuple = (Scheme("same"), Scheme("different"))
    cell_counts: tuple = DEFAULT_CELL_COUNTS
    per_cell: bool = True

    def __post_init__(self):
        if not self.ue_counts:
            raise ValueError("ue_counts must not be empty")
        if any(b <= a for a, b in zip(self.ue_counts, self.ue_counts[1:])):
            raise ValueError(f"ue_counts must be strictly increasing: {self.ue_counts}")
        if not self.schemes:
            raise ValueError("schemes must not be empty")
        if not self.cell_counts:
            raise ValueError("cell counts must not be empty")
        object.__setattr__(self, "schemes", tuple(Scheme.parse(s) for s in self.schemes))

    def total_ues(self, n_cells: int, ue_count: int) -> int:
        return ue_count * n_cells if self.per_cell else ue_count

    def jobs(self):
        """(run_id, sweep ue_count, config, seed) in a fixed order."""
        run_id = 0
        for n_cells in self.cell_counts:
            for ue_count in self.ue_counts:
                for scheme in self.schemes:
                    cfg = self.base.replace(n_cells=n_cells, scheme=scheme,
                                            n_ues=self.total_ues(n_cells, ue_count))
                    for rep in range(self.base.repetitions):
                        yield run_id, ue_count, cfg, self.base.seed + rep
                        run_id += 1


@dataclass(frozen=True)
class RunRow:
    """One line of runs.csv. ``n_ues`` is the sweep's UE count."""

    run_id: int
    seed: int
    scheme: str
    n_cells: int
    n_ues: int
    collisions: int
    n_failed: int
    delay_median_ms: float | None
    delay_mean_ms: float | None
    delay_p95_ms: float | None

    @classmethod
    def from_result(cls, run_id: int, ue_count: int, r: RunResult) -> "RunRow":
        return cls(run_id, r.seed, r.scheme, r.n_cells, ue_count, r.collisions, r.n_failed,
                   r.delay_median_ms, r.delay_mean_ms, r.delay_p95_ms)


def _run_job(job):
    run_id, ue_count, cfg, seed = job
    return run_id, ue_count, run_scenario(cfg, seed)


def run_sweep(spec: SweepSpec, jobs: int = 1, keep_results: bool = False):
    """Run every point of the sweep; returns (rows, results or None).

    Runs share nothing, so ``jobs > 1`` farms them out to worker processes;
    output order and content do not depend on ``jobs``.
    """
    work = list(spec.jobs())
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            done = list(ex.map(_run_job, work, chunksize=1))
    else:
        done = [_run_job(j) for j in work]
    rows = [RunRow.from_result(run_id, n, r) for run_id, n, r in done]
    results = [(run_id, r) for run_id, _, r in done] if keep_results else None
    return rows, results


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if not math.isfinite(v):
            return ""
        return repr(v)
    return str(v)


def runs_csv(rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RUNS_COLUMNS)
    for r in rows:
        w.writerow([_cell(getattr(r, c)) for c in RUNS_COLUMNS])
    return out.getvalue()


def _opt_float(text):
    return float(text) if text != "" else None


def read_runs_csv(text) -> list:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(RunRow(int(rec["run_id"]), int(rec["seed"]), rec["scheme"],
                           int(rec["n_cells"]), int(rec["n_ues"]), int(rec["collisions"]),
                           int(rec["n_failed"]), _opt_float(rec["delay_median_ms"]),
                           _opt_float(rec["delay_mean_ms"]), _opt_float(rec["delay_p95_ms"])))
    return rows


def summary_csv(report: SummaryReport, scheme_order=None) -> str:
    order = {str(s): i for i, s in enumerate(scheme_order or [])}
    rows = sorted(report.rows, key=lambda r: (r.n_cells, r.n_ues, order.get(r.scheme, len(order)),
                                              r.scheme))
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([_cell(getattr(r, c)) for c in SUMMARY_COLUMNS])
    return out.getvalue()


def events_csv(results) -> str:
    """Event log rows for ``(run_id, RunResult)`` pairs."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(EVENTS_COLUMNS)
    for run_id, r in results:
        for e in r.event_log:
            frame, sf = divmod(e.time, 10)
            w.writerow([run_id, e.time, frame % 1024, sf, e.cell, e.seq, e.outcome, e.n_arrivals,
                        ";".join(str(u) for u in e.ue_ids)])
    return out.getvalue()


def summarize(rows, schemes) -> str:
    baseline = next((str(s) for s in schemes if Scheme.parse(s).kind == "same"), "same")
    return summary_csv(aggregate_runs(rows, baseline=baseline), schemes)
