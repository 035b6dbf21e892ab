"""Benchmark execution, per-cell aggregation and delimited report files.

A grid run executes every scenario config, records one detail row per run
(objective, cycle count, wall time of the solve call only, inventory and
speed averages) and aggregates replicates into one summary row per lattice
cell. Summary columns follow the order horizon, capacity, inventory level,
mean objective, mean CPU ms, mean cycles, mean end inventory, mean WIP,
mean first-line processing time.

Averaging conventions (also stated in the CSV headers): ``s_mean`` and
``u_mean`` average over all product-period cells and replicates;
``v1_mean`` averages machine 0's processing time over periods and
replicates. Reports are deterministic given the seeds except for the CPU
columns and the optional timestamp header line.
"""

from __future__ import annotations

import concurrent.futures
import csv
import datetime
import io
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .generator import (
    CAPACITY_MINUTES,
    GeneratorConfig,
    HORIZON_PERIODS,
    build_instance,
)
from .heuristic import (
    HeuristicConfig,
    HeuristicTrace,
    InfeasibleInstanceError,
    two_phase,
)
from .lp import SolverFailure
from .model import Instance, Solution, check_feasibility

__all__ = [
    "RunRecord",
    "CellSummary",
    "run_one",
    "run_grid",
    "summarize",
    "figure_series",
    "capacity_profile",
    "write_summary_csv",
    "write_runs_csv",
    "write_grid_listing_csv",
    "write_series_csv",
    "write_capacity_profile_csv",
    "write_trace_csv",
]

STATUS_OK = "ok"
STATUS_INFEASIBLE = "infeasible"
STATUS_SOLVER_FAILURE = "solver_failure"

_DESCENT_SLACK = 1e-7


@dataclass(frozen=True)
class RunRecord:
    """One grid run: identification, outcome and solution statistics."""

    horizon_level: str
    capacity_level: str
    inventory_level: str
    replicate: int
    seed: int
    status: str
    objective: float = float("nan")
    cycles: int = 0
    termination: str = ""
    cpu_ms: float = float("nan")
    s_mean: float = float("nan")
    u_mean: float = float("nan")
    v1_mean: float = float("nan")
    feasible: bool = False
    descent_ok: bool = False
    message: str = ""

    @property
    def cell(self) -> tuple[str, str, str]:
        return (self.horizon_level, self.capacity_level, self.inventory_level)


@dataclass(frozen=True)
class CellSummary:
    """Replicate averages for one lattice cell."""

    horizon_level: str
    capacity_level: str
    inventory_level: str
    num_runs: int
    num_failed: int
    z_mean: float
    cpu_ms_mean: float
    cycles_mean: float
    s_mean: float
    u_mean: float
    v1_mean: float


def descent_holds(trace: HeuristicTrace, slack: float = _DESCENT_SLACK) -> bool:
    """True when the recorded objective sequence never increases."""
    seq = trace.objective_sequence
    return all(
        later <= earlier + slack * (1.0 + abs(earlier))
        for earlier, later in zip(seq, seq[1:])
    )


def run_one(
    config: GeneratorConfig,
    heuristic: HeuristicConfig | None = None,
) -> tuple[RunRecord, Solution | None, HeuristicTrace | None]:
    """Solve one scenario; failures become records, never exceptions.

    The CPU measurement covers the two_phase call only, not instance
    generation or any file writing.
    """
    heuristic = heuristic or HeuristicConfig()
    instance = build_instance(config)
    ident = dict(
        horizon_level=config.levels.horizon_level,
        capacity_level=config.levels.capacity_level,
        inventory_level=config.levels.inventory_level,
        replicate=config.replicate,
        seed=config.seed,
    )
    started = time.perf_counter()
    try:
        solution, trace = two_phase(instance, heuristic)
    except InfeasibleInstanceError as exc:
        record = RunRecord(
            **ident,
            status=STATUS_INFEASIBLE,
            termination=exc.trace.termination,
            cycles=exc.trace.cycle_count,
            cpu_ms=(time.perf_counter() - started) * 1e3,
            message=str(exc),
        )
        return record, None, exc.trace
    except SolverFailure as exc:
        record = RunRecord(
            **ident,
            status=STATUS_SOLVER_FAILURE,
            cpu_ms=(time.perf_counter() - started) * 1e3,
            message=str(exc),
        )
        return record, None, None
    cpu_ms = (time.perf_counter() - started) * 1e3

    report = check_feasibility(instance, solution)
    record = RunRecord(
        **ident,
        status=STATUS_OK,
        objective=solution.objective,
        cycles=trace.cycle_count,
        termination=trace.termination,
        cpu_ms=cpu_ms,
        s_mean=float(solution.end_inventory.mean()),
        u_mean=float(solution.wip_inventory.mean()),
        v1_mean=float(solution.proc_time[0].mean()),
        feasible=report.is_feasible,
        descent_ok=descent_holds(trace),
        message="" if report.is_feasible else report.summary(),
    )
    return record, solution, trace


def _worker(args) -> tuple[RunRecord, Solution | None]:
    config, heuristic = args
    record, solution, _ = run_one(config, heuristic)
    return record, solution


def run_grid(
    configs: list[GeneratorConfig],
    heuristic: HeuristicConfig | None = None,
    workers: int = 1,
) -> tuple[list[RunRecord], list[Solution | None]]:
    """Execute every config; results come back in config order regardless of
    worker count, so aggregation is deterministic."""
    heuristic = heuristic or HeuristicConfig()
    if workers <= 1 or len(configs) <= 1:
        results = [_worker((cfg, heuristic)) for cfg in configs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, ((cfg, heuristic) for cfg in configs)))
    records = [rec for rec, _ in results]
    solutions = [sol for _, sol in results]
    return records, solutions


def summarize(records: list[RunRecord]) -> list[CellSummary]:
    """Aggregate per-run rows into one row per cell (first-seen cell order)."""
    order: list[tuple[str, str, str]] = []
    grouped: dict[tuple[str, str, str], list[RunRecord]] = {}
    for rec in records:
        if rec.cell not in grouped:
            grouped[rec.cell] = []
            order.append(rec.cell)
        grouped[rec.cell].append(rec)

    out = []
    for cell in order:
        rows = grouped[cell]
        ok = [r for r in rows if r.status == STATUS_OK]

        def mean(field):
            return float(np.mean([getattr(r, field) for r in ok])) if ok else float("nan")
        out.append(
            CellSummary(
                horizon_level=cell[0],
                capacity_level=cell[1],
                inventory_level=cell[2],
                num_runs=len(rows),
                num_failed=len(rows) - len(ok),
                z_mean=mean("objective"),
                cpu_ms_mean=mean("cpu_ms"),
                cycles_mean=mean("cycles"),
                s_mean=mean("s_mean"),
                u_mean=mean("u_mean"),
                v1_mean=mean("v1_mean"),
            )
        )
    return out


def figure_series(instance: Instance, solution: Solution) -> list[dict]:
    """Per-period plot-ready records for one solved instance.

    Columns: period, total demand, first-line processing time, total
    finished production (each product counted on its last machine), total
    end-item inventory and total WIP at period end.
    """
    finished = np.zeros(instance.num_periods)
    for i in range(instance.num_products):
        finished += solution.production[i, instance.last_machine(i)]
    rows = []
    for t in range(instance.num_periods):
        rows.append(
            {
                "period": t + 1,
                "demand_total": float(instance.demand[:, t].sum()),
                "proc_time_m1": float(solution.proc_time[0, t]),
                "production_total": float(finished[t]),
                "end_inventory_total": float(solution.end_inventory[:, t].sum()),
                "wip_total": float(solution.wip_inventory[:, t].sum()),
            }
        )
    return rows


def capacity_profile(records: list[RunRecord]) -> list[dict]:
    """Mean first-line processing time per (horizon, capacity) level.

    The averages behind the capacity-trend chart: inventory levels and
    replicates of a horizon/capacity pair are pooled.
    """
    order: list[tuple[str, str]] = []
    grouped: dict[tuple[str, str], list[float]] = {}
    for rec in records:
        if rec.status != STATUS_OK:
            continue
        key = (rec.horizon_level, rec.capacity_level)
        if key not in grouped:
            grouped[key] = []
            order.append(key)
        grouped[key].append(rec.v1_mean)
    return [
        {
            "horizon_level": hor,
            "num_periods": HORIZON_PERIODS[hor],
            "capacity_level": cap,
            "capacity_minutes": CAPACITY_MINUTES[cap],
            "v1_mean": float(np.mean(grouped[(hor, cap)])),
            "num_runs": len(grouped[(hor, cap)]),
        }
        for hor, cap in order
    ]


# -- CSV output ----------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _write_csv(
    path: str | Path,
    header: list[str],
    rows: list[list],
    comments: list[str],
    timestamp: bool,
) -> None:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    if timestamp:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        buf.write(f"# generated {stamp}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def write_summary_csv(
    path: str | Path, summaries: list[CellSummary], timestamp: bool = True
) -> None:
    rows = [
        [
            HORIZON_PERIODS[s.horizon_level],
            CAPACITY_MINUTES[s.capacity_level],
            s.inventory_level,
            s.z_mean,
            s.cpu_ms_mean,
            s.cycles_mean,
            s.s_mean,
            s.u_mean,
            s.v1_mean,
            s.num_runs,
            s.num_failed,
        ]
        for s in summaries
    ]
    _write_csv(
        path,
        [
            "T",
            "m_t",
            "inventory",
            "z_mean",
            "cpu_ms_mean",
            "cycles_mean",
            "s_mean",
            "u_mean",
            "v1_mean",
            "num_runs",
            "num_failed",
        ],
        rows,
        comments=[
            "cell summaries of the scenario grid, one row per cell",
            "s_mean/u_mean: mean inventory over all product-period cells and replicates",
            "v1_mean: mean machine-1 processing time over periods and replicates",
        ],
        timestamp=timestamp,
    )


def write_runs_csv(
    path: str | Path, records: list[RunRecord], timestamp: bool = True
) -> None:
    rows = [
        [
            HORIZON_PERIODS[r.horizon_level],
            CAPACITY_MINUTES[r.capacity_level],
            r.inventory_level,
            r.replicate,
            r.seed,
            r.status,
            r.objective,
            r.cycles,
            r.termination,
            r.cpu_ms,
            r.s_mean,
            r.u_mean,
            r.v1_mean,
            int(r.feasible),
            int(r.descent_ok),
            r.message,
        ]
        for r in records
    ]
    _write_csv(
        path,
        [
            "T",
            "m_t",
            "inventory",
            "replicate",
            "seed",
            "status",
            "objective",
            "cycles",
            "termination",
            "cpu_ms",
            "s_mean",
            "u_mean",
            "v1_mean",
            "feasible",
            "descent_ok",
            "message",
        ],
        rows,
        comments=["per-run detail rows of the scenario grid"],
        timestamp=timestamp,
    )


def write_grid_listing_csv(
    path: str | Path, configs: list[GeneratorConfig], timestamp: bool = True
) -> None:
    rows = [
        [
            c.levels.horizon_level,
            c.levels.capacity_level,
            c.levels.inventory_level,
            c.replicate,
            c.seed,
        ]
        for c in configs
    ]
    _write_csv(
        path,
        ["horizon", "capacity", "inventory", "replicate", "seed"],
        rows,
        comments=["scenario lattice listing: cell coordinates and demand seed"],
        timestamp=timestamp,
    )


def write_series_csv(path: str | Path, rows: list[dict], timestamp: bool = True) -> None:
    header = [
        "period",
        "demand_total",
        "proc_time_m1",
        "production_total",
        "end_inventory_total",
        "wip_total",
    ]
    _write_csv(
        path,
        header,
        [[row[k] for k in header] for row in rows],
        comments=["per-period series of one solved instance"],
        timestamp=timestamp,
    )


def write_capacity_profile_csv(
    path: str | Path, rows: list[dict], timestamp: bool = True
) -> None:
    header = [
        "horizon_level",
        "num_periods",
        "capacity_level",
        "capacity_minutes",
        "v1_mean",
        "num_runs",
    ]
    _write_csv(
        path,
        header,
        [[row[k] for k in header] for row in rows],
        comments=["mean machine-1 processing time per horizon and capacity level"],
        timestamp=timestamp,
    )


def write_trace_csv(path: str | Path, trace: HeuristicTrace, timestamp: bool = True) -> None:
    header = ["cycle", "production_objective", "speed_objective", "max_rel_change", "seconds"]
    _write_csv(
        path,
        header,
        [[row[k] for k in header] for row in trace.rows()],
        comments=[f"alternating-loop trace; termination: {trace.termination}"],
        timestamp=timestamp,
    )
