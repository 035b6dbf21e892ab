import pytest

from lotspeed.generator import GeneratorConfig, ScenarioLevels, build_instance, enumerate_grid
from lotspeed.heuristic import CycleRecord, HeuristicTrace, two_phase
from lotspeed.reporting import (
    RunRecord,
    capacity_profile,
    descent_holds,
    figure_series,
    run_grid,
    run_one,
    summarize,
    write_summary_csv,
    write_trace_csv,
)


def record(hor, cap, inv, rep, **kw):
    base = dict(
        horizon_level=hor, capacity_level=cap, inventory_level=inv,
        replicate=rep, seed=rep, status="ok", objective=100.0, cycles=2,
        termination="converged", cpu_ms=5.0, s_mean=0.1, u_mean=0.2,
        v1_mean=60.0, feasible=True, descent_ok=True,
    )
    base.update(kw)
    return RunRecord(**base)


def test_summarize_groups_cells_and_averages():
    records = [
        record("T10", "low", "low", 0, objective=100.0, v1_mean=50.0),
        record("T10", "low", "low", 1, objective=200.0, v1_mean=70.0),
        record("T10", "high", "low", 0, objective=50.0),
    ]
    summaries = summarize(records)
    assert len(summaries) == 2
    first = summaries[0]
    assert first.num_runs == 2
    assert first.z_mean == pytest.approx(150.0)
    assert first.v1_mean == pytest.approx(60.0)


def test_summarize_excludes_failed_runs_from_means():
    records = [
        record("T10", "low", "low", 0, objective=100.0),
        record("T10", "low", "low", 1, status="infeasible",
               objective=float("nan"), feasible=False),
    ]
    (summary,) = summarize(records)
    assert summary.num_runs == 2
    assert summary.num_failed == 1
    assert summary.z_mean == pytest.approx(100.0)


def test_grid_of_270_runs_summarizes_to_27_cells():
    configs = enumerate_grid(10)
    assert len(configs) == 270
    records = [
        record(c.levels.horizon_level, c.levels.capacity_level,
               c.levels.inventory_level, c.replicate)
        for c in configs
    ]
    assert len(summarize(records)) == 27


def test_capacity_profile_pools_inventory_levels():
    records = [
        record("T10", "low", inv, rep, v1_mean=v)
        for inv, rep, v in (("low", 0, 50.0), ("med", 0, 60.0), ("high", 0, 70.0))
    ]
    (row,) = capacity_profile(records)
    assert row["v1_mean"] == pytest.approx(60.0)
    assert row["num_runs"] == 3
    assert row["capacity_minutes"] == 630.0


def test_descent_holds_flags_increases():
    good = HeuristicTrace(cycles=[
        CycleRecord(10.0, 8.0, float("inf"), 0.0),
        CycleRecord(8.0, 8.0, 0.0, 0.0),
    ])
    bad = HeuristicTrace(cycles=[
        CycleRecord(10.0, 8.0, float("inf"), 0.0),
        CycleRecord(9.0, 8.5, 0.0, 0.0),
    ])
    assert descent_holds(good)
    assert not descent_holds(bad)


def test_run_one_records_infeasible_instead_of_raising():
    config = GeneratorConfig(
        levels=ScenarioLevels("T10", "low", "low"),
        seed=0,
        demand_bounds=(5000, 5000),  # hopeless demand
    )
    rec, sol, trace = run_one(config)
    assert rec.status == "infeasible"
    assert sol is None
    assert rec.termination == "subproblem_infeasible"
    assert "fastest" in rec.message


def test_figure_series_matches_solution():
    config = GeneratorConfig(levels=ScenarioLevels("T10", "med", "med"), seed=14)
    instance = build_instance(config)
    solution, _ = two_phase(instance)
    series = figure_series(instance, solution)
    assert len(series) == instance.num_periods
    assert [row["period"] for row in series] == list(range(1, 11))
    total_demand = sum(row["demand_total"] for row in series)
    assert total_demand == pytest.approx(float(instance.demand.sum()))
    for t, row in enumerate(series):
        assert row["proc_time_m1"] == pytest.approx(solution.proc_time[0, t])
        finished = sum(
            solution.production[i, instance.last_machine(i), t]
            for i in range(instance.num_products)
        )
        assert row["production_total"] == pytest.approx(finished)


def test_timestamp_header_suppressible(tmp_path):
    records = [record("T10", "low", "low", 0)]
    summaries = summarize(records)
    stamped = tmp_path / "stamped.csv"
    bare = tmp_path / "bare.csv"
    write_summary_csv(stamped, summaries, timestamp=True)
    write_summary_csv(bare, summaries, timestamp=False)
    assert any(ln.startswith("# generated") for ln in stamped.read_text().splitlines())
    assert not any(ln.startswith("# generated") for ln in bare.read_text().splitlines())


def test_trace_csv_columns(tmp_path):
    trace = HeuristicTrace(
        cycles=[CycleRecord(10.0, 9.0, float("inf"), 0.01)],
        termination="converged",
    )
    path = tmp_path / "trace.csv"
    write_trace_csv(path, trace, timestamp=False)
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    assert lines[0] == "cycle,production_objective,speed_objective,max_rel_change,seconds"
    assert lines[1].startswith("1,10,9,inf,")


def test_parallel_grid_matches_serial():
    configs = enumerate_grid(1)[:6]
    serial_records, serial_solutions = run_grid(configs, workers=1)
    parallel_records, parallel_solutions = run_grid(configs, workers=2)
    for a, b in zip(serial_records, parallel_records):
        assert a.cell == b.cell
        assert a.objective == b.objective
        assert a.cycles == b.cycles
    for sa, sb in zip(serial_solutions, parallel_solutions):
        assert (sa.production == sb.production).all()
        assert (sa.proc_time == sb.proc_time).all()
