"""Command-line interface.

Verbs:

* ``solve``          solve one instance (from file or generated) and write
                     the solution, trace and feasibility outcome;
* ``grid``           run the full scenario lattice and write summary /
                     detail / profile CSVs plus rendered charts;
* ``figures``        emit per-period plot data (CSV + PNG) for one instance;
* ``oracle-compare`` compare the alternating heuristic against the
                     brute-force speed-grid baseline on toy instances.

Exit codes: 0 success, 2 unreadable or malformed input, 3 infeasible model,
4 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .generator import (
    CAPACITY_LEVELS,
    DEFAULT_BASE_SEED,
    GeneratorConfig,
    HORIZON_LEVELS,
    INVENTORY_LEVELS,
    ScenarioLevels,
    build_instance,
    enumerate_grid,
    toy_config,
)
from .heuristic import HeuristicConfig, InfeasibleInstanceError, two_phase
from .lp import SolverFailure
from .model import (
    check_feasibility,
    instance_from_json,
    instance_to_json,
    solution_from_json,
    solution_to_json,
)
from .oracle import InfeasibleGridError, grid_search_solve
from .reporting import (
    capacity_profile,
    figure_series,
    run_grid,
    summarize,
    write_capacity_profile_csv,
    write_grid_listing_csv,
    write_runs_csv,
    write_series_csv,
    write_summary_csv,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lotspeed",
        description="lot sizing and machine speed planning for a felt-mill flow shop",
    )
    parser.add_argument("--version", action="version", version=f"lotspeed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_instance_source(p: argparse.ArgumentParser) -> None:
        p.add_argument("--instance", type=Path, help="instance JSON file")
        p.add_argument("--horizon", choices=HORIZON_LEVELS, default="T10",
                       help="horizon level of a generated instance")
        p.add_argument("--capacity", choices=CAPACITY_LEVELS, default="med")
        p.add_argument("--inventory", choices=INVENTORY_LEVELS, default="med")
        p.add_argument("--seed", type=int, default=DEFAULT_BASE_SEED,
                       help="demand seed of a generated instance")

    def add_heuristic_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--eps", type=float, default=1e-6,
                       help="relative convergence tolerance")
        p.add_argument("--max-iter", type=int, default=100,
                       help="cycle cap of the alternating loop")
        p.add_argument("--strict-flow", action="store_true",
                       help="force rigid links to balance in every period, "
                            "not just in horizon totals")

    def add_output_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out-dir", type=Path, default=Path("out"))
        p.add_argument("--no-timestamp", action="store_true",
                       help="suppress the generated-at header line in CSVs")
        p.add_argument("--no-plots", action="store_true",
                       help="write only delimited data, no PNG charts")

    p_solve = sub.add_parser("solve", help="solve one instance")
    add_instance_source(p_solve)
    add_heuristic_flags(p_solve)
    add_output_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_grid = sub.add_parser("grid", help="run the scenario lattice")
    p_grid.add_argument("--seeds-per-cell", type=int, default=10)
    p_grid.add_argument("--base-seed", type=int, default=DEFAULT_BASE_SEED)
    p_grid.add_argument("--seeds", type=str, default=None,
                        help="comma-separated replicate seeds, overriding "
                             "--seeds-per-cell/--base-seed")
    p_grid.add_argument("--redraw-per-cell", action="store_true",
                        help="draw fresh demand per cell instead of sharing "
                             "draws across the cells of a horizon")
    p_grid.add_argument("--workers", type=int, default=1,
                        help="parallel worker processes")
    p_grid.add_argument("--save-solutions", action="store_true",
                        help="write every run's solution JSON")
    add_heuristic_flags(p_grid)
    add_output_flags(p_grid)
    p_grid.set_defaults(func=cmd_grid)

    p_fig = sub.add_parser("figures", help="emit per-period figure data")
    add_instance_source(p_fig)
    p_fig.add_argument("--solution", type=Path,
                       help="reuse a saved solution instead of solving")
    add_heuristic_flags(p_fig)
    add_output_flags(p_fig)
    p_fig.set_defaults(func=cmd_figures)

    p_cmp = sub.add_parser("oracle-compare",
                           help="heuristic vs. brute-force baseline on toys")
    p_cmp.add_argument("--instances", type=int, default=20)
    p_cmp.add_argument("--points", type=int, default=9,
                       help="grid points per free speed cell")
    p_cmp.add_argument("--periods", type=int, default=0,
                       help="toy horizon length; 0 cycles through 1..3")
    p_cmp.add_argument("--seed-base", type=int, default=DEFAULT_BASE_SEED)
    add_heuristic_flags(p_cmp)
    add_output_flags(p_cmp)
    p_cmp.set_defaults(func=cmd_oracle_compare)

    return parser


def _resolve_instance(args) -> tuple:
    """Instance plus (config, label) when generated, (None, stem) when loaded."""
    if args.instance is not None:
        try:
            text = args.instance.read_text()
        except OSError as exc:
            raise ValueError(f"cannot read {args.instance}: {exc}") from exc
        return instance_from_json(text), None, args.instance.stem
    config = GeneratorConfig(
        levels=ScenarioLevels(args.horizon, args.capacity, args.inventory),
        seed=args.seed,
    )
    label = f"{args.horizon}_{args.capacity}_{args.inventory}_seed{args.seed}"
    return build_instance(config), config, label


def _heuristic_config(args) -> HeuristicConfig:
    return HeuristicConfig(
        eps=args.eps, max_iter=args.max_iter, strict_flow=args.strict_flow
    )


def cmd_solve(args) -> int:
    instance, config, label = _resolve_instance(args)
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    solution, trace = two_phase(instance, _heuristic_config(args))
    report = check_feasibility(instance, solution, strict_flow=args.strict_flow)

    (out_dir / "solution.json").write_text(solution_to_json(solution) + "\n")
    write_trace_csv(out_dir / "trace.csv", trace, timestamp=not args.no_timestamp)
    feas_lines = [report.summary()]
    feas_lines += [
        f"{v.constraint_id} at {v.index}: {v.amount:.6g}" for v in report.violations
    ]
    (out_dir / "feasibility.txt").write_text("\n".join(feas_lines) + "\n")
    if config is not None:
        (out_dir / "instance.json").write_text(instance_to_json(instance) + "\n")

    print(f"instance    {label}")
    print(f"objective   {solution.objective:.6f}")
    print(f"cycles      {trace.cycle_count} ({trace.termination})")
    print(f"feasibility {report.summary()}")
    print(f"outputs     {out_dir}/solution.json, trace.csv, feasibility.txt")
    if not report.is_feasible:
        print("error: returned plan failed the feasibility sweep", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_grid(args) -> int:
    if args.seeds_per_cell < 1:
        raise ValueError("--seeds-per-cell must be at least 1")
    replicate_seeds = None
    if args.seeds:
        try:
            replicate_seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        except ValueError as exc:
            raise ValueError(f"--seeds must be comma-separated integers: {exc}") from exc
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    configs = enumerate_grid(
        args.seeds_per_cell,
        base_seed=args.base_seed,
        share_demand_across_cells=not args.redraw_per_cell,
        replicate_seeds=replicate_seeds,
    )
    records, solutions = run_grid(configs, _heuristic_config(args), workers=args.workers)
    summaries = summarize(records)
    stamp = not args.no_timestamp

    write_summary_csv(out_dir / "summary.csv", summaries, timestamp=stamp)
    write_runs_csv(out_dir / "runs.csv", records, timestamp=stamp)
    write_grid_listing_csv(out_dir / "grid_cells.csv", configs, timestamp=stamp)
    profile = capacity_profile(records)
    write_capacity_profile_csv(out_dir / "capacity_profile.csv", profile, timestamp=stamp)
    if not args.no_plots and profile:
        from .plots import save_capacity_profile_png

        save_capacity_profile_png(profile, out_dir / "capacity_profile.png")

    if args.save_solutions:
        sol_dir = out_dir / "solutions"
        sol_dir.mkdir(exist_ok=True)
        for rec, sol in zip(records, solutions):
            if sol is None:
                continue
            name = (
                f"{rec.horizon_level}_{rec.capacity_level}_{rec.inventory_level}"
                f"_rep{rec.replicate}.json"
            )
            (sol_dir / name).write_text(solution_to_json(sol) + "\n")

    failed = [r for r in records if r.status != "ok"]
    print(f"runs        {len(records)} ({len(failed)} failed)")
    print(f"cells       {len(summaries)}")
    print(f"outputs     {out_dir}/summary.csv, runs.csv, grid_cells.csv, capacity_profile.csv")
    for rec in failed:
        print(f"warning: {rec.cell} replicate {rec.replicate}: "
              f"{rec.status} ({rec.message})", file=sys.stderr)
    return EXIT_OK


def cmd_figures(args) -> int:
    instance, config, label = _resolve_instance(args)
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.solution is not None:
        try:
            solution = solution_from_json(args.solution.read_text())
        except OSError as exc:
            raise ValueError(f"cannot read {args.solution}: {exc}") from exc
    else:
        solution, _ = two_phase(instance, _heuristic_config(args))
    report = check_feasibility(instance, solution, strict_flow=args.strict_flow)
    if not report.is_feasible:
        raise ValueError(f"solution is infeasible for this instance: {report.summary()}")

    series = figure_series(instance, solution)
    stamp = not args.no_timestamp
    write_series_csv(out_dir / "series.csv", series, timestamp=stamp)

    profile_row = {
        "horizon_level": f"T{instance.num_periods}",
        "num_periods": instance.num_periods,
        "capacity_level": config.levels.capacity_level if config else "custom",
        "capacity_minutes": float(instance.capacity[0]),
        "v1_mean": float(solution.proc_time[0].mean()),
        "num_runs": 1,
    }
    write_capacity_profile_csv(
        out_dir / "capacity_profile.csv", [profile_row], timestamp=stamp
    )
    if not args.no_plots:
        from .plots import save_production_inventory_png, save_speed_demand_png

        save_speed_demand_png(series, out_dir / "speed_demand.png", title=label)
        save_production_inventory_png(
            series, out_dir / "production_inventory.png", title=label
        )
    print(f"series      {out_dir}/series.csv ({len(series)} periods)")
    return EXIT_OK


def cmd_oracle_compare(args) -> int:
    if args.instances < 1:
        raise ValueError("--instances must be at least 1")
    if args.periods not in (0, 1, 2, 3):
        raise ValueError("--periods must be 0 (cycle) or 1..3; larger toys blow "
                         "the brute-force budget")
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    heuristic = _heuristic_config(args)

    rows = []
    worst_gap = 0.0
    for k in range(args.instances):
        periods = args.periods or (k % 3) + 1
        cap = CAPACITY_LEVELS[k % len(CAPACITY_LEVELS)]
        config = toy_config(args.seed_base + k, num_periods=periods, capacity_level=cap)
        instance = build_instance(config)
        solution, trace = two_phase(instance, heuristic)
        baseline, base_obj = grid_search_solve(
            instance, args.points, strict_flow=args.strict_flow
        )
        gap = (solution.objective - base_obj) / max(abs(base_obj), 1.0)
        worst_gap = max(worst_gap, gap)
        rows.append(
            {
                "seed": config.seed,
                "periods": periods,
                "capacity_level": cap,
                "heuristic_objective": solution.objective,
                "oracle_objective": base_obj,
                "gap": gap,
                "cycles": trace.cycle_count,
            }
        )

    header = list(rows[0].keys())
    from .reporting import _write_csv

    _write_csv(
        out_dir / "oracle_compare.csv",
        header,
        [[row[k] for k in header] for row in rows],
        comments=["alternating heuristic vs. exhaustive speed-grid baseline"],
        timestamp=not args.no_timestamp,
    )
    for row in rows:
        print(
            f"seed {row['seed']}  T={row['periods']}  cap={row['capacity_level']:<4} "
            f"heuristic {row['heuristic_objective']:.3f}  "
            f"oracle {row['oracle_objective']:.3f}  gap {row['gap']:+.2%}"
        )
    print(f"worst gap   {worst_gap:+.2%} over {len(rows)} instances")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleInstanceError, InfeasibleGridError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
