import numpy as np
import pytest

from conftest import plant_instance
from lotspeed.generator import build_instance, toy_config
from lotspeed.heuristic import two_phase
from lotspeed.model import check_feasibility
from lotspeed.oracle import InfeasibleGridError, count_free_cells, grid_search_solve


def pinned_bounds():
    # every machine pinned: the grid collapses to a single point
    return ((50.0, 50.0), (22.2, 22.2), (80.0, 80.0))


def toy_bounds():
    # only the first line free, as in the toy benchmark instances
    return ((50.0, 80.0), (26.6, 26.6), (80.0, 80.0))


def test_budget_enforced_before_work():
    inst = plant_instance(np.zeros((4, 30)))  # 30 free first-line cells and more
    with pytest.raises(ValueError):
        grid_search_solve(inst, 9)


def test_zero_demand_matches_heuristic_exactly():
    inst = plant_instance(np.zeros((4, 2)), proc_time_bounds=toy_bounds())
    best, best_obj = grid_search_solve(inst, 9)
    sol, _ = two_phase(inst)
    expected = -float(inst.energy_rate @ inst.proc_time_max) * 2
    assert best_obj == pytest.approx(expected, rel=1e-12)
    assert sol.objective == pytest.approx(best_obj, rel=1e-12)


def test_degenerate_bounds_equal_single_solve():
    inst = plant_instance([[2.0], [1.0], [3.0], [1.0]],
                          proc_time_bounds=pinned_bounds(), end_cap=12, wip_cap=6)
    assert count_free_cells(inst) == 0
    best, best_obj = grid_search_solve(inst, 9)
    # with all speeds pinned the heuristic's first subproblem is the whole model
    sol, trace = two_phase(inst)
    assert best_obj == pytest.approx(sol.objective, rel=1e-9)


def test_oracle_dominates_heuristic_when_final_speeds_on_grid():
    for seed in (0, 1, 2):
        inst = build_instance(toy_config(seed=seed, num_periods=2))
        best, best_obj = grid_search_solve(inst, 9)
        sol, _ = two_phase(inst)
        # the heuristic's continuous speeds may beat the coarse grid, but
        # never the other way around by more than roundoff
        assert best_obj <= sol.objective + 1e-6


def test_oracle_output_is_feasible():
    inst = build_instance(toy_config(seed=6, num_periods=2, capacity_level="low"))
    best, _ = grid_search_solve(inst, 5)
    assert check_feasibility(inst, best).is_feasible


def test_grid_refinement_never_hurts():
    inst = build_instance(toy_config(seed=3, num_periods=2))
    _, coarse = grid_search_solve(inst, 3)
    _, fine = grid_search_solve(inst, 9)  # 9-point grid nests the 3-point one
    assert fine <= coarse + 1e-9


def test_all_points_infeasible_raises():
    inst = plant_instance([[200.0], [0.0], [0.0], [0.0]],
                          proc_time_bounds=toy_bounds())
    with pytest.raises(InfeasibleGridError):
        grid_search_solve(inst, 3)


def test_invalid_point_count():
    inst = plant_instance(np.zeros((4, 1)))
    with pytest.raises(ValueError):
        grid_search_solve(inst, 0)
