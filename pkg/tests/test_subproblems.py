import numpy as np
import pytest

from conftest import plant_instance
from lotspeed.generator import GeneratorConfig, ScenarioLevels, build_instance
from lotspeed.lp import LpStatus, solve
from lotspeed.model import check_feasibility, evaluate_objective
from lotspeed.subproblems import build_production_lp, build_speed_lp, extract_solution


def benchmark_instance(seed=0):
    return build_instance(
        GeneratorConfig(levels=ScenarioLevels("T10", "med", "med"), seed=seed)
    )


def v_min_matrix(inst):
    return np.repeat(inst.proc_time_min[:, None], inst.num_periods, axis=1)


class TestBuildSp1:
    def test_column_and_capacity_row_counts(self):
        inst = benchmark_instance()
        lp, vmap = build_production_lp(inst, v_min_matrix(inst))
        # 120 production + 40 end-inventory + 40 WIP columns
        assert lp.num_vars == 200
        assert vmap.num_columns == 200
        cap_rows = [
            (coeffs, rhs)
            for coeffs, rel, rhs in lp.constraints
            if rel == "<=" and rhs == 720.0
        ]
        assert len(cap_rows) == 30  # one per machine and period

    def test_zero_demand_optimum_is_the_offset(self):
        inst = plant_instance(np.zeros((4, 3)))
        v_hat = v_min_matrix(inst)
        lp, vmap = build_production_lp(inst, v_hat)
        out = solve(lp)
        assert out.status is LpStatus.OPTIMAL
        expected = -float(inst.energy_rate @ v_hat.sum(axis=1))
        assert out.objective == pytest.approx(expected, rel=1e-12)
        sol = extract_solution(inst, out, vmap, fixed_v=v_hat)
        assert sol.production.max() == 0.0
        assert sol.end_inventory.max() == 0.0

    def test_single_unit_hand_optimum(self):
        inst = plant_instance([[1.0], [0.0], [0.0], [0.0]])
        v_hat = v_min_matrix(inst)
        lp, vmap = build_production_lp(inst, v_hat)
        out = solve(lp)
        assert out.objective == pytest.approx(2273.402, abs=1e-8)
        sol = extract_solution(inst, out, vmap, fixed_v=v_hat)
        assert sol.production[0, 0, 0] == pytest.approx(1.0, abs=1e-9)
        assert (sol.proc_time == v_hat).all()

    def test_out_of_bounds_v_hat_rejected(self):
        inst = benchmark_instance()
        bad = v_min_matrix(inst)
        bad[0, 0] = 49.0
        with pytest.raises(ValueError):
            build_production_lp(inst, bad)


class TestBuildSp2:
    def test_column_count(self):
        inst = benchmark_instance()
        lp, vmap = build_speed_lp(inst, np.zeros((4, 3, 10)))
        # 30 speed + 80 inventory columns
        assert lp.num_vars == 110

    def test_zero_production_pushes_speeds_to_upper_bound(self):
        inst = plant_instance(np.zeros((4, 2)))
        lp, vmap = build_speed_lp(inst, np.zeros((4, 3, 2)))
        out = solve(lp)
        sol = extract_solution(inst, out, vmap, fixed_y=np.zeros((4, 3, 2)))
        # energy-rated machines maximize processing time; the idle-rate
        # cutter is normalized to its upper bound as well
        assert (sol.proc_time == inst.proc_time_max[:, None]).all()

    def test_full_capacity_forces_fastest_speed(self):
        inst = plant_instance([[12.6], [0.0], [0.0], [0.0]], end_cap=20)
        y_hat = np.zeros((4, 3, 1))
        y_hat[0, 0, 0] = 12.6  # 630 minutes / 50 min-per-unit
        lp, vmap = build_speed_lp(inst, y_hat)
        out = solve(lp)
        sol = extract_solution(inst, out, vmap, fixed_y=y_hat)
        assert sol.proc_time[0, 0] == pytest.approx(50.0, abs=1e-9)

    def test_invalid_y_hat_rejected(self):
        inst = benchmark_instance()
        with pytest.raises(ValueError):
            build_speed_lp(inst, -np.ones((4, 3, 10)))
        too_much = np.zeros((4, 3, 10))
        too_much[0, 0, 0] = inst.demand[0].sum() + 1.0
        with pytest.raises(ValueError):
            build_speed_lp(inst, too_much)

    def test_inventories_match_recursion_from_production(self):
        inst = benchmark_instance(seed=4)
        lp1, map1 = build_production_lp(inst, v_min_matrix(inst))
        sol1 = extract_solution(inst, solve(lp1), map1, fixed_v=v_min_matrix(inst))
        y_hat = sol1.production
        lp2, map2 = build_speed_lp(inst, y_hat)
        sol2 = extract_solution(inst, solve(lp2), map2, fixed_y=y_hat)

        for i in range(inst.num_products):
            stock = 0.0
            for t in range(inst.num_periods):
                stock += y_hat[i, inst.last_machine(i), t] - inst.demand[i, t]
                assert sol2.end_inventory[i, t] == pytest.approx(stock, abs=1e-7)
        for i in inst.wip_products:
            feed, cut = inst.buffered_link(i)
            wip = 0.0
            for t in range(inst.num_periods):
                wip += y_hat[i, feed, t] - y_hat[i, cut, t]
                assert sol2.wip_inventory[i, t] == pytest.approx(wip, abs=1e-7)


class TestExtraction:
    def test_requires_optimal_outcome(self):
        inst = plant_instance([[100.0], [0.0], [0.0], [0.0]])  # hopeless demand
        lp, vmap = build_production_lp(inst, v_min_matrix(inst))
        out = solve(lp)
        assert out.status is LpStatus.INFEASIBLE
        with pytest.raises(ValueError):
            extract_solution(inst, out, vmap, fixed_v=v_min_matrix(inst))

    def test_exactly_one_fixed_block(self):
        inst = plant_instance([[1.0], [0.0], [0.0], [0.0]])
        v_hat = v_min_matrix(inst)
        lp, vmap = build_production_lp(inst, v_hat)
        out = solve(lp)
        with pytest.raises(ValueError):
            extract_solution(inst, out, vmap)
        with pytest.raises(ValueError):
            extract_solution(
                inst, out, vmap, fixed_v=v_hat, fixed_y=np.zeros((4, 3, 1))
            )

    def test_round_trip_feasibility_and_objective_consistency(self):
        for seed in range(5):
            inst = benchmark_instance(seed=seed)
            v_hat = v_min_matrix(inst)
            lp1, map1 = build_production_lp(inst, v_hat)
            out1 = solve(lp1)
            assert out1.status is LpStatus.OPTIMAL
            sol1 = extract_solution(inst, out1, map1, fixed_v=v_hat)
            assert check_feasibility(inst, sol1).is_feasible
            assert evaluate_objective(inst, sol1) == pytest.approx(
                out1.objective, rel=1e-7
            )

            lp2, map2 = build_speed_lp(inst, sol1.production)
            out2 = solve(lp2)
            assert out2.status is LpStatus.OPTIMAL
            sol2 = extract_solution(inst, out2, map2, fixed_y=sol1.production)
            assert check_feasibility(inst, sol2).is_feasible
            assert evaluate_objective(inst, sol2) == pytest.approx(
                out2.objective, rel=1e-7
            )

    def test_strict_flow_round_trip(self):
        inst = benchmark_instance(seed=9)
        v_hat = v_min_matrix(inst)
        lp, vmap = build_production_lp(inst, v_hat, strict_flow=True)
        out = solve(lp)
        assert out.status is LpStatus.OPTIMAL
        sol = extract_solution(inst, out, vmap, fixed_v=v_hat)
        assert check_feasibility(inst, sol, strict_flow=True).is_feasible


class TestIndexMap:
    def test_blocks_are_contiguous_bijections(self):
        inst = benchmark_instance()
        _, vmap = build_production_lp(inst, v_min_matrix(inst))
        cols = set()
        for i in range(4):
            for m in range(3):
                for t in range(10):
                    cols.add(vmap.y_col(i, m, t))
        for i in range(4):
            for t in range(10):
                cols.add(vmap.s_col(i, t))
                cols.add(vmap.u_col(i, t))
        assert cols == set(range(vmap.num_columns))

    def test_speed_columns_only_in_speed_problem(self):
        inst = benchmark_instance()
        _, map1 = build_production_lp(inst, v_min_matrix(inst))
        with pytest.raises(ValueError):
            map1.v_col(0, 0)
        _, map2 = build_speed_lp(inst, np.zeros((4, 3, 10)))
        with pytest.raises(ValueError):
            map2.y_col(0, 0, 0)
