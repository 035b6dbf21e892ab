import numpy as np
import pytest

from lotspeed.generator import (
    CAPACITY_MINUTES,
    DEMAND_BOUNDS,
    GeneratorConfig,
    HORIZON_PERIODS,
    INVENTORY_CAPS,
    ScenarioLevels,
    build_instance,
    demand_seed,
    enumerate_grid,
    generate_demand,
    toy_config,
)


class TestLevels:
    def test_level_tables(self):
        assert HORIZON_PERIODS == {"T10": 10, "T20": 20, "T30": 30}
        assert CAPACITY_MINUTES == {"low": 630.0, "med": 720.0, "high": 810.0}
        assert INVENTORY_CAPS == {
            "low": (6.0, 3.0),
            "med": (12.0, 6.0),
            "high": (18.0, 9.0),
        }
        assert DEMAND_BOUNDS == {
            "T10": (80, 120),
            "T20": (180, 250),
            "T30": (290, 350),
        }

    def test_unknown_levels_rejected(self):
        with pytest.raises(ValueError):
            ScenarioLevels("T15", "med", "med")
        with pytest.raises(ValueError):
            ScenarioLevels("T10", "huge", "med")


class TestDemand:
    def test_empty_bounds_give_zero_matrix(self):
        cfg = GeneratorConfig(seed=5, demand_bounds=(0, 0))
        assert generate_demand(cfg).sum() == 0

    def test_totals_within_horizon_band(self):
        for seed in range(200):
            cfg = GeneratorConfig(levels=ScenarioLevels("T10", "med", "med"), seed=seed)
            total = generate_demand(cfg).sum()
            assert 80 <= total <= 120

    def test_shares_exact_for_round_totals(self):
        cfg = GeneratorConfig(seed=17, demand_bounds=(100, 100))
        d = generate_demand(cfg)
        assert d.sum() == 100
        assert tuple(d.sum(axis=1)) == (16, 4, 64, 16)

    def test_largest_remainder_keeps_total(self):
        for total in (1, 3, 7, 97, 113, 250):
            cfg = GeneratorConfig(seed=1, demand_bounds=(total, total))
            d = generate_demand(cfg)
            assert d.sum() == total

    def test_entries_are_nonnegative_integers(self):
        cfg = GeneratorConfig(levels=ScenarioLevels("T30", "low", "low"), seed=99)
        d = generate_demand(cfg)
        assert d.dtype.kind == "i"
        assert (d >= 0).all()

    def test_determinism(self):
        cfg = GeneratorConfig(levels=ScenarioLevels("T20", "med", "med"), seed=123)
        assert (generate_demand(cfg) == generate_demand(cfg)).all()

    def test_empirical_shares_converge(self):
        totals = np.zeros(4)
        for seed in range(2000):
            cfg = GeneratorConfig(levels=ScenarioLevels("T10", "med", "med"), seed=seed)
            totals += generate_demand(cfg).sum(axis=1)
        shares = totals / totals.sum()
        assert shares == pytest.approx((0.16, 0.04, 0.64, 0.16), abs=0.02)


class TestInstanceConstruction:
    def test_routing_matches_plant(self):
        inst = build_instance(GeneratorConfig(seed=0))
        assert inst.route[2, 1] == 1  # chemical cylinder runs on the second line
        assert inst.route[2, 2] == 0  # and skips the cutter
        assert inst.sequence == ((0,), (0, 2), (0, 1), (0, 1, 2))

    def test_cost_block(self):
        inst = build_instance(GeneratorConfig(seed=0))
        assert tuple(inst.vao_cost) == (2400.0, 5400.0, 1000.0)
        assert tuple(inst.transport_cost) == (100.0, 120.0, 120.0, 140.0)
        assert tuple(inst.end_hold_cost) == (300.0, 150.0, 300.0, 150.0)
        assert tuple(inst.wip_hold_cost) == (0.0, 50.0, 0.0, 50.0)
        assert tuple(inst.energy_rate) == (1.16, 3.09, 0.0)
        assert inst.unit_length == 400.0

    def test_capacity_level_constant_across_periods(self):
        inst = build_instance(
            GeneratorConfig(levels=ScenarioLevels("T10", "low", "med"), seed=1)
        )
        assert (inst.capacity == 630.0).all()

    def test_inventory_caps_follow_level(self):
        inst = build_instance(
            GeneratorConfig(levels=ScenarioLevels("T10", "med", "high"), seed=1)
        )
        assert (inst.end_inv_cap, inst.wip_inv_cap) == (18.0, 9.0)

    def test_same_seed_same_instance(self):
        cfg = GeneratorConfig(levels=ScenarioLevels("T20", "high", "low"), seed=77)
        a, b = build_instance(cfg), build_instance(cfg)
        assert (a.demand == b.demand).all()
        assert (a.capacity == b.capacity).all()

    def test_share_validation(self):
        with pytest.raises(ValueError):
            GeneratorConfig(product_shares=(0.5, 0.5, 0.1, 0.1))


class TestGrid:
    def test_lattice_sizes(self):
        assert len(enumerate_grid(10)) == 270
        assert len(enumerate_grid(1)) == 27
        with pytest.raises(ValueError):
            enumerate_grid(0)

    def test_demand_shared_across_capacity_and_inventory_cells(self):
        configs = enumerate_grid(2)
        by_key = {
            (c.levels.horizon_level, c.levels.capacity_level,
             c.levels.inventory_level, c.replicate): c
            for c in configs
        }
        base = generate_demand(by_key[("T10", "low", "low", 1)])
        for cap in ("low", "med", "high"):
            for inv in ("low", "med", "high"):
                other = generate_demand(by_key[("T10", cap, inv, 1)])
                assert (other == base).all()

    def test_redraw_mode_gives_distinct_seeds(self):
        configs = enumerate_grid(1, share_demand_across_cells=False)
        seeds = {c.seed for c in configs}
        assert len(seeds) == len(configs)

    def test_seed_function_is_collision_free_for_grid_ranges(self):
        seen = set()
        for h in range(3):
            for c in range(3):
                for i in range(3):
                    for rep in range(50):
                        seen.add(demand_seed(1, h, c, i, rep, share_across_cells=False))
        assert len(seen) == 3 * 3 * 3 * 50


class TestToys:
    def test_only_first_line_is_free(self):
        inst = build_instance(toy_config(seed=4, num_periods=2))
        free = inst.proc_time_min < inst.proc_time_max
        assert list(free) == [True, False, False]
        assert inst.num_periods == 2

    def test_demand_scales_with_horizon(self):
        for T in (1, 2, 3):
            d = generate_demand(toy_config(seed=11, num_periods=T))
            assert 8 * T <= d.sum() <= 12 * T
