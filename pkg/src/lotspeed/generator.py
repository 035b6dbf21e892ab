"""Seeded instance generation and the benchmark scenario lattice.

Instances mirror a four-product felt plant: two production lines feeding a
cutting machine, with plant-wide cost rates gathered from the reference
factory. A scenario is a point on the lattice

    horizon {10, 20, 30 periods} x capacity {630, 720, 810 min}
    x inventory caps {(6,3), (12,6), (18,9)}

with a seeded random demand draw. Total demand for a horizon is drawn
uniformly from that horizon's band, split across products by fixed market
shares (largest-remainder rounding keeps the split integral), and each unit
lands in a uniformly random period. All randomness flows through
``numpy.random.default_rng`` (PCG64) seeded per draw, so instances are
reproducible from their seed alone.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import Instance

__all__ = [
    "PlantParams",
    "ScenarioLevels",
    "GeneratorConfig",
    "FELT_PLANT",
    "PRODUCT_SHARES",
    "HORIZON_LEVELS",
    "CAPACITY_LEVELS",
    "INVENTORY_LEVELS",
    "DEFAULT_BASE_SEED",
    "generate_demand",
    "build_instance",
    "enumerate_grid",
    "demand_seed",
    "toy_config",
]

HORIZON_LEVELS = ("T10", "T20", "T30")
CAPACITY_LEVELS = ("low", "med", "high")
INVENTORY_LEVELS = ("low", "med", "high")

HORIZON_PERIODS = {"T10": 10, "T20": 20, "T30": 30}
DEMAND_BOUNDS = {"T10": (80, 120), "T20": (180, 250), "T30": (290, 350)}
CAPACITY_MINUTES = {"low": 630.0, "med": 720.0, "high": 810.0}
INVENTORY_CAPS = {"low": (6.0, 3.0), "med": (12.0, 6.0), "high": (18.0, 9.0)}

#: Demand mix of the four products: non-chemical cylinder, non-chemical
#: plaque, chemical cylinder, chemical plaque.
PRODUCT_SHARES = (0.16, 0.04, 0.64, 0.16)

DEFAULT_BASE_SEED = 2026


@dataclass(frozen=True)
class PlantParams:
    """Fixed cost and routing block of the felt plant."""

    vao_cost: tuple[float, ...] = (2400.0, 5400.0, 1000.0)
    transport_cost: tuple[float, ...] = (100.0, 120.0, 120.0, 140.0)
    end_hold_cost: tuple[float, ...] = (300.0, 150.0, 300.0, 150.0)
    wip_hold_cost: tuple[float, ...] = (0.0, 50.0, 0.0, 50.0)
    energy_rate: tuple[float, ...] = (1.16, 3.09, 0.0)
    proc_time_bounds: tuple[tuple[float, float], ...] = (
        (50.0, 80.0),
        (22.2, 26.6),
        (80.0, 80.0),
    )
    route: tuple[tuple[int, ...], ...] = (
        (1, 0, 0),
        (1, 0, 1),
        (1, 1, 0),
        (1, 1, 1),
    )
    sequence: tuple[tuple[int, ...], ...] = ((0,), (0, 2), (0, 1), (0, 1, 2))
    unit_length: float = 400.0

    @property
    def num_products(self) -> int:
        return len(self.route)

    @property
    def num_machines(self) -> int:
        return len(self.vao_cost)


FELT_PLANT = PlantParams()


@dataclass(frozen=True)
class ScenarioLevels:
    """One lattice cell: a horizon, capacity and inventory level."""

    horizon_level: str = "T10"
    capacity_level: str = "med"
    inventory_level: str = "med"

    def __post_init__(self):
        if self.horizon_level not in HORIZON_PERIODS:
            raise ValueError(f"unknown horizon level {self.horizon_level!r}")
        if self.capacity_level not in CAPACITY_MINUTES:
            raise ValueError(f"unknown capacity level {self.capacity_level!r}")
        if self.inventory_level not in INVENTORY_CAPS:
            raise ValueError(f"unknown inventory level {self.inventory_level!r}")

    @property
    def num_periods(self) -> int:
        return HORIZON_PERIODS[self.horizon_level]

    @property
    def demand_bounds(self) -> tuple[int, int]:
        return DEMAND_BOUNDS[self.horizon_level]

    @property
    def capacity_minutes(self) -> float:
        return CAPACITY_MINUTES[self.capacity_level]

    @property
    def inventory_caps(self) -> tuple[float, float]:
        return INVENTORY_CAPS[self.inventory_level]


@dataclass(frozen=True)
class GeneratorConfig:
    """Everything needed to materialize one instance deterministically.

    ``num_periods`` and ``demand_bounds`` default to the values implied by
    ``levels``; overriding them yields off-lattice instances (used for toy
    problems). ``replicate`` is bookkeeping for grid runs.
    """

    levels: ScenarioLevels = ScenarioLevels()
    seed: int = 0
    product_shares: tuple[float, ...] = PRODUCT_SHARES
    plant: PlantParams = FELT_PLANT
    replicate: int = 0
    num_periods: int | None = None
    demand_bounds: tuple[int, int] | None = None

    def __post_init__(self):
        if len(self.product_shares) != self.plant.num_products:
            raise ValueError("one demand share per product is required")
        if abs(sum(self.product_shares) - 1.0) > 1e-9:
            raise ValueError("product shares must sum to 1")
        lo, hi = self.effective_demand_bounds
        if lo < 0 or lo > hi:
            raise ValueError("demand bounds must satisfy 0 <= lower <= upper")

    @property
    def effective_periods(self) -> int:
        return self.num_periods if self.num_periods is not None else self.levels.num_periods

    @property
    def effective_demand_bounds(self) -> tuple[int, int]:
        if self.demand_bounds is not None:
            return self.demand_bounds
        return self.levels.demand_bounds


def _split_by_shares(total: int, shares: tuple[float, ...]) -> np.ndarray:
    """Integer split of ``total`` proportional to ``shares``.

    Largest-remainder rounding: floor everything, then hand the leftover
    units to the products with the biggest fractional parts (ties go to the
    lower index), so the parts always sum to ``total`` exactly.
    """
    exact = total * np.asarray(shares, dtype=float)
    base = np.floor(exact).astype(int)
    leftover = total - int(base.sum())
    if leftover > 0:
        order = np.argsort(-(exact - base), kind="stable")
        base[order[:leftover]] += 1
    return base


def generate_demand(config: GeneratorConfig) -> np.ndarray:
    """Draw the (products x periods) integer demand matrix for a config."""
    rng = np.random.default_rng(config.seed)
    lo, hi = config.effective_demand_bounds
    T = config.effective_periods
    total = int(rng.integers(lo, hi + 1))
    product_totals = _split_by_shares(total, config.product_shares)
    demand = np.zeros((config.plant.num_products, T), dtype=int)
    for i, amount in enumerate(product_totals):
        if amount == 0:
            continue
        periods = rng.integers(0, T, size=int(amount))
        demand[i] = np.bincount(periods, minlength=T)
    return demand


def build_instance(config: GeneratorConfig) -> Instance:
    """Materialize the Instance a config describes."""
    plant = config.plant
    T = config.effective_periods
    s_cap, u_cap = config.levels.inventory_caps
    return Instance(
        num_products=plant.num_products,
        num_machines=plant.num_machines,
        num_periods=T,
        route=plant.route,
        sequence=plant.sequence,
        vao_cost=plant.vao_cost,
        transport_cost=plant.transport_cost,
        end_hold_cost=plant.end_hold_cost,
        wip_hold_cost=plant.wip_hold_cost,
        energy_rate=plant.energy_rate,
        proc_time_bounds=plant.proc_time_bounds,
        demand=generate_demand(config),
        capacity=np.full(T, config.levels.capacity_minutes),
        end_inv_cap=s_cap,
        wip_inv_cap=u_cap,
        unit_length=plant.unit_length,
    )


def demand_seed(
    base_seed: int,
    horizon_index: int,
    capacity_index: int,
    inventory_index: int,
    replicate: int,
    share_across_cells: bool = True,
) -> int:
    """Seed for one grid run.

    By default the demand draw is shared by all nine capacity/inventory
    cells of a horizon, so those cells face identical demand and differ only
    in plant parameters. Pass ``share_across_cells=False`` to redraw demand
    per cell.
    """
    seed = base_seed + 1_000_000 * horizon_index + replicate
    if not share_across_cells:
        seed += 100_000 * capacity_index + 10_000 * inventory_index
    return seed


def enumerate_grid(
    seeds_per_cell: int,
    base_seed: int = DEFAULT_BASE_SEED,
    share_demand_across_cells: bool = True,
    replicate_seeds: list[int] | None = None,
) -> list[GeneratorConfig]:
    """All configs of the benchmark lattice, replicates innermost.

    3 horizons x 3 capacity levels x 3 inventory levels x ``seeds_per_cell``
    runs; iteration order is deterministic (horizon, capacity, inventory,
    replicate). Passing ``replicate_seeds`` pins the per-replicate base
    seeds explicitly (overriding ``seeds_per_cell``/``base_seed``): replicate
    k of every cell then derives its demand seed from ``replicate_seeds[k]``.
    """
    if replicate_seeds is not None:
        if not replicate_seeds:
            raise ValueError("replicate_seeds must not be empty")
        bases = list(replicate_seeds)
    else:
        if seeds_per_cell < 1:
            raise ValueError("seeds_per_cell must be at least 1")
        bases = [base_seed + rep for rep in range(seeds_per_cell)]
    configs = []
    for h, horizon in enumerate(HORIZON_LEVELS):
        for c, cap in enumerate(CAPACITY_LEVELS):
            for v, inv in enumerate(INVENTORY_LEVELS):
                for rep, rep_base in enumerate(bases):
                    configs.append(
                        GeneratorConfig(
                            levels=ScenarioLevels(horizon, cap, inv),
                            seed=demand_seed(
                                rep_base, h, c, v, 0, share_demand_across_cells
                            ),
                            replicate=rep,
                        )
                    )
    return configs


def toy_config(
    seed: int,
    num_periods: int = 3,
    capacity_level: str = "med",
    inventory_level: str = "med",
) -> GeneratorConfig:
    """A short-horizon instance sized for brute-force validation.

    Demand scales with the horizon at the usual per-period rate (8 to 12
    units). The second line and the cutter are pinned at their steady
    processing times (26.6 and 80 min/unit, the values they settle at in
    every benchmark run), leaving the first line's speed as the only free
    block so exhaustive search stays cheap.
    """
    plant = replace(
        FELT_PLANT,
        proc_time_bounds=((50.0, 80.0), (26.6, 26.6), (80.0, 80.0)),
    )
    return GeneratorConfig(
        levels=ScenarioLevels("T10", capacity_level, inventory_level),
        seed=seed,
        plant=plant,
        num_periods=num_periods,
        demand_bounds=(8 * num_periods, 12 * num_periods),
    )
