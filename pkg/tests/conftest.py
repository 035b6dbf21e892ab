import numpy as np
import pytest

from lotspeed.generator import FELT_PLANT
from lotspeed.model import Instance


def plant_instance(
    demand,
    capacity=630.0,
    end_cap=6.0,
    wip_cap=3.0,
    proc_time_bounds=None,
) -> Instance:
    """Reference felt plant with a hand-chosen demand matrix."""
    demand = np.asarray(demand, dtype=float)
    periods = demand.shape[1]
    return Instance(
        num_products=4,
        num_machines=3,
        num_periods=periods,
        route=FELT_PLANT.route,
        sequence=FELT_PLANT.sequence,
        vao_cost=FELT_PLANT.vao_cost,
        transport_cost=FELT_PLANT.transport_cost,
        end_hold_cost=FELT_PLANT.end_hold_cost,
        wip_hold_cost=FELT_PLANT.wip_hold_cost,
        energy_rate=FELT_PLANT.energy_rate,
        proc_time_bounds=proc_time_bounds or FELT_PLANT.proc_time_bounds,
        demand=demand,
        capacity=np.full(periods, float(capacity)),
        end_inv_cap=end_cap,
        wip_inv_cap=wip_cap,
    )


@pytest.fixture
def tiny_instance() -> Instance:
    """Single period, one unit of the first product."""
    return plant_instance([[1.0], [0.0], [0.0], [0.0]])


@pytest.fixture
def zero_demand_instance() -> Instance:
    return plant_instance(np.zeros((4, 3)))
