"""Problem data and solution types for the lot-sizing / machine-speed model.

The production system is a small flow shop: every product starts on the
first production line (machine 0), chemical products continue on the second
line (machine 1), and plaque products end on the cutting machine (the last
machine index). Machine speeds are expressed as unit processing times in
minutes per unit: a lower value means a faster, more energy-hungry machine.

The planner chooses, per period, how much of each product to run on each
machine (``y``), the unit processing time of each machine (``v``), and the
end-item and work-in-process inventories carried into the next period
(``s`` and ``u``). The single nonlinearity of the model is the capacity
constraint ``sum_i y[i,m,t] * v[m,t] <= capacity[t]``, a product of two
decision blocks.

Flow structure is derived from each product's machine sequence:

* a consecutive pair ``(a, b)`` with ``b`` the cutting machine (the last
  machine index) is *buffered*: WIP may wait in the warehouse between the
  two stages, balanced period by period through ``u[i]``;
* any other consecutive pair is *rigid*: the intermediate product is craned
  directly between the lines, so no WIP may accumulate. By default only the
  horizon totals of the two stages must match ("aggregate" mode); strict
  mode forces the stages to match in every period.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

__all__ = [
    "Instance",
    "Solution",
    "Violation",
    "FeasibilityReport",
    "evaluate_objective",
    "check_feasibility",
    "instance_to_json",
    "instance_from_json",
    "load_instance",
    "save_instance",
    "solution_to_json",
    "solution_from_json",
]

#: Default absolute tolerance for feasibility checking.
FEASIBILITY_TOL = 1e-6

#: Tolerance below which a slightly negative decision value is clipped to zero.
_NEG_CLIP = 1e-7


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Instance:
    """Full problem data for one planning run.

    Products are indexed ``0..num_products-1``, machines
    ``0..num_machines-1`` and periods ``0..num_periods-1``. The cutting
    machine is by convention the last machine index.

    Attributes:
        num_products: number of product types (I).
        num_machines: number of machines (M).
        num_periods: length of the planning horizon (T).
        route: (I, M) binary matrix; 1 if product i is processed on machine m.
        sequence: per product, the ordered tuple of machine indices it
            visits. The last entry is the machine on which the product is
            finished. Every sequence starts with machine 0.
        vao_cost: (M,) value-added-operation cost per unit processed.
        transport_cost: (I,) forklift cost per unit moved to the warehouse.
        end_hold_cost: (I,) end-item holding cost per unit per period.
        wip_hold_cost: (I,) WIP holding cost per unit per period.
        energy_rate: (M,) energy cost per minute of unit processing time.
        proc_time_bounds: (M, 2) lower/upper unit processing time per machine.
        demand: (I, T) demand in units.
        capacity: (T,) available machine minutes per period (same for all
            machines).
        end_inv_cap: cap on total end-item inventory in a period, all
            products combined.
        wip_inv_cap: cap on total WIP inventory in a period.
        unit_length: meters of felt in one unit (reporting only).
    """

    num_products: int
    num_machines: int
    num_periods: int
    route: np.ndarray
    sequence: tuple[tuple[int, ...], ...]
    vao_cost: np.ndarray
    transport_cost: np.ndarray
    end_hold_cost: np.ndarray
    wip_hold_cost: np.ndarray
    energy_rate: np.ndarray
    proc_time_bounds: np.ndarray
    demand: np.ndarray
    capacity: np.ndarray
    end_inv_cap: float
    wip_inv_cap: float
    unit_length: float = 400.0

    def __post_init__(self):
        I, M, T = self.num_products, self.num_machines, self.num_periods
        object.__setattr__(self, "route", _frozen_array(self.route, dtype=int))
        object.__setattr__(
            self, "sequence", tuple(tuple(int(m) for m in seq) for seq in self.sequence)
        )
        for name in (
            "vao_cost",
            "transport_cost",
            "end_hold_cost",
            "wip_hold_cost",
            "energy_rate",
            "proc_time_bounds",
            "demand",
            "capacity",
        ):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        object.__setattr__(self, "end_inv_cap", float(self.end_inv_cap))
        object.__setattr__(self, "wip_inv_cap", float(self.wip_inv_cap))
        object.__setattr__(self, "unit_length", float(self.unit_length))

        if min(I, M, T) < 1:
            raise ValueError("num_products, num_machines and num_periods must be >= 1")
        _expect_shape("route", self.route, (I, M))
        _expect_shape("vao_cost", self.vao_cost, (M,))
        _expect_shape("transport_cost", self.transport_cost, (I,))
        _expect_shape("end_hold_cost", self.end_hold_cost, (I,))
        _expect_shape("wip_hold_cost", self.wip_hold_cost, (I,))
        _expect_shape("energy_rate", self.energy_rate, (M,))
        _expect_shape("proc_time_bounds", self.proc_time_bounds, (M, 2))
        _expect_shape("demand", self.demand, (I, T))
        _expect_shape("capacity", self.capacity, (T,))

        if not np.isin(self.route, (0, 1)).all():
            raise ValueError("route matrix must be binary")
        if len(self.sequence) != I:
            raise ValueError("sequence must list the machine order of every product")
        for i, seq in enumerate(self.sequence):
            visited = sorted(seq)
            if visited != sorted(np.flatnonzero(self.route[i])):
                raise ValueError(
                    f"sequence of product {i} does not match its route row"
                )
            if seq[0] != 0:
                raise ValueError("every product must start on machine 0")
        lo, hi = self.proc_time_bounds[:, 0], self.proc_time_bounds[:, 1]
        if (lo <= 0).any() or (lo > hi).any():
            raise ValueError("processing-time bounds must satisfy 0 < lower <= upper")
        if (self.demand < 0).any():
            raise ValueError("demand must be nonnegative")
        if (self.capacity <= 0).any():
            raise ValueError("capacity must be positive")
        if self.end_inv_cap < 0 or self.wip_inv_cap < 0:
            raise ValueError("inventory caps must be nonnegative")

    # -- derived structure ---------------------------------------------------

    @property
    def proc_time_min(self) -> np.ndarray:
        return self.proc_time_bounds[:, 0]

    @property
    def proc_time_max(self) -> np.ndarray:
        return self.proc_time_bounds[:, 1]

    @property
    def cutting_machine(self) -> int:
        return self.num_machines - 1

    def last_machine(self, i: int) -> int:
        """Machine on which product ``i`` is finished."""
        return self.sequence[i][-1]

    def total_demand(self, i: int) -> float:
        return float(self.demand[i].sum())

    def buffered_link(self, i: int) -> tuple[int, int] | None:
        """The (feed, cutting) machine pair of product ``i``, if it has one.

        WIP may only wait in front of the cutting machine; products that do
        not end on it carry no WIP at all.
        """
        seq = self.sequence[i]
        if len(seq) >= 2 and seq[-1] == self.cutting_machine:
            return (seq[-2], seq[-1])
        return None

    def rigid_links(self, i: int) -> list[tuple[int, int]]:
        """Consecutive machine pairs of product ``i`` with no WIP allowed."""
        seq = self.sequence[i]
        pairs = list(zip(seq, seq[1:]))
        buffered = self.buffered_link(i)
        return [p for p in pairs if p != buffered]

    @property
    def wip_products(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.num_products) if self.buffered_link(i))

    @property
    def no_wip_products(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.num_products) if not self.buffered_link(i))


def _expect_shape(name: str, arr: np.ndarray, shape: tuple[int, ...]) -> None:
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")


@dataclass(frozen=True)
class Solution:
    """One candidate plan: production, speeds, inventories and its cost.

    Attributes:
        production: (I, M, T) units of product i processed on machine m in
            period t.
        proc_time: (M, T) unit processing time of machine m in period t.
        end_inventory: (I, T) end-item stock at the end of period t.
        wip_inventory: (I, T) WIP stock at the end of period t.
        objective: total cost of the plan.
    """

    production: np.ndarray
    proc_time: np.ndarray
    end_inventory: np.ndarray
    wip_inventory: np.ndarray
    objective: float

    def __post_init__(self):
        for name in ("production", "proc_time", "end_inventory", "wip_inventory"):
            arr = np.array(getattr(self, name), dtype=float)
            low = arr.min(initial=0.0)
            if low < -_NEG_CLIP:
                raise ValueError(f"{name} contains negative value {low}")
            np.clip(arr, 0.0, None, out=arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "objective", float(self.objective))
        I, M, T = self.production.shape
        _expect_shape("proc_time", self.proc_time, (M, T))
        _expect_shape("end_inventory", self.end_inventory, (I, T))
        _expect_shape("wip_inventory", self.wip_inventory, (I, T))


class Violation(NamedTuple):
    """A single violated constraint: which family, at which index, by how much.

    ``index`` uses 0-based (i, m, t) positions. Constraint ids are fixed
    tokens named after the reference plant configuration (e.g.
    ``wip_balance_2`` is the WIP balance of product number 2, index 1).
    """

    constraint_id: str
    index: tuple[int, ...]
    amount: float


@dataclass
class FeasibilityReport:
    """Outcome of an exhaustive constraint sweep over a solution."""

    violations: list[Violation] = field(default_factory=list)

    @property
    def is_feasible(self) -> bool:
        return not self.violations

    def worst(self) -> Violation | None:
        if not self.violations:
            return None
        return max(self.violations, key=lambda v: v.amount)

    def summary(self) -> str:
        if self.is_feasible:
            return "feasible"
        counts: dict[str, int] = {}
        for v in self.violations:
            counts[v.constraint_id] = counts.get(v.constraint_id, 0) + 1
        parts = ", ".join(f"{k}: {n}" for k, n in sorted(counts.items()))
        worst = self.worst()
        return f"{len(self.violations)} violations ({parts}); worst {worst.amount:.3g}"


def evaluate_objective(instance: Instance, sol: Solution) -> float:
    """Total cost of a plan.

    Sums value-added production cost over all (product, machine, period)
    cells and inventory holding plus transport cost over all (product,
    period) cells, then subtracts the machine-speed reward
    ``sum_t sum_m energy_rate[m] * proc_time[m, t]`` (running slower saves
    energy, so larger processing times reduce cost).
    """
    _check_dims(instance, sol)
    y, v, s, u = sol.production, sol.proc_time, sol.end_inventory, sol.wip_inventory
    production_cost = float(np.einsum("m,imt->", instance.vao_cost, y))
    hold = instance.end_hold_cost + instance.transport_cost
    wip = instance.wip_hold_cost + instance.transport_cost
    inventory_cost = float(hold @ s.sum(axis=1) + wip @ u.sum(axis=1))
    speed_reward = float(instance.energy_rate @ v.sum(axis=1))
    return production_cost + inventory_cost - speed_reward


def _check_dims(instance: Instance, sol: Solution) -> None:
    I, M, T = instance.num_products, instance.num_machines, instance.num_periods
    if sol.production.shape != (I, M, T):
        raise ValueError(
            f"solution is dimensioned {sol.production.shape}, instance needs {(I, M, T)}"
        )


def check_feasibility(
    instance: Instance,
    sol: Solution,
    tol: float = FEASIBILITY_TOL,
    strict_flow: bool = False,
) -> FeasibilityReport:
    """Sweep every model constraint and report all violations beyond ``tol``.

    Checks, in order: machine capacity, per-cell demand bounds, flow balance
    on rigid links (aggregate by default, per period if ``strict_flow``),
    end-item balance, WIP balance on buffered links, processing-time bounds,
    the two aggregate inventory caps, and the no-WIP rule for products
    without a buffered link. Violations are data, not errors: an infeasible
    solution yields a populated report, never an exception.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_dims(instance, sol)
    I, M, T = instance.num_products, instance.num_machines, instance.num_periods
    y, v, s, u = sol.production, sol.proc_time, sol.end_inventory, sol.wip_inventory
    d = instance.demand
    out: list[Violation] = []

    # (capacity) total processing minutes per machine and period
    load = np.einsum("imt,mt->mt", y, v)
    for m, t in zip(*np.nonzero(load > instance.capacity[None, :] + tol)):
        out.append(Violation("capacity", (int(m), int(t)), float(load[m, t] - instance.capacity[t])))

    # (demand_bound) no cell may exceed the product's total demand on its route
    cap = instance.demand.sum(axis=1)[:, None] * instance.route
    excess = y - cap[:, :, None]
    for i, m, t in zip(*np.nonzero(excess > tol)):
        out.append(Violation("demand_bound", (int(i), int(m), int(t)), float(excess[i, m, t])))

    # (chem_flow) rigid links: stages must process the same amount
    for i in range(I):
        for a, b in instance.rigid_links(i):
            if strict_flow:
                gap = np.abs(y[i, a] - y[i, b])
                for t in np.nonzero(gap > tol)[0]:
                    out.append(Violation("chem_flow", (i, int(t)), float(gap[t])))
            else:
                gap = abs(float(y[i, a].sum() - y[i, b].sum()))
                if gap > tol:
                    out.append(Violation("chem_flow", (i,), gap))

    # (end_balance) s[i,t-1] + finished production = demand + s[i,t], s[i,-1]=0
    for i in range(I):
        m_star = instance.last_machine(i)
        prev = np.concatenate(([0.0], s[i, :-1]))
        resid = np.abs(prev + y[i, m_star] - d[i] - s[i])
        for t in np.nonzero(resid > tol)[0]:
            out.append(Violation("end_balance", (i, int(t)), float(resid[t])))

    # (wip_balance_*) buffered links: u[i,t-1] + feed = cut + u[i,t]
    for i in instance.wip_products:
        feed, cut = instance.buffered_link(i)
        prev = np.concatenate(([0.0], u[i, :-1]))
        resid = np.abs(prev + y[i, feed] - y[i, cut] - u[i])
        for t in np.nonzero(resid > tol)[0]:
            out.append(Violation(f"wip_balance_{i + 1}", (i, int(t)), float(resid[t])))

    # (v_bounds)
    lo = instance.proc_time_min[:, None] - v
    hi = v - instance.proc_time_max[:, None]
    gap = np.maximum(lo, hi)
    for m, t in zip(*np.nonzero(gap > tol)):
        out.append(Violation("v_bounds", (int(m), int(t)), float(gap[m, t])))

    # (end_cap) / (wip_cap) aggregate inventory limits
    s_tot = s.sum(axis=0) - instance.end_inv_cap
    for t in np.nonzero(s_tot > tol)[0]:
        out.append(Violation("end_cap", (int(t),), float(s_tot[t])))
    u_tot = u.sum(axis=0) - instance.wip_inv_cap
    for t in np.nonzero(u_tot > tol)[0]:
        out.append(Violation("wip_cap", (int(t),), float(u_tot[t])))

    # (no_wip_13) products without a buffer in front of the cutter hold no WIP
    for i in instance.no_wip_products:
        for t in np.nonzero(u[i] > tol)[0]:
            out.append(Violation("no_wip_13", (i, int(t)), float(u[i, t])))

    return FeasibilityReport(out)


# -- serialization ------------------------------------------------------------
#
# Instances travel as self-describing JSON with field names matching the
# Instance attributes; see docs/instance.schema.json. Machine indices inside
# "sequence" are 0-based positions into the route columns.


def instance_to_json(instance: Instance) -> str:
    payload = {
        "num_products": instance.num_products,
        "num_machines": instance.num_machines,
        "num_periods": instance.num_periods,
        "route": instance.route.tolist(),
        "sequence": [list(seq) for seq in instance.sequence],
        "vao_cost": instance.vao_cost.tolist(),
        "transport_cost": instance.transport_cost.tolist(),
        "end_hold_cost": instance.end_hold_cost.tolist(),
        "wip_hold_cost": instance.wip_hold_cost.tolist(),
        "energy_rate": instance.energy_rate.tolist(),
        "proc_time_bounds": instance.proc_time_bounds.tolist(),
        "demand": instance.demand.tolist(),
        "capacity": instance.capacity.tolist(),
        "end_inv_cap": instance.end_inv_cap,
        "wip_inv_cap": instance.wip_inv_cap,
        "unit_length": instance.unit_length,
    }
    return json.dumps(payload, indent=2)


_INSTANCE_FIELDS = {
    "num_products",
    "num_machines",
    "num_periods",
    "route",
    "sequence",
    "vao_cost",
    "transport_cost",
    "end_hold_cost",
    "wip_hold_cost",
    "energy_rate",
    "proc_time_bounds",
    "demand",
    "capacity",
    "end_inv_cap",
    "wip_inv_cap",
}


def instance_from_json(text: str) -> Instance:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValueError("instance document must be a JSON object")
    missing = _INSTANCE_FIELDS - payload.keys()
    if missing:
        raise ValueError(f"instance document is missing fields: {sorted(missing)}")
    try:
        return Instance(
            num_products=int(payload["num_products"]),
            num_machines=int(payload["num_machines"]),
            num_periods=int(payload["num_periods"]),
            route=payload["route"],
            sequence=tuple(tuple(seq) for seq in payload["sequence"]),
            vao_cost=payload["vao_cost"],
            transport_cost=payload["transport_cost"],
            end_hold_cost=payload["end_hold_cost"],
            wip_hold_cost=payload["wip_hold_cost"],
            energy_rate=payload["energy_rate"],
            proc_time_bounds=payload["proc_time_bounds"],
            demand=payload["demand"],
            capacity=payload["capacity"],
            end_inv_cap=payload["end_inv_cap"],
            wip_inv_cap=payload["wip_inv_cap"],
            unit_length=payload.get("unit_length", 400.0),
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"malformed instance document: {exc}") from exc


def load_instance(path: str | Path) -> Instance:
    return instance_from_json(Path(path).read_text())


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(instance_to_json(instance) + "\n")


def solution_to_json(sol: Solution) -> str:
    payload = {
        "production": sol.production.tolist(),
        "proc_time": sol.proc_time.tolist(),
        "end_inventory": sol.end_inventory.tolist(),
        "wip_inventory": sol.wip_inventory.tolist(),
        "objective": sol.objective,
    }
    return json.dumps(payload, indent=2)


def solution_from_json(text: str) -> Solution:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    try:
        return Solution(
            production=payload["production"],
            proc_time=payload["proc_time"],
            end_inventory=payload["end_inventory"],
            wip_inventory=payload["wip_inventory"],
            objective=payload["objective"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed solution document: {exc}") from exc
