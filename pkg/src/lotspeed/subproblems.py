"""LP builders for the two halves of the alternating heuristic.

The full planning model is bilinear because production quantities multiply
unit processing times inside the capacity constraint. Freezing either block
leaves an ordinary LP:

* the *production* subproblem fixes processing times ``v_hat`` and chooses
  production and inventories (variables y, s, u);
* the *speed* subproblem fixes production ``y_hat`` and chooses processing
  times and inventories (variables v, s, u).

Both carry the frozen block's objective contribution as a constant offset,
so their reported objective values live on the same scale and can be
compared directly by the alternating loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import EQ, LE, LinearProgram, LpOutcome
from .model import Instance, Solution, evaluate_objective

__all__ = ["VarIndexMap", "build_production_lp", "build_speed_lp", "extract_solution"]

_OBJ_MATCH_RTOL = 1e-7


@dataclass(frozen=True)
class VarIndexMap:
    """Column layout of a subproblem LP.

    Blocks are contiguous: production columns (if present), then speed
    columns (if present), then end-inventory, then WIP columns.
    """

    num_products: int
    num_machines: int
    num_periods: int
    has_production: bool
    has_speed: bool

    @property
    def _y_size(self) -> int:
        I, M, T = self.num_products, self.num_machines, self.num_periods
        return I * M * T if self.has_production else 0

    @property
    def _v_size(self) -> int:
        return self.num_machines * self.num_periods if self.has_speed else 0

    @property
    def s_offset(self) -> int:
        return self._y_size + self._v_size

    @property
    def u_offset(self) -> int:
        return self.s_offset + self.num_products * self.num_periods

    @property
    def num_columns(self) -> int:
        return self.u_offset + self.num_products * self.num_periods

    def y_col(self, i: int, m: int, t: int) -> int:
        if not self.has_production:
            raise ValueError("this subproblem holds production fixed")
        return (i * self.num_machines + m) * self.num_periods + t

    def v_col(self, m: int, t: int) -> int:
        if not self.has_speed:
            raise ValueError("this subproblem holds processing times fixed")
        return self._y_size + m * self.num_periods + t

    def s_col(self, i: int, t: int) -> int:
        return self.s_offset + i * self.num_periods + t

    def u_col(self, i: int, t: int) -> int:
        return self.u_offset + i * self.num_periods + t

    def production_block(self, x: np.ndarray) -> np.ndarray:
        I, M, T = self.num_products, self.num_machines, self.num_periods
        return x[: self._y_size].reshape(I, M, T)

    def speed_block(self, x: np.ndarray) -> np.ndarray:
        M, T = self.num_machines, self.num_periods
        return x[self._y_size : self._y_size + self._v_size].reshape(M, T)

    def end_inventory_block(self, x: np.ndarray) -> np.ndarray:
        I, T = self.num_products, self.num_periods
        return x[self.s_offset : self.u_offset].reshape(I, T)

    def wip_block(self, x: np.ndarray) -> np.ndarray:
        I, T = self.num_products, self.num_periods
        return x[self.u_offset :].reshape(I, T)


def _inventory_columns(lp: LinearProgram, inst: Instance, vmap: VarIndexMap) -> None:
    """Objective and bounds shared by both subproblems for the s and u blocks."""
    I, T = inst.num_products, inst.num_periods
    hold = inst.end_hold_cost + inst.transport_cost
    wip = inst.wip_hold_cost + inst.transport_cost
    no_wip = set(inst.no_wip_products)
    for i in range(I):
        for t in range(T):
            lp.objective_coeffs[vmap.s_col(i, t)] = hold[i]
            lp.objective_coeffs[vmap.u_col(i, t)] = wip[i]
            lp.set_bounds(vmap.s_col(i, t), 0.0, inst.end_inv_cap)
            u_cap = 0.0 if i in no_wip else inst.wip_inv_cap
            lp.set_bounds(vmap.u_col(i, t), 0.0, u_cap)


def _inventory_cap_rows(lp: LinearProgram, inst: Instance, vmap: VarIndexMap) -> None:
    I, T = inst.num_products, inst.num_periods
    for t in range(T):
        row = np.zeros(lp.num_vars)
        for i in range(I):
            row[vmap.s_col(i, t)] = 1.0
        lp.add_constraint(row, LE, inst.end_inv_cap)
    for t in range(T):
        row = np.zeros(lp.num_vars)
        for i in range(I):
            row[vmap.u_col(i, t)] = 1.0
        lp.add_constraint(row, LE, inst.wip_inv_cap)


def build_production_lp(
    instance: Instance,
    v_hat: np.ndarray,
    strict_flow: bool = False,
) -> tuple[LinearProgram, VarIndexMap]:
    """Production subproblem: processing times frozen at ``v_hat``.

    Variables are the full production tensor plus both inventory blocks;
    capacity rows use ``v_hat`` as fixed coefficients and the objective
    carries ``-sum(energy_rate * v_hat)`` as a constant offset.
    """
    inst = instance
    I, M, T = inst.num_products, inst.num_machines, inst.num_periods
    v_hat = np.asarray(v_hat, dtype=float)
    if v_hat.shape != (M, T):
        raise ValueError(f"v_hat must have shape {(M, T)}, got {v_hat.shape}")
    lo = inst.proc_time_min[:, None] - 1e-9
    hi = inst.proc_time_max[:, None] + 1e-9
    if (v_hat < lo).any() or (v_hat > hi).any():
        raise ValueError("v_hat falls outside the machine processing-time bounds")

    vmap = VarIndexMap(I, M, T, has_production=True, has_speed=False)
    offset = -float(inst.energy_rate @ v_hat.sum(axis=1))
    lp = LinearProgram(vmap.num_columns, np.zeros(vmap.num_columns), offset)

    totals = inst.demand.sum(axis=1)
    for i in range(I):
        for m in range(M):
            ub = totals[i] * inst.route[i, m]  # per-cell demand bound
            for t in range(T):
                col = vmap.y_col(i, m, t)
                lp.objective_coeffs[col] = inst.vao_cost[m]
                lp.set_bounds(col, 0.0, ub)
    _inventory_columns(lp, inst, vmap)

    # capacity: fixed processing times turn the bilinear row into a plain sum
    for m in range(M):
        for t in range(T):
            row = np.zeros(lp.num_vars)
            for i in range(I):
                row[vmap.y_col(i, m, t)] = v_hat[m, t]
            lp.add_constraint(row, LE, inst.capacity[t])

    # rigid links: the two stages process the same amount
    for i in range(I):
        for a, b_mach in inst.rigid_links(i):
            if strict_flow:
                for t in range(T):
                    row = np.zeros(lp.num_vars)
                    row[vmap.y_col(i, a, t)] = 1.0
                    row[vmap.y_col(i, b_mach, t)] = -1.0
                    lp.add_constraint(row, EQ, 0.0)
            else:
                row = np.zeros(lp.num_vars)
                for t in range(T):
                    row[vmap.y_col(i, a, t)] = 1.0
                    row[vmap.y_col(i, b_mach, t)] = -1.0
                lp.add_constraint(row, EQ, 0.0)

    # end-item balance: s[i,t-1] + finished = demand + s[i,t]
    for i in range(I):
        m_star = inst.last_machine(i)
        for t in range(T):
            row = np.zeros(lp.num_vars)
            row[vmap.y_col(i, m_star, t)] = 1.0
            row[vmap.s_col(i, t)] = -1.0
            if t > 0:
                row[vmap.s_col(i, t - 1)] = 1.0
            lp.add_constraint(row, EQ, float(inst.demand[i, t]))

    # WIP balance in front of the cutter
    for i in inst.wip_products:
        feed, cut = inst.buffered_link(i)
        for t in range(T):
            row = np.zeros(lp.num_vars)
            row[vmap.y_col(i, feed, t)] = 1.0
            row[vmap.y_col(i, cut, t)] = -1.0
            row[vmap.u_col(i, t)] = -1.0
            if t > 0:
                row[vmap.u_col(i, t - 1)] = 1.0
            lp.add_constraint(row, EQ, 0.0)

    _inventory_cap_rows(lp, inst, vmap)
    return lp, vmap


def build_speed_lp(
    instance: Instance,
    y_hat: np.ndarray,
) -> tuple[LinearProgram, VarIndexMap]:
    """Speed subproblem: production frozen at ``y_hat``.

    Variables are processing times plus both inventory blocks. Capacity rows
    become single-variable constraints ``(sum_i y_hat) * v[m,t] <= capacity``
    and the balance rows pin s and u to the values ``y_hat`` implies. The
    objective carries ``sum(vao_cost * y_hat)`` as a constant offset.
    """
    inst = instance
    I, M, T = inst.num_products, inst.num_machines, inst.num_periods
    y_hat = np.asarray(y_hat, dtype=float)
    if y_hat.shape != (I, M, T):
        raise ValueError(f"y_hat must have shape {(I, M, T)}, got {y_hat.shape}")
    if y_hat.min(initial=0.0) < -1e-9:
        raise ValueError("y_hat must be nonnegative")
    cell_cap = inst.demand.sum(axis=1)[:, None] * inst.route
    if (y_hat > cell_cap[:, :, None] + 1e-6).any():
        raise ValueError("y_hat exceeds a product's total demand on its route")

    vmap = VarIndexMap(I, M, T, has_production=False, has_speed=True)
    offset = float(np.einsum("m,imt->", inst.vao_cost, y_hat))
    lp = LinearProgram(vmap.num_columns, np.zeros(vmap.num_columns), offset)

    for m in range(M):
        for t in range(T):
            col = vmap.v_col(m, t)
            lp.objective_coeffs[col] = -inst.energy_rate[m]
            lp.set_bounds(col, inst.proc_time_min[m], inst.proc_time_max[m])
    _inventory_columns(lp, inst, vmap)

    machine_load = y_hat.sum(axis=0)  # units per (machine, period)
    for m in range(M):
        for t in range(T):
            if machine_load[m, t] <= 0.0:
                continue  # vacuous capacity row
            row = np.zeros(lp.num_vars)
            row[vmap.v_col(m, t)] = machine_load[m, t]
            lp.add_constraint(row, LE, inst.capacity[t])

    for i in range(I):
        m_star = inst.last_machine(i)
        for t in range(T):
            row = np.zeros(lp.num_vars)
            row[vmap.s_col(i, t)] = -1.0
            if t > 0:
                row[vmap.s_col(i, t - 1)] = 1.0
            rhs = float(inst.demand[i, t] - y_hat[i, m_star, t])
            lp.add_constraint(row, EQ, rhs)

    for i in inst.wip_products:
        feed, cut = inst.buffered_link(i)
        for t in range(T):
            row = np.zeros(lp.num_vars)
            row[vmap.u_col(i, t)] = -1.0
            if t > 0:
                row[vmap.u_col(i, t - 1)] = 1.0
            rhs = float(y_hat[i, cut, t] - y_hat[i, feed, t])
            lp.add_constraint(row, EQ, rhs)

    _inventory_cap_rows(lp, inst, vmap)
    return lp, vmap


def extract_solution(
    instance: Instance,
    outcome: LpOutcome,
    vmap: VarIndexMap,
    fixed_v: np.ndarray | None = None,
    fixed_y: np.ndarray | None = None,
) -> Solution:
    """Assemble a full Solution from an optimal subproblem outcome.

    Exactly one of ``fixed_v`` / ``fixed_y`` must carry the block the
    subproblem held as a parameter. Machines whose energy rate is zero leave
    their processing time undetermined in the speed subproblem; those values
    are normalized to the slowest feasible speed,
    ``min(v_max, capacity / machine load)``, so repeated runs produce stable
    speeds. The recomputed objective must agree with the LP's.
    """
    if not outcome.is_optimal:
        raise ValueError(f"cannot extract a solution from status {outcome.status}")
    if (fixed_v is None) == (fixed_y is None):
        raise ValueError("provide exactly one of fixed_v or fixed_y")

    x = outcome.x
    s = vmap.end_inventory_block(x).copy()
    u = vmap.wip_block(x).copy()
    if fixed_v is not None:
        y = vmap.production_block(x).copy()
        v = np.array(fixed_v, dtype=float)
    else:
        y = np.array(fixed_y, dtype=float)
        v = vmap.speed_block(x).copy()
        idle = instance.energy_rate <= 0.0
        if idle.any():
            load = y.sum(axis=0)
            for m in np.flatnonzero(idle):
                for t in range(instance.num_periods):
                    cap = (
                        instance.capacity[t] / load[m, t]
                        if load[m, t] > 1e-12
                        else np.inf
                    )
                    v[m, t] = min(instance.proc_time_max[m], cap)

    sol = Solution(
        production=y,
        proc_time=v,
        end_inventory=s,
        wip_inventory=u,
        objective=evaluate_objective(
            instance,
            Solution(y, v, s, u, objective=0.0),
        ),
    )
    gap = abs(sol.objective - outcome.objective)
    if gap > _OBJ_MATCH_RTOL * (1.0 + abs(outcome.objective)):
        raise ValueError(
            f"extracted objective {sol.objective} disagrees with LP value "
            f"{outcome.objective} (gap {gap:.3g})"
        )
    return sol
