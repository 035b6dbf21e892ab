"""Brute-force baseline: exhaustive speed grid with an exact LP per point.

For fixed processing times the planning model is an LP solved exactly, so
discretizing the speed block is the only source of approximation. The
search enumerates every free (machine, period) processing-time cell on a
uniform grid that includes both bounds, solves the production subproblem at
each grid assignment, and keeps the cheapest feasible plan. Intended for
toy horizons only: the grid is exponential in the number of free cells.
"""

from __future__ import annotations

import itertools

import numpy as np

from .lp import LpStatus, solve
from .model import Instance, Solution
from .subproblems import build_production_lp, extract_solution

__all__ = ["grid_search_solve", "count_free_cells"]

_MAX_GRID_POINTS = 10**6


def count_free_cells(instance: Instance) -> int:
    """Number of (machine, period) cells whose processing time can vary."""
    free_machines = int(
        (instance.proc_time_min < instance.proc_time_max).sum()
    )
    return free_machines * instance.num_periods


def grid_search_solve(
    instance: Instance,
    points_per_machine_period: int,
    strict_flow: bool = False,
) -> tuple[Solution, float]:
    """Exhaustively search speed grids; return the best plan and its cost.

    The combinatorial budget ``points ** free_cells <= 1e6`` is enforced
    before any work. Ties between equally cheap grid assignments go to the
    lexicographically smallest grid index, so the result is deterministic.
    Raises InfeasibleGridError if no grid point admits a feasible plan.
    """
    points = int(points_per_machine_period)
    if points < 1:
        raise ValueError("points_per_machine_period must be at least 1")
    free = count_free_cells(instance)
    if points > 1 and points**free > _MAX_GRID_POINTS:
        raise ValueError(
            f"grid of {points}^{free} assignments exceeds the "
            f"{_MAX_GRID_POINTS:.0e} budget; shrink the instance or the grid"
        )

    M, T = instance.num_machines, instance.num_periods
    lo, hi = instance.proc_time_min, instance.proc_time_max
    free_cells = [
        (m, t) for m in range(M) if lo[m] < hi[m] for t in range(T)
    ]
    grids = {
        m: np.linspace(lo[m], hi[m], points)
        for m in {m for m, _ in free_cells}
    }

    base_v = np.repeat(lo[:, None], T, axis=1)  # pinned cells sit at their bound
    best: Solution | None = None
    best_objective = np.inf

    if not free_cells:
        choices = [()]
    else:
        choices = itertools.product(range(points), repeat=len(free_cells))
    for choice in choices:
        v = base_v.copy()
        for (m, t), g in zip(free_cells, choice):
            v[m, t] = grids[m][g]
        lp, vmap = build_production_lp(instance, v, strict_flow=strict_flow)
        outcome = solve(lp)
        if outcome.status is not LpStatus.OPTIMAL:
            continue
        if outcome.objective < best_objective - 1e-12:
            best = extract_solution(instance, outcome, vmap, fixed_v=v)
            best_objective = outcome.objective

    if best is None:
        raise InfeasibleGridError(
            "no speed assignment on the grid admits a feasible plan"
        )
    return best, best_objective


class InfeasibleGridError(RuntimeError):
    """Every grid point was infeasible."""
