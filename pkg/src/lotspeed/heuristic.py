"""Alternating two-phase solver for the bilinear planning model.

Each cycle solves the production subproblem with processing times frozen,
hands the resulting production plan to the speed subproblem, and feeds the
new processing times back. Every block a subproblem re-optimizes keeps the
other block's previous values feasible, so the objective sequence

    production(1) >= speed(1) >= production(2) >= speed(2) >= ...

never increases, and the loop stops at a fixed point: once neither the
decision variables nor the two objective values move between consecutive
cycles, the incumbent is returned. The model is non-convex, so the fixed
point is a local optimum, not a certified global one.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import LpStatus, solve
from .model import Instance, Solution
from .subproblems import build_production_lp, build_speed_lp, extract_solution

__all__ = [
    "HeuristicConfig",
    "CycleRecord",
    "HeuristicTrace",
    "InfeasibleInstanceError",
    "two_phase",
]

CONVERGED = "converged"
ITERATION_LIMIT = "iteration_limit"
SUBPROBLEM_INFEASIBLE = "subproblem_infeasible"


@dataclass(frozen=True)
class HeuristicConfig:
    """Knobs of the alternating loop.

    ``eps`` is the relative tolerance used both for the variable fixed-point
    test and the objective agreement test. ``v_init`` defaults to the
    fastest speeds (lower processing-time bounds), which maximizes the
    chance that the first production subproblem is feasible.
    """

    eps: float = 1e-6
    max_iter: int = 100
    v_init: np.ndarray | None = None
    strict_flow: bool = False

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def initial_speeds(self, instance: Instance) -> np.ndarray:
        if self.v_init is None:
            return np.repeat(
                instance.proc_time_min[:, None], instance.num_periods, axis=1
            )
        v = np.asarray(self.v_init, dtype=float)
        if v.shape != (instance.num_machines, instance.num_periods):
            raise ValueError("v_init has the wrong shape for this instance")
        lo = instance.proc_time_min[:, None] - 1e-9
        hi = instance.proc_time_max[:, None] + 1e-9
        if (v < lo).any() or (v > hi).any():
            raise ValueError("v_init violates the processing-time bounds")
        return v.copy()


@dataclass(frozen=True)
class CycleRecord:
    production_objective: float
    speed_objective: float
    max_rel_change: float  # vs. the previous cycle; inf on the first
    seconds: float


@dataclass
class HeuristicTrace:
    """Per-cycle objectives and the reason the loop stopped."""

    cycles: list[CycleRecord] = field(default_factory=list)
    termination: str = ITERATION_LIMIT
    best_cycle: int = 0  # 1-based index of the cycle the returned plan came from

    @property
    def cycle_count(self) -> int:
        return len(self.cycles)

    @property
    def objective_sequence(self) -> list[float]:
        seq: list[float] = []
        for rec in self.cycles:
            seq.extend((rec.production_objective, rec.speed_objective))
        return seq

    def rows(self) -> list[dict]:
        return [
            {
                "cycle": k + 1,
                "production_objective": rec.production_objective,
                "speed_objective": rec.speed_objective,
                "max_rel_change": rec.max_rel_change,
                "seconds": rec.seconds,
            }
            for k, rec in enumerate(self.cycles)
        ]


class InfeasibleInstanceError(RuntimeError):
    """A subproblem came back infeasible, so no plan exists.

    Carries the partial trace; when the very first production subproblem is
    infeasible, demand cannot be met even with every machine at top speed.
    """

    def __init__(self, message: str, trace: HeuristicTrace):
        super().__init__(message)
        self.trace = trace


def _max_rel_change(new: dict[str, np.ndarray], old: dict[str, np.ndarray]) -> float:
    worst = 0.0
    for key, arr in new.items():
        prev = old[key]
        delta = np.abs(arr - prev) / (1.0 + np.abs(prev))
        worst = max(worst, float(delta.max(initial=0.0)))
    return worst


def two_phase(
    instance: Instance,
    config: HeuristicConfig | None = None,
) -> tuple[Solution, HeuristicTrace]:
    """Run the alternating loop and return the final plan plus its trace.

    Raises InfeasibleInstanceError if a subproblem is infeasible; solver
    failures from the LP layer propagate unchanged.
    """
    cfg = config or HeuristicConfig()
    trace = HeuristicTrace()
    v_hat = cfg.initial_speeds(instance)

    best: Solution | None = None
    best_cycle = 0
    prev_blocks: dict[str, np.ndarray] | None = None

    for cycle in range(1, cfg.max_iter + 1):
        started = time.perf_counter()

        lp1, map1 = build_production_lp(instance, v_hat, strict_flow=cfg.strict_flow)
        out1 = solve(lp1)
        if out1.status is not LpStatus.OPTIMAL:
            trace.termination = SUBPROBLEM_INFEASIBLE
            if cycle > 1:
                msg = f"production subproblem infeasible in cycle {cycle}"
            elif cfg.v_init is None:
                msg = (
                    "production subproblem infeasible at the initial speeds: "
                    "demand cannot be met within capacity even with every "
                    "machine running at its fastest"
                )
            else:
                msg = "production subproblem infeasible at the given initial speeds"
            raise InfeasibleInstanceError(msg, trace)
        sol1 = extract_solution(instance, out1, map1, fixed_v=v_hat)
        y_hat = sol1.production

        lp2, map2 = build_speed_lp(instance, y_hat)
        out2 = solve(lp2)
        if out2.status is not LpStatus.OPTIMAL:
            trace.termination = SUBPROBLEM_INFEASIBLE
            raise InfeasibleInstanceError(
                f"speed subproblem infeasible in cycle {cycle}", trace
            )
        sol2 = extract_solution(instance, out2, map2, fixed_y=y_hat)
        v_hat = sol2.proc_time

        blocks = {
            "y": sol2.production,
            "v": sol2.proc_time,
            "s": sol2.end_inventory,
            "u": sol2.wip_inventory,
        }
        change = math.inf if prev_blocks is None else _max_rel_change(blocks, prev_blocks)
        prev_blocks = blocks

        trace.cycles.append(
            CycleRecord(
                production_objective=out1.objective,
                speed_objective=out2.objective,
                max_rel_change=change,
                seconds=time.perf_counter() - started,
            )
        )

        if best is None or sol2.objective < best.objective:
            best = sol2
            best_cycle = cycle

        obj_gap = abs(out1.objective - out2.objective)
        if (
            cycle >= 2
            and change <= cfg.eps
            and obj_gap <= cfg.eps * (1.0 + abs(out2.objective))
        ):
            trace.termination = CONVERGED
            trace.best_cycle = cycle
            return sol2, trace

    trace.termination = ITERATION_LIMIT
    trace.best_cycle = best_cycle
    return best, trace
