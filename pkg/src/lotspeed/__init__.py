"""Lot sizing and machine speed planning for a felt-mill flow shop."""

from .generator import (
    FELT_PLANT,
    GeneratorConfig,
    PlantParams,
    ScenarioLevels,
    build_instance,
    enumerate_grid,
    generate_demand,
    toy_config,
)
from .heuristic import (
    HeuristicConfig,
    HeuristicTrace,
    InfeasibleInstanceError,
    two_phase,
)
from .lp import LinearProgram, LpOutcome, LpStatus, SolverFailure, solve
from .model import (
    FeasibilityReport,
    Instance,
    Solution,
    Violation,
    check_feasibility,
    evaluate_objective,
    instance_from_json,
    instance_to_json,
    load_instance,
    save_instance,
)
from .oracle import grid_search_solve
from .subproblems import VarIndexMap, build_production_lp, build_speed_lp, extract_solution

__version__ = "0.1.0"

__all__ = [
    "FELT_PLANT",
    "FeasibilityReport",
    "GeneratorConfig",
    "HeuristicConfig",
    "HeuristicTrace",
    "InfeasibleInstanceError",
    "Instance",
    "LinearProgram",
    "LpOutcome",
    "LpStatus",
    "PlantParams",
    "ScenarioLevels",
    "Solution",
    "SolverFailure",
    "VarIndexMap",
    "Violation",
    "build_instance",
    "build_production_lp",
    "build_speed_lp",
    "check_feasibility",
    "enumerate_grid",
    "evaluate_objective",
    "extract_solution",
    "generate_demand",
    "grid_search_solve",
    "instance_from_json",
    "instance_to_json",
    "load_instance",
    "save_instance",
    "solve",
    "toy_config",
    "two_phase",
]
