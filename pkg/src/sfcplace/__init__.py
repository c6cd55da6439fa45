"""Exact SFC placement: ILP construction, branch-and-bound, oracles, sweeps."""

from .ilp import (BuildOptions, IlpModel, build_model, decode_placement,
                  encode_placement, evaluate_point, expected_counts, objective_value)
from .model import (DEFAULT_S_MAX, Flavor, FlavorCatalog, LinkProps, Scenario, ScenarioError,
                    SfcRequest, Topology, VnfSpec, load_bundle, load_scenario,
                    load_scenario_files, normalize_types, save_scenario)
from .oracle import (Placement, PlacementError, SfcMetrics, Violation, VnfAssignment,
                     brute_force, validate_solution)
from .result import (Budget, INFEASIBLE, ModelIntegrityError, OPTIMAL, SolveResult,
                     SolveStats, SpaceTooLarge, TIMED_OUT)
from .scenarios import (GenConfig, SweepResult, SweepRow, SweepSummary, generate,
                        run_sweep, trend_rho, write_rows_csv, write_summary_csv)
from .solver import greedy_first_fit, lower_bound, propagate, solve, solve_bnb, solve_scenario

__version__ = "0.1.0"

__all__ = [
    "BuildOptions", "IlpModel", "build_model", "decode_placement", "encode_placement",
    "evaluate_point", "expected_counts", "objective_value",
    "DEFAULT_S_MAX", "Flavor", "FlavorCatalog", "LinkProps", "Scenario", "ScenarioError",
    "SfcRequest", "Topology", "VnfSpec", "load_bundle", "load_scenario",
    "load_scenario_files", "normalize_types", "save_scenario",
    "Placement", "PlacementError", "SfcMetrics", "Violation", "VnfAssignment",
    "brute_force", "validate_solution",
    "Budget", "INFEASIBLE", "ModelIntegrityError", "OPTIMAL", "SolveResult",
    "SolveStats", "SpaceTooLarge", "TIMED_OUT",
    "GenConfig", "SweepResult", "SweepRow", "SweepSummary", "generate", "run_sweep",
    "trend_rho", "write_rows_csv", "write_summary_csv",
    "greedy_first_fit", "lower_bound", "propagate", "solve", "solve_bnb", "solve_scenario",
]
