"""Continuous-time dynamical-system SAT/MaxSAT solver."""

from .bench import (ExperimentReport, ExperimentSpec, OracleBoundError, brute_force_oracle,
                    fit_scaling, run_experiment)
from .dynamics import (CTDSField, Constant, Delayed, Exponential, Saturating, State,
                       build_mode, clause_value, grad_term, potential, rhs_a, rhs_s)
from .formula import (Assignment, Formula, FormulaError, emit_dimacs, evaluate, parse_dimacs,
                      project_assignment, random_ksat, reduce_to_3sat)
from .integrator import IntegratorConfig, StepUnderflow, Trajectory, integrate, lookup
from .solver import SolveResult, SolverConfig, SolverFailure, Status, ensemble_solve, solve

__version__ = "0.1.0"

__all__ = [
    "Assignment", "CTDSField", "Constant", "Delayed", "ExperimentReport", "ExperimentSpec",
    "Exponential", "Formula", "FormulaError", "IntegratorConfig", "OracleBoundError",
    "Saturating", "SolveResult", "SolverConfig", "SolverFailure", "State", "Status",
    "StepUnderflow", "Trajectory", "brute_force_oracle", "build_mode", "clause_value",
    "emit_dimacs", "ensemble_solve", "evaluate", "fit_scaling", "grad_term", "integrate",
    "lookup", "parse_dimacs", "potential", "project_assignment", "random_ksat",
    "reduce_to_3sat", "rhs_a", "rhs_s", "run_experiment", "solve",
]
