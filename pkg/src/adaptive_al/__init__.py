"""Adaptive augmented Lagrangian methods for bound-constrained nonlinear programs."""

from .nlp_core import (
    ConfigurationError,
    DomainError,
    EvaluationError,
    InternalError,
    Problem,
    project,
    prescale,
    residuals,
)
from .solver import SolveReport, SolverConfig, SolveStatus, VARIANTS, solve, solve_tr, variant_config
from .problems import builtin_problems, get_problem

__all__ = [
    "ConfigurationError",
    "DomainError",
    "EvaluationError",
    "InternalError",
    "Problem",
    "project",
    "prescale",
    "residuals",
    "SolveReport",
    "SolverConfig",
    "SolveStatus",
    "VARIANTS",
    "solve",
    "solve_tr",
    "variant_config",
    "builtin_problems",
    "get_problem",
]
