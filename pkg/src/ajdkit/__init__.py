"""Diagonality measures, diagonal projections and joint diagonalization of HPD matrices.

Submodules
----------
linalg       HPD checks, matrix functions, divergences, vec/commutation helpers
measures     diagonality measures and their closed forms and series
projections  closest positive diagonal matrix under several criteria
ajd          log-det alpha joint diagonalization by a shifted Newton method
baselines    Pham's Jadiag and Uwedge
means        AJD-based geometric and power means
bench        synthetic separation benchmark
io           JSON matrix format
cli          command-line entry point
"""

__version__ = "0.1.0"

from .linalg import (
    ConvergenceWarning,
    DimensionError,
    DomainError,
    NotHPDError,
    as_hpd,
    is_hpd,
    logdet_alpha_divergence,
    riemannian_distance,
)
from .measures import KINDS, all_measures, diagonality
from .projections import CRITERIA, closest_diagonal, true_diagonality
from .ajd import AjdProblem, SolveOptions, SolveResult, cost, gradient, quadratic_model, solve
from .baselines import jadiag, uwedge
from .means import ajd_mean
from .bench import ScenarioConfig, amari_moreau, generate_dataset, run_experiment

__all__ = [
    "AjdProblem",
    "CRITERIA",
    "ConvergenceWarning",
    "DimensionError",
    "DomainError",
    "KINDS",
    "NotHPDError",
    "ScenarioConfig",
    "SolveOptions",
    "SolveResult",
    "ajd_mean",
    "all_measures",
    "amari_moreau",
    "as_hpd",
    "closest_diagonal",
    "cost",
    "diagonality",
    "generate_dataset",
    "gradient",
    "is_hpd",
    "jadiag",
    "logdet_alpha_divergence",
    "quadratic_model",
    "riemannian_distance",
    "run_experiment",
    "solve",
    "true_diagonality",
    "uwedge",
]
