"""Numerical lab for the T-PAW (temporary power-adjusting withholding) attack."""

from ._backend import NAME as BACKEND
from .analytics import (
    CycleExpectations,
    Entity,
    RevenueReport,
    TemporalMetrics,
    cycle_expectations,
    honest_report,
    profit_lag,
    rer,
    revenue_change,
    revenue_change_at_t1,
    revenue_report,
    temporal_metrics,
)
from .errors import (
    ConstraintViolation,
    DivisionByZero,
    DomainError,
    InfeasibleObjective,
    NumericalFailure,
    RateMismatch,
    TPAWError,
)
from .model import EnvironmentParams, Strategy, derive_constants, validate_environment
from .optimizer import Objective, ObjectiveKind, OptimizationResult, maximize, sweep_optimize
from .simulator import CycleSample, TerminalCase, estimate_ratios, simulate_cycle, simulate_timeline
from .special import exp_integral_e1, scaled_e1, share_terms
from .variants import Variant, VariantKind, make_variant, paw_exact_report

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
