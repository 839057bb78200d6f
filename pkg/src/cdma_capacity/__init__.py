"""Capacity of the noise-free CDMA downlink under a bare sign-slicer receiver.

Two halves: `theory` solves the large-system saddle-point capacity curve,
`simulator` counts surviving codewords exhaustively at finite size. The
`cli` module ties them together and emits reproducible CSV artifacts.
"""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, ResourceLimitError
from .simulator import (
    CorrelationMatrix,
    SimulationSummary,
    SpreadingMatrix,
    TiePolicy,
    TrialResult,
    correlate,
    count_valid_fast,
    count_valid_naive,
    derive_trial_seed,
    generate_spreading,
    is_valid,
    matched_filter,
    run_simulation,
    run_trial,
)
from .theory import (
    DEFAULT_GRID,
    CapacityCurve,
    GridSpec,
    SaddleSolution,
    SolverConfig,
    capacity,
    g_gradient,
    g_value,
    gaussian_tail,
    q_ratio,
    solve_saddle,
    sweep,
)

__all__ = [
    "__version__",
    "ConvergenceError",
    "DomainError",
    "ResourceLimitError",
    "CorrelationMatrix",
    "SimulationSummary",
    "SpreadingMatrix",
    "TiePolicy",
    "TrialResult",
    "correlate",
    "count_valid_fast",
    "count_valid_naive",
    "derive_trial_seed",
    "generate_spreading",
    "is_valid",
    "matched_filter",
    "run_simulation",
    "run_trial",
    "DEFAULT_GRID",
    "CapacityCurve",
    "GridSpec",
    "SaddleSolution",
    "SolverConfig",
    "capacity",
    "g_gradient",
    "g_value",
    "gaussian_tail",
    "q_ratio",
    "solve_saddle",
    "sweep",
]
