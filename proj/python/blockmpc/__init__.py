"""Real-time iteration NMPC with input move blocking."""

from ._blockmpc import (
    BlockStructure,
    ConfigError,
    IntegrationDiverged,
    InvalidBlockStructure,
    __version__,
    bench_condensing,
    build_T,
    compare,
    condense_random,
    flop_count,
    integrate_pendulum,
    pendulum_jacobians,
    pendulum_rhs,
    simulate,
    solve_qp,
)

__all__ = [
    "BlockStructure",
    "ConfigError",
    "IntegrationDiverged",
    "InvalidBlockStructure",
    "__version__",
    "bench_condensing",
    "build_T",
    "compare",
    "condense_random",
    "flop_count",
    "integrate_pendulum",
    "pendulum_jacobians",
    "pendulum_rhs",
    "simulate",
    "solve_qp",
]
