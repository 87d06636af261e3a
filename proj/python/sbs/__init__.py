"""Bandit learning dynamics on graphs.

Thin Python layer over the C++ core: graph builders, the exact simulator,
the mean-field ODE and the analysis helpers.
"""

from ._core import (
    GenerationError,
    Graph,
    ModelParams,
    ValidationError,
    complete,
    convergence_bound,
    coupling_error,
    cycle,
    disjoint_cliques,
    drift,
    estimate_learnability,
    from_edges,
    gambler_ruin,
    integrate,
    random_regular,
    simulate,
    wilson_interval,
)

__all__ = [
    "GenerationError",
    "Graph",
    "ModelParams",
    "ValidationError",
    "complete",
    "convergence_bound",
    "coupling_error",
    "cycle",
    "disjoint_cliques",
    "drift",
    "estimate_learnability",
    "from_edges",
    "gambler_ruin",
    "integrate",
    "random_regular",
    "simulate",
    "wilson_interval",
]
