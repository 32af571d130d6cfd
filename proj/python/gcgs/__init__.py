"""Conditional gradient splitting solvers for regularized transport and elastic-net."""

from ._gcgs import (
    ConvergenceError,
    DomainError,
    Error,
    StallError,
    UsageError,
    knn_laplacian,
    project_l1,
    run_cli,
    sinkhorn,
    solve_enet,
    solve_ot,
    transport_lmo,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "Error",
    "StallError",
    "UsageError",
    "knn_laplacian",
    "project_l1",
    "run_cli",
    "sinkhorn",
    "solve_enet",
    "solve_ot",
    "transport_lmo",
]
