"""Variational Monte Carlo dynamics of open spin lattices with an MPO ansatz."""

from ._tvmpo import (
    MpoAnsatz,
    RunConfig,
    amplitude,
    compare_runs,
    correlator,
    load_checkpoint,
    magnetization,
    min_eigenvalue,
    parse_config,
    parse_config_string,
    product_state,
    purity,
    reconstruct_dense,
    renormalize_trace,
    renyi2,
    resolved_config,
    resume,
    run,
    save_checkpoint,
    structure_factor,
    trace_of_rho,
)

__all__ = [
    "MpoAnsatz",
    "RunConfig",
    "amplitude",
    "compare_runs",
    "correlator",
    "load_checkpoint",
    "magnetization",
    "min_eigenvalue",
    "parse_config",
    "parse_config_string",
    "product_state",
    "purity",
    "reconstruct_dense",
    "renormalize_trace",
    "renyi2",
    "resolved_config",
    "resume",
    "run",
    "save_checkpoint",
    "structure_factor",
    "trace_of_rho",
]

__version__ = "0.1.0"
