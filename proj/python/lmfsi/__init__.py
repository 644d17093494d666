"""Low-Mach compressible flow around a small moving body: solvers, sweeps and verifiers."""

from ._lmfsi import (
    BodyMode,
    ConfigError,
    DomainError,
    FluidParams,
    GridSpec,
    InvalidStateError,
    PathKind,
    SolverConfig,
    SolverError,
    SweepConfig,
    alpha_of_eps,
    config_hash,
    cutoff_eta,
    load_config,
    parse_config,
    parse_sweep_csv,
    pressure,
    relative_energy,
    run,
    run_reference,
    run_sweep,
    sound_speed,
    sweep_csv,
    to_ini,
    verify,
    w12_gap,
)

__all__ = [name for name in dir() if not name.startswith("_")]
