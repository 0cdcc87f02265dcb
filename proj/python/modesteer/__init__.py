"""Spectral simulation and finite-mode control synthesis for semilinear
parabolic PDEs on the d-dimensional torus."""

from ._core import (  # noqa: F401
    Frequency,
    TrigField,
    NonlinearitySpec,
    SolverConfig,
    Trajectory,
    ImpulseResult,
    __version__,
    grid_apply,
    resolve,
    validate_set,
    is_generator,
    gcd_determinant,
    grow_once,
    saturate,
    impulse,
    limit_study,
    plan,
    run_scenario,
    run_acceptance,
)
