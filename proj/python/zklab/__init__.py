"""Zakharov-Kuznetsov soliton numerics: ground state, profiles, evolution, modulation.

Planar fields are (n1, n2) arrays sampled on the centred box
[-box1/2, box1/2) x [-box2/2, box2/2).
"""

from ._core import (
    ConfigError,
    DependencyError,
    Modulation,
    NumericalError,
    PreconditionError,
    ProfileSet,
    RadialProfile,
    build_profiles,
    certify,
    check_config,
    config_hash,
    default_config,
    evolve,
    gagliardo_nirenberg_defect,
    invariants,
    run,
    solve_ground_state,
    theta,
    verbs,
)

__all__ = [
    "ConfigError",
    "DependencyError",
    "Modulation",
    "NumericalError",
    "PreconditionError",
    "ProfileSet",
    "RadialProfile",
    "build_profiles",
    "certify",
    "check_config",
    "config_hash",
    "default_config",
    "evolve",
    "gagliardo_nirenberg_defect",
    "invariants",
    "run",
    "solve_ground_state",
    "theta",
    "verbs",
]
