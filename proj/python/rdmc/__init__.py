"""Python access to the rdmc solver, condition checks and validators."""

from ._rdmc import (
    ConfigError,
    check,
    compute_P1,
    compute_P2,
    main,
    params_hash,
    run,
    validate_lv,
    validate_reversible,
)

__all__ = [
    "ConfigError",
    "check",
    "compute_P1",
    "compute_P2",
    "main",
    "params_hash",
    "run",
    "validate_lv",
    "validate_reversible",
]
