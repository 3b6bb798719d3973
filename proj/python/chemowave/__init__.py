"""Damped chemotaxis on the half-line: diffusion waves, corrections, solver runs."""

from ._core import (
    CorrectionField,
    ModelParams,
    PressureLaw,
    __version__,
    correction_a,
    correction_b,
    eval_correction,
    fit_decay,
    q_prime,
    run,
    selfsimilar_profile,
    simulate,
    validate_params,
)

__all__ = [
    "CorrectionField",
    "ModelParams",
    "PressureLaw",
    "__version__",
    "correction_a",
    "correction_b",
    "eval_correction",
    "fit_decay",
    "q_prime",
    "run",
    "selfsimilar_profile",
    "simulate",
    "validate_params",
]
