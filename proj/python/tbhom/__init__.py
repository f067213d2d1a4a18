"""Taylor-Bloch homogenization: correctors, dispersion, wave and elliptic experiments."""

from ._core import (
    ConfigurationError,
    ExperimentConfig,
    NumericalError,
    build_correctors,
    fitted_order,
    gaussian_data,
    moment_M,
    oracle_lambdas,
    run_experiment,
    validate,
)

__all__ = [
    "ConfigurationError",
    "ExperimentConfig",
    "NumericalError",
    "build_correctors",
    "fitted_order",
    "gaussian_data",
    "moment_M",
    "oracle_lambdas",
    "run_experiment",
    "validate",
]
