"""Simulation and analysis of a two-pulse QND spin-squeezing protocol with an
intermediate spin rotation: closed-form variances, a linearized Gaussian
engine, seeded Monte Carlo measurement records, and an exact small-system
oracle."""

from .model import (
    ExperimentConfig,
    GaussianState,
    MeasurementRecord,
    PhysicalParams,
    RotationPulse,
    VarianceReport,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "GaussianState",
    "MeasurementRecord",
    "PhysicalParams",
    "RotationPulse",
    "VarianceReport",
    "validate",
    "__version__",
]
