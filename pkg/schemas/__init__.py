"""Shared result/config types, error classes and the JSON schemas of emitted reports."""

from pathlib import Path

from schemas.errors import ConvergenceError, DomainError, SpikeTestError, ValidationError
from schemas.types import (
    AspectRatio,
    DistSpec,
    ExperimentConfig,
    KappaPanel,
    ModelSpec,
    MomentProfile,
    PowerPrediction,
    QuadPolicy,
    SeriesConstants,
    SeriesPolicy,
    SpikeSpec,
    StatisticSummary,
    SummaryReport,
    TestCalibration,
    TestReport,
)

SCHEMA_DIR = Path(__file__).resolve().parent

__all__ = [
    "SCHEMA_DIR",
    "AspectRatio",
    "ConvergenceError",
    "DistSpec",
    "DomainError",
    "ExperimentConfig",
    "KappaPanel",
    "ModelSpec",
    "MomentProfile",
    "PowerPrediction",
    "QuadPolicy",
    "SeriesConstants",
    "SeriesPolicy",
    "SpikeSpec",
    "SpikeTestError",
    "StatisticSummary",
    "SummaryReport",
    "TestCalibration",
    "TestReport",
    "ValidationError",
]
