"""Variational Bayes test of homogeneity for two-component normal mixtures."""

from .asymptotics import alpha_star, asymptote_per_sample, deterministic_term
from .hypothesis import TestReport, p_value, run_test, threshold
from .model import Hyperparameters, MixtureParams, Responsibilities, Sample, free_energy_gap
from .solver import SolverConfig, VBState, solve

__all__ = [
    "Hyperparameters",
    "MixtureParams",
    "Responsibilities",
    "Sample",
    "SolverConfig",
    "TestReport",
    "VBState",
    "alpha_star",
    "asymptote_per_sample",
    "deterministic_term",
    "free_energy_gap",
    "p_value",
    "run_test",
    "solve",
    "threshold",
]

__version__ = "0.1.0"
