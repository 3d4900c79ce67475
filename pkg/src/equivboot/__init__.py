"""Constrained parametric bootstrap test for equivalence of two multinomials.

Tests ``H0: ||p - q|| >= eps`` against ``H1: ||p - q|| < eps`` for the L1,
L-infinity and Euclidean norms.
"""

__version__ = "0.1.0"

from .asymptotics import CovMatrix, covariance_sigma, limit_quantile, sample_limit_T
from .bootstrap import TestReport, empirical_quantile, equivalence_test
from .config import SolverConfig, TestConfig
from .estimation import BootstrapParams, ConstrainedFit, constrained_mle, log_likelihood, mle, select_bootstrap_params
from .norms import ActiveSets, active_sets, directional_derivative, norm_eval
from .sampling import RngStream, derive_stream, multinomial_sample
from .simplex import CountVector, NormKind, ProbVector, theta, validate_prob
from .simulation import Scenario, SweepResult, rejection_probability, scenario_vectors, sweep

__all__ = [
    "ActiveSets", "BootstrapParams", "ConstrainedFit", "CountVector", "CovMatrix", "NormKind", "ProbVector",
    "RngStream", "Scenario", "SolverConfig", "SweepResult", "TestConfig", "TestReport", "active_sets",
    "constrained_mle", "covariance_sigma", "derive_stream", "directional_derivative", "empirical_quantile",
    "equivalence_test", "limit_quantile", "log_likelihood", "mle", "multinomial_sample", "norm_eval",
    "rejection_probability", "sample_limit_T", "scenario_vectors", "select_bootstrap_params", "sweep", "theta",
    "validate_prob",
]
