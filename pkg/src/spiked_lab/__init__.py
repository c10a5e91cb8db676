"""Rank-one spiked tensor estimation: algorithms, theory, experiments."""

from . import estimators, harness, linalg, model, tensors, theory
from .estimators import (
    EstimatorResult,
    MLBruteForce,
    PSDConstrainedPCA,
    RecursiveUnfolding,
    TensorAMP,
    TensorPowerIteration,
    Unfolding,
    WarmStartPower,
    amp,
    ml_bruteforce,
    power_iteration,
    psd_constrained_pca,
    recursive_unfold,
    unfold_estimate,
    warm_start,
)
from .harness import ExperimentConfig, RunRecord, aggregate, run_experiment
from .model import (
    SpikedInstance,
    correlation,
    loss,
    sample_matrix_observation,
    sample_side_info,
    sample_spiked,
    sample_v0,
)

__version__ = "0.1.0"
