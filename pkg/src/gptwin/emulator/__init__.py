"""Gaussian-process emulator: kernels, mean bases, fitting and prediction."""

from .gp import (
    EmulatorSpec,
    OptimizerSettings,
    TrainedEmulator,
    candidate_pool,
    cholesky_with_jitter,
    fit,
    fit_multioutput,
    lml_gradient,
    log_marginal_likelihood,
    predict,
    profile_lml,
)
from .kernels import KERNEL_KINDS, Kernel, kernel_eval, kernel_pool
from .means import MEAN_KINDS, MeanBasis, mean_pool

__all__ = [
    "EmulatorSpec",
    "OptimizerSettings",
    "TrainedEmulator",
    "candidate_pool",
    "cholesky_with_jitter",
    "fit",
    "fit_multioutput",
    "lml_gradient",
    "log_marginal_likelihood",
    "predict",
    "profile_lml",
    "KERNEL_KINDS",
    "Kernel",
    "kernel_eval",
    "kernel_pool",
    "MEAN_KINDS",
    "MeanBasis",
    "mean_pool",
]
