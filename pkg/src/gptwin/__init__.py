"""Gaussian-process digital twin of a damped single-degree-of-freedom system.

The physical twin's stiffness and mass drift in slow time. Measured natural
frequencies are inverted in closed form into noisy stiffness/mass deltas,
and GP emulators selected by BIC track and forecast those deltas.
"""

from .dynamics import (
    COMPLEX_EIGENVALUE,
    DAMPED_FREQUENCY,
    EvolutionProfile,
    MeasurementSeries,
    NominalSystem,
    delta_k_true,
    delta_m_true,
    eigenvalue,
    eigenvalue_from_deltas,
    sample_measurements,
    sawtooth,
    slow_time_grid,
)
from .emulator import (
    EmulatorSpec,
    Kernel,
    MeanBasis,
    OptimizerSettings,
    TrainedEmulator,
    candidate_pool,
    fit,
    fit_multioutput,
    kernel_eval,
    lml_gradient,
    log_marginal_likelihood,
    predict,
)
from .errors import (
    ArgumentError,
    ConfigError,
    DomainError,
    NotPositiveDefiniteError,
    OptimizationFailedError,
    OverdampedError,
    PipelineError,
    SelectionFailedError,
    SingularInversionError,
)
from .inversion import DeltaEstimateSeries, invert_joint, invert_mass, invert_series, invert_stiffness
from .selection import ModelSelectionReport, bic_score, select_model

__version__ = "0.1.0"
