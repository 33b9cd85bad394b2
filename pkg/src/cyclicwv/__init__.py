"""
Polarization-based weak-value angular-velocity metrology with recycling cavities.

Sub-modules
===========
jones      -- polarization states, evolution operators, weak values
meter      -- Gaussian temporal pointer, detected profiles, filter survival
recycling  -- power/signal/dual recycling gains and the traversal-sum engine
metrology  -- Fisher information, Cramer-Rao bounds, SNR, QFI, Monte Carlo
cli        -- command-line sweeps and reports
"""

from .errors import (
    ConvergenceError,
    CyclicWVError,
    DegenerateCavity,
    DegenerateSelection,
    DomainError,
    EmptyProfile,
    RegimeWarning,
    TruncationError,
    WeakValueSingular,
)
from .jones import LinearOperator2, PolarizationState, SelectionAngles, measurement_operator, u_phi, u_w, weak_value
from .meter import (
    DetectionProfile,
    GaussianPulse,
    SampledAmplitude,
    TimeGrid,
    centroid_shift,
    detected_intensity_standard,
    filter_survival,
    sample_initial,
)
from .metrology import (
    EstimationResult,
    PrecisionReport,
    crb_angular_velocity,
    fisher_information,
    monte_carlo,
    qfi_conventional,
    snr,
)
from .recycling import (
    CavityConfig,
    ImprovementReport,
    detected_profile,
    factor_A,
    factor_B,
    factor_B_non,
    traversal_sum,
    walkoff_shift,
)

__version__ = "0.1.0"
