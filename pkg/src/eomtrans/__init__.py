"""Frequency-domain model and calibration toolkit for a three-mode
electro-optomechanical microwave-to-optics transducer."""

__version__ = "0.1.0"

from .params import (  # noqa: F401
    DeviceParams,
    DriveConfig,
    DerivedDrive,
    HeatingModel,
    HeatingResult,
    apply_heating,
    bose_occupancy,
    default_drive,
    derive,
    intracavity_photons,
    optomechanical_damping,
    power_for_photon_number,
    susceptibility,
    table_defaults,
)
from .network import (  # noqa: F401
    ScatteringMatrix,
    SystemMatrices,
    OutputCoefficients,
    analytic_coefficients,
    build_matrices,
    commutator_residuals,
    scattering_at,
)
from .transduction import (  # noqa: F401
    ConversionPoint,
    backaction_phonon_floor,
    bandwidth,
    conversion_gain,
    decompose,
    frequency_shift,
    simulate_calibrated_measurement,
    theta_lorentzian,
    zeta_full,
    zeta_resolved_limit,
)
from .noise import (  # noqa: F401
    BathOccupancies,
    NoiseBudget,
    added_noise_full,
    added_noise_simplified,
    added_noise_vacuum,
    amplifier_referred_noise,
    output_spectrum,
)
from .fom import (  # noqa: F401
    ModulatorReport,
    energy_per_bit,
    modulator_report,
    phonon_number,
    theta31,
    v_pi,
)
from .fitting import FitResult  # noqa: F401
from .calib import SetupModel, SyntheticSpectrum, quantum_efficiency_model  # noqa: F401
from .errors import (  # noqa: F401
    ConfigError,
    DomainError,
    EomtransError,
    FitConvergenceError,
    InstabilityError,
)
