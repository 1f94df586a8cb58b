"""Fisher information for a scalar parameter embedded in many optical phases,
probed by an entangled squeezed-vacuum plus coherent-state Gaussian probe."""

from .circuit import PhaseModel, SensorConfig, output_moments, receiver_elements
from .errors import (
    DegenerateRegimeError,
    EstimationError,
    InvalidArgumentError,
    NumericalError,
    TruncationError,
)
from .fisher import (
    FisherReport,
    Prefactors,
    cfi_components,
    cfi_mode1,
    cfi_mode2,
    cfi_mode3,
    cfi_numeric,
    fisher_report,
    optimize_energy_allocation,
    qfi,
    sigma_opt,
)
from .phase_space import GaussianState, LossChannel, PassiveUnitary, Symplectic

__all__ = [
    "DegenerateRegimeError", "EstimationError", "FisherReport", "GaussianState",
    "InvalidArgumentError", "LossChannel", "NumericalError", "PassiveUnitary",
    "PhaseModel", "Prefactors", "SensorConfig", "Symplectic", "TruncationError",
    "cfi_components", "cfi_mode1", "cfi_mode2", "cfi_mode3", "cfi_numeric",
    "fisher_report", "optimize_energy_allocation", "output_moments", "qfi",
    "receiver_elements", "sigma_opt",
]
