"""Two-mode bosonic Fock sectors and particle-entanglement witnesses.

The package builds exact states of N bosons shared between two modes,
evaluates integrated correlation functions, Cauchy-Schwarz ratios,
number squeezing, quantum Fisher information, and spin squeezing, and
certifies the separable bounds of those witnesses by exact computation
and seeded stochastic sweeps. The `bosewit` command line exposes the
same machinery for batch work.
"""

from ._version import __version__
from .errors import (
    BosewitError,
    DegenerateLocalCorrelation,
    DimensionMismatch,
    EigendecompositionFailure,
    EmptyState,
    IncompletePovm,
    NegativeElement,
    NonHermitianInput,
    OrderTooHigh,
    PovmError,
    SectorTooLarge,
    StateSpecError,
    UnknownLabel,
    WitnessError,
    ZeroMeanSpinDirection,
)
from .fock import (
    DEFAULT_N_MAX,
    FockVector,
    GeneratorSpec,
    NumberSectorMixture,
    SectorDensity,
    aligning_rotation_axis,
    angular_moments,
    basis_state,
    generator_matrix,
    hermitian_eig,
    mixture_expectation,
    normally_ordered_moment,
    rotate,
    twin_fock,
)
from .povm import (
    OutcomeRegion,
    PovmElement,
    PovmSet,
    PovmValidation,
    SingleParticleState,
    csi_povm,
    integrated_gm_separable,
    random_complete_povm,
    region_response,
    second_quantized_g2,
    validate_povm,
)
from .scan import run_scan
from .separable import (
    PRNG_NAME,
    CoherentSpinState,
    FluctuatingEnsemble,
    NumberDistribution,
    SeparableEnsemble,
    analytic_spin_moments,
    ensemble_to_state,
    maximize_witness,
    sample_ensemble,
    sample_fluctuating_ensemble,
    to_fock,
)
from .statespec import StateSpec, parse_state_file, parse_state_text
from .witnesses import (
    WITNESS_TOLERANCE,
    CorrelationIntegrals,
    WitnessReport,
    classify,
    csi_objective,
    csi_ratio,
    integrated_g2m,
    number_squeezing_direct,
    number_squeezing_from_g2,
    number_squeezing_symmetric,
    qfi,
    qfi_objective,
    spin_squeezing,
    squeezing_objective,
    twin_fock_csi_approx,
    twin_fock_csi_exact,
)

__all__ = [
    "__version__",
    "BosewitError",
    "DegenerateLocalCorrelation",
    "DimensionMismatch",
    "EigendecompositionFailure",
    "EmptyState",
    "IncompletePovm",
    "NegativeElement",
    "NonHermitianInput",
    "OrderTooHigh",
    "PovmError",
    "SectorTooLarge",
    "StateSpecError",
    "UnknownLabel",
    "WitnessError",
    "ZeroMeanSpinDirection",
    "DEFAULT_N_MAX",
    "FockVector",
    "GeneratorSpec",
    "NumberSectorMixture",
    "SectorDensity",
    "aligning_rotation_axis",
    "angular_moments",
    "basis_state",
    "generator_matrix",
    "hermitian_eig",
    "mixture_expectation",
    "normally_ordered_moment",
    "rotate",
    "twin_fock",
    "OutcomeRegion",
    "PovmElement",
    "PovmSet",
    "PovmValidation",
    "SingleParticleState",
    "csi_povm",
    "integrated_gm_separable",
    "random_complete_povm",
    "region_response",
    "second_quantized_g2",
    "validate_povm",
    "run_scan",
    "PRNG_NAME",
    "CoherentSpinState",
    "FluctuatingEnsemble",
    "NumberDistribution",
    "SeparableEnsemble",
    "analytic_spin_moments",
    "ensemble_to_state",
    "maximize_witness",
    "sample_ensemble",
    "sample_fluctuating_ensemble",
    "to_fock",
    "StateSpec",
    "parse_state_file",
    "parse_state_text",
    "WITNESS_TOLERANCE",
    "CorrelationIntegrals",
    "WitnessReport",
    "classify",
    "csi_objective",
    "csi_ratio",
    "integrated_g2m",
    "number_squeezing_direct",
    "number_squeezing_from_g2",
    "number_squeezing_symmetric",
    "qfi",
    "qfi_objective",
    "spin_squeezing",
    "squeezing_objective",
    "twin_fock_csi_approx",
    "twin_fock_csi_exact",
]
