"""Quantum emitter in a chiral-exceptional-point microring: bound states, spectra, dynamics."""
from .errors import (
    ChiralDBSError,
    ConfigError,
    DegenerateSteadyState,
    DimensionGuard,
    EmptyTrace,
    NoBoundState,
    NumericalFailure,
    PhaseOutOfDomain,
    PositivityViolation,
    SingularSystem,
    UniqueSteadyStateRequiresDrive,
    ValidationError,
    WrongBasis,
)
from .model import DriveParams, SystemParams, params_from_dict, validate, wrap_phase
from .single_excitation import (
    Branch,
    build_mc,
    build_ms,
    eigensystem,
    evolve,
    fw_solutions,
    fw_solve,
    vacancy_condition,
)
from .spectra import PeakDescriptor, SpectrumTrace, find_peaks, se_spectrum

__version__ = "0.1.0"
