"""Exception types shared across the package."""


class ChiralDBSError(Exception):
    """Base class for all library errors."""


class ValidationError(ChiralDBSError, ValueError):
    """Raised when a parameter set violates one or more bounds.

    ``violations`` lists every failed check by code name, e.g.
    ``["NonPositiveKappa", "NegativeGamma"]``.
    """

    def __init__(self, violations, messages=None):
        self.violations = list(violations)
        self.messages = list(messages or violations)
        super().__init__("; ".join(self.messages))


class WrongBasis(ChiralDBSError, ValueError):
    pass


class NoBoundState(ChiralDBSError):
    """No Friedrich-Wintgen solution exists (8 g^2 < kappa^2)."""


class PhaseOutOfDomain(ChiralDBSError, ValueError):
    """A closed form that only holds at phi = 2 n pi was called elsewhere."""


class EmptyTrace(ChiralDBSError, ValueError):
    pass


class DimensionGuard(ChiralDBSError, ValueError):
    pass


class NumericalFailure(ChiralDBSError):
    """Base for failures the CLI maps to exit code 3."""


class PositivityViolation(NumericalFailure):
    pass


class DegenerateSteadyState(NumericalFailure):
    pass


class SingularSystem(NumericalFailure):
    pass


class ConfigError(ChiralDBSError, ValueError):
    """Malformed or inconsistent run configuration."""


class UniqueSteadyStateRequiresDrive(ConfigError):
    """Blockade observables were requested without a drive (Omega = 0)."""
