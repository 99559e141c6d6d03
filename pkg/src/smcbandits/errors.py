"""Exception types shared across the package."""


class BanditError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(BanditError):
    """An argument violates a structural precondition (shape, normalization, emptiness)."""


class DomainError(BanditError):
    """A parameter lies outside the mathematical domain of an operation."""


class NumericError(BanditError):
    """A numeric routine left its valid domain (non-SPD matrix, singular system)."""


class DegenerateWeightsError(NumericError):
    """Every particle weight collapsed to zero; callers may recover with uniform weights."""


class UnsupportedModelError(BanditError):
    """The requested combination of model and operation has no implementation."""


class ConfigurationError(BanditError):
    """An experiment configuration is inconsistent or incomplete."""
