"""Exception hierarchy shared by every subpackage."""


class NeuralBayesError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NeuralBayesError, ValueError):
    """Invalid user-supplied configuration (priors, bounds, grids, ...)."""


class DomainError(NeuralBayesError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedDimensionError(DomainError):
    pass


class ModelError(NeuralBayesError):
    """A model could not be instantiated at a given parameter.

    Carries the offending parameter vector in ``theta``.
    """

    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


class NumericalError(NeuralBayesError):
    """Base class for numeric failures (CLI exit code 3)."""


class TrainingDivergedError(NumericalError):
    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch


class EvaluationError(NumericalError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class OracleFailureError(NumericalError):
    pass


class SamplerFailureError(NumericalError):
    pass


class ContractViolation(NeuralBayesError, ValueError):
    """Shape or dimension mismatch between an object and its input."""


class OrchestrationError(NeuralBayesError):
    pass


class ReproductionError(NeuralBayesError):
    """Re-running a manifest did not reproduce its outputs."""
