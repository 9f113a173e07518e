"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError exits 2, every other
GreenlexError (and any unexpected exception) exits 3.
"""


class GreenlexError(Exception):
    """Base class for package-specific failures."""


class ValidationError(GreenlexError):
    """Malformed input data, configuration, or arguments."""


class FormatError(GreenlexError):
    """A binary artifact is truncated, corrupt, or has an unknown version."""


class TrainingDivergedError(GreenlexError):
    """Non-finite loss or weights encountered during embedding training."""

    def __init__(self, message: str, epoch: int, step: int, learning_rate: float):
        super().__init__(
            f"{message} (epoch={epoch}, step={step}, learning_rate={learning_rate:.6g})"
        )
        self.epoch = epoch
        self.step = step
        self.learning_rate = learning_rate


class SeparationError(GreenlexError):
    """Logit likelihood is unbounded because the data are perfectly separable."""


class EstimationError(GreenlexError):
    """A design matrix or estimator failed a rank, support, or size requirement."""
