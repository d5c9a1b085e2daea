"""Exception types shared across the package.

Everything derives from ValueError or RuntimeError so callers that do not
care about the fine-grained category can still catch the usual suspects.
"""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition (names the argument)."""


class InvalidSpaceError(ValueError):
    """A design space definition is malformed (e.g. lower >= upper)."""


class DegenerateColumnError(ValueError):
    """A data column has zero variance where spread is required."""


class DomainError(ValueError):
    """A value falls outside the invertible domain of a transform."""


class InsufficientDataError(ValueError):
    """Too few rows to fit the requested estimator."""


class ArtifactFormatError(ValueError):
    """A file is not a recognized artifact or uses an unsupported version."""


class IllConditionedKernelError(RuntimeError):
    """A kernel matrix stayed non-positive-definite after jitter escalation."""


class TrainingDivergedError(RuntimeError):
    """Optimisation produced a non-finite loss; carries diagnostics."""

    def __init__(self, message: str, epoch: int | None = None,
                 batch: int | None = None, grad_norm: float | None = None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
        self.grad_norm = grad_norm
