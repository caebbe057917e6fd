"""Exception and warning types shared across the package."""


class MsgflowError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(MsgflowError, ValueError):
    """A system description or query violates a structural precondition."""


class SpecParseError(MsgflowError, ValueError):
    """A serialized system, expression, or report could not be parsed."""


class ExpressionTypeError(MsgflowError, TypeError):
    """An operator was applied to values outside its domain."""


class NonAffineError(MsgflowError):
    """A node function is not affine, so the linear-Gaussian backend cannot handle it."""


class BudgetExceededError(MsgflowError):
    """Exact enumeration would exceed the configured realization budget."""


class SearchSpaceError(MsgflowError):
    """Too many conditioning candidates for exhaustive subset search."""


class InvariantViolation(MsgflowError):
    """A verified structural property failed to hold; indicates a model or library bug."""


class NoPathFound(MsgflowError):
    """The target node is not reachable from the inputs along flow-carrying edges."""


class ModelViolationAtInput(MsgflowError):
    """A chain of flow-carrying edges reached a time-0 node that is not an input."""


class DegenerateTestWarning(UserWarning):
    """A permutation test had no freedom to permute; its p-value is reported as 1."""


class DependentMessagesWarning(UserWarning):
    """Two analyzed messages are statistically dependent; their flows may be confounded."""


class ContinuousSamplingWarning(UserWarning):
    """Trials were drawn from a continuous system; the discrete CI tests will reject them."""
