"""Exception hierarchy shared by all modules.

`ConfigError` maps to CLI exit code 2, every `NumericalError` to exit code 3.
"""


class ConfigError(ValueError):
    """Invalid configuration or parameters."""


class ContractError(ValueError):
    """An input violates an operation's precondition (shape, hermiticity...)."""


class DomainError(ValueError):
    """A scalar argument is outside the domain of the operation."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


class PoleError(NumericalError):
    """Evaluation point sits on (or numerically at) a pole."""


class BranchCollapseError(NumericalError):
    """The permittivity approached zero so log(eps) is undefined."""


class StiffnessError(NumericalError):
    """Step refinement exhausted without meeting the tolerance."""
