"""Exception and warning types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ToolkitError):
    """Input violates a documented precondition or type invariant."""


class InvalidWord(ValidationError):
    """A cylinder word contains a letter outside 1..m."""


class MissingOscSet(ValidationError):
    """Operation requires a declared open-set-condition set."""


class BudgetExceeded(ToolkitError):
    """Requested resolution would exceed the configured atom/element budget."""


class EmptyMeasure(ValidationError):
    """Operation requires a measure with at least one atom."""


class DomainError(ToolkitError):
    """Argument lies outside the mathematical domain of a formula or mesh."""


class CoverageError(ToolkitError):
    """An atom is not covered by any supplied chart."""


class AssemblyError(ToolkitError):
    """A matrix factorization or solve failed (indefinite/singular system)."""


class Unsupported(ValidationError):
    """Requested regime is documented as unsupported by this operation."""


class NumericalError(ToolkitError):
    """A computed quantity violates a guaranteed numerical bound."""


class OscWarning(UserWarning):
    """Heuristic open-set-condition verification failed; results may be off."""


class ConsistencyWarning(UserWarning):
    """Two independent condition checks disagree beyond tolerance."""


class BoundaryAtomWarning(UserWarning):
    """Atoms on the Dirichlet boundary were dropped from a quadrature."""


class ReliabilityWarning(UserWarning):
    """A radius ladder probes below the approximation's resolution floor."""
