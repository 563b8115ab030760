"""Exception types shared across the package."""


class LAlgebraError(Exception):
    """Base class for all package-specific errors."""


class MalformedTable(LAlgebraError):
    """Table data is structurally invalid (wrong shape, entry out of range)."""


class NotAnLAlgebra(LAlgebraError):
    """An operation requiring a valid L-algebra received a table that is not one."""


class IndexOutOfRange(LAlgebraError):
    """An element index lies outside the algebra's universe."""


class NotProper(LAlgebraError):
    """The ideal must be proper (different from the whole algebra)."""


class NotAnIdeal(LAlgebraError):
    """A subset expected to be an ideal is not."""


class NotRhoIdeal(LAlgebraError):
    """The ideal is not stable under the action."""


class CongruenceUndefined(LAlgebraError):
    """The relation x ~ y  <=>  x.y in I and y.x in I failed to be a congruence.

    Raised instead of silently producing a bogus quotient.
    """


class ActionInvalid(LAlgebraError):
    """The given map family is not an operation (endomorphism, unit or
    compatibility axiom fails)."""


class ActionClassTooWeak(LAlgebraError):
    """The operation does not satisfy the laws required by the construction
    (e.g. a symmetric semidirect product needs a CKL-class operation)."""


class BaseMismatch(LAlgebraError):
    """Two words over different base algebras were combined."""


class BudgetExceeded(LAlgebraError):
    """A bounded word computation ran past its length budget.

    This is a semi-decision signal, not a failure: the result is unknown
    within the configured budget.
    """

    def __init__(self, message: str = "word length budget exceeded", length: int = 0, budget: int = 0):
        super().__init__(message)
        self.length = length
        self.budget = budget


class ResourceBound(LAlgebraError):
    """A search exceeded its node or time budget.

    ``partial`` carries whatever was found before the budget ran out, so the
    caller can inspect it; results are flagged, never silently truncated.
    """

    def __init__(self, message: str, partial=None, nodes: int = 0):
        super().__init__(message)
        self.partial = partial
        self.nodes = nodes


class PropertyFalsified(LAlgebraError):
    """A cross-checked structural property failed on a concrete instance.

    These checks guard statements that should hold for every valid input;
    raising keeps a falsifying instance from passing silently.
    """
