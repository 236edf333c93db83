"""Exception types shared across the package."""


class PolycoeffError(Exception):
    """Base class for all errors raised by this package."""


class FieldMismatch(PolycoeffError, ValueError):
    pass


class CharacteristicError(PolycoeffError, ValueError):
    """The field characteristic is too small for the requested construction."""


class UnknownVariable(PolycoeffError, KeyError):
    def __str__(self):
        return self.args[0] if self.args else "unknown variable"


class IncompleteSubstitution(PolycoeffError, ValueError):
    pass


class ParseError(PolycoeffError, ValueError):
    pass


class StructureError(PolycoeffError, ValueError):
    """A circuit or formula violates a structural precondition."""


class ResourceError(PolycoeffError):
    """A configured size or time budget would be exceeded."""


class BudgetExceeded(ResourceError):
    pass


class RankLimitExceeded(ResourceError):
    pass


class SelfCheckFailed(PolycoeffError, AssertionError):
    """An internal consistency check failed (a witness or expansion did not re-verify)."""
