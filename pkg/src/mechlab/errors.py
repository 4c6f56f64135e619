"""Exception hierarchy shared by all mechlab modules."""


class MechlabError(Exception):
    """Base class for every error raised by mechlab."""


class DimensionError(MechlabError, ValueError):
    """Vectors or distributions disagree on the number of items."""


class ParseError(MechlabError, ValueError):
    """A serialized instance, menu or pricing could not be read."""


class InvariantError(MechlabError, ValueError):
    """A well-formed object violates a domain invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class GuardError(MechlabError, RuntimeError):
    """An exhaustive computation would exceed its configured size limit."""


class InfeasibleError(MechlabError, ArithmeticError):
    """A linear program (or a construction built on one) has no solution."""


class UnboundedError(MechlabError, ArithmeticError):
    """A linear program has an unbounded objective."""
