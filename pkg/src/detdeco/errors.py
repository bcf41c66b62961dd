"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a model or formula."""


class TruncationError(ValueError):
    """The Fock cutoff is too small for the requested accuracy."""


class QuadratureError(RuntimeError):
    """A numerical phase-space integral failed its convergence check."""


class TruncationWarning(UserWarning):
    """A truncated series still carries a non-negligible tail."""


class ConditioningWarning(UserWarning):
    """A tomographic probe set does not constrain the POVM well."""
