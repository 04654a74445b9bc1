"""Exception and warning types raised by nctvem."""


class NcTVEMError(Exception):
    """Base class for all errors raised by this package."""


class MeshFormatError(NcTVEMError, ValueError):
    """A mesh file could not be parsed.

    ``line`` is the 1-based line number of the offending record, when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MeshTopologyError(NcTVEMError, ValueError):
    """Mesh connectivity violates a structural invariant."""


class DegenerateElementError(NcTVEMError, ArithmeticError):
    """An element-local linear system is singular to working precision."""

    def __init__(self, message, element=None, hk=None, rcond=None):
        self.element = element
        self.hk = hk
        self.rcond = rcond
        super().__init__(message)


class SolverError(NcTVEMError, ArithmeticError):
    """The global linear solve failed or is unreliable."""

    def __init__(self, message, rcond=None, admissibility=None):
        self.rcond = rcond
        self.admissibility = admissibility
        super().__init__(message)


class ConfigError(NcTVEMError, ValueError):
    """Invalid run configuration."""


class InadmissibleElementWarning(UserWarning):
    """h_K * kappa exceeds the threshold under which the projector is known to be well posed."""


class NegativeStabilizationWarning(UserWarning):
    """A D-recipe stabilization weight came out negative."""


class IllConditioningWarning(UserWarning):
    """A factorization is numerically close to singular."""
