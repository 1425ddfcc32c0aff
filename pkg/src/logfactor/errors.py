"""Exception hierarchy shared by all modules."""


class LogFactorError(Exception):
    pass


class ParameterError(LogFactorError, ValueError):
    """Invalid parameter (even L, bad grid, non-positive inputs...)."""


class DomainTruncationError(LogFactorError):
    """A requested level is not bound inside the numerical domain."""


class ProtocolDomainError(LogFactorError):
    """A factor <= K: negative or trivial radial index."""


class DecodeError(LogFactorError):
    """A measured energy is not within tolerance of any usable level."""


class InconsistencyError(LogFactorError):
    """A decoded factor does not divide N."""


class ContractError(LogFactorError):
    """An input violates a documented precondition (e.g. unnormalized basis)."""


class TruncationError(LogFactorError):
    """The state of interest lies outside the truncated two-boson basis."""


class StiffnessError(LogFactorError):
    """The amplitude integrator could not make progress."""


class NoMotionError(LogFactorError):
    """Orbit energy lies below the effective-potential minimum."""


class IntegratorAccuracyError(LogFactorError):
    """Conserved quantities drifted beyond tolerance."""
