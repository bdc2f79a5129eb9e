"""Exception hierarchy shared by the library and the command line."""


class CfglError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CfglError, ValueError):
    """Invalid run configuration. ``line`` is the 1-based source line, if known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ShapeError(CfglError, ValueError):
    """Array lengths do not match what an operation requires."""


class DomainError(CfglError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ResourceError(CfglError, MemoryError):
    """Allocation of a dense operator failed."""


class NumericalError(CfglError, ArithmeticError):
    """Base for numerical failures (exit code 3 on the command line)."""


class PoleError(NumericalError):
    """Gamma function evaluated at a non-positive integer."""


class GammaOverflowError(NumericalError, OverflowError):
    pass


class ImaginaryFrequencyError(NumericalError):
    """The dispersion radicand is not positive at the requested wavenumber."""

    def __init__(self, message, cutoff=None):
        self.cutoff = cutoff
        super().__init__(message)


class NegativeRadicandError(NumericalError):
    """No real plane-wave amplitude exists at this wavenumber."""


class ConditionUndefinedError(NumericalError):
    """The stability inequality cannot be evaluated (zero imaginary nonlinearity)."""


class SingularSystemError(NumericalError):
    pass


class NonConvergenceError(NumericalError):
    """Fixed-point iteration on the nonlinear term did not converge."""

    trajectory = None


class BlowUpError(NumericalError):
    """Evolution aborted by the growth guard.

    The partial trajectory up to the failing step is kept in ``trajectory`` so
    callers can still flush it to disk.
    """

    def __init__(self, message, trajectory=None):
        self.trajectory = trajectory
        super().__init__(message)


class DivergenceError(NumericalError):
    """Network simulation produced non-finite or runaway membrane potentials."""

    def __init__(self, message, trajectory=None):
        self.trajectory = trajectory
        super().__init__(message)
