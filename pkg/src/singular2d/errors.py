"""Exception hierarchy shared by all subpackages.

The command line maps :class:`ConfigError` to exit status 2 and
:class:`NumericError` to exit status 3.
"""


class Singular2dError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(Singular2dError, ValueError):
    """Malformed user input: expressions, parameters, ranges, config files."""


class ParseError(ConfigError):
    """Syntax error in a nonlinearity expression.

    Attributes
    ----------
    offset : int
        Byte offset (UTF-8) of the offending token in the source text.
    """

    def __init__(self, message: str, offset: int):
        super().__init__("%s at offset %d" % (message, offset))
        self.offset = offset


class UnknownIdentifierError(ConfigError):
    pass


class ParameterError(ConfigError):
    pass


class NumericError(Singular2dError, ArithmeticError):
    """A computation could not reach its stated accuracy."""


class DomainError(NumericError, ValueError):
    """Evaluation outside the domain of a subexpression (e.g. log of a
    non-positive value)."""


class JetOverflowError(NumericError, OverflowError):
    """A jet component exceeded the float range; the caller should use the
    log-space formulas instead."""


class InadmissibleSpecError(ConfigError):
    """The nonlinearity cannot be used by singular-solution routines, e.g.
    a pure exponential with H identically zero."""


class ConvergenceError(NumericError):
    """An iteration (Newton, extrapolation, quadrature) failed to converge.

    Attributes
    ----------
    diagnostics : dict
        Samples or residuals that document the failure.
    """

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class IntegrationError(NumericError):
    """ODE integration failed (step-size underflow, blow-up, missing zero).

    Attributes
    ----------
    last_x : float or None
        Last independent-variable value reached with a valid state.
    """

    def __init__(self, message: str, last_x=None):
        super().__init__(message)
        self.last_x = last_x
