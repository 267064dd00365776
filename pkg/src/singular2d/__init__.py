"""Singular solutions and bifurcation diagrams of -Delta u = lambda f(u) in the unit disc.

Subpackages
-----------
nonlin     nonlinearities f = e^{g}: parsing, H, q, tail integrals
asym       asymptotic frame and expansion of the singular solution
ode        singular and regular solutions (compiled or pure-Python kernels)
bifurc     bifurcation curves, turning points, lambda_inf
lyap       energy and Lyapunov functionals along the singular solution
intersect  Hardy quotients, stability test, intersection numbers
"""

from .errors import (ConfigError, ConvergenceError, DomainError, InadmissibleSpecError,
                     IntegrationError, NumericError, Singular2dError)
from .nonlin import parse_nonlinearity

__version__ = "0.1.0"

__all__ = ["parse_nonlinearity", "Singular2dError", "ConfigError", "NumericError",
           "DomainError", "ConvergenceError", "IntegrationError", "InadmissibleSpecError",
           "__version__"]
