"""Radial and Emden-form integration: regular shots, singular solutions
from asymptotic data, and the integral operator of the remainder."""

from .backend import available_backends, backend_name, use_backend
from .picard import (GridFunction, PicardGrid, calibrate_Lambda, lipschitz_ratios, picard_apply,
                     picard_fixed_point, picard_grid, source_terms, weighted_norm)
from .regular import integrate_regular
from .singular import asymptotic_part, eta_initial, integrate_singular, to_emden, to_radial
from .types import EmdenSolution, RadialSolution, g_array

__all__ = [
    "EmdenSolution", "GridFunction", "PicardGrid", "RadialSolution", "asymptotic_part",
    "available_backends", "backend_name", "calibrate_Lambda", "eta_initial", "g_array",
    "integrate_regular", "integrate_singular", "lipschitz_ratios", "picard_apply",
    "picard_fixed_point", "picard_grid", "source_terms", "to_emden", "to_radial",
    "use_backend", "weighted_norm",
]
