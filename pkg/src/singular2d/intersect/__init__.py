"""Hardy quotients on log-annuli, instability tests and intersection counts."""

from .count import count_intersections, intersection_points, radial_interpolant
from .hardy import (NODES_PER_ANNULUS, OCTAVE, AnnulusTestFunction, annulus_bounds,
                    hardy_annulus, hardy_ratio, instability_test, min_rayleigh,
                    potential_density)
from .zcount import z_table

__all__ = ["count_intersections", "intersection_points", "radial_interpolant",
           "NODES_PER_ANNULUS", "OCTAVE", "AnnulusTestFunction", "annulus_bounds",
           "hardy_annulus", "hardy_ratio", "instability_test", "min_rayleigh",
           "potential_density", "z_table"]
