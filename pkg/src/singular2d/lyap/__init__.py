"""Energy functional, time change and the trichotomy for singular solutions."""

from .energy import (EPS, EPS0, Classification, EnergyTrace, L_derivatives, L_of,
                     calF, calF_derivatives, calibrate_C, classify_trichotomy,
                     energy_trace, w_of, working_grid)

__all__ = ["EPS", "EPS0", "Classification", "EnergyTrace", "L_derivatives", "L_of",
           "calF", "calF_derivatives", "calibrate_C", "classify_trichotomy",
           "energy_trace", "w_of", "working_grid"]
