"""Explicit asymptotics: y1, y2, the Liouville pair (a, b), the expansion
of g(U_inf) and the comparison profile u~."""

from .expansion import ExpansionValue, dump_csv, dump_rows, expansion_g, tilde_u, tilde_u_rho
from .frame import AsymptoticFrame, coefficient_row, frame_at, frame_series, invert_g, phase, rho_base

__all__ = [
    "AsymptoticFrame", "ExpansionValue", "coefficient_row", "dump_csv", "dump_rows",
    "expansion_g", "frame_at", "frame_series", "invert_g", "phase", "rho_base",
    "tilde_u", "tilde_u_rho",
]
