"""Exponential-type nonlinearities f = e^g: parsing, Taylor jets, the
H-ratio, q, the tail integral and the criticality conditions."""

from .catalog import CATALOG, closed_form_H, closed_form_q
from .criticality import (CriticalityReport, F_prim, F_tail, criticality_report,
                          estimate_q, q_grid, solve_g, solve_log_g,
                          tail_mantissa_laguerre)
from .expr import parse_expression
from .spec import (H_series, Jet3, NonlinearitySpec, eval_H, g_series,
                   log_dg_series, log_g_series, parse_nonlinearity, taylor_jet)

__all__ = [
    "CATALOG", "closed_form_H", "closed_form_q", "CriticalityReport", "F_prim",
    "F_tail", "criticality_report", "estimate_q", "q_grid", "solve_g",
    "solve_log_g", "tail_mantissa_laguerre", "parse_expression", "H_series",
    "Jet3", "NonlinearitySpec", "eval_H", "g_series", "log_dg_series",
    "log_g_series", "parse_nonlinearity", "taylor_jet",
]
