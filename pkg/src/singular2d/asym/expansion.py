"""Two-term expansion of g(U_inf) and the explicit comparison profile u~."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..nonlin.criticality import F_tail, estimate_q, solve_g
from ..nonlin.spec import NonlinearitySpec
from .frame import frame_at, frame_series

__all__ = ["ExpansionValue", "expansion_g", "tilde_u", "tilde_u_rho", "dump_rows",
           "dump_csv", "TERM_ORDER"]

TERM_ORDER = ("rho", "-2log rho", "log(g/g')", "log 4H")


@dataclass(frozen=True)
class ExpansionValue:
    """rho - 2 log rho + log(g/g')(y1) + log 4H(y1) with its pieces.

    ``terms`` holds the four summands under the keys of ``TERM_ORDER`` and
    ``remainder_bound`` = rho^{-1+eps}.  ``alt_terms`` splits log 4H into
    log(4/q) + log(qH), which is how the limit is usually read.
    """

    rho: float
    g_of_u: float
    terms: dict
    alt_terms: dict = field(default_factory=dict)

    def reassemble(self) -> float:
        return _sum_terms(self.terms)


def _sum_terms(terms) -> float:
    acc = 0.0
    for key in TERM_ORDER:
        acc += terms[key]
    return acc


def expansion_g(spec: NonlinearitySpec, rho: float, eps: float = 0.5,
                q: float | None = None) -> ExpansionValue:
    """Right-hand side of g(U_inf(r)) ~ ... at rho = -2 log r.

    log(g/g') is formed as log g - log g' from the series of log g', so
    it stays finite for the triple exponential.

    Raises
    ------
    ValueError
        If eps is outside (0, 1/2].
    """
    if not 0.0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    S = frame_series(spec, rho, 2)
    lgp = float(S["lgp"][0])
    G = float(S["G"][0])
    terms = {
        "rho": float(rho),
        "-2log rho": -2.0 * math.log(rho),
        "log(g/g')": math.log(rho) - lgp,
        "log 4H": math.log(4.0 * G),
        "remainder_bound": rho ** (-1.0 + eps),
    }
    alt = {}
    if q is not None:
        alt = {"log(4/q)": math.log(4.0 / q), "log(qH)": math.log(q * G)}
    return ExpansionValue(rho=float(rho), g_of_u=_sum_terms(terms), terms=terms, alt_terms=alt)


def tilde_u_rho(spec: NonlinearitySpec, rho: float, B: float | None = None) -> float:
    """u~ at r = exp(-rho/2): the solution s of F(s) = (B/4) r^2 (rho + 1).

    Newton runs on log F, whose slope is -1/m with m = e^{g} F the tail
    mantissa, so each step is s += (log F(s) - target) m(s).

    Raises
    ------
    DomainError
        When the target lies above F(s_floor) (no bracket).
    """
    if B is None:
        B = estimate_q(spec)[0]
    target = math.log(B / 4.0) - rho + math.log1p(rho)
    lo = spec.s_floor
    lm, m = F_tail(spec, lo)
    if target > lm + math.log(m):
        raise DomainError("F inversion: target above F(s_floor) at rho=%r" % rho)
    # F ~ e^{-g}/g' gives the starting guess g(s) ~ -target - log g'
    s = solve_g(spec, max(-target, spec.g(lo)))
    for _ in range(60):
        lm, m = F_tail(spec, s)
        step = (lm + math.log(m) - target) * m
        s_new = max(s + step, 0.5 * (s + lo))
        if abs(s_new - s) <= 1e-14 * max(1.0, abs(s)):
            return s_new
        s = s_new
    return s


def tilde_u(spec: NonlinearitySpec, r: float, B: float | None = None) -> float:
    """u~(r) for 0 < r < 1; see :func:`tilde_u_rho`."""
    if not 0.0 < r < 1.0:
        raise DomainError("u~ needs 0 < r < 1")
    return tilde_u_rho(spec, -2.0 * math.log(r), B)


def dump_rows(spec: NonlinearitySpec, rhos) -> list[tuple]:
    """Rows (rho, y1, y2, dy2, G, a, b, expansion_g) on a rho grid."""
    rows = []
    for rho in np.asarray(rhos, dtype=float):
        fr = frame_at(spec, float(rho))
        rows.append((fr.rho, fr.y1, fr.y2, fr.dy2, fr.G, fr.a, fr.b,
                     expansion_g(spec, fr.rho).g_of_u))
    return rows


def dump_csv(spec: NonlinearitySpec, rhos, stream=None) -> str:
    """Write :func:`dump_rows` as CSV (repr floats); returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("rho", "y1", "y2", "dy2", "G", "a", "b", "expansion_g"))
    for row in dump_rows(spec, rhos):
        w.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text
