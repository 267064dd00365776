"""First and second order asymptotics of the singular solution.

For the Emden form -y'' = e^{g(y) - rho}/4 the singular solution is
approximated by y1 + y2 with

    g(y1) = rho,
    y2    = (log g''(y1) - 3 log g'(y1) + log 4) / g'(y1),

and the linearised remainder equation has the fundamental pair
a sin b, a cos b with a^4 = rho/G, b' = (G/rho)^{1/2}, G = H(y1).

Every rho-derivative comes from truncated Taylor series: the series of
g about y1 is reverted to give y1(rho + d) and the jets of log g', H are
composed with it.  Nothing is finite-differenced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from ..errors import DomainError, InadmissibleSpecError
from ..nonlin import series as ser
from ..nonlin.criticality import solve_g
from ..nonlin.spec import H_series, NonlinearitySpec, g_series, log_dg_series

__all__ = ["AsymptoticFrame", "invert_g", "frame_at", "frame_series", "rho_base",
           "phase", "coefficient_row"]

_LOG4 = math.log(4.0)
# threshold on G defining the base point of the phase integral
_G_MIN = 1e-6


@dataclass(frozen=True)
class AsymptoticFrame:
    """y1, y2, their rho-derivatives and the Liouville pair (a, b) at rho."""

    rho: float
    y1: float
    y2: float
    dy1: float
    d2y1: float
    d3y1: float
    dy2: float
    d2y2: float
    d3y2: float
    G: float
    a: float
    b: float
    da: float
    d2a: float
    db: float
    rho0: float
    gp: float
    gpp: float

    @property
    def y(self) -> float:
        return self.y1 + self.y2

    @property
    def dy(self) -> float:
        return self.dy1 + self.dy2


def invert_g(spec: NonlinearitySpec, rho: float) -> float:
    """y1 with g(y1) = rho (Newton on log g with a bisection safeguard).

    Raises
    ------
    DomainError
        When rho is below g(s_floor).
    """
    return solve_g(spec, float(rho))


@lru_cache(maxsize=64)
def _base_point(spec: NonlinearitySpec) -> tuple[float, float]:
    """(s0, rho0): the first s from which G = H(s) stays above 1e-6."""
    spec.require_singular_admissible()
    lo = max(spec.s_admit, spec.s_floor)

    def H(s):
        try:
            return float(H_series(spec, s, 1)[0])
        except (DomainError, ValueError, ArithmeticError):
            return -1.0

    grid = lo + (np.geomspace(1.0, 65.0, 200) - 1.0)
    vals = np.array([H(s) for s in grid])
    bad = np.nonzero(~(vals > _G_MIN))[0]
    if len(bad) == 0:
        s0 = lo
    elif bad[-1] == len(grid) - 1:
        raise InadmissibleSpecError("H(s) does not stay above %g" % _G_MIN)
    else:
        a, b = float(grid[bad[-1]]), float(grid[bad[-1] + 1])
        for _ in range(80):
            m = 0.5 * (a + b)
            if H(m) > _G_MIN:
                b = m
            else:
                a = m
        s0 = b
    return s0, float(spec.g(s0))


def rho_base(spec: NonlinearitySpec) -> float:
    """Base point rho0 of the phase b (first rho where G > 1e-6 onwards)."""
    return _base_point(spec)[1]


def frame_series(spec: NonlinearitySpec, rho: float, n: int = 6) -> dict:
    """Taylor series in d = rho' - rho of y1, y2, G, a and log g'(y1).

    Returns a dict of coefficient arrays of length ``n`` plus the scalars
    ``y1`` and the g-series about y1 (for higher jets of g).
    """
    y1 = invert_g(spec, rho)
    c = g_series(spec, y1, n + 1)
    c = c.copy()
    c[0] = rho
    t = ser.revert(c[:n])                      # y1(rho + d) - y1
    lgp_s = log_dg_series(spec, y1, n + 1)     # log g'(y1 + t)
    lgpp_s = lgp_s[:n] + ser.log(ser.deriv(lgp_s))
    H_s = H_series(spec, y1, n)
    lgp = ser.compose(lgp_s[:n], t)
    lgpp = ser.compose(lgpp_s, t)
    G = ser.compose(H_s, t)
    inv_gp = ser.exp(-lgp)
    y2 = ser.mul(lgpp - 3.0 * lgp + np.r_[_LOG4, np.zeros(n - 1)], inv_gp)
    rho_s = np.zeros(n)
    rho_s[0] = rho
    if n > 1:
        rho_s[1] = 1.0
    if not G[0] > 0.0:
        raise InadmissibleSpecError("G(rho) = %r is not positive at rho=%r" % (G[0], rho))
    a = ser.power(ser.div(rho_s, G), 0.25)
    y1s = t.copy()
    y1s[0] = y1
    return {"y1": y1s, "y2": y2, "G": G, "a": a, "lgp": lgp, "lgpp": lgpp,
            "g": g_series(spec, y1, 10)}


def phase(spec: NonlinearitySpec, rho: float, rho_from: float | None = None) -> float:
    """b(rho) = int_{rho0}^{rho} (G/tau)^{1/2} dtau, written in s = y1 as
    int sqrt(g''(s)) ds (finite even where g' vanishes)."""
    s0, rho0 = _base_point(spec)
    lo = s0 if rho_from is None else invert_g(spec, rho_from)
    hi = invert_g(spec, rho)

    def integrand(s):
        lgp = log_dg_series(spec, s, 2)
        return math.exp(0.5 * (lgp[0] + math.log(lgp[1])))

    if hi == lo:
        return 0.0
    val, _ = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)
    return float(val)


def frame_at(spec: NonlinearitySpec, rho: float) -> AsymptoticFrame:
    """All frame quantities at ``rho`` (b measured from the base point).

    Raises
    ------
    InadmissibleSpecError
        For pure exponentials or when rho is below the base point.
    """
    spec.require_singular_admissible()
    s0, rho0 = _base_point(spec)
    if rho < rho0:
        raise InadmissibleSpecError("rho=%r is below the base point rho0=%r" % (rho, rho0))
    S = frame_series(spec, rho, 6)
    y1d = ser.to_derivatives(S["y1"])
    y2d = ser.to_derivatives(S["y2"])
    ad = ser.to_derivatives(S["a"])
    G = float(S["G"][0])
    gp = math.exp(S["lgp"][0])
    gpp = math.exp(S["lgpp"][0])
    return AsymptoticFrame(
        rho=float(rho), y1=float(y1d[0]), y2=float(y2d[0]),
        dy1=float(y1d[1]), d2y1=float(y1d[2]), d3y1=float(y1d[3]),
        dy2=float(y2d[1]), d2y2=float(y2d[2]), d3y2=float(y2d[3]),
        G=G, a=float(ad[0]), b=phase(spec, rho), da=float(ad[1]), d2a=float(ad[2]),
        db=math.sqrt(G / rho), rho0=rho0, gp=gp, gpp=gpp,
    )


def coefficient_row(spec: NonlinearitySpec, rho: float, kmax: int = 8) -> np.ndarray:
    """Coefficients of the remainder equation at rho.

    Row layout: y2'', E = G/(rho g'), g'(y1), g''(y1), y2, then the Taylor
    coefficients g^{(k)}(y1)/k! for k = 3..kmax.
    """
    S = frame_series(spec, rho, 4)
    y2d = ser.to_derivatives(S["y2"])
    G = float(S["G"][0])
    lgp = float(S["lgp"][0])
    gcoef = S["g"]
    row = [float(y2d[2]), G / rho * math.exp(-lgp), math.exp(lgp), math.exp(float(S["lgpp"][0])),
           float(y2d[0])]
    row.extend(float(gcoef[k]) for k in range(3, kmax + 1))
    return np.array(row)
