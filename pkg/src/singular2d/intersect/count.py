"""Counting the zeros of U - v for two radial solutions.

Both solutions are compared in log r, where the stored ``r_du`` is the
derivative of u; each is represented by the cubic Hermite interpolant of
its integrator output.  Sign changes on the merged grid are refined by
bisection and zeros closer than ``dedupe`` (in log r) are merged.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ..errors import ConfigError
from ..ode.types import RadialSolution

__all__ = ["radial_interpolant", "intersection_points", "count_intersections"]


def radial_interpolant(sol: RadialSolution):
    """u as a function of log r (cubic Hermite through the stored data)."""
    lr = np.asarray(sol.log_r, dtype=float)
    order = np.argsort(lr)
    lr = lr[order]
    keep = np.concatenate(([True], np.diff(lr) > 0))
    return CubicHermiteSpline(lr[keep], np.asarray(sol.u)[order][keep],
                              np.asarray(sol.r_du)[order][keep])


def _bisect(f, a, b, fa, tol):
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0.0) == (fa > 0.0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def intersection_points(U: RadialSolution, v: RadialSolution, r_max: float | None = None, *,
                        log_r_max: float | None = None, tol: float = 1e-10,
                        dedupe: float = 1e-8, degenerate: float = 1e-13) -> dict:
    """Zeros of U - v in log r on the common range, capped at r_max.

    Returns
    -------
    dict
        ``log_r`` (array of zeros), ``log_r_min`` and ``log_r_max`` of the
        range used (``r_min_used`` is exp(log_r_min)), and ``overlap``.

    Raises
    ------
    ConfigError
        "degenerate comparison" when |U - v| <= ``degenerate`` on the whole
        common grid.
    """
    if log_r_max is None and r_max is not None:
        log_r_max = math.log(r_max)
    fu, fv = radial_interpolant(U), radial_interpolant(v)
    lo = max(fu.x[0], fv.x[0])
    hi = min(fu.x[-1], fv.x[-1])
    if log_r_max is not None:
        hi = min(hi, log_r_max)
    if not hi > lo:
        warnings.warn("solutions have no common radius range; Z = 0", RuntimeWarning,
                      stacklevel=2)
        return {"log_r": np.empty(0), "log_r_min": lo, "log_r_max": hi, "overlap": False}
    grid = np.union1d(fu.x, fv.x)
    grid = grid[(grid >= lo) & (grid <= hi)]
    grid = np.union1d(grid, [lo, hi])
    d = fu(grid) - fv(grid)
    if np.all(np.abs(d) <= degenerate):
        raise ConfigError("degenerate comparison: U and v agree within %g" % degenerate)

    def diff(x):
        return float(fu(x) - fv(x))

    roots = [float(x) for x in grid[d == 0.0]]
    s = np.sign(d)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    for k in idx:
        roots.append(_bisect(diff, grid[k], grid[k + 1], d[k], tol))
    roots.sort()
    merged = []
    for x in roots:
        if not merged or x - merged[-1] > dedupe:
            merged.append(x)
    return {"log_r": np.array(merged), "log_r_min": float(lo), "log_r_max": float(hi),
            "overlap": True}


def count_intersections(U: RadialSolution, v: RadialSolution, r_max: float | None = None,
                        **kwargs) -> int:
    """Number of zeros of U - v on the common radius range up to r_max.

    See :func:`intersection_points` for the keyword arguments.

    Examples
    --------
    >>> import numpy as np
    >>> lr = np.linspace(-2.9, -0.2, 500)
    >>> r = np.exp(lr)
    >>> flat = RadialSolution(r, np.zeros_like(r), np.zeros_like(r), 1.0)
    >>> wave = RadialSolution(r, 0.1 * np.sin(2 * np.pi * lr), 0.2 * np.pi * np.cos(2 * np.pi * lr) / r, 1.0)
    >>> count_intersections(flat, wave)
    5
    """
    return int(intersection_points(U, v, r_max, **kwargs)["log_r"].size)
