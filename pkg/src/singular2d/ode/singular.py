"""Numerical singular solution of -y'' = e^{g(y) - rho}/4, integrated
backwards from asymptotic data at rho_max.

Three forms are chained, each used where it is best conditioned:

* rho above ``eta_above``: the remainder eta = y - y1 - y2 itself, with
  the coefficients of its equation tabulated as Chebyshev series in
  log rho.  Representing y directly would lose eta below ulp(y1).
* the plain form in (y, y'), in double-double where rho > 500 so that
  g(y) - rho keeps its digits.
* once y < 1 or y' > 1: rho as a function of y, rho' = p, p' = e^{g(y)-rho} p^3/4,
  run down to y = 1e-10 and extrapolated to the zero.
"""

from __future__ import annotations

import math

import numpy as np

from ..asym.frame import coefficient_row, frame_at, frame_series, rho_base
from ..errors import DomainError, IntegrationError
from ..nonlin import series as ser
from ..nonlin.spec import NonlinearitySpec
from . import backend
from .types import EmdenSolution, RadialSolution

__all__ = ["integrate_singular", "to_radial", "to_emden", "eta_tables", "ChebSegment",
           "eta_initial", "asymptotic_part"]

M_SING_Y, M_SING_P, M_ETA = 1, 2, 3
DD_ABOVE = 500.0
_KMAX = 8
_EMPTY = np.zeros((0, 1))


class ChebSegment:
    """Chebyshev table of the remainder-equation coefficients on
    [rho_lo, rho_hi], in the variable xi = (2 log rho - x0 - x1)/(x1 - x0)."""

    __slots__ = ("rho_lo", "rho_hi", "x0", "x1", "coef")

    def __init__(self, rho_lo, rho_hi, coef):
        self.rho_lo, self.rho_hi = float(rho_lo), float(rho_hi)
        self.x0, self.x1 = math.log(rho_lo), math.log(rho_hi)
        self.coef = np.ascontiguousarray(coef, dtype=float)

    @property
    def par(self) -> np.ndarray:
        return np.array([self.x0, self.x1])

    def evaluate(self, rho) -> np.ndarray:
        """Rows of the table at ``rho`` (array of shape (nrows, len(rho)))."""
        xi = (2.0 * np.log(np.asarray(rho, dtype=float)) - self.x0 - self.x1) / (self.x1 - self.x0)
        return np.array([np.polynomial.chebyshev.chebval(xi, c) for c in self.coef])


def _coefficient_rows(spec, rho):
    return coefficient_row(spec, rho, _KMAX)


def _asymptotic_rows(spec, rho):
    S = frame_series(spec, rho, 2)
    return np.array([S["y1"][0] + S["y2"][0], S["y1"][1] + S["y2"][1]])


def _fit_segment(spec, lo, hi, deg, rowfun=_coefficient_rows):
    n = deg + 1
    xi = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    x0, x1 = math.log(lo), math.log(hi)
    rhos = np.exp(0.5 * (x0 + x1) + 0.5 * (x1 - x0) * xi)
    rows = np.array([rowfun(spec, float(r)) for r in rhos])
    coef = np.polynomial.chebyshev.chebfit(xi, rows, deg).T
    scale = np.max(np.abs(coef), axis=1)
    tail = np.max(np.abs(coef[:, -3:]), axis=1)
    ok = bool(np.all(tail <= 1e-14 * scale + 1e-300))
    return coef, ok


def eta_tables(spec: NonlinearitySpec, rho_lo: float, rho_hi: float, width: float = 1.0,
               deg: int = 24, rowfun=_coefficient_rows) -> list[ChebSegment]:
    """Tables covering [rho_lo, rho_hi], ordered from the top down.

    Segments are ``width`` long in log rho and are halved until the last
    three Chebyshev coefficients of every row fall below 1e-14 relative.
    ``rowfun(spec, rho)`` supplies the tabulated rows (by default the
    coefficients of the remainder equation).
    """
    segs = []
    x_hi = math.log(rho_hi)
    x_lo = math.log(rho_lo)
    hi = float(rho_hi)   # carried exactly so the segments tile [rho_lo, rho_hi]
    while x_hi > x_lo + 1e-12:
        w = min(width, x_hi - x_lo)
        while True:
            lo = math.exp(x_hi - w)
            coef, ok = _fit_segment(spec, lo, hi, deg, rowfun)
            if ok or w < 1e-3:
                break
            w *= 0.5
        if x_hi - w <= x_lo + 1e-12:
            lo = rho_lo
        segs.append(ChebSegment(lo, hi, coef))
        x_hi, hi = math.log(lo), lo
    return segs


def _local_eta(spec, rho):
    """Solve the local balance (G/rho) eta = -(y2'' + N(eta)) by iteration."""
    row = coefficient_row(spec, rho, _KMAX)
    y2pp, E, gp, gpp, y2 = row[:5]
    ck = row[5:]
    k2 = E * gp   # = G / rho
    eta = -y2pp / k2
    for _ in range(50):
        d = y2 + eta
        h = sum(c * d ** (k + 3) for k, c in enumerate(ck))
        N = E * math.expm1(gp * eta + 0.5 * gpp * d * d + h) - E * gp * eta
        new = -(y2pp + N) / k2
        if abs(new - eta) <= 1e-15 * abs(new):
            return new
        eta = new
    return eta


def eta_initial(spec: NonlinearitySpec, rho: float) -> tuple[float, float]:
    """Non-oscillating local solution of the remainder equation at rho.

    Away from the oscillation eta'' is smaller than (G/rho) eta by a factor
    1/rho, so eta ~ -(rho/G)(y2'' + N(eta)), solved by fixed-point
    iteration; the derivative is a central difference of the same rule.
    """
    h = 1e-4 * rho
    e0 = _local_eta(spec, rho)
    d = (_local_eta(spec, rho + h) - _local_eta(spec, rho - h)) / (2.0 * h)
    return e0, d


def asymptotic_part(spec: NonlinearitySpec, rho, *, with_derivative: bool = False):
    """y1 + y2 (and optionally y1' + y2') on a grid of rho values.

    Values come from Chebyshev tables in log rho fitted to the frame
    series; entries below the frame base point are NaN.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.full((2, rho.size), np.nan)
    base = rho_base(spec)
    m = rho >= base
    if np.any(m):
        lo, hi = float(rho[m].min()), float(rho[m].max())
        if hi <= lo * (1.0 + 1e-12):
            for i in np.nonzero(m)[0]:
                out[:, i] = _asymptotic_rows(spec, float(rho[i]))
        else:
            for seg in eta_tables(spec, lo, hi, rowfun=_asymptotic_rows):
                k = m & (rho >= seg.rho_lo) & (rho <= seg.rho_hi)
                if np.any(k):
                    out[:, k] = seg.evaluate(rho[k])
    return out if with_derivative else out[0]


def _run(mode, spec, par, cheb, t0, y0, y1, t_end, tol, atol0, atol1, use_dd, stride,
         max_steps=50_000_000):
    ops, vals = spec.program
    h0 = -1e-3 * abs(t_end - t0) if t_end < t0 else 1e-3 * abs(t_end - t0)
    return backend.kernels.integrate(mode, ops, vals, par, cheb, float(t0), float(y0), float(y1),
                                     float(t_end), tol, atol0, atol1, h0, max_steps, int(use_dd),
                                     int(stride))


def integrate_singular(spec: NonlinearitySpec, rho_span=(800.0, 0.0), tol: float = 1e-11, *,
                       arith: str = "auto", eta_above: float = 1e4, eta_stride: int = 1,
                       y_end: float = 1e-10, with_eta: bool = True,
                       start: str = "local") -> EmdenSolution:
    """Singular solution from rho_max down to its zero (or to rho_min).

    Parameters
    ----------
    rho_span : (rho_max, rho_min)
        Start and end of the backward integration.  Integration stops at
        the zero of y if that comes first.
    tol : float
        Relative local error tolerance.
    arith : {"auto", "f64", "dd"}
        ``auto`` uses double-double for the plain form above rho = 500.
    eta_above : float
        The remainder form is used on [eta_above, rho_max].
    eta_stride : int
        Keep every n-th step of the remainder form in the output.
    start : {"local", "frame"}
        Initial data y1 + y2 plus the local non-oscillating remainder
        (``local``), or y1 + y2 alone (``frame``).  The bare frame start
        excites a homogeneous oscillation of the size of the neglected
        remainder.

    Raises
    ------
    InadmissibleSpecError
        When the nonlinearity has no singular asymptotics.
    IntegrationError
        On blow-up; ``last_x`` holds the last valid rho.
    """
    spec.require_singular_admissible()
    rho_max, rho_min = float(rho_span[0]), float(rho_span[1])
    if not rho_max > rho_min:
        raise DomainError("rho_max must exceed rho_min")
    if arith not in ("auto", "f64", "dd"):
        raise DomainError("arith must be auto, f64 or dd")
    if start not in ("local", "frame"):
        raise DomainError("start must be 'local' or 'frame'")
    fr = frame_at(spec, rho_max)
    pieces = []   # (rho, y, dy, eta) in decreasing rho
    meta = {"tol": tol, "rho_max": rho_max, "backend": backend.backend_name(), "forms": []}

    rho_s = rho_max
    if rho_max > eta_above and rho_min < rho_max:
        e0, e1 = eta_initial(spec, rho_max) if start == "local" else (0.0, 0.0)
        lo = max(eta_above, rho_min)
        segs = eta_tables(spec, lo, rho_max)
        atol0 = 1e-3 * tol * abs(e0) + 1e-300
        atol1 = atol0 * fr.db
        eta, deta = e0, e1
        for seg in segs:
            T, Y, F, st = _run(M_ETA, spec, seg.par, seg.coef, seg.rho_hi, eta, deta, seg.rho_lo,
                               tol, atol0, atol1, False, eta_stride)
            if st != 0:
                raise IntegrationError("remainder form failed (status %d)" % st, last_x=float(T[-1]))
            # y = y1 + y2 + eta and y' = y1' + y2' + eta' from the frame series
            d1 = asymptotic_part(spec, T, with_derivative=True)
            pieces.append((T, d1[0] + Y[:, 0], d1[1] + Y[:, 1], Y[:, 0]))
            eta, deta = float(Y[-1, 0]), float(Y[-1, 1])
        rho_s = lo
        fr_s = frame_at(spec, rho_s)
        y0, y1 = fr_s.y + eta, fr_s.dy + deta
        meta["forms"].append(("eta", rho_max, rho_s))
    else:
        y0, y1 = fr.y, fr.dy
        if start == "local":
            e0, e1 = eta_initial(spec, rho_max)
            y0, y1 = y0 + e0, y1 + e1

    if rho_s > rho_min:
        stops = []
        use_dd_hi = arith == "dd" or (arith == "auto" and rho_s > DD_ABOVE)
        if use_dd_hi and arith == "auto" and rho_min < DD_ABOVE:
            stops.append((DD_ABOVE, True))
            stops.append((rho_min, False))
        else:
            stops.append((rho_min, arith == "dd" or (arith == "auto" and use_dd_hi)))
        t0 = rho_s
        event = None
        for t_end, use_dd in stops:
            atol = 1e-3 * tol
            T, Y, F, st = _run(M_SING_Y, spec, np.array([1.0, 1.0]), _EMPTY, t0, y0, y1, t_end,
                               tol, atol, atol, use_dd, 1)
            if st >= 2:
                raise IntegrationError("singular integration blew up (status %d)" % st,
                                       last_x=float(T[-1]))
            pieces.append((T, Y[:, 0], Y[:, 1], None))
            meta["forms"].append(("y", t0, float(T[-1]), "dd" if use_dd else "f64"))
            t0, y0, y1 = float(T[-1]), float(Y[-1, 0]), float(Y[-1, 1])
            if st == 1:
                event = (t0, y0, y1)
                break
        rho_zero = None
        if event is not None:
            rho_e, ye, dye = event
            if ye <= y_end:
                raise IntegrationError("solution reached y <= %g before the switch" % y_end,
                                       last_x=rho_e)
            T, Y, F, st = _run(M_SING_P, spec, np.array([0.0]), _EMPTY, ye, rho_e, 1.0 / dye, y_end,
                               tol, 1e-3 * tol, 1e-3 * tol, False, 1)
            if st != 0 or not np.all(np.isfinite(Y)):
                raise IntegrationError("rho(y) form failed (status %d)" % st, last_x=float(Y[-1, 0]))
            rho_p, p = Y[:, 0], Y[:, 1]
            rho_zero = float(rho_p[-1] - p[-1] * y_end)
            keep = rho_p >= rho_min
            pieces.append((rho_p[keep], T[keep], 1.0 / p[keep], None))
            meta["forms"].append(("rho(y)", rho_e, float(rho_p[-1])))
            if rho_zero >= rho_min:
                pieces.append((np.array([rho_zero]), np.array([0.0]),
                               np.array([1.0 / (p[-1] + y_end * F[-1, 1])]), None))
    else:
        rho_zero = None

    rho = np.concatenate([p[0] for p in pieces])
    y = np.concatenate([p[1] for p in pieces])
    dy = np.concatenate([p[2] for p in pieces])
    eta_parts = []
    for T, Y0, D, E in pieces:
        if E is not None:
            eta_parts.append(E)
        elif with_eta:
            eta_parts.append(Y0 - asymptotic_part(spec, T))
        else:
            eta_parts.append(np.full(len(T), np.nan))
    eta = np.concatenate(eta_parts)
    order = np.argsort(rho, kind="stable")
    rho, y, dy, eta = rho[order], y[order], dy[order], eta[order]
    keep = np.concatenate(([True], np.diff(rho) > 0))
    meta["rho_zero"] = rho_zero
    return EmdenSolution(rho_grid=rho[keep], y=y[keep], dy=dy[keep], kind="singular",
                         eta=eta[keep], rho_zero=rho_zero, meta=meta)


def to_radial(sol: EmdenSolution) -> RadialSolution:
    """Change variables r = e^{-rho/2}, u = y, r du/dr = -2 dy/drho.

    Raises
    ------
    DomainError
        When the solution has no zero on its span.
    """
    if sol.rho_zero is None and not np.any(sol.y <= 0.0):
        raise DomainError("solution has no zero on its span")
    log_r = -0.5 * sol.rho_grid[::-1]
    r = np.exp(log_r)
    u = sol.y[::-1].copy()
    r_du = -2.0 * sol.dy[::-1]
    with np.errstate(over="ignore", divide="ignore"):
        du = r_du / r
    rz = sol.rho_zero
    if rz is None:
        k = int(np.nonzero(sol.y <= 0.0)[0][-1])
        rz = float(np.interp(0.0, [sol.y[k], sol.y[k + 1]], [sol.rho_grid[k], sol.rho_grid[k + 1]]))
    return RadialSolution(r_grid=r, u=u, du=du, alpha=math.inf, first_zero=math.exp(-0.5 * rz),
                          log_r=log_r, r_du=r_du, log_first_zero=-0.5 * rz,
                          meta=dict(sol.meta, source="singular"))


def to_emden(sol: RadialSolution) -> EmdenSolution:
    """Inverse change of variables rho = -2 log r, dy/drho = -(r du/dr)/2."""
    rho = -2.0 * sol.log_r[::-1]
    rz = None if sol.log_first_zero is None else -2.0 * sol.log_first_zero
    return EmdenSolution(rho_grid=rho, y=sol.u[::-1].copy(), dy=-0.5 * sol.r_du[::-1],
                         kind="transformed_regular", rho_zero=rz, meta=dict(sol.meta))
