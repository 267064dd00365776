"""Growth diagnostics: inverse of g, the q-estimate, the tail integral
F_tail(s) = int_s^inf e^{-g}, the primitive F_prim(s) = int^s e^{g}, and
the criticality report.

Everything is evaluated relative to e^{g(s)}: integrals are returned as a
(log-magnitude, mantissa) pair with log-magnitude = -g(s) (tail) or +g(s)
(primitive), so no e^{g} is ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..errors import (ConvergenceError, DomainError, InadmissibleSpecError,
                      JetOverflowError)
from . import series as ser
from .spec import (NonlinearitySpec, H_series, g_series, log_g_series)

__all__ = [
    "solve_g", "solve_log_g", "q_grid", "log_model_limit", "estimate_q", "F_tail", "F_prim", "CriticalityReport",
    "criticality_report", "richardson_limit", "tail_mantissa_laguerre", "extrapolate",
]


def _log_g_and_slope(spec, s):
    lg = log_g_series(spec, s, 2)
    return float(lg[0]), float(lg[1])


def solve_log_g(spec: NonlinearitySpec, log_rho: float, *, rtol: float = 1e-14,
                lo: float | None = None) -> float:
    """Solve log g(s) = log_rho for s >= s_floor.

    Newton on log g(s) - log_rho (well scaled for any size of g, including
    g beyond the float range) with a maintained bracket and bisection
    fallback.
    """
    a = spec.s_floor if lo is None else lo
    try:
        la = _log_g_and_slope(spec, a)[0]
    except (DomainError, ValueError):
        la = -math.inf
    if la >= log_rho:
        if la - log_rho <= 1e-15 * max(1.0, abs(log_rho)):
            return a
        raise DomainError("log rho=%r is below log g(s_floor)=%r" % (log_rho, la))
    b = max(a + 1.0, 2.0 * a)
    while True:
        lb, _ = _log_g_and_slope(spec, b)
        if lb >= log_rho:
            break
        a, b = b, 2.0 * b
        if b > 1e300:
            raise ConvergenceError("cannot bracket log g(s) = %r" % (log_rho,))
    s = 0.5 * (a + b)
    for _ in range(200):
        ls, dls = _log_g_and_slope(spec, s)
        r = ls - log_rho
        if r > 0:
            b = s
        else:
            a = s
        s_new = s - r / dls if dls > 0 else 0.5 * (a + b)
        if not (a <= s_new <= b):
            s_new = 0.5 * (a + b)
        if abs(s_new - s) <= rtol * abs(s) or b - a <= 4e-16 * abs(s):
            s = s_new
            break
        s = s_new
    ls, dls = _log_g_and_slope(spec, s)
    if dls > 0:
        s -= (ls - log_rho) / dls
    return s


def solve_g(spec: NonlinearitySpec, rho: float, *, rtol: float = 1e-14,
            lo: float | None = None) -> float:
    """Solve g(s) = rho for s >= s_floor (see :func:`solve_log_g`)."""
    if not rho > 0.0:
        raise DomainError("g(s) = %r has no solution with g > 0" % (rho,))
    return solve_log_g(spec, math.log(rho), rtol=rtol, lo=lo)


def _base_log_g(spec):
    base = spec.s_admit if spec.s_admit is not None else spec.s_floor
    lg, _ = _log_g_and_slope(spec, max(base, 1e-3))
    return max(0.0, lg)


def q_grid(spec: NonlinearitySpec, kmin: int = 4, kmax: int = 14,
           log_g0: float | None = None):
    """Points s_k with g(s_k) = 2^k g0, returned with log g(s_k)."""
    if log_g0 is None:
        log_g0 = _base_log_g(spec)
    lgs = np.array([log_g0 + k * math.log(2.0) for k in range(kmin, kmax + 1)])
    ss = []
    lo = None
    for lg in lgs:
        sk = solve_log_g(spec, float(lg), lo=lo)
        ss.append(sk)
        lo = sk
    return np.array(ss), lgs


def _aitken_stage(h):
    """One Richardson sweep with geometric ratio fitted from the data.

    Returns the accelerated sequence and whether its last entry was
    actually accelerated (ratio in (0, 1)) or already exact.
    """
    d = np.diff(h)
    d[np.abs(d) <= 32.0 * np.finfo(float).eps * np.max(np.abs(h))] = 0.0
    if len(d) < 2:
        return None, False
    out = []
    ok = False
    for k in range(1, len(d)):
        if d[k] == 0.0:
            out.append(h[k + 1])
            ok = True
            continue
        if d[k - 1] == 0.0:
            out.append(h[k + 1])
            ok = False
            continue
        r = d[k] / d[k - 1]
        if not 0.0 < r < 1.0:
            out.append(h[k + 1])
            ok = False
            continue
        out.append(h[k + 1] + d[k] * r / (1.0 - r))
        ok = True
    return np.array(out), ok


def _check_oscillation(h):
    dc = np.diff(h)
    dc[np.abs(dc) <= 32.0 * np.finfo(float).eps * np.max(np.abs(h))] = 0.0
    nz = np.sign(dc)[dc != 0]
    if len(nz) > 3 and np.count_nonzero(np.diff(nz)) > len(nz) // 2:
        raise ConvergenceError("oscillating sequence", {"values": np.asarray(h).tolist()})


def richardson_limit(values, stages: int = 2):
    """Limit of a sequence sampled on a geometric grid, assuming power-law
    corrections with fitted exponents.

    Returns
    -------
    limit, spread
        ``spread`` is the difference between the last two stage estimates,
        or ``inf`` when a stage could not be accelerated (the power-law
        model does not fit).
    """
    h = np.asarray(values, dtype=float)
    _check_oscillation(h)
    estimates = [h[-1]]
    cur = h
    fitted = True
    for _ in range(stages):
        nxt, ok = _aitken_stage(cur)
        if nxt is None or len(nxt) < 1:
            break
        fitted = fitted and ok
        estimates.append(nxt[-1])
        cur = nxt
    if not fitted or len(estimates) < 2:
        return float(estimates[-1]), math.inf
    return float(estimates[-1]), float(abs(estimates[-1] - estimates[-2]))


def log_model_limit(values, log_g):
    """Limit of a sequence with corrections in powers of 1/log g: least
    squares in x = 1/log g with degrees 1 and 2; the spread is their
    difference."""
    h = np.asarray(values, dtype=float)
    x = 1.0 / np.asarray(log_g, dtype=float)
    est = []
    for deg in (1, 2):
        coef = np.polyfit(x, h, deg)
        est.append(coef[-1])
    return float(est[-1]), float(abs(est[-1] - est[-2]))


def extrapolate(values, log_g):
    """Best of the power-law and 1/log g models: ``(limit, spread)``."""
    lim_p, spr_p = richardson_limit(values)
    lim_l, spr_l = log_model_limit(values, log_g)
    return (lim_p, spr_p) if spr_p <= spr_l else (lim_l, spr_l)


_LOG_G0_LADDER = (600.0, 300.0, 150.0, 60.0, 20.0)


def _H_on_grid(spec, log_g0):
    ss, lgs = q_grid(spec, log_g0=log_g0)
    Hs = np.array([H_series(spec, float(s), 1)[0] for s in ss])
    if not np.all(np.isfinite(Hs)):
        raise JetOverflowError("H not finite on the grid")
    return ss, lgs, Hs


def estimate_q(spec: NonlinearitySpec, *, return_samples: bool = False):
    """Extrapolated q = 1 / lim H(s) and its uncertainty.

    H is sampled where g(s_k) = 2^k g0, k = 4..14, with g0 taken as large
    as the float range allows (all arithmetic is in log space, so g0 may
    be e^600).  Two correction models are fitted: power-law corrections
    in g (two Richardson sweeps with fitted exponents) and corrections in
    powers of 1/log g (the double and triple exponentials).  The model
    whose last two stages agree best is kept; q_ci is twice that spread
    propagated to q (the stage difference alone can undershoot the error
    by a few per cent, as it does for e^{e^s}).
    """
    if spec.critical_exponential:
        raise InadmissibleSpecError("critical-exponential nonlinearity (H identically 0)")
    grid = None
    for lg0 in _LOG_G0_LADDER:
        if lg0 < _base_log_g(spec):
            continue
        try:
            grid = _H_on_grid(spec, lg0)
            break
        except (JetOverflowError, DomainError, ConvergenceError, OverflowError,
                ValueError, FloatingPointError):
            continue
    if grid is None:
        grid = _H_on_grid(spec, _base_log_g(spec))
    ss, lgs, Hs = grid
    if not np.all(Hs > 0):
        raise ConvergenceError("H not eventually positive", {"s": ss.tolist(), "H": Hs.tolist()})
    limit, spread = extrapolate(Hs, lgs)
    if not limit > 0:
        raise ConvergenceError("non-positive limit of H", {"s": ss.tolist(), "H": Hs.tolist()})
    q = 1.0 / limit
    q_ci = 2.0 * spread / limit ** 2 + 4.0 * np.finfo(float).eps * q
    if return_samples:
        return q, q_ci, list(zip(ss.tolist(), Hs.tolist()))
    return q, q_ci


# --------------------------------------------------------------------------
# tail integral and primitive

def _tail_closed_form(spec, s):
    """(1/g')(1 - H/g - (H'/(g g') - H/g^2 - H^2/g^2)) evaluated from
    log-space jets; returns the mantissa relative to e^{-g(s)}."""
    lg = log_g_series(spec, s, 2)
    ig = math.exp(-lg[0])          # 1/g, may underflow harmlessly
    ratio = lg[1]                  # g'/g, so g g' = g^2 ratio
    H, dH = ser.to_derivatives(H_series(spec, s, 2))
    ig2 = ig * ig
    corr = 1.0 - H * ig - (dH * ig2 / ratio - H * ig2 - H * H * ig2)
    return corr * ig / ratio


def _s_cut(spec, s):
    """Smallest t >= s with H(t)/g(t) < 1e-8 and g(t) >= 40.

    The second condition keeps the asymptotic tail formula away from
    small g, where H/g can be tiny while higher jets of g are not.
    """
    def ratio(t):
        lg = log_g_series(spec, t, 1)[0]
        return H_series(spec, t, 1)[0] * math.exp(-lg)
    if spec.g(s) < 40.0:
        s = max(s, solve_g(spec, 40.0))
    if ratio(s) < 1e-8:
        return s
    a, b = s, max(2.0 * s, s + 1.0)
    while ratio(b) >= 1e-8:
        a, b = b, 2.0 * b
    for _ in range(100):
        m = 0.5 * (a + b)
        if ratio(m) < 1e-8:
            b = m
        else:
            a = m
        if b - a <= 1e-12 * b:
            break
    return b


_PANEL_ORDER = 18


def _exp_panels(spec, s, direction, stop, rtol):
    """Integral of exp(-direction*(g(t) - g(s))) from s towards ``stop``.

    Each panel expands g about its left end with an exact Taylor
    polynomial, so the exponent g(t) - g(s) is accumulated without the
    cancellation of subtracting two large values of g.  Panels have width
    ~4/g' and are halved until the polynomial tail is negligible.

    Returns ``(integral, exponent_at_end)``.
    """
    total = 0.0
    offset = 0.0  # g(a) - g(s)
    a = s
    while (stop - a) * direction > 0:
        c = g_series(spec, a, _PANEL_ORDER)
        if not np.all(np.isfinite(c)):
            raise DomainError("g jet overflow at s=%r" % (a,))
        dg = abs(c[1])
        w = min(abs(stop - a), 4.0 / dg if dg > 0 else abs(stop - a))
        poly = c.copy()
        poly[0] = 0.0
        k = np.arange(_PANEL_ORDER)
        while True:
            terms = np.abs(poly) * w ** k
            if terms[-1] <= 1e-18 * max(1.0, terms.sum()) and terms[-2] <= 1e-17 * max(1.0, terms.sum()):
                break
            w *= 0.5
        b = a + direction * w
        if (b - stop) * direction > 0:
            b = stop
        off = offset
        sign = -float(direction)

        def integrand(t, off=off, poly=poly, a=a, sign=sign):
            return math.exp(sign * (off + np.polynomial.polynomial.polyval(t - a, poly)))

        lo, hi = (a, b) if direction > 0 else (b, a)
        val, err = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)
        if err > 100 * rtol * abs(val) and abs(val) > 1e-300:
            raise ConvergenceError("panel quadrature did not converge",
                                   {"a": lo, "b": hi, "err": err, "val": val})
        total += val
        offset = off + float(np.polynomial.polynomial.polyval(b - a, poly))
        a = b
        if sign * offset < -745.0:
            break
    return total, offset


def F_tail(spec: NonlinearitySpec, s: float, *, rtol: float = 1e-12):
    """Tail integral F(s) = int_s^inf e^{-g(t)} dt as ``(log_mag, mantissa)``.

    F(s) = mantissa * exp(log_mag) with log_mag = -g(s).  The integral is
    computed by adaptive quadrature of e^{-(g(t)-g(s))} on [s, s_cut] and
    completed by the asymptotic tail formula at s_cut, the smallest point
    with H/g < 1e-8.

    Raises
    ------
    ConvergenceError
        If a quadrature panel misses the tolerance.
    """
    if s < spec.s_floor:
        raise DomainError("s=%r below s_floor" % (s,))
    gs = float(g_series(spec, s, 1)[0])
    if not math.isfinite(gs):
        raise DomainError("g(s) is beyond the float range at s=%r" % (s,))
    s_cut = _s_cut(spec, s)
    total, offset = _exp_panels(spec, s, +1, s_cut, rtol)
    if offset < 745.0:
        total += math.exp(-offset) * _tail_closed_form(spec, s_cut)
    return -gs, total


def tail_mantissa_laguerre(spec: NonlinearitySpec, s: float, n: int = 80) -> float:
    """e^{g(s)} F_tail(s) by Gauss-Laguerre quadrature in u = g(s+tau) - g(s).

    The substitution turns the tail into int_0^inf e^{-u} / g'(s + tau(u)) du
    whose integrand is smooth and slowly varying, so the result is accurate
    to a few ulps.  Used where O(1/g^2) cancellations need that accuracy.
    """
    u_nodes, weights = np.polynomial.laguerre.laggauss(n)
    gs = spec.g(s)
    dg0 = float(g_series(spec, s, 2)[1])
    total = 0.0
    tau = 0.0
    for u, w in zip(u_nodes, weights):
        if w < 1e-300:
            break
        lo, hi = tau, max(tau, 0.0) + max(u / dg0, 1e-300)
        while spec.g(s + hi) - gs < u:
            lo, hi = hi, 2.0 * hi
        tau = min(max(tau, lo), hi)
        for _ in range(100):
            c = g_series(spec, s + tau, 2)
            r = (c[0] - gs) - u
            if r > 0:
                hi = tau
            else:
                lo = tau
            step = r / c[1]
            new = tau - step
            if not (lo <= new <= hi):
                new = 0.5 * (lo + hi)
            if abs(new - tau) <= 1e-15 * max(abs(tau), 1e-300):
                tau = new
                break
            tau = new
        total += w / float(g_series(spec, s + tau, 2)[1])
    return total


def F_prim(spec: NonlinearitySpec, s: float, *, lower: float | None = None,
           rtol: float = 1e-12):
    """Primitive F_prim(s) = int_lower^s e^{g(t)} dt as ``(log_mag, mantissa)``
    with log_mag = g(s).

    The lower limit defaults to s_floor; for large s only the neighbourhood
    of s contributes, so the limit quantities are independent of it.
    """
    lo = spec.s_floor if lower is None else lower
    gs = float(g_series(spec, s, 1)[0])
    total, _ = _exp_panels(spec, s, -1, lo, rtol)
    return gs, total


# --------------------------------------------------------------------------
# report

@dataclass(frozen=True)
class CriticalityReport:
    """Summary of the growth conditions for g.

    ``g2_C`` holds the smallest C with |H^(k)| <= C (g'/g)^k, k = 1, 2, 3,
    on the sample grid; ``g1_margin`` is min(log g - 1.01 log s).
    """

    q: float
    q_ci: float
    H_samples: list
    g1_ok: bool
    g1_margin: float
    g2_ok: bool
    g2_C: tuple
    convex_ok: bool
    supercritical: bool
    primitive_limit: float
    B1_limit: float
    B2_limit: float
    B2_ci: float
    f3_equiv: bool
    f3_slopes: tuple
    critical_exponential: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "q": self.q, "q_ci": self.q_ci,
            "H_samples": [list(p) for p in self.H_samples],
            "g1_ok": self.g1_ok, "g1_margin": self.g1_margin,
            "g2_ok": self.g2_ok, "g2_C": list(self.g2_C),
            "convex_ok": self.convex_ok, "supercritical": self.supercritical,
            "primitive_limit": self.primitive_limit,
            "B1_limit": self.B1_limit, "B2_limit": self.B2_limit, "B2_ci": self.B2_ci,
            "f3_equiv": self.f3_equiv, "f3_slopes": list(self.f3_slopes),
            "critical_exponential": self.critical_exponential,
            "notes": list(self.notes),
        }


def _slope(log_g, vals):
    """Least-squares slope of log|vals| against log g over the upper half
    of the grid; -inf when the values vanish to rounding."""
    a = np.abs(np.asarray(vals, dtype=float))
    tail = slice(len(a) // 2, None)
    if np.all(a[tail] <= 1e-13):
        return -math.inf
    y = np.log(np.maximum(a[tail], 1e-300))
    return float(np.polyfit(np.asarray(log_g)[tail], y, 1)[0])


def criticality_report(spec: NonlinearitySpec) -> CriticalityReport:
    """Evaluate (G1), (G2), convexity, the supercritical limit, B1/B2
    limits and the f3-equivalence trends.

    q comes from :func:`estimate_q` (large-g grid).  Integral-based limits
    and trend tests use the moderate grid g = 2^k g_base, k = 4..14, where
    the quadratures resolve the O(1/g^2) cancellations in B2.
    """
    if spec.critical_exponential:
        raise InadmissibleSpecError(
            "critical-exponential nonlinearity (H identically 0); singular routines inadmissible")
    q, q_ci, samples = estimate_q(spec, return_samples=True)
    ss, lgs = q_grid(spec)
    notes = []

    Cs = np.zeros(3)
    convex = True
    prim_vals, b1_vals, b2_vals, Hs, cond2 = [], [], [], [], []
    for s, lgv in zip(ss, lgs):
        s = float(s)
        lg = log_g_series(spec, s, 2)
        gval = math.exp(lg[0])
        ratio = lg[1]  # g'/g
        dg = gval * ratio
        Hd = ser.to_derivatives(H_series(spec, s, 4))
        Hs.append(Hd[0])
        if Hd[0] <= 0:
            convex = False
        for k in range(1, 4):
            Cs[k - 1] = max(Cs[k - 1], abs(Hd[k]) / ratio ** k)
        cond2.append(math.sqrt(gval) * Hd[1] / ratio)
        d2 = dg * dg * Hd[0] / gval
        _, M = F_prim(spec, s)
        prim_vals.append(1.0 + (gval + math.log(M)) * (1.0 - dg * M))
        m = tail_mantissa_laguerre(spec, s)
        logF = -gval + math.log(m)
        fpF = dg * m
        b1_vals.append(-logF * (1.0 - fpF))
        b2_vals.append(fpF * logF ** 2 * ((d2 / dg + dg) * m - 1.0))
    g2_ok = bool(np.all(np.isfinite(Cs)))
    prim_limit, _ = extrapolate(prim_vals, lgs)
    b1_limit, _ = extrapolate(b1_vals, lgs)
    b2_limit, b2_spread = extrapolate(b2_vals, lgs)

    # (G1) numeric proxy: g(s) >= s^{1.01} on the grid
    margin = float(np.min(lgs - 1.01 * np.log(ss)))
    g1_ok = bool(margin > 0 and all(h > 0 for h in Hs))

    # f3 equivalence: sqrt(g)(H - 1/q) -> 0 iff the increments of H decay
    # faster than g^{-1/2}; sqrt(g) H' g/g' -> 0 iff its log-slope is negative
    dH = np.diff(np.asarray(Hs))
    dH[np.abs(dH) <= 64 * np.finfo(float).eps] = 0.0
    sl1 = _slope(lgs[1:], dH) + 0.5
    sl2 = _slope(lgs, cond2)
    f3 = bool(sl1 < -0.05 and sl2 < -0.05)
    return CriticalityReport(
        q=q, q_ci=q_ci, H_samples=samples, g1_ok=g1_ok, g1_margin=margin,
        g2_ok=g2_ok, g2_C=tuple(float(c) for c in Cs), convex_ok=convex,
        supercritical=bool(q < 2.0), primitive_limit=float(prim_limit),
        B1_limit=float(b1_limit), B2_limit=float(b2_limit), B2_ci=float(b2_spread),
        f3_equiv=f3, f3_slopes=(sl1, sl2), notes=notes,
    )
