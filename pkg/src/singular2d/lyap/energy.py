"""The functional calF, the weight L, and the energy along singular solutions.

With

    calF(s) = g + 2 log g - log(g/g') - log(4H) - C g^{-(1-eps)},
    L(s)    = g g' / calF'(s) * exp(-C g^{-(1-eps)}),

the remainder w = calF(z(rho)) - rho of a singular solution z satisfies a
damped oscillator equation in the time t with d rho = L^{1/2}(z) dt, and

    Hcal = (dW/dt)^2 / 2 + e^W / q - (1 - eps0) W / q

grows on every stretch where dw/drho >= 0.

Everything is written as g + R(s) with the slowly varying part

    R = log g + log g' - log 4 - log H - C exp(-(1-eps) log g),

whose Taylor series come from the log-space jets of g; g itself is only
formed when calF (not its derivatives or L) is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DomainError, NumericError
from ..nonlin import series as ser
from ..nonlin.criticality import estimate_q, q_grid, solve_g
from ..nonlin.spec import H_series, NonlinearitySpec, log_dg_series, log_g_series
from ..ode import backend
from ..ode.types import EmdenSolution

__all__ = ["EnergyTrace", "calF", "calF_derivatives", "L_of", "L_derivatives",
           "w_of", "energy_trace", "calibrate_C", "working_grid",
           "Classification", "classify_trichotomy", "EPS", "EPS0"]

EPS = 0.2
EPS0 = 1e-2
_LOG4 = math.log(4.0)


@dataclass(frozen=True)
class _Pieces:
    lg: float       # log g
    lgp: float      # log g'
    dlgp: float     # (log g')'
    R: tuple        # R, R', R''
    damp: float     # C g^{-(1-eps)}
    dlg: float      # (log g)'


def _pieces(spec: NonlinearitySpec, s: float, C: float, eps: float) -> _Pieces:
    s = float(s)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lg = log_g_series(spec, s, 3)
        lgp = log_dg_series(spec, s, 3)
        H = H_series(spec, s, 3)
        if not H[0] > 0.0:
            raise DomainError("H(s) <= 0 at s=%r; calF undefined" % (s,))
        damp = C * ser.exp(-(1.0 - eps) * lg)
        R = lg + lgp - ser.log(H) - damp
        R[0] -= _LOG4
    if not (np.all(np.isfinite(R)) and np.all(np.isfinite(lgp))):
        raise DomainError("calF jets not finite at s=%r" % (s,))
    return _Pieces(float(lg[0]), float(lgp[0]), float(lgp[1]),
                   (float(R[0]), float(R[1]), 2.0 * float(R[2])),
                   float(damp[0]), float(lg[1]))


def _log_derivs(p: _Pieces) -> tuple[float, float]:
    """log calF' and log calF'' without forming g'."""
    scale = math.exp(-p.lgp)
    r1 = p.R[1] * scale
    if not r1 > -1.0:
        raise DomainError("calF' <= 0")
    arg = p.dlgp + p.R[2] * scale
    if not arg > 0.0:
        raise DomainError("calF'' <= 0")
    return p.lgp + math.log1p(r1), p.lgp + math.log(arg)


def calF(spec: NonlinearitySpec, s: float, C: float, eps: float = EPS) -> float:
    """calF(s); overflows to ``inf`` only when g itself does.

    Raises
    ------
    DomainError
        Where H(s) <= 0 or the jets of g are not finite.
    """
    spec.require_singular_admissible()
    p = _pieces(spec, s, C, eps)
    return math.exp(p.lg) + p.R[0] if p.lg < 709.0 else math.inf


def calF_derivatives(spec: NonlinearitySpec, s: float, C: float,
                     eps: float = EPS) -> tuple[float, float]:
    """(calF'(s), calF''(s)); either may be negative when C is too small."""
    spec.require_singular_admissible()
    p = _pieces(spec, s, C, eps)
    gp = math.exp(p.lgp)
    return gp + p.R[1], gp * p.dlgp + p.R[2]


def L_derivatives(spec: NonlinearitySpec, s: float, C: float,
                  eps: float = EPS) -> tuple[float, float]:
    """(L(s), L'(s))."""
    spec.require_singular_admissible()
    p = _pieces(spec, s, C, eps)
    lF1, lF2 = _log_derivs(p)
    logL = p.lg + p.lgp - lF1 - p.damp
    dlogL = p.dlg + p.dlgp - math.exp(lF2 - lF1) + (1.0 - eps) * p.dlg * p.damp
    L = math.exp(logL) if logL < 709.0 else math.inf
    return L, L * dlogL


def L_of(spec: NonlinearitySpec, s: float, C: float, eps: float = EPS) -> float:
    """L(s) = g g'/calF' * exp(-C/g^{1-eps}) (positive wherever defined)."""
    return L_derivatives(spec, s, C, eps)[0]


def _g_minus(spec: NonlinearitySpec, y: float, rho: float) -> float:
    """g(y) - rho with g evaluated in double-double (w is a cancellation)."""
    ops, vals = spec.program
    hi, lo = backend.kernels.g_eval_dd(ops, vals, float(y), 0.0)
    return (hi - rho) + lo


def w_of(spec: NonlinearitySpec, y: float, rho: float, C: float, eps: float = EPS) -> float:
    """calF(y) - rho, accurate even when both terms are large."""
    p = _pieces(spec, y, C, eps)
    return _g_minus(spec, y, rho) + p.R[0]


# --------------------------------------------------------------------------
# calibration of C

def working_grid(spec: NonlinearitySpec, rho_lo: float = 100.0, rho_hi: float = 800.0,
                 n: int = 64, with_q_grid: bool = True) -> np.ndarray:
    """Large-s points: g^{-1} of a geometric rho grid on [rho_lo, rho_hi],
    plus the points of the q-grid beyond g^{-1}(rho_lo)."""
    spec.require_singular_admissible()
    s = [solve_g(spec, float(r)) for r in np.geomspace(rho_lo, rho_hi, n)]
    if with_q_grid:
        try:
            qs, _ = q_grid(spec)
            s.extend(float(x) for x in qs if x > s[0])
        except Exception:  # noqa: BLE001 - the q-grid is optional extra coverage
            pass
    return np.unique(np.asarray(s))


def _grid_ok(spec, s_grid, C, eps):
    for s in s_grid:
        try:
            _log_derivs(_pieces(spec, float(s), C, eps))
        except DomainError:
            return False, float(s)
    return True, None


def calibrate_C(spec: NonlinearitySpec, sol: EmdenSolution | None = None, *,
                eps: float = EPS, rho_lo: float = 100.0, rho_hi: float | None = None,
                c_max: float = 2.0 ** 40) -> dict:
    """Smallest power-of-two C with calF' >= 0, calF'' >= 0 on the working
    grid and calF(y_inf(rho)) - rho <= 0 along ``sol`` for rho >= rho_lo.

    Parameters
    ----------
    sol : EmdenSolution, optional
        Singular solution y_inf; computed from rho_hi (default 800) down when
        omitted.

    Returns
    -------
    dict
        ``C``, ``log2_C``, the grid sizes used, and ``max_w`` (the largest
        calF(y_inf) - rho at the chosen C).
    """
    if sol is None:
        from ..ode.singular import integrate_singular
        sol = integrate_singular(spec, (rho_hi or 800.0, 0.0), tol=1e-11)
    if sol.kind != "singular":
        raise ConfigError("calibration needs a singular solution")
    sub = sol.restrict(rho_lo, rho_hi if rho_hi is not None else np.inf)
    if sub.rho_grid.size == 0:
        raise ConfigError("singular solution does not reach rho >= %r" % rho_lo)
    grid = working_grid(spec, rho_lo, float(sub.rho_grid[-1]))
    k = 0
    while 2.0 ** k <= c_max:
        C = 2.0 ** k
        ok, _ = _grid_ok(spec, grid, C, eps)
        if ok:
            try:
                w = np.array([w_of(spec, y, r, C, eps) for r, y in zip(sub.rho_grid, sub.y)])
            except DomainError:
                w = np.array([np.inf])
            if np.all(w <= 0.0):
                return {"C": C, "log2_C": k, "eps": eps, "n_grid": int(grid.size),
                        "n_trace": int(sub.rho_grid.size), "max_w": float(w.max())}
        k += 1
    raise NumericError("no C <= %r satisfies the calibration checks" % c_max)


# --------------------------------------------------------------------------
# energy along a singular solution

@dataclass
class EnergyTrace:
    """w, the time t, dW/dt and Hcal along a singular solution."""

    rho_grid: np.ndarray
    w: np.ndarray
    t: np.ndarray
    dWdt: np.ndarray
    Hcal: np.ndarray
    L_vals: np.ndarray
    params: dict = field(default_factory=dict)
    dw: np.ndarray | None = None

    def rising_stretches(self) -> list[tuple[int, int]]:
        """Index ranges [i, j] (inclusive) of maximal runs with dw/drho >= 0."""
        if self.dw is None:
            raise ConfigError("trace carries no dw/drho")
        up = self.dw >= 0.0
        runs, i, n = [], 0, up.size
        while i < n:
            if up[i]:
                j = i
                while j + 1 < n and up[j + 1]:
                    j += 1
                runs.append((i, j))
                i = j + 1
            else:
                i += 1
        return runs

    def rows(self):
        return zip(self.rho_grid, self.w, self.t, self.dWdt, self.Hcal, self.L_vals)


def _trapezoid_cumulative(x, f):
    out = np.zeros_like(x)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(x))
    return out


def energy_trace(spec: NonlinearitySpec, sol: EmdenSolution, C: float, eps: float = EPS,
                 eps0: float = EPS0, *, q: float | None = None) -> EnergyTrace:
    """Evaluate w, t, dW/dt and Hcal on the grid of ``sol``.

    dw/drho is formed by the chain rule calF'(y) dy/drho - 1 from the stored
    integrator derivatives.

    Raises
    ------
    ConfigError
        When ``sol`` is not a singular solution.
    DomainError
        When a grid point lies where calF is undefined (y below s_admit or
        H <= 0); restrict the solution first.
    NumericError
        When t fails to increase strictly (L <= 0 somewhere).
    """
    spec.require_singular_admissible()
    if sol.kind != "singular":
        raise ConfigError("energy_trace needs a singular solution")
    if q is None:
        q = float(estimate_q(spec)[0])
    rho = np.asarray(sol.rho_grid, dtype=float)
    if np.any(sol.y < spec.s_admit):
        raise DomainError("solution enters y < s_admit=%r; restrict the rho range"
                          % spec.s_admit)
    n = rho.size
    w = np.empty(n)
    dw = np.empty(n)
    Lv = np.empty(n)
    for i in range(n):
        p = _pieces(spec, float(sol.y[i]), C, eps)
        lF1, _ = _log_derivs(p)
        w[i] = _g_minus(spec, float(sol.y[i]), float(rho[i])) + p.R[0]
        dw[i] = math.exp(lF1) * float(sol.dy[i]) - 1.0
        Lv[i] = math.exp(p.lg + p.lgp - lF1 - p.damp)
    t = _trapezoid_cumulative(rho, Lv ** -0.5)
    if n > 1 and not np.all(np.diff(t) > 0.0):
        raise NumericError("time t not strictly increasing (L <= 0 or unsorted grid)")
    dWdt = dw * np.sqrt(Lv)
    Hcal = 0.5 * dWdt ** 2 + (np.exp(w) - (1.0 - eps0) * w) / q
    return EnergyTrace(rho, w, t, dWdt, Hcal, Lv,
                       {"C": float(C), "eps": float(eps), "eps0": float(eps0), "q": q}, dw)


# --------------------------------------------------------------------------
# trichotomy

@dataclass
class Classification:
    """Outcome of :func:`classify_trichotomy`."""

    case: str
    diagnostics: dict = field(default_factory=dict)


def _hermite(x, xs, ys, dys):
    from scipy.interpolate import CubicHermiteSpline
    return CubicHermiteSpline(xs, ys, dys)(x)


def _first_admissible(sol: EmdenSolution, s_adm: float) -> float:
    """Smallest rho above which every y exceeds s_adm (the domain of calF)."""
    bad = np.flatnonzero(sol.y <= s_adm)
    if bad.size == 0:
        return float(sol.rho_grid[0])
    if bad[-1] + 1 >= sol.rho_grid.size:
        return math.inf
    return float(sol.rho_grid[bad[-1] + 1])


def classify_trichotomy(spec: NonlinearitySpec, z: EmdenSolution, y_ref: EmdenSolution,
                        C: float, eps: float = EPS, *, C1: float | None = None,
                        tol: float = 1e-9) -> Classification:
    """Decide which alternative holds for z against the reference y_ref.

    The comparison runs on the common rho-range where both solutions lie
    above s_admit; "along a sequence" is read
    as "somewhere in the upper half of that range".  Case (i) needs
    g(z) - g(y_ref) > ``tol`` (strict, so that z = y_ref does not count),
    case (iii) calF(z) > rho >= calF(y_ref).  Case (ii) is decided with the
    given C1, or, without one, by asking that w = calF(z) - rho does not
    drift down: its minimum over the top third of the range is no lower
    than over the bottom third.  The empirical lower bound -min w is
    reported as ``C1_empirical`` either way.
    """
    s_adm = spec.s_admit if spec.s_admit is not None else spec.s_floor
    lo = max(_first_admissible(z, s_adm), _first_admissible(y_ref, s_adm))
    hi = min(z.rho_grid[-1], y_ref.rho_grid[-1])
    diag = {"rho_range": (float(lo), float(hi))}
    if not hi - lo >= 100.0:
        diag["reason"] = "overlap shorter than 100"
        return Classification("undetermined", diag)
    zs = z.restrict(lo, hi)
    rho = zs.rho_grid
    yr = _hermite(rho, y_ref.rho_grid, y_ref.y, y_ref.dy)
    gz = np.array([_g_minus(spec, y, r) for y, r in zip(zs.y, rho)])
    gy = np.array([_g_minus(spec, y, r) for y, r in zip(yr, rho)])
    wz = np.array([w_of(spec, y, r, C, eps) for y, r in zip(zs.y, rho)])
    wy = np.array([w_of(spec, y, r, C, eps) for y, r in zip(yr, rho)])
    upper = rho >= 0.5 * (lo + hi)
    case_i = np.flatnonzero(upper & (gz - gy > tol))
    case_iii = np.flatnonzero(upper & (wz > 0.0) & (wy <= 0.0))
    third = max(1, rho.size // 3)
    C1_emp = float(-wz.min())
    if C1 is None:
        case_ii = bool(wz[-third:].min() >= wz[:third].min() - tol * (1.0 + abs(wz).max()))
    else:
        case_ii = bool(np.all(wz > -C1 - tol))
    diag.update({"C1_empirical": C1_emp, "C1": C1, "n_case_i": int(case_i.size),
                 "n_case_iii": int(case_iii.size), "case_ii": case_ii,
                 "max_gap": float((gz - gy).max())})
    if case_i.size:
        diag["rho_n"] = rho[case_i[-min(5, case_i.size):]].tolist()
        return Classification("i", diag)
    if case_ii:
        return Classification("ii", diag)
    if case_iii.size:
        diag["rho_n"] = rho[case_iii[-min(5, case_iii.size):]].tolist()
        return Classification("iii", diag)
    return Classification("undetermined", diag)
