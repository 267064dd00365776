"""Shooting for the regular solution u(0) = alpha of -u'' - u'/r = e^{g(u)}.

Work in t = log r~ with r~ = r e^{g(alpha)/2}.  With v = u - alpha the
equation becomes

    v_tt = -exp(2t + g(alpha + v) - g(alpha)),

whose right-hand side is O(1) where the solution turns over, whatever
the size of f(alpha).  The zero of u in the original radius is
log r0 = t0 - g(alpha)/2, hence log lambda = 2 t0 - g(alpha).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from ..ddouble import two_sum
from ..errors import DomainError, IntegrationError
from ..nonlin.spec import NonlinearitySpec
from . import backend
from .types import RadialSolution, g_array

__all__ = ["integrate_regular", "DD_THRESHOLD", "G_HORIZON", "M_REG"]

M_REG = 0
# compensated arithmetic above this value of g(alpha)
DD_THRESHOLD = 500.0
# beyond this g(alpha) the zero sits at t ~ g(alpha)/2 where the spacing of
# binary64 numbers exceeds 1e-5, so log lambda cannot be resolved
G_HORIZON = 1e11
_R_START = 1e-6
_EMPTY = np.zeros((0, 1))


def _g_alpha(spec, alpha, use_dd):
    ops, vals = spec.program
    if use_dd:
        return backend.kernels.g_eval_dd(ops, vals, float(alpha), 0.0)
    return float(backend.kernels.g_eval(ops, vals, float(alpha))), 0.0


def integrate_regular(spec: NonlinearitySpec, alpha: float, tol: float = 1e-10, *,
                      arith: str = "auto", log_rmax: float = 20.0,
                      max_steps: int = 2_000_000, stride: int = 1) -> RadialSolution:
    """Integrate from the centre to the first zero of u.

    Parameters
    ----------
    alpha : float
        Central value u(0) > 0.
    tol : float
        Local error tolerance of the embedded pair, in [1e-13, 1e-6].
    arith : {"auto", "f64", "dd"}
        ``auto`` switches to double-double once g(alpha) > 500.
    log_rmax : float
        Give up when log r (original radius) exceeds this value.
    stride : int
        Keep every ``stride``-th accepted step in the output grid.

    Raises
    ------
    DomainError
        For alpha <= 0, tol out of range, or f not finite on [0, alpha]
        (e.g. f1, whose f blows up at 0).
    IntegrationError
        When no zero is found before r = e^{log_rmax} or the step size
        underflows.
    """
    if not alpha > 0.0:
        raise DomainError("alpha must be positive")
    if not 1e-13 <= tol <= 1e-6:
        raise DomainError("tol must lie in [1e-13, 1e-6]")
    ops, vals = spec.program
    ga = float(backend.kernels.g_eval(ops, vals, float(alpha)))
    if arith == "auto":
        use_dd = ga > DD_THRESHOLD
    elif arith in ("f64", "dd"):
        use_dd = arith == "dd"
    else:
        raise DomainError("arith must be auto, f64 or dd")
    ga_hi, ga_lo = _g_alpha(spec, alpha, use_dd)
    if not math.isfinite(ga_hi) or ga_hi > G_HORIZON:
        raise DomainError("g(alpha)=%r is beyond the resolvable horizon %g" % (ga_hi, G_HORIZON))
    probe = g_array(spec, np.linspace(0.0, float(alpha), 65))
    if not np.all(np.isfinite(probe)):
        raise DomainError("f is not finite on [0, alpha]; regular solutions do not exist")
    par = np.array([float(alpha), ga_hi, ga_lo])
    t0 = math.log(_R_START)
    e2 = math.exp(2.0 * t0)
    v0, w0 = -0.25 * e2, -0.5 * e2
    atol = 1e-3 * tol
    t_end = log_rmax + 0.5 * ga
    T, Y, F, status = backend.kernels.integrate(
        M_REG, ops, vals, par, _EMPTY, t0, v0, w0, t_end, tol, atol * e2, atol,
        0.05, max_steps, int(use_dd), int(stride))
    if status == 3:
        raise IntegrationError("step size underflow in regular shot", last_x=float(T[-1]))
    if status != 1:
        raise IntegrationError("no zero found before log r = %g" % log_rmax, last_x=float(T[-1]))
    # polish the zero inside the last accepted step
    ta, va, wa = float(T[-2]), float(Y[-2, 0]), float(Y[-2, 1])
    h_last = float(T[-1]) - ta

    def u_at(h):
        return backend.kernels.rk_step(M_REG, ops, vals, par, _EMPTY, ta, va, wa, h, int(use_dd))[0] + alpha

    if u_at(0.0) <= 0.0:
        h0 = 0.0
    else:
        h0 = brentq(u_at, 0.0, h_last, xtol=1e-15 * max(1.0, abs(ta)), rtol=1e-15, maxiter=200)
    _, w_zero = backend.kernels.rk_step(M_REG, ops, vals, par, _EMPTY, ta, va, wa, h0, int(use_dd))
    t_zero = ta + h0
    # replace the overshooting last point by the polished zero
    T = np.append(T[:-1], t_zero)
    v = np.append(Y[:-1, 0], -alpha)
    w = np.append(Y[:-1, 1], w_zero)
    if use_dd:
        u = np.array([sum(two_sum(alpha, x)) for x in v])
    else:
        u = alpha + v
    u[-1] = 0.0
    log_r = T - 0.5 * ga
    with np.errstate(over="ignore", under="ignore"):
        r = np.exp(log_r)
        du = w * np.exp(-log_r)
    log_r0 = t_zero - 0.5 * ga
    meta = {"tol": tol, "arith": "dd" if use_dd else "f64", "rescale_exponent": 0.5 * ga,
            "t_zero": t_zero, "log_lambda": 2.0 * t_zero - ga,
            "log_lambda_ulp": 2.0 * math.ulp(t_zero) + math.ulp(ga), "steps": int(len(T) - 1),
            "backend": backend.backend_name()}
    return RadialSolution(r_grid=r, u=u, du=du, alpha=float(alpha),
                          first_zero=math.exp(log_r0), log_r=log_r, r_du=w,
                          log_first_zero=log_r0, meta=meta)
