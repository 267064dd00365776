"""Intersection numbers Z(U_inf - v_alpha) along a sequence of shots."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

from ..nonlin.spec import NonlinearitySpec
from ..ode.regular import integrate_regular
from ..ode.singular import integrate_singular, to_radial
from ..ode.types import RadialSolution
from .count import intersection_points

__all__ = ["singular_radial", "z_table"]


def singular_radial(spec: NonlinearitySpec, rho_top: float, tol: float = 1e-11) -> RadialSolution:
    """U_inf(r) = y_inf(-2 log r) from rho_top down to its first zero."""
    return to_radial(integrate_singular(spec, (float(rho_top), 0.0), tol=tol))


def z_table(spec: NonlinearitySpec, alphas, *, tol: float = 1e-11, U: RadialSolution | None = None,
            rho_top: float | None = None, r_max: float | None = None,
            workers: int = 1) -> list[dict]:
    """Z(U_inf - v_alpha) on (r_min_used, r_max] for each alpha.

    v_alpha is the regular solution with v(0) = alpha (unscaled, so both
    solve -Delta u = f(u)); r_max defaults to the first zero of U_inf.
    U_inf is integrated from rho_top = 1.5 g(max alpha) + 100 unless given:
    below r = exp(-rho_top/2) every v_alpha is still within rounding of
    alpha < U_inf, so no zero is lost by the cut.

    Returns
    -------
    list of dict
        One row per alpha (input order): alpha, Z, r_min_used (as
        log_r_min_used too, since it underflows), and the shot's lambda.
    """
    alphas = [float(a) for a in alphas]
    if U is None:
        if rho_top is None:
            rho_top = 1.5 * max(float(spec.g(a)) for a in alphas) + 100.0
        U = singular_radial(spec, rho_top, tol)
    if r_max is None:
        r_max = U.first_zero

    def one(alpha):
        v = integrate_regular(spec, alpha, tol)
        pts = intersection_points(U, v, r_max)
        lo = pts["log_r_min"]
        return {"alpha": alpha, "Z": int(pts["log_r"].size),
                "r_min_used": math.exp(lo) if lo > -745.0 else 0.0,
                "log_r_min_used": lo, "lam": v.lam}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, alphas))
    return [one(a) for a in alphas]
