"""Bifurcation curve lambda(alpha) of -Delta u = lambda f(u) in the unit disk.

For the solution with u(0) = alpha, lambda(alpha) = r0(alpha)^2 with r0 the
first zero of the regular solution of -u'' - u'/r = f(u).  The curve is
single-valued in alpha, so continuation is a plain sweep with local
refinement where the slope changes sign.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, Singular2dError
from ..nonlin.spec import NonlinearitySpec
from ..ode.regular import integrate_regular
from ..ode.singular import integrate_singular

__all__ = ["Sample", "BifurcationCurve", "trace_curve", "lambda_infinity", "oscillation_report",
           "shoot_lambda"]


@dataclass(frozen=True)
class Sample:
    alpha: float
    lam: float
    r0: float
    refined: bool = False
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class BifurcationCurve:
    """Samples of lambda(alpha), turning points and crossings of lambda_inf."""

    samples: list
    lambda_inf: float | None = None
    turning_points: list = field(default_factory=list)
    crossings: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_arrays(cls, alpha, lam, lambda_inf=None) -> "BifurcationCurve":
        """Curve from plain arrays (used for synthetic inputs)."""
        samples = [Sample(float(a), float(l), math.sqrt(l) if l > 0 else math.nan)
                   for a, l in zip(alpha, lam)]
        curve = cls(samples=samples, lambda_inf=lambda_inf)
        curve.turning_points = _turning_points(curve.good())
        if lambda_inf is not None:
            curve.crossings = _crossings(curve.good(), lambda_inf)
        return curve

    def good(self) -> list:
        return sorted((s for s in self.samples if s.ok), key=lambda s: s.alpha)

    @property
    def alpha(self) -> np.ndarray:
        return np.array([s.alpha for s in self.good()])

    @property
    def lam(self) -> np.ndarray:
        return np.array([s.lam for s in self.good()])

    def set_lambda_inf(self, value: float) -> None:
        self.lambda_inf = float(value)
        self.crossings = _crossings(self.good(), self.lambda_inf)

    def rows(self) -> list[tuple]:
        """(alpha, lambda, r0, is_turning, lambda - lambda_inf) per sample."""
        turning = {tp[0] for tp in self.turning_points}
        li = self.lambda_inf
        return [(s.alpha, s.lam, s.r0, s.alpha in turning,
                 (s.lam - li) if li is not None else math.nan) for s in self.good()]


def shoot_lambda(spec: NonlinearitySpec, alpha: float, tol: float, arith: str = "auto") -> Sample:
    """lambda(alpha) from one regular shot; failures become annotated samples."""
    try:
        sol = integrate_regular(spec, alpha, tol, arith=arith)
    except Singular2dError as exc:
        return Sample(float(alpha), math.nan, math.nan, error="%s: %s" % (type(exc).__name__, exc))
    log_lam = sol.meta["log_lambda"]
    return Sample(float(alpha), math.exp(log_lam), math.exp(0.5 * log_lam))


def _turning_points(samples) -> list:
    out = []
    for i in range(1, len(samples) - 1):
        a, b, c = samples[i - 1].lam, samples[i].lam, samples[i + 1].lam
        if b > a and b >= c:
            out.append((samples[i].alpha, b, "max"))
        elif b < a and b <= c:
            out.append((samples[i].alpha, b, "min"))
    return out


def _crossings(samples, lam_inf) -> list:
    out = []
    for s0, s1 in zip(samples[:-1], samples[1:]):
        d0, d1 = s0.lam - lam_inf, s1.lam - lam_inf
        if d0 == 0.0:
            out.append(s0.alpha)
        elif d0 * d1 < 0.0:
            out.append(s0.alpha + (s1.alpha - s0.alpha) * d0 / (d0 - d1))
    return out


def _refine_extremum(spec, lo, mid, hi, kind, tol, arith, rel):
    """Golden-section search for the extremum bracketed by (lo, mid, hi)."""
    sign = 1.0 if kind == "max" else -1.0
    new = []
    a, b = lo.alpha, hi.alpha
    x = mid
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(80):
        if b - a <= rel * x.alpha:
            break
        # probe the larger sub-interval
        if x.alpha - a > b - x.alpha:
            t = x.alpha - (1.0 - invphi) * (x.alpha - a)
            s = shoot_lambda(spec, t, tol, arith)
            if not s.ok:
                break
            s = Sample(s.alpha, s.lam, s.r0, refined=True)
            new.append(s)
            if sign * s.lam > sign * x.lam:
                b, x = x.alpha, s
            else:
                a = t
        else:
            t = x.alpha + (1.0 - invphi) * (b - x.alpha)
            s = shoot_lambda(spec, t, tol, arith)
            if not s.ok:
                break
            s = Sample(s.alpha, s.lam, s.r0, refined=True)
            new.append(s)
            if sign * s.lam > sign * x.lam:
                a, x = x.alpha, s
            else:
                b = t
    return new


def trace_curve(spec: NonlinearitySpec, alpha_grid, tol: float = 1e-10, *, refine: bool = True,
                arith: str = "auto", workers: int = 1, rel: float = 1e-4) -> BifurcationCurve:
    """Sweep lambda over ``alpha_grid`` and refine around turning points.

    Each local extremum of the sampled lambda is refined by golden-section
    search until its bracket is shorter than ``rel * alpha``.  Shots are
    independent, so with ``workers > 1`` they run on a thread pool (the
    compiled kernel releases the GIL); results are assembled in alpha
    order either way.

    Raises
    ------
    ConfigError
        If the grid is not increasing and positive.
    """
    grid = np.asarray(alpha_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise ConfigError("alpha_grid must be increasing and positive")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(lambda a: shoot_lambda(spec, a, tol, arith), grid))
    else:
        samples = [shoot_lambda(spec, a, tol, arith) for a in grid]
    curve = BifurcationCurve(samples=list(samples), meta={"tol": tol, "refine": refine})
    if refine:
        good = curve.good()
        tasks = []
        for tp in _turning_points(good):
            i = next(k for k, s in enumerate(good) if s.alpha == tp[0])
            tasks.append((good[i - 1], good[i], good[i + 1], tp[2]))

        def run(task):
            return _refine_extremum(spec, *task, tol, arith, rel)

        if workers > 1 and tasks:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                extra = list(pool.map(run, tasks))
        else:
            extra = [run(t) for t in tasks]
        for e in extra:
            curve.samples.extend(e)
    curve.samples.sort(key=lambda s: s.alpha)
    curve.turning_points = _turning_points(curve.good())
    return curve


def lambda_infinity(spec: NonlinearitySpec, tol: float = 1e-11, rho_max: float = 2000.0,
                    rho_min: float = -200.0) -> float:
    """lambda_inf = r0^2 for the first zero r0 of the singular solution.

    The singular solution is integrated from rho_max down to its zero;
    rho_min < 0 lets the zero lie outside the unit ball (lambda_inf > 1).

    Raises
    ------
    InadmissibleSpecError
        When the nonlinearity has no singular asymptotics (e.g. g = s).
    IntegrationError
        When no zero is reached.
    """
    sol = integrate_singular(spec, (rho_max, rho_min), tol)
    if sol.rho_zero is None:
        from ..errors import IntegrationError
        raise IntegrationError("singular solution has no zero above rho = %g" % rho_min,
                               last_x=float(sol.rho_grid[0]))
    return math.exp(-sol.rho_zero)


def _dedupe(xs, sep):
    out = []
    for x in sorted(xs):
        if not out or x - out[-1] >= sep:
            out.append(x)
    return out


def oscillation_report(curve: BifurcationCurve, min_sep: float = 1e-3) -> tuple[int, int]:
    """(number of turning points, number of sign changes of lambda - lambda_inf).

    Points closer than ``min_sep`` in alpha count once.

    Raises
    ------
    ConfigError
        If the curve has no lambda_inf.
    """
    if curve.lambda_inf is None:
        raise ConfigError("oscillation_report needs lambda_inf on the curve")
    good = curve.good()
    if len(good) < 3:
        return 0, 0
    tps = _dedupe([tp[0] for tp in _turning_points(good)], min_sep)
    crs = _dedupe(_crossings(good, curve.lambda_inf), min_sep)
    return len(tps), len(crs)


def summary_json(curve: BifurcationCurve, q: float | None = None) -> str:
    """JSON summary {q, lambda_inf, n_turning, n_crossings, turning_points}."""
    n_t, n_c = oscillation_report(curve) if curve.lambda_inf is not None else (
        len(curve.turning_points), 0)
    doc = {"q": q, "lambda_inf": curve.lambda_inf, "n_turning": n_t, "n_crossings": n_c,
           "turning_points": [{"alpha": a, "lambda": l, "kind": k} for a, l, k in curve.turning_points]}
    return json.dumps(doc, sort_keys=True)
