"""The ten acceptance checks, runnable from the test suite and the CLI.

Every check returns a :class:`CheckResult` holding the measured numbers,
the pass/fail verdict at the stated tolerance and the wall time against
its budget.  Nothing here relaxes a tolerance: a check that cannot be met
reports ``passed=False`` with the measurements that show why.
"""

from __future__ import annotations

import inspect
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import nonlin
from .nonlin import series as ser

__all__ = ["CheckResult", "CHECKS", "run_check", "run_all"]


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    details: dict = field(default_factory=dict)

    @property
    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return "[%s] %2d %s (%.2fs / %gs)" % (verdict, self.number, self.title,
                                               self.seconds, self.budget)

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "budget": self.budget, "details": self.details}


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    return obj


# --------------------------------------------------------------------------
# 1. explicit singular solutions

def _residual_via_jets(spec, ufun, r):
    """|-u'' - u'/r - e^{g(u)}| / e^{g(u)} with u given as a series map."""
    x = ser.variable(r, 3)
    u = ufun(x)
    g = spec.ast.series(u)
    lap = -2.0 * u[2] - u[1] / r
    # e^{g(u)} cancels against the Laplacian; compare in log form
    return abs(lap * math.exp(-g[0]) - 1.0)


def check_exact_residuals() -> dict:
    f1 = nonlin.parse_nonlinearity("f1", {"B": 2.0})
    f2 = nonlin.parse_nonlinearity("f2")
    Bp = 2.0
    rs = np.geomspace(1e-8, 0.3, 200)
    u1 = lambda x: ser.power(-2.0 * ser.log(x), 1.0 / Bp)  # noqa: E731
    u2 = lambda x: ser.log(-2.0 * ser.log(x))  # noqa: E731
    res1 = max(_residual_via_jets(f1, u1, float(r)) for r in rs)
    res2 = max(_residual_via_jets(f2, u2, float(r)) for r in rs)
    return {"passed": res1 <= 1e-8 and res2 <= 1e-8, "max_rel_residual_f1": res1,
            "max_rel_residual_f2": res2}


# --------------------------------------------------------------------------
# 2. Gelfand

def check_gelfand() -> dict:
    from .bifurc import trace_curve
    spec = nonlin.parse_nonlinearity("s")
    probes = [1.0, math.log(4.0), 3.0, 6.0]
    grid = np.union1d(np.linspace(0.25, 8.0, 32), probes)
    curve = trace_curve(spec, grid, tol=1e-10, refine=True, rel=1e-5)
    exact = lambda a: 8.0 * (math.exp(a / 2.0) - 1.0) / math.exp(a)  # noqa: E731
    by_alpha = {s.alpha: s.lam for s in curve.good()}
    rel = [abs(by_alpha[a] - exact(a)) / exact(a) for a in probes]
    tps = [tp for tp in curve.turning_points if tp[2] == "max"]
    ok_tp = bool(tps) and abs(tps[0][0] - math.log(4.0)) <= 1e-3 and abs(tps[0][1] - 2.0) <= 1e-4
    return {"passed": max(rel) <= 1e-6 and ok_tp and len(tps) == 1,
            "max_rel_error": max(rel), "turning_points": tps}


# --------------------------------------------------------------------------
# 3. golden table of H and q

_H_POINTS = {
    "f1": [2.0, 3.0, 5.0, 10.0], "exp_pow": [1.0, 2.0, 3.0, 5.0],
    "pow_sum": [1.5, 2.0, 3.0, 5.0], "pow_log": [2.0, 3.0, 5.0, 10.0],
    "f2": [1.0, 2.0, 3.0, 5.0], "double_exp": [0.5, 1.0, 2.0, 5.0],
    "triple_exp": [0.5, 1.0, 2.0, 3.0],
}


def check_golden_table() -> dict:
    worst_q, worst_H, rows = 0.0, 0.0, {}
    for name, pts in _H_POINTS.items():
        spec = nonlin.parse_nonlinearity(name)
        q, _ = nonlin.estimate_q(spec)
        dq = abs(q - nonlin.closed_form_q(name))
        dH = max(abs(nonlin.eval_H(spec, s)[0] - nonlin.closed_form_H(name, s)) for s in pts)
        worst_q, worst_H = max(worst_q, dq), max(worst_H, dH)
        rows[name] = {"q": q, "q_error": dq, "H_error": dH}
    return {"passed": worst_q <= 1e-3 and worst_H <= 1e-9, "max_q_error": worst_q,
            "max_H_error": worst_H, "entries": rows}


# --------------------------------------------------------------------------
# 4. tail bound

def check_tail_bound() -> dict:
    worst, rows = -math.inf, {}
    for name in nonlin.CATALOG:
        spec = nonlin.parse_nonlinearity(name)
        margins = []
        for k in range(13):
            s = nonlin.solve_g(spec, 30.0 * 2.0 ** k)
            lg = nonlin.log_g_series(spec, s, 1)[0]
            lgp = nonlin.log_dg_series(spec, s, 1)[0]
            _, mant = nonlin.F_tail(spec, s)
            lhs = abs(math.exp(lgp) * mant - 1.0)
            rhs = 2.0 * nonlin.eval_H(spec, s)[0] * math.exp(-lg)
            margins.append(lhs / rhs)
        rows[name] = max(margins)
        worst = max(worst, rows[name])
    return {"passed": worst <= 1.0, "max_lhs_over_rhs": worst, "entries": rows}


# --------------------------------------------------------------------------
# 5. expansion error for f2

def _emden_spline(sol):
    keep = np.concatenate(([True], np.diff(sol.rho_grid) > 0))
    return CubicHermiteSpline(sol.rho_grid[keep], sol.y[keep], sol.dy[keep])


def check_expansion() -> dict:
    from .asym import expansion_g
    from .ode.types import g_array
    from .ode import integrate_singular
    spec = nonlin.parse_nonlinearity("f2")
    sol = integrate_singular(spec, (800.0, 0.0), tol=1e-11)
    U = _emden_spline(sol)
    rhos = np.geomspace(50.0, 400.0, 61)
    err = np.array([abs(float(g_array(spec, U(r))) - expansion_g(spec, float(r)).g_of_u)
                    for r in rhos])
    scaled = err * np.sqrt(rhos)
    half = rhos <= 200.0
    err2 = np.array([abs(float(g_array(spec, U(2 * r))) - expansion_g(spec, float(2 * r)).g_of_u)
                     for r in rhos[half]])
    decay = bool(np.all(err2 < err[half]))
    bound = bool(np.all(scaled <= 1.0))
    bad = rhos[scaled > 1.0]
    return {"passed": decay and bound, "halving_ok": decay, "sqrt_bound_ok": bound,
            "max_err_sqrt_rho": float(scaled.max()),
            "bound_violated_on": [float(bad.min()), float(bad.max())] if bad.size else None}


# --------------------------------------------------------------------------
# 6. Picard contraction

def check_picard(seed: int = 0) -> dict:
    from .ode import picard, integrate_singular
    spec = nonlin.parse_nonlinearity("f1", {"B": 2.0})
    cal = picard.calibrate_Lambda(spec)
    Lam = cal["Lambda"]
    grid = picard.picard_grid(spec, Lam, du=0.25)
    ratios = picard.lipschitz_ratios(grid, 10, seed=seed)
    t0 = picard.weighted_norm(grid, picard.picard_apply(spec, np.zeros_like(grid.rho),
                                                        grid=grid, check_ball=False).values)
    fixed, hist = picard.picard_fixed_point(spec, grid=grid)
    sol = integrate_singular(spec, (grid.rho_top, Lam), tol=1e-9, eta_stride=10)
    order = np.argsort(sol.rho_grid)
    eta_num = np.interp(grid.rho, sol.rho_grid[order], sol.eta[order])
    diff = picard.weighted_norm(grid, fixed.values - eta_num)
    limit = picard.DELTA / 3.0 * 1.1
    return {"passed": max(ratios) <= 0.5 and t0 <= limit and diff <= 2e-3,
            "Lambda": Lam, "max_lipschitz_ratio": max(ratios), "T0_norm": t0,
            "T0_limit": limit, "fixed_point_vs_integrator": diff, "iterations": len(hist)}


# --------------------------------------------------------------------------
# 7. energy suite

def check_energy() -> dict:
    from . import lyap
    from .ode import integrate_regular, integrate_singular
    from .lyap.energy import _g_minus
    out = {}
    # E(r) non-increasing on every shot
    shots = {"s": [1.0, 3.0, 6.0], "f2": [1.0, 2.0, 3.0],
             "exp_pow": [1.0, 3.0, 5.0], "s^1.5": [1.0, 5.0]}
    worst_rise = 0.0
    for name, alphas in shots.items():
        spec = nonlin.parse_nonlinearity(name)
        for a in alphas:
            sol = integrate_regular(spec, a, 1e-10)
            E = sol.energy(spec)
            rise = float(np.max(np.diff(E)) / np.max(np.abs(E)))
            worst_rise = max(worst_rise, rise)
    out["energy_max_relative_rise"] = worst_rise
    energy_ok = worst_rise <= 1e-12

    # calF and L on the working grid
    calF_ok, ratio_ok, Lp_ok = True, True, True
    ratios, min_Lp = {}, math.inf
    traces = {}
    for name in ("f1", "f2"):
        spec = nonlin.parse_nonlinearity(name)
        sol = integrate_singular(spec, (1e5, 0.0), tol=1e-11)
        traces[name] = (spec, sol)
        cal = lyap.calibrate_C(spec, sol.restrict(100.0, 800.0))
        C = cal["C"]
        grid = lyap.working_grid(spec, 100.0, 800.0)
        r = []
        for s in grid:
            F1, F2 = lyap.calF_derivatives(spec, float(s), C)
            calF_ok &= F1 >= 0.0 and F2 >= 0.0
            L, Lp = lyap.L_derivatives(spec, float(s), C)
            min_Lp = min(min_Lp, Lp)
            r.append(abs(F1 / math.exp(nonlin.log_dg_series(spec, float(s), 1)[0]) - 1.0))
        r = np.array(r)
        # calF'/g' -> 1: the deviation decreases along the grid and ends small
        ratio_ok &= bool(r[-1] < 1e-3 and r[-1] < r[0])
        ratios[name] = [float(r[0]), float(r[-1])]
        Lp_ok &= min_Lp >= -1e-8
    out.update({"calF_convex_monotone": calF_ok, "calF_over_gprime_minus_1": ratios,
                "min_L_prime": min_Lp})

    # Hcal on the rising stretches of the f2 trace
    spec, sol = traces["f2"]
    tr = lyap.energy_trace(spec, sol.restrict(1e3, 1e5), 1.0)
    drops = [float(np.min(np.diff(tr.Hcal[i:j + 1]))) for i, j in tr.rising_stretches() if j > i]
    H_ok = all(d >= 0.0 for d in drops)
    out.update({"n_rising_stretches": len(drops), "min_Hcal_increment": min(drops) if drops else None})

    # g(y) <= rho + log 4 along every singular trace
    worst_g = -math.inf
    for name in ("f1", "f2", "exp_pow", "double_exp"):
        if name in traces:
            spec, sol = traces[name]
        else:
            spec = nonlin.parse_nonlinearity(name)
            sol = integrate_singular(spec, (800.0, 0.0), tol=1e-11)
        m = sol.rho_grid > 0
        vals = [_g_minus(spec, y, r) for y, r in zip(sol.y[m], sol.rho_grid[m]) if y > spec.s_floor]
        worst_g = max(worst_g, max(vals))
    out["max_g_minus_rho"] = worst_g
    g_ok = worst_g <= math.log(4.0)
    out["passed"] = bool(energy_ok and calF_ok and ratio_ok and Lp_ok and H_ok and g_ok)
    return out


# --------------------------------------------------------------------------
# 8. Hardy suite

def random_bump(rng, n: int = 120):
    """Smooth bump on a random annulus [r1, r2] in (0, 1), as an AnnulusTestFunction."""
    from .intersect import AnnulusTestFunction
    r1 = 10.0 ** rng.uniform(-6.0, -1.0)
    r2 = min(0.999, r1 * 10.0 ** rng.uniform(0.3, 4.0))
    r = np.geomspace(r1, r2, n)
    t = (np.log(r) - np.log(r1)) / (np.log(r2) - np.log(r1))
    k = rng.integers(1, 4)
    phi = np.sin(np.pi * t) ** 2 * (1.0 + 0.5 * np.sin(k * np.pi * t))
    phi[0] = phi[-1] = 0.0
    return AnnulusTestFunction.from_radii(r, phi)


def check_hardy(seed: int = 20240611) -> dict:
    from .intersect import hardy_annulus, hardy_ratio
    rng = np.random.default_rng(seed)
    bumps = [hardy_ratio(random_bump(rng)) for _ in range(20)]
    ineq = all(l <= r for l, r in bumps)
    quot = [hardy_ratio(hardy_annulus(i)) for i in range(6)]
    good = [r < 1.5 * l for l, r in quot]
    run = best = 0
    for g in good:
        run = run + 1 if g else 0
        best = max(best, run)
    return {"passed": ineq and best >= 5, "bumps_ok": ineq,
            "max_bump_lhs_over_rhs": max(l / r for l, r in bumps),
            "annulus_rhs_over_lhs": [r / l for l, r in quot], "consecutive": best}


# --------------------------------------------------------------------------
# 9. oscillation

def check_oscillation() -> dict:
    from .bifurc import lambda_infinity, oscillation_report, trace_curve
    from .intersect import z_table
    from .ode.regular import G_HORIZON
    spec = nonlin.parse_nonlinearity("exp_pow")
    curve = trace_curve(spec, np.linspace(0.1, 10.0, 200), tol=1e-10, workers=4)
    curve.set_lambda_inf(lambda_infinity(spec))
    n_t, n_c = oscillation_report(curve)
    alphas = [a for a in (5.0, 10.0, 15.0, 20.0) if float(spec.g(a)) <= G_HORIZON]
    rows = z_table(spec, alphas)
    Z = [r["Z"] for r in rows]
    z_ok = all(b >= a for a, b in zip(Z, Z[1:])) and Z[-1] >= 3
    s15 = nonlin.parse_nonlinearity("s^1.5")
    c15 = trace_curve(s15, np.linspace(0.2, 25.0, 100), tol=1e-10, workers=4)
    return {"passed": bool(n_t >= 2 and n_c >= 2 and z_ok and len(c15.turning_points) == 1),
            "lambda_inf": curve.lambda_inf, "n_turning": n_t, "n_crossings": n_c,
            "alphas": alphas, "Z": Z, "s15_turning_points": c15.turning_points}


# --------------------------------------------------------------------------
# 10. lambda_inf anchors

def check_lambda_inf() -> dict:
    from .bifurc import lambda_infinity
    l1 = lambda_infinity(nonlin.parse_nonlinearity("f1", {"B": 2.0}))
    l2 = lambda_infinity(nonlin.parse_nonlinearity("f2"))
    return {"passed": abs(l1 - 1.0) <= 1e-3 and abs(l2 - math.exp(-1.0)) <= 1e-3,
            "lambda_inf_f1": l1, "lambda_inf_f2": l2}


CHECKS = {
    1: ("explicit singular solutions solve the equation", check_exact_residuals, 1.0),
    2: ("Gelfand curve and its fold", check_gelfand, 10.0),
    3: ("golden table of H and q", check_golden_table, 5.0),
    4: ("tail integral bound", check_tail_bound, 10.0),
    5: ("two-term expansion error for f2", check_expansion, 30.0),
    6: ("Picard contraction and fixed point", check_picard, 120.0),
    7: ("energy and Lyapunov functionals", check_energy, 60.0),
    8: ("Hardy quotients", check_hardy, 30.0),
    9: ("oscillation of the bifurcation curve", check_oscillation, 600.0),
    10: ("lambda_inf anchors", check_lambda_inf, 60.0),
}


def run_check(number: int, seed: int | None = None) -> CheckResult:
    """Run one check; exceptions count as failures with the message recorded.

    ``seed`` replaces the default seed of the randomised checks (6 and 8)
    and is ignored by the others.
    """
    title, fn, budget = CHECKS[number]
    kwargs = {}
    if seed is not None and "seed" in inspect.signature(fn).parameters:
        kwargs["seed"] = seed
    t0 = time.perf_counter()
    try:
        details = fn(**kwargs)
    except Exception as exc:  # noqa: BLE001 - a crash is a failed check, not a crashed run
        details = {"passed": False, "error": "%s: %s" % (type(exc).__name__, exc)}
    seconds = time.perf_counter() - t0
    passed = bool(details.pop("passed")) and seconds <= budget
    return CheckResult(number, title, passed, seconds, budget, _json_safe(details))


def run_all(numbers=None, seed: int | None = None) -> list[CheckResult]:
    return [run_check(k, seed) for k in (numbers or sorted(CHECKS))]
