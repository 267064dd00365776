"""The integral operator whose fixed point is the remainder eta = y - y1 - y2.

    T[eta](rho) = int_rho^inf a(rho) a(tau) sin(b(rho) - b(tau)) S(tau) dtau,
    S = y2'' + (a''/a) eta + N1 + N2 + N3,

with the nonlinear terms (E = e^{g'(y1) y2}/4, delta = y2 + eta)

    N1 = E (e^{g' eta} - 1 - g' eta)
    N2 = E e^{g' eta} (e^{g'' delta^2/2} - 1)       (J and the four N2,i together)
    N3 = E e^{g' eta + g'' delta^2/2} (e^{h(delta)} - 1).

Quadrature.  In u = b(tau) the integral is a(rho) int_{b(rho)}^inf sin(b(rho) - u) p(u) du
with p = a^3 S.  Replacing p by its cubic spline on the grid, the
antiderivative of sin(c - u) p(u) is exact,

    A(u) = p cos(c-u) + p' sin(c-u) - p'' cos(c-u) - p''' sin(c-u),

and only the jumps J_j of p''' at the knots survive the telescoping sum:

    T_i = a_i [ p''(u_i) - p(u_i) + sum_{j>i} J_j sin(u_i - u_j) ].

The tail beyond the last knot is completed by integration by parts with
the spline's end derivatives, which cancels the boundary term there.
The sum over j is two reverse cumulative sums, so one application costs
O(n) for n knots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from ..asym.frame import coefficient_row, frame_series
from ..errors import ConvergenceError, DomainError
from ..nonlin import series as ser
from ..nonlin.spec import NonlinearitySpec
from .singular import eta_tables

__all__ = ["PicardGrid", "GridFunction", "picard_grid", "picard_apply", "source_terms",
           "weighted_norm", "calibrate_Lambda", "picard_fixed_point", "random_ball_function",
           "lipschitz_ratios", "DELTA", "EPS"]

DELTA = 1e-2
EPS = 0.5
_KMAX = 8


def _picard_rows(spec, rho):
    """coefficient_row followed by a, a''/a and sqrt(G rho) (= db/dlog rho)."""
    row = coefficient_row(spec, rho, _KMAX)
    S = frame_series(spec, rho, 4)
    a = ser.to_derivatives(S["a"])
    G = float(S["G"][0])
    return np.concatenate([row, [a[0], a[2] / a[0], math.sqrt(G * rho)]])


@dataclass
class GridFunction:
    rho: np.ndarray
    values: np.ndarray


@dataclass
class PicardGrid:
    """Knots in rho (roughly uniform in b) with every coefficient tabulated."""

    spec: NonlinearitySpec
    Lambda: float
    rho_top: float
    rho: np.ndarray
    u: np.ndarray
    rows: dict
    weight: np.ndarray
    eps: float
    meta: dict = field(default_factory=dict)

    def function(self, values) -> GridFunction:
        return GridFunction(self.rho, np.asarray(values, dtype=float))


def picard_grid(spec: NonlinearitySpec, Lambda: float, rho_top: float | None = None,
                du: float = 0.1, eps: float = EPS) -> PicardGrid:
    """Tabulate the operator's coefficients on [Lambda, rho_top].

    Knots are uniform in sqrt(rho) with spacing chosen so that the phase
    increment per knot is about ``du``.
    """
    spec.require_singular_admissible()
    if rho_top is None:
        rho_top = 4.0 * Lambda
    segs = eta_tables(spec, Lambda, rho_top, rowfun=_picard_rows)
    segs = segs[::-1]   # bottom-up
    # db/dsqrt(rho) = 2 sqrt(G); pick the knot spacing from the largest G
    G_max = 0.0
    for s in segs:
        ends = np.array([s.rho_lo, s.rho_hi])
        G_max = max(G_max, float(np.max(s.evaluate(ends)[-1] ** 2 / ends)))
    ds = du / (2.0 * math.sqrt(G_max))
    sq = np.arange(math.sqrt(Lambda), math.sqrt(rho_top), ds)
    rho = np.append(sq ** 2, rho_top)
    rho[0] = Lambda
    nrow = segs[0].coef.shape[0]
    vals = np.empty((nrow, rho.size))
    u = np.empty(rho.size)
    b_off = 0.0
    for s in segs:
        k = (rho >= s.rho_lo) & (rho <= s.rho_hi)
        vals[:, k] = s.evaluate(rho[k])
        # b as the exact integral of the Chebyshev series of db/dx
        half = 0.5 * (s.x1 - s.x0)
        bint = np.polynomial.chebyshev.chebint(s.coef[-1], lbnd=-1.0, scl=half)
        xi = (2.0 * np.log(rho[k]) - s.x0 - s.x1) / (s.x1 - s.x0)
        u[k] = b_off + np.polynomial.chebyshev.chebval(xi, bint)
        b_off += float(np.polynomial.chebyshev.chebval(1.0, bint))
    names = ["y2pp", "E", "gp", "gpp", "y2"] + ["c%d" % k for k in range(3, _KMAX + 1)] + \
            ["a", "a2a", "db_dx"]
    rows = {n: vals[i] for i, n in enumerate(names)}
    weight = rows["gp"] * rho ** (1.0 - eps)
    return PicardGrid(spec=spec, Lambda=float(Lambda), rho_top=float(rho_top), rho=rho, u=u,
                      rows=rows, weight=weight, eps=eps,
                      meta={"du": du, "segments": len(segs), "knots": int(rho.size)})


def _expm1_minus_x(x):
    """e^x - 1 - x without cancellation for small x."""
    x = np.asarray(x, dtype=float)
    out = np.expm1(x) - x
    small = np.abs(x) < 1e-2
    xs = x[small]
    out[small] = xs * xs * (0.5 + xs * (1.0 / 6 + xs * (1.0 / 24 + xs * (1.0 / 120 + xs / 720))))
    return out


def source_terms(grid: PicardGrid, eta) -> dict:
    """S and its pieces (y2'', (a''/a) eta, N1, N2, N3) on the grid."""
    eta = np.asarray(eta, dtype=float)
    r = grid.rows
    E, gp, gpp = r["E"], r["gp"], r["gpp"]
    delta = r["y2"] + eta
    h = np.zeros_like(delta)
    dk = delta ** 3
    for k in range(3, _KMAX + 1):
        h += r["c%d" % k] * dk
        dk = dk * delta
    x1 = gp * eta
    x2 = 0.5 * gpp * delta * delta
    N1 = E * _expm1_minus_x(x1)
    N2 = E * np.exp(x1) * np.expm1(x2)
    N3 = E * np.exp(x1 + x2) * np.expm1(h)
    lin = r["a2a"] * eta
    S = r["y2pp"] + lin + N1 + N2 + N3
    return {"S": S, "y2pp": r["y2pp"], "a2a_eta": lin, "N1": N1, "N2": N2, "N3": N3}


def weighted_norm(grid: PicardGrid, values) -> float:
    """sup g'(y1) rho^{1-eps} |eta| over the grid."""
    return float(np.max(np.abs(grid.weight * np.asarray(values, dtype=float))))


def _apply(grid: PicardGrid, eta) -> np.ndarray:
    S = source_terms(grid, eta)["S"]
    a = grid.rows["a"]
    p = a ** 3 * S
    u = grid.u
    spl = CubicSpline(u, p, bc_type="not-a-knot")
    p2 = spl(u, 2)
    c3 = 6.0 * spl.c[0]           # p''' on each interval
    J = np.zeros_like(u)
    J[1:-1] = c3[1:] - c3[:-1]
    # sum_{j>i} J_j sin(u_i - u_j) = sin u_i C_i - cos u_i S_i
    su, cu = np.sin(u), np.cos(u)
    C = np.concatenate([np.cumsum((J * cu)[::-1])[::-1][1:], [0.0]])
    Ss = np.concatenate([np.cumsum((J * su)[::-1])[::-1][1:], [0.0]])
    return a * (p2 - p + su * C - cu * Ss)


def picard_apply(spec: NonlinearitySpec, eta_in, Lambda: float | None = None, *,
                 grid: PicardGrid | None = None, delta: float = DELTA,
                 check_ball: bool = True) -> GridFunction:
    """T[eta_in] on the grid of [Lambda, rho_top].

    ``eta_in`` is a :class:`GridFunction` on ``grid``, an array of grid
    values or a callable of rho.

    Raises
    ------
    DomainError
        When ``check_ball`` is set and the weighted norm of eta_in
        exceeds delta.
    """
    if grid is None:
        if Lambda is None:
            raise DomainError("either grid or Lambda is required")
        grid = picard_grid(spec, Lambda)
    if callable(eta_in):
        vals = np.asarray(eta_in(grid.rho), dtype=float)
    elif isinstance(eta_in, GridFunction):
        vals = eta_in.values
    else:
        vals = np.asarray(eta_in, dtype=float)
    if vals.shape != grid.rho.shape:
        raise DomainError("eta_in does not live on the operator grid")
    if check_ball and weighted_norm(grid, vals) > delta:
        raise DomainError("norm-ball violation: |eta| = %g > delta = %g"
                          % (weighted_norm(grid, vals), delta))
    return grid.function(_apply(grid, vals))


def calibrate_Lambda(spec: NonlinearitySpec, delta: float = DELTA, eps: float = EPS,
                     slack: float = 2.0, start: float = 1e3, stop: float = 1e14) -> dict:
    """Smallest Lambda on a doubling ladder where the self-map and
    contraction margins hold with a factor ``slack`` to spare.

    The margins use the local form of the operator, T[eta] ~ -(rho/G) S:
    sup w |rho S0/G| <= delta/(3 slack) for the image of 0 and
    sup (rho/G) |dS/deta| <= 1/(2 slack) over the ball, both sampled on
    [Lambda, 4 Lambda].
    """
    lam = start
    while lam <= stop:
        rhos = lam * np.geomspace(1.0, 4.0, 9)
        rows = np.array([_picard_rows(spec, float(r)) for r in rhos]).T
        E, gp, gpp, y2 = rows[1], rows[2], rows[3], rows[4]
        G_over_rho = E * gp
        w = gp * rhos ** (1.0 - eps)
        S0 = rows[0] + E * np.expm1(0.5 * gpp * y2 * y2)
        self_map = float(np.max(w * np.abs(S0) / G_over_rho))
        worst = 0.0
        for sgn in (-1.0, 1.0):
            eta = sgn * delta / w
            d = y2 + eta
            x = gp * eta + 0.5 * gpp * d * d
            dS = np.abs(rows[-2]) + np.abs(E * (np.exp(x) * (gp + gpp * d) - gp))
            worst = max(worst, float(np.max(dS / G_over_rho)))
        if self_map <= delta / (3.0 * slack) and worst <= 1.0 / (2.0 * slack):
            return {"Lambda": lam, "self_map_estimate": self_map, "lipschitz_estimate": worst}
        lam *= 2.0
    raise ConvergenceError("no Lambda up to %g passes the margin checks" % stop)


def picard_fixed_point(spec: NonlinearitySpec, Lambda: float | None = None, *,
                       grid: PicardGrid | None = None, tol: float = 1e-13,
                       maxit: int = 60) -> tuple[GridFunction, list]:
    """Iterate T from eta = 0 until successive iterates agree to ``tol``
    in the weighted norm.  Returns the fixed point and the history of
    increments."""
    if grid is None:
        grid = picard_grid(spec, Lambda)
    eta = np.zeros_like(grid.rho)
    hist = []
    for _ in range(maxit):
        new = _apply(grid, eta)
        inc = weighted_norm(grid, new - eta)
        hist.append(inc)
        eta = new
        if inc <= tol:
            return grid.function(eta), hist
    raise ConvergenceError("Picard iteration did not converge", {"increments": hist})


def random_ball_function(grid: PicardGrid, rng, radius: float = 0.9 * DELTA,
                         degree: int = 8) -> np.ndarray:
    """A smooth random function with weighted norm at most ``radius``:
    a random Chebyshev series in log rho, divided by the weight."""
    x = np.log(grid.rho)
    xi = (2.0 * x - x[0] - x[-1]) / (x[-1] - x[0])
    c = rng.uniform(-1.0, 1.0, degree + 1)
    shape = np.polynomial.chebyshev.chebval(xi, c) / np.sum(np.abs(c))
    return radius * shape / grid.weight


def lipschitz_ratios(grid: PicardGrid, n_pairs: int = 10, seed: int = 0,
                     radius: float = 0.9 * DELTA) -> list[float]:
    """||T eta1 - T eta2|| / ||eta1 - eta2|| for random pairs in the ball."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_pairs):
        e1 = random_ball_function(grid, rng, radius)
        e2 = random_ball_function(grid, rng, radius)
        num = weighted_norm(grid, _apply(grid, e1) - _apply(grid, e2))
        out.append(num / weighted_norm(grid, e1 - e2))
    return out
