"""Hardy-type quotients on log-annuli and the stability test.

For radial functions in the plane, X = log(R/r) turns the two integrals

    lhs = 1/4 int phi^2 / (|x|^2 log^2(R/|x|)) dx,    rhs = int |grad phi|^2 dx

into 2 pi int phi_X^2 dX (rhs) and (pi/2) int phi^2 / X^2 dX (lhs), and
int f'(V) phi^2 dx into 2 pi int P phi^2 dX with the potential density
P = r^2 f'(V) = exp(-2X + g(V) + log g'(V)).  Everything below therefore
works in X, where even annuli with log(1/r) ~ 2^32 are representable.

Test functions are continuous and piecewise linear in X.  The stiffness
integrals are exact; the weighted mass integrals use 6-point
Gauss-Legendre per element, exact to rounding for the smooth weights here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import solve_banded

from ..errors import ConfigError, ConvergenceError, DomainError
from ..nonlin.spec import NonlinearitySpec, log_dg_series
from ..ode.types import RadialSolution, g_array

__all__ = ["AnnulusTestFunction", "hardy_ratio", "annulus_bounds", "hardy_annulus",
           "min_rayleigh", "instability_test", "potential_density",
           "OCTAVE", "NODES_PER_ANNULUS"]

OCTAVE = 16
NODES_PER_ANNULUS = 200
_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


@dataclass(frozen=True)
class AnnulusTestFunction:
    """Piecewise-linear phi on [r_{i+1}, r_i], stored in X = log(R/r).

    ``x_grid`` increases (r decreases).  Use :meth:`from_radii` to build
    one from radii in (0, R].
    """

    x_grid: np.ndarray
    phi: np.ndarray
    R: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.x_grid, dtype=float)
        p = np.asarray(self.phi, dtype=float)
        object.__setattr__(self, "x_grid", x)
        object.__setattr__(self, "phi", p)
        if x.ndim != 1 or x.size != p.size or x.size < 2:
            raise ConfigError("x_grid and phi must be 1-D of equal length >= 2")
        if self.R < 1.0:
            raise ConfigError("R must be >= 1")
        if not np.all(np.isfinite(x)):
            raise DomainError("support touches r = 0 (non-integrable weight)")
        if not np.all(np.diff(x) > 0):
            raise ConfigError("grid must be strictly monotone")
        if x[0] < 0.0:
            raise ConfigError("support must lie in r <= R")
        scale = max(1.0, float(np.abs(p).max()))
        if abs(p[0]) > 1e-14 * scale or abs(p[-1]) > 1e-14 * scale:
            raise ConfigError("phi must vanish at both support endpoints")

    @classmethod
    def from_radii(cls, r_grid, phi, R: float = 1.0) -> "AnnulusTestFunction":
        r = np.asarray(r_grid, dtype=float)
        if np.any(r <= 0.0):
            raise DomainError("support touches r = 0 (non-integrable weight)")
        if np.any(r > R):
            raise ConfigError("radii must lie in (0, R]")
        x = np.log(R / r)
        order = np.argsort(x)
        return cls(x[order], np.asarray(phi, dtype=float)[order], R)

    @property
    def r_grid(self) -> np.ndarray:
        """Radii (decreasing; underflow to 0 for very thin-log annuli)."""
        return self.R * np.exp(-self.x_grid)


def _element_quadrature(x):
    """Gauss nodes (n_el, 6), weights (n_el, 6) and hat values on each element."""
    a, b = x[:-1], x[1:]
    h = b - a
    t = 0.5 * (_GL_X + 1.0)
    nodes = a[:, None] + h[:, None] * t[None, :]
    w = 0.5 * h[:, None] * _GL_W[None, :]
    return nodes, w, 1.0 - t, t


def _mass_bands(x, weight_at):
    """Tridiagonal mass matrix of int W phi_i phi_j dX (diag, offdiag)."""
    nodes, w, l0, l1 = _element_quadrature(x)
    ww = w * weight_at(nodes)
    m00 = ww @ (l0 * l0)
    m01 = ww @ (l0 * l1)
    m11 = ww @ (l1 * l1)
    diag = np.zeros(x.size)
    diag[:-1] += m00
    diag[1:] += m11
    return diag, m01


def _stiff_bands(x):
    inv = 1.0 / np.diff(x)
    diag = np.zeros(x.size)
    diag[:-1] += inv
    diag[1:] += inv
    return diag, -inv


def hardy_ratio(phi: AnnulusTestFunction) -> tuple[float, float]:
    """(lhs, rhs) of the Hardy inequality for ``phi`` with weight 2 pi r dr.

    Examples
    --------
    >>> f = AnnulusTestFunction(np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, 0.0]))
    >>> lhs, rhs = hardy_ratio(f)
    >>> lhs <= rhs
    True
    """
    x, p = phi.x_grid, phi.phi
    rhs = 2.0 * math.pi * float(np.sum(np.diff(p) ** 2 / np.diff(x)))
    nodes, w, l0, l1 = _element_quadrature(x)
    vals = p[:-1, None] * l0[None, :] + p[1:, None] * l1[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(vals == 0.0, 0.0, vals * vals / (nodes * nodes))
    lhs = 0.5 * math.pi * float(np.sum(w * dens))
    if not math.isfinite(lhs):
        raise DomainError("phi does not vanish fast enough at r = R")
    return lhs, rhs


# --------------------------------------------------------------------------
# generalised eigenproblem  -phi'' = mu W phi  on a tridiagonal FEM grid

def _band_matvec(diag, off, v):
    out = diag * v
    out[:-1] += off * v[1:]
    out[1:] += off * v[:-1]
    return out


def min_rayleigh(x, weight_at, *, tol: float = 1e-12, maxit: int = 500) -> tuple[float, np.ndarray]:
    """Smallest mu of -phi'' = mu W(X) phi with phi = 0 at both ends.

    Inverse power iteration on the interior FEM nodes of ``x``; returns
    mu = min int phi'^2 / int W phi^2 and the eigenvector (with zero end
    values appended).  A witness of int W phi^2 > int phi'^2 exists iff
    mu < 1.

    Raises
    ------
    ConvergenceError
        When the iteration does not settle within ``maxit`` steps.
    """
    x = np.asarray(x, dtype=float)
    kd, ko = _stiff_bands(x)
    md, mo = _mass_bands(x, weight_at)
    kd, ko, md, mo = kd[1:-1], ko[1:-1], md[1:-1], mo[1:-1]
    n = kd.size
    if n < 1:
        raise ConfigError("need at least one interior node")
    ab = np.zeros((3, n))
    ab[0, 1:] = ko
    ab[1] = kd
    ab[2, :-1] = ko
    v = np.sin(math.pi * (np.arange(1, n + 1)) / (n + 1))
    mu = math.inf
    for _ in range(maxit):
        y = solve_banded((1, 1), ab, _band_matvec(md, mo, v))
        ky = _band_matvec(kd, ko, y)
        my = _band_matvec(md, mo, y)
        num, den = float(y @ ky), float(y @ my)
        mu_new = num / den
        v = y / math.sqrt(abs(den))
        if abs(mu_new - mu) <= tol * abs(mu_new):
            return mu_new, np.concatenate(([0.0], v, [0.0]))
        mu = mu_new
    raise ConvergenceError("inverse iteration did not converge", {"mu": mu})


# --------------------------------------------------------------------------
# annulus sequence

def annulus_bounds(i: int, octave: int = OCTAVE) -> tuple[float, float]:
    """(X_lo, X_hi) = (2^{octave i}, 2^{octave (i+1)}) in X = log(R/r)."""
    return 2.0 ** (octave * i), 2.0 ** (octave * (i + 1))


def hardy_annulus(i: int, *, n: int = NODES_PER_ANNULUS, octave: int = OCTAVE,
                  R: float = 1.0) -> AnnulusTestFunction:
    """Maximiser of lhs/rhs on the i-th annulus (nodes geometric in X).

    The Hardy quotient approaches 1 only when log X spans more than
    pi sqrt(8) ~ 8.9 per annulus (for rhs < 1.5 lhs), which is why the
    default octave is 16 (log X width 11.1).
    """
    lo, hi = annulus_bounds(i, octave)
    x = np.geomspace(lo, hi, n)
    _, vec = min_rayleigh(x, lambda X: 0.25 / (X * X))
    vec = vec / np.abs(vec).max()
    vec[0] = vec[-1] = 0.0
    return AnnulusTestFunction(x, vec, R)


# --------------------------------------------------------------------------
# instability against a solution

def potential_density(spec: NonlinearitySpec, V: RadialSolution, X) -> np.ndarray:
    """P(X) = r^2 f'(V(r)) at X = log(1/r), V interpolated in log r.

    Raises
    ------
    ConfigError
        When X leaves the range covered by V.
    """
    X = np.asarray(X, dtype=float)
    lr = -X
    lo, hi = float(np.min(V.log_r)), float(np.max(V.log_r))
    span = 1e-12 * max(1.0, abs(lo), abs(hi))
    if lr.min() < lo - span or lr.max() > hi + span:
        raise ConfigError("V does not cover the annulus (log r in [%r, %r])" % (lo, hi))
    order = np.argsort(V.log_r)
    lrs = np.asarray(V.log_r)[order]
    keep = np.concatenate(([True], np.diff(lrs) > 0))
    spline = CubicHermiteSpline(lrs[keep], np.asarray(V.u)[order][keep],
                                np.asarray(V.r_du)[order][keep])
    u = spline(np.clip(lr, lrs[0], lrs[-1]))
    g = g_array(spec, u)
    lgp = np.array([log_dg_series(spec, float(s), 1)[0] for s in u.ravel()]).reshape(u.shape)
    return np.exp(-2.0 * X + g + lgp)


def instability_test(spec: NonlinearitySpec, V: RadialSolution, annulus, *,
                     in_log: bool = False, n: int = NODES_PER_ANNULUS,
                     return_mu: bool = False):
    """True when some phi on the annulus has int f'(V) phi^2 > int |grad phi|^2.

    Parameters
    ----------
    annulus : (r1, r2)
        Radii with r1 < r2, or (X_lo, X_hi) in X = log(1/r) when ``in_log``.
    return_mu : bool
        Also return the smallest eigenvalue mu (the test is mu < 1).
    """
    a, b = (float(annulus[0]), float(annulus[1]))
    if in_log:
        lo, hi = min(a, b), max(a, b)
    else:
        if not 0.0 < a < b:
            raise ConfigError("annulus needs 0 < r1 < r2")
        lo, hi = -math.log(b), -math.log(a)
    x = np.geomspace(lo, hi, n) if lo > 0 else np.linspace(lo, hi, n)
    mu, _ = min_rayleigh(x, lambda X: potential_density(spec, V, X))
    res = bool(mu < 1.0)
    return (res, mu) if return_mu else res
