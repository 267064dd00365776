"""Solution containers for the radial and Emden forms of -Delta u = e^{g(u)}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..nonlin.spec import NonlinearitySpec

__all__ = ["RadialSolution", "EmdenSolution", "g_array", "scaled_primitive"]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def g_array(spec: NonlinearitySpec, x) -> np.ndarray:
    """Vectorised g(x) evaluated from the stack program of ``spec``."""
    ops, vals = spec.program
    x = np.asarray(x, dtype=float)
    st: list = []
    with np.errstate(all="ignore"):
        for op, v in zip(ops.tolist(), vals.tolist()):
            if op == 0:
                st.append(np.full_like(x, v))
            elif op == 1:
                st.append(x)
            elif op == 6:
                st[-1] = -st[-1]
            elif op == 7:
                st[-1] = np.exp(st[-1])
            elif op == 8:
                st[-1] = np.log(st[-1])
            elif op == 9:
                st[-1] = np.power(st[-1], v)
            else:
                b = st.pop()
                a = st.pop()
                st.append({2: np.add, 3: np.subtract, 4: np.multiply,
                           5: np.divide, 10: np.power}[op](a, b))
    return st[-1]


def scaled_primitive(spec: NonlinearitySpec, u, shift: float) -> np.ndarray:
    """int_0^{u_k} e^{g(s) - shift} ds for every entry of ``u``.

    Values are accumulated over the sorted u by 12-point Gauss-Legendre
    on each gap, so the result is consistent from one grid point to the
    next (what monotonicity checks need).
    """
    u = np.asarray(u, dtype=float)
    order = np.argsort(u)
    us = np.concatenate(([0.0], u[order]))
    a, b = us[:-1], us[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.exp(g_array(spec, nodes) - shift)
    pieces = half * (vals @ _GL_W)
    out = np.empty_like(u)
    out[order] = np.cumsum(pieces)
    return out


@dataclass
class RadialSolution:
    """u(r) on an increasing radius grid.

    ``log_r`` and ``r_du`` (= r du/dr) are stored next to r and du because
    for large g(alpha) the radius underflows and du/dr overflows in
    binary64; every derived quantity is computed from them.
    """

    r_grid: np.ndarray
    u: np.ndarray
    du: np.ndarray
    alpha: float
    first_zero: float | None = None
    log_r: np.ndarray | None = None
    r_du: np.ndarray | None = None
    log_first_zero: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.log_r is None:
            with np.errstate(divide="ignore"):
                self.log_r = np.log(self.r_grid)
        if self.r_du is None:
            self.r_du = self.r_grid * self.du
        if self.log_first_zero is None and self.first_zero:
            self.log_first_zero = math.log(self.first_zero)

    @property
    def lam(self) -> float | None:
        """lambda = r0^2 (None without a zero)."""
        if self.log_first_zero is None:
            return None
        return math.exp(2.0 * self.log_first_zero)

    def energy(self, spec: NonlinearitySpec, scale: float | None = None) -> np.ndarray:
        """E(r) = (u')^2/2 + int_0^u f, divided by e^{scale}.

        ``scale`` defaults to g(alpha) for regular solutions (so E is O(1))
        and to 0 otherwise.  The lower limit u(r0) = 0 matches the first zero.
        """
        if scale is None:
            scale = float(spec.g(self.alpha)) if math.isfinite(self.alpha) else 0.0
        # (u')^2 e^{-scale} = (r u')^2 e^{-2 log r - scale}
        kin = 0.5 * self.r_du ** 2 * np.exp(-2.0 * self.log_r - scale)
        return kin + scaled_primitive(spec, self.u, scale)


@dataclass
class EmdenSolution:
    """y(rho) = u(e^{-rho/2}) on an increasing rho grid."""

    rho_grid: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    kind: str
    eta: np.ndarray | None = None
    rho_zero: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("singular", "transformed_regular"):
            raise ValueError("kind must be 'singular' or 'transformed_regular'")

    def restrict(self, lo: float, hi: float) -> "EmdenSolution":
        m = (self.rho_grid >= lo) & (self.rho_grid <= hi)
        eta = None if self.eta is None else self.eta[m]
        return EmdenSolution(self.rho_grid[m], self.y[m], self.dy[m], self.kind, eta,
                             self.rho_zero, dict(self.meta))
