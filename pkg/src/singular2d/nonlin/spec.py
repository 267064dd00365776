"""The nonlinearity object, Taylor jets of g, and the H-ratio.

All quantities are derived from the expression tree of g through truncated
Taylor series.  When the top node of a subexpression is ``exp(m)`` the
log-space identities

    log(e^m)   = m
    R[e^m]     = e^{-m} (1 + R[m]),     R[phi] := phi'' / phi'^2

are used, so H = g g''/g'^2 = 1 + R[m] stays finite even when g itself is
far beyond the float range (e.g. g = exp(exp(exp(s))) at s = 10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from ..errors import (ConfigError, DomainError, InadmissibleSpecError,
                      JetOverflowError)
from . import series as ser
from .catalog import CATALOG, resolve_params
from .expr import Exp, Node, compile_postfix, parse_expression

__all__ = [
    "NonlinearitySpec", "Jet3", "parse_nonlinearity", "taylor_jet", "eval_H",
    "g_series", "log_g_series", "log_dg_series", "H_series",
]

# exp nodes whose argument is above this value are handled in log space
_PEEL_MIN = -30.0


@dataclass(frozen=True)
class NonlinearitySpec:
    """Parsed g(s) = log f(s) with bound parameters.

    Attributes
    ----------
    ast : Node
        Expression tree of g.
    params : tuple of (name, value)
        Parameter bindings, sorted by name.
    s_floor : float
        Smallest s from which g > 0 and g' > 0 on the sample grid.
    s_admit : float or None
        Smallest s from which additionally g'' > 0 (singular routines need
        this); None when g'' > 0 fails at the end of the grid.
    critical_exponential : bool
        True when H vanishes identically (g linear).
    """

    ast: Node
    params: tuple = ()
    s_floor: float = 0.0
    s_admit: float | None = field(default=None, compare=False)
    critical_exponential: bool = field(default=False, compare=False)
    catalog_id: str | None = field(default=None, compare=False)
    source: str = field(default="", compare=False)

    @property
    def param_map(self) -> dict:
        return dict(self.params)

    @property
    def name(self) -> str:
        return self.catalog_id or self.source or str(self.ast)

    @cached_property
    def program(self) -> tuple[np.ndarray, np.ndarray]:
        """Stack program of g for the compiled kernels."""
        return compile_postfix(self.ast)

    def g(self, s: float) -> float:
        return self.ast.evaluate(s)

    def require_singular_admissible(self) -> None:
        """Raise unless this nonlinearity may enter singular-solution routines."""
        if self.critical_exponential:
            raise InadmissibleSpecError(
                "critical-exponential nonlinearity (H identically 0); "
                "singular routines inadmissible")
        if self.s_admit is None:
            raise InadmissibleSpecError("g'' > 0 does not hold for large s")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Jet3:
    """g and its first three derivatives at ``s``."""

    v: float
    d1: float
    d2: float
    d3: float
    s: float
    overflow: bool = False

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.v, self.d1, self.d2, self.d3)


# --------------------------------------------------------------------------
# series helpers (input is always the identity series about s)

def g_series(spec: NonlinearitySpec, s: float, n: int) -> np.ndarray:
    """Taylor coefficients of g about ``s`` (length ``n``)."""
    with np.errstate(over="ignore", invalid="ignore"):
        return spec.ast.series(ser.variable(s, n))


def _log_series(node: Node, x: np.ndarray) -> np.ndarray:
    if isinstance(node, Exp):
        return node.arg.series(x)
    val = node.series(x)
    if not val[0] > 0.0:
        raise DomainError("log of non-positive g at s=%r" % (x[0],))
    return ser.log(val)


def _ratio_series(node: Node, x: np.ndarray, n: int) -> np.ndarray:
    """Series (length n) of phi''/phi'^2; ``x`` must have length n + 2."""
    if isinstance(node, Exp):
        m = node.arg.series(x)
        if m[0] > _PEEL_MIN:
            inner = _ratio_series(node.arg, x, n)
            inner[0] += 1.0
            return ser.mul(ser.exp(-m[:n]), inner)
    phi = node.series(x)
    d1 = ser.deriv(phi)
    d2 = ser.deriv(d1)
    den = ser.mul(d1[:n], d1[:n])
    if not (np.all(np.isfinite(den)) and np.all(np.isfinite(d2))):
        raise JetOverflowError("derivative jet overflow at s=%r" % (x[0],))
    return ser.div(d2[:n], den)


def log_g_series(spec: NonlinearitySpec, s: float, n: int) -> np.ndarray:
    """Series of log g about ``s`` computed without forming g when its top
    node is an exponential."""
    with np.errstate(over="ignore", invalid="ignore"):
        return _log_series(spec.ast, ser.variable(s, n))


def log_dg_series(spec: NonlinearitySpec, s: float, n: int) -> np.ndarray:
    """Series of log g' via log g' = log g + log((log g)')."""
    lg = log_g_series(spec, s, n + 1)
    dl = ser.deriv(lg)
    if not dl[0] > 0.0:
        raise DomainError("g' <= 0 at s=%r" % (s,))
    return lg[:n] + ser.log(dl)


def H_series(spec: NonlinearitySpec, s: float, n: int) -> np.ndarray:
    """Taylor coefficients of H = g g''/g'^2 about ``s`` (length ``n``)."""
    x = ser.variable(s, n + 2)
    node = spec.ast
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if isinstance(node, Exp) and node.arg.series(x[:1])[0] > _PEEL_MIN:
            out = _ratio_series(node.arg, x, n)
            out[0] += 1.0
        else:
            gs = node.series(x)
            out = ser.mul(gs[:n], _ratio_series(node, x, n))
    if not np.all(np.isfinite(out)):
        raise JetOverflowError("H jet overflow at s=%r" % (s,))
    return out


# --------------------------------------------------------------------------
# public operations

def taylor_jet(spec: NonlinearitySpec, s: float, *, check_floor: bool = True) -> Jet3:
    """Exact value and first three derivatives of g at ``s``.

    Components beyond the float range are returned as ``inf`` with
    ``overflow=True``; callers then switch to :func:`log_g_series` or
    :func:`H_series`, which never form g itself.
    """
    if check_floor and s < spec.s_floor - 1e-12 * max(1.0, abs(spec.s_floor)):
        raise DomainError("s=%r below s_floor=%r" % (s, spec.s_floor))
    d = ser.to_derivatives(g_series(spec, s, 4))
    overflow = not np.all(np.isfinite(d))
    return Jet3(float(d[0]), float(d[1]), float(d[2]), float(d[3]), float(s), overflow)


def eval_H(spec: NonlinearitySpec, s: float) -> tuple[float, float, float]:
    """H(s), H'(s), H''(s).

    Raises
    ------
    InadmissibleSpecError
        For pure exponentials (H identically zero).
    """
    if spec.critical_exponential:
        raise InadmissibleSpecError(
            "critical-exponential nonlinearity (H identically 0); "
            "singular routines inadmissible")
    d = ser.to_derivatives(H_series(spec, s, 3))
    return float(d[0]), float(d[1]), float(d[2])


# --------------------------------------------------------------------------
# construction

def _checks_at(ast: Node, s: float) -> tuple[bool, bool, bool, float]:
    """(g > 0, g' > 0, g'' > 0, H) at s, evaluated in log space."""
    x = ser.variable(s, 3)
    try:
        with np.errstate(all="ignore"):
            if isinstance(ast, Exp):
                pos = True
            else:
                pos = ast.series(x[:1])[0] > 0.0
            if not pos:
                return False, False, False, 0.0
            lg = _log_series(ast, x[:2])
            inc = bool(lg[1] > 0.0)
            spec = NonlinearitySpec(ast=ast)
            H = float(H_series(spec, s, 1)[0])
    except (DomainError, ValueError, ZeroDivisionError, JetOverflowError):
        return False, False, False, 0.0
    if math.isnan(H):
        return pos, inc, False, 0.0
    return pos, inc, inc and H > 0.0, H


_SCAN_GRID = np.concatenate([np.linspace(0.0, 4.0, 401), np.geomspace(4.0, 64.0, 120)[1:]])


def _scan(ast: Node):
    flags = [_checks_at(ast, float(s)) for s in _SCAN_GRID]
    ok_floor = np.array([f[0] and f[1] for f in flags])
    ok_admit = np.array([f[0] and f[1] and f[2] for f in flags])
    Hs = np.array([f[3] for f in flags])

    def first_tail(ok, pred):
        if not ok[-1]:
            return None
        bad = np.nonzero(~ok)[0]
        if len(bad) == 0:
            return float(_SCAN_GRID[0])
        j = bad[-1]
        lo, hi = float(_SCAN_GRID[j]), float(_SCAN_GRID[j + 1])
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if pred(mid):
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        return hi

    s_floor = first_tail(ok_floor, lambda t: all(_checks_at(ast, t)[:2]))
    s_admit = first_tail(ok_admit, lambda t: all(_checks_at(ast, t)[:3]))
    if s_floor is None:
        return None, None, False
    tail = _SCAN_GRID >= s_floor
    critical = bool(np.all(np.abs(Hs[tail]) <= 1e-12))
    return s_floor, s_admit, critical


def parse_nonlinearity(source: str, params: Mapping[str, float] | None = None,
                       *, s_floor: float | None = None) -> NonlinearitySpec:
    """Build a :class:`NonlinearitySpec` from DSL text or a catalog name.

    Parameters
    ----------
    source : str
        Expression in ``s`` or one of the catalog names ``f1``, ``f2``,
        ``exp_pow``, ``pow_sum``, ``pow_log``, ``double_exp``, ``triple_exp``.
    params : mapping, optional
        Parameter values; catalog entries fill in their defaults.
    s_floor : float, optional
        Override for the automatically detected evaluation floor.

    Raises
    ------
    ParseError, UnknownIdentifierError, ParameterError
        On malformed input.
    ConfigError
        When g is not eventually positive and increasing.
    """
    if source is None or not str(source).strip():
        from ..errors import ParseError
        raise ParseError("empty expression", 0)
    key = source.strip()
    catalog_id = None
    if key in CATALOG:
        entry = CATALOG[key]
        bound = resolve_params(entry, params)
        ast = parse_expression(entry.source, bound)
        catalog_id = key
    else:
        bound = {k: float(v) for k, v in (params or {}).items()}
        ast = parse_expression(source, bound)
        for name, entry in CATALOG.items():
            if not entry.defaults and parse_expression(entry.source, {}) == ast:
                catalog_id = name
                break
    floor, admit, critical = _scan(ast)
    if floor is None:
        raise ConfigError("g is not eventually positive and increasing: %r" % (source,))
    if s_floor is not None:
        if s_floor < floor:
            raise ConfigError("s_floor=%r is below the admissible floor %r" % (s_floor, floor))
        floor = float(s_floor)
        admit = None if admit is None else max(admit, floor)
    used = tuple(sorted((k, v) for k, v in bound.items() if _uses(ast, k)))
    return NonlinearitySpec(ast=ast, params=used, s_floor=floor, s_admit=admit,
                            critical_exponential=critical, catalog_id=catalog_id,
                            source=key)


def _uses(node: Node, name: str) -> bool:
    from .expr import Param
    if isinstance(node, Param):
        return node.name == name
    for attr in ("left", "right", "arg"):
        child = getattr(node, attr, None)
        if child is not None and _uses(child, name):
            return True
    return False
