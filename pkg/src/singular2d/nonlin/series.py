"""Truncated Taylor series arithmetic.

A series of length ``n`` is a 1-D float array ``c`` with ``c[k]`` the
coefficient of ``t**k``.  All operations truncate at the common length of
their operands, so a series carries ``n - 1`` exact derivatives.  The
recurrences are the standard ones of forward-mode automatic differentiation
(Griewank & Walther, ch. 13).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "constant", "variable", "mul", "div", "reciprocal", "exp", "log",
    "power", "deriv", "compose", "revert", "to_derivatives",
    "from_derivatives",
]


def constant(value: float, n: int) -> np.ndarray:
    out = np.zeros(n)
    out[0] = value
    return out


def variable(x0: float, n: int) -> np.ndarray:
    """Series of the independent variable expanded about ``x0``."""
    out = np.zeros(n)
    out[0] = x0
    if n > 1:
        out[1] = 1.0
    return out


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = min(len(a), len(b))
    return np.convolve(a[:n], b[:n])[:n]


def div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = min(len(a), len(b))
    q = np.empty(n)
    b0 = b[0]
    for k in range(n):
        acc = a[k]
        if k:
            acc -= np.dot(q[:k], b[k:0:-1])
        q[k] = acc / b0
    return q


def reciprocal(b: np.ndarray) -> np.ndarray:
    return div(constant(1.0, len(b)), b)


def exp(a: np.ndarray) -> np.ndarray:
    n = len(a)
    e = np.empty(n)
    e[0] = math.exp(a[0]) if a[0] < 709.7 else math.inf
    if n > 1:
        ja = np.arange(n) * a
        for k in range(1, n):
            e[k] = np.dot(ja[1:k + 1], e[k - 1::-1]) / k
    return e


def log(a: np.ndarray) -> np.ndarray:
    """Logarithm of a series; ``a[0]`` must be positive."""
    if not a[0] > 0.0:
        raise ValueError("log of a non-positive value %r" % (a[0],))
    n = len(a)
    out = np.empty(n)
    out[0] = math.log(a[0])
    for k in range(1, n):
        acc = a[k]
        if k > 1:
            j = np.arange(1, k)
            acc -= np.dot(j * out[1:k], a[k - 1:0:-1]) / k
        out[k] = acc / a[0]
    return out


def power(a: np.ndarray, c: float) -> np.ndarray:
    """``a**c`` for a constant exponent ``c``.

    Integer exponents use repeated products so that ``a[0] == 0`` and
    negative bases are handled; otherwise ``a[0] > 0`` is required.
    """
    n = len(a)
    if float(c).is_integer() and abs(c) <= 16:
        k = int(c)
        base = a if k >= 0 else reciprocal(a)
        out = constant(1.0, n)
        for _ in range(abs(k)):
            out = mul(out, base)
        return out
    a0 = a[0]
    if not a0 > 0.0:
        raise ValueError("non-integer power of a non-positive value %r" % (a0,))
    p = np.empty(n)
    p[0] = a0 ** c
    for k in range(1, n):
        j = np.arange(1, k + 1)
        p[k] = np.dot(((c + 1.0) * j - k) * a[1:k + 1], p[k - 1::-1]) / (k * a0)
    return p


def deriv(a: np.ndarray) -> np.ndarray:
    """Series of the derivative; one coefficient shorter than ``a``."""
    return a[1:] * np.arange(1, len(a))


def compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Series of ``outer(x0 + d(t))`` where ``d = inner`` with ``inner[0]``
    ignored (the expansion point of ``outer`` is the value ``inner[0]``).

    Horner evaluation in series arithmetic.
    """
    n = len(inner)
    d = inner.copy()
    d[0] = 0.0
    out = constant(outer[min(len(outer), n) - 1], n)
    for k in range(min(len(outer), n) - 2, -1, -1):
        out = mul(out, d)
        out[0] += outer[k]
    return out


def revert(coeffs: np.ndarray) -> np.ndarray:
    """Compositional inverse of ``c1 t + c2 t**2 + ...`` (``c0`` ignored).

    Returns ``d`` with ``d[0] = 0`` and ``sum c_k d(t)**k = t``.
    """
    n = len(coeffs)
    c1 = coeffs[1]
    d = np.zeros(n)
    if n > 1:
        d[1] = 1.0 / c1
    # fixed-point sweep gains one correct coefficient per pass
    for _ in range(n - 2):
        acc = np.zeros(n)
        dk = d.copy()
        for k in range(2, n):
            dk = mul(dk, d)
            acc += coeffs[k] * dk
        t = np.zeros(n)
        t[1] = 1.0
        d = (t - acc) / c1
    return d


_FACT = np.array([math.factorial(k) for k in range(25)], dtype=float)


def to_derivatives(c: np.ndarray) -> np.ndarray:
    return c * _FACT[:len(c)]


def from_derivatives(d: np.ndarray) -> np.ndarray:
    return np.asarray(d, dtype=float) / _FACT[:len(d)]
