"""Double-double arithmetic in pure Python.

A value is an unevaluated pair ``(hi, lo)`` with ``|lo| <= ulp(hi)/2``,
giving about 32 significant digits.  Products use Veltkamp splitting so
that no fused multiply-add is needed; the compiled kernels use
the same splitting, so both backends round identically.

Only what the ODE right-hand sides need is provided: the four
operations, ``exp``, ``log`` and real powers, plus an evaluator for the
stack programs produced by :func:`singular2d.nonlin.expr.compile_postfix`.
"""

from __future__ import annotations

import math

__all__ = [
    "two_sum", "two_prod", "dd_add", "dd_sub", "dd_mul", "dd_div", "dd_exp",
    "dd_log", "dd_pow", "dd_eval_program", "to_float",
]

_SPLIT = 134217729.0  # 2^27 + 1
_LN2 = (0.6931471805599453, 2.3190468138462996e-17)


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a: float) -> tuple[float, float]:
    if abs(a) > 6.69692879491417e299:
        # scale down to keep the splitter product finite
        hi, lo = _split(a * 3.7252902984e-09)
        return hi * 268435456.0, lo * 268435456.0
    t = _SPLIT * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    if not math.isfinite(p):
        return p, 0.0
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(a, b):
    s, e = two_sum(a[0], b[0])
    t, f = two_sum(a[1], b[1])
    e += t
    s, e = _quick_two_sum(s, e)
    e += f
    return _quick_two_sum(s, e)


def dd_sub(a, b):
    return dd_add(a, (-b[0], -b[1]))


def dd_mul(a, b):
    p, e = two_prod(a[0], b[0])
    if not math.isfinite(p):
        return p, 0.0
    e += a[0] * b[1] + a[1] * b[0]
    return _quick_two_sum(p, e)


def dd_div(a, b):
    q1 = a[0] / b[0]
    if not math.isfinite(q1):
        return q1, 0.0
    r = dd_sub(a, dd_mul(b, (q1, 0.0)))
    q2 = r[0] / b[0]
    r = dd_sub(r, dd_mul(b, (q2, 0.0)))
    q3 = r[0] / b[0]
    s, e = _quick_two_sum(q1, q2)
    return dd_add((s, e), (q3, 0.0))


def _mul_pow2(a, k):
    return math.ldexp(a[0], k), math.ldexp(a[1], k)


def dd_exp(a):
    x = a[0]
    if x > 709.78:
        return math.inf, 0.0
    if x < -745.2:
        return 0.0, 0.0
    k = round(x / _LN2[0])
    r = dd_sub(a, dd_mul(_LN2, (float(k), 0.0)))
    # r in [-ln2/2, ln2/2]; reduce by 2^-10 and square back
    r = _mul_pow2(r, -10)
    term = r
    acc = r
    for n in range(2, 14):
        # term_n = term_{n-1} r / n keeps the factorials exact in dd
        term = dd_div(dd_mul(term, r), (float(n), 0.0))
        acc = dd_add(acc, term)
        if abs(term[0]) < 1e-36:
            break
    # (1 + acc)^(2^10) computed as repeated expm1 doubling
    for _ in range(10):
        acc = dd_add(dd_mul(acc, (2.0, 0.0)), dd_mul(acc, acc))
    res = dd_add(acc, (1.0, 0.0))
    return _mul_pow2(res, int(k))


def dd_log(a):
    if not a[0] > 0.0:
        return (-math.inf if a[0] == 0.0 else math.nan), 0.0
    if math.isinf(a[0]):
        return math.inf, 0.0
    y = (math.log(a[0]), 0.0)
    for _ in range(2):
        e = dd_exp((-y[0], -y[1]))
        y = dd_add(y, dd_sub(dd_mul(a, e), (1.0, 0.0)))
    return y


def dd_pow(a, c: float):
    if c == 0.0:
        return 1.0, 0.0
    if float(c).is_integer() and abs(c) <= 64:
        n = int(abs(c))
        res = (1.0, 0.0)
        base = a
        while n:
            if n & 1:
                res = dd_mul(res, base)
            base = dd_mul(base, base)
            n >>= 1
        return dd_div((1.0, 0.0), res) if c < 0 else res
    if a[0] == 0.0:
        return (0.0, 0.0) if c > 0 else (math.inf, 0.0)
    return dd_exp(dd_mul(dd_log(a), (float(c), 0.0)))


def to_float(a) -> float:
    return a[0] + a[1]


def dd_eval_program(ops, vals, s) -> tuple[float, float]:
    """Evaluate a postfix program at the double-double point ``s``."""
    stack: list = []
    for op, val in zip(ops, vals):
        op = int(op)
        if op == 0:
            stack.append((float(val), 0.0))
        elif op == 1:
            stack.append(s)
        elif op == 6:
            x = stack.pop()
            stack.append((-x[0], -x[1]))
        elif op == 7:
            stack.append(dd_exp(stack.pop()))
        elif op == 8:
            stack.append(dd_log(stack.pop()))
        elif op == 9:
            stack.append(dd_pow(stack.pop(), float(val)))
        else:
            b = stack.pop()
            a = stack.pop()
            if op == 2:
                stack.append(dd_add(a, b))
            elif op == 3:
                stack.append(dd_sub(a, b))
            elif op == 4:
                stack.append(dd_mul(a, b))
            elif op == 5:
                stack.append(dd_div(a, b))
            else:
                stack.append(dd_exp(dd_mul(b, dd_log(a))))
    return stack[-1]
