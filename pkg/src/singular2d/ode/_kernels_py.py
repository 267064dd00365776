"""Pure-Python implementation of the kernel interface.

Mirrors ``_kernels.pyx`` operation for operation (same tableau, same step
control, same event rules) so that both backends produce the same
trajectories up to rounding.  It is used when the extension is not
built, and by the benchmark as the baseline.
"""

from __future__ import annotations

import math

import numpy as np

from ..ddouble import dd_add, dd_eval_program, two_sum

M_REG, M_SING_Y, M_SING_P, M_ETA = 0, 1, 2, 3

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _prog(ops, vals, s):
    st = []
    push = st.append
    for op, v in zip(ops, vals):
        if op == 0:
            push(v)
        elif op == 1:
            push(s)
        elif op == 6:
            st[-1] = -st[-1]
        elif op == 7:
            x = st[-1]
            st[-1] = math.exp(x) if x < 709.78 else math.inf
        elif op == 8:
            x = st[-1]
            st[-1] = math.log(x) if x > 0.0 else (math.nan if x < 0 or x != x else -math.inf)
        elif op == 9:
            x = st[-1]
            try:
                st[-1] = x ** v if x >= 0.0 or float(v).is_integer() else math.nan
            except OverflowError:
                st[-1] = math.inf
            except ZeroDivisionError:
                st[-1] = math.inf
        else:
            b = st.pop()
            a = st[-1]
            if op == 2:
                st[-1] = a + b
            elif op == 3:
                st[-1] = a - b
            elif op == 4:
                st[-1] = a * b
            elif op == 5:
                st[-1] = a / b if b != 0.0 else math.copysign(math.inf, a)
            else:
                if a > 0.0:
                    z = b * math.log(a)
                    st[-1] = math.exp(z) if z < 709.78 else math.inf
                else:
                    st[-1] = math.nan
    return st[-1]


def g_eval(ops, vals, s):
    """g(s) from a stack program."""
    return _prog([int(o) for o in ops], [float(v) for v in vals], float(s))


def g_eval_dd(ops, vals, hi, lo):
    """g at the double-double point (hi, lo); returns (hi, lo)."""
    return dd_eval_program([int(o) for o in ops], [float(v) for v in vals], (hi, lo))


def _clenshaw(c, x):
    b0 = b1 = 0.0
    for k in range(len(c) - 1, 0, -1):
        b0, b1 = 2.0 * x * b0 - b1 + c[k], b0
    return x * b0 - b1 + c[0]


def _safe_exp(x):
    return math.exp(x) if x < 709.78 else math.inf


class _Ctx:
    __slots__ = ("mode", "use_dd", "ops", "vals", "par", "cheb")

    def __init__(self, mode, ops, vals, par, cheb, use_dd):
        self.mode = int(mode)
        self.use_dd = bool(use_dd)
        self.ops = [int(o) for o in ops]
        self.vals = [float(v) for v in vals]
        self.par = [float(p) for p in par]
        self.cheb = [list(map(float, row)) for row in np.asarray(cheb)] if np.size(cheb) else []

    def g_minus(self, y, rho):
        if self.use_dd:
            r = dd_add(dd_eval_program(self.ops, self.vals, (y, 0.0)), (-rho, 0.0))
            return r[0] + r[1]
        return _prog(self.ops, self.vals, y) - rho

    def rhs(self, t, y0, y1):
        mode = self.mode
        try:
            if mode == M_REG:
                alpha, ga_hi, ga_lo = self.par[0], self.par[1], self.par[2]
                vc = y0 if y0 > -alpha else -alpha
                if self.use_dd:
                    r = dd_eval_program(self.ops, self.vals, two_sum(alpha, vc))
                    r = dd_add(r, (-ga_hi, -ga_lo))
                    d = r[0] + r[1]
                else:
                    d = _prog(self.ops, self.vals, alpha + vc) - ga_hi
                return y1, -_safe_exp(2.0 * t + d)
            if mode == M_SING_Y:
                return y1, -0.25 * _safe_exp(self.g_minus(y0, t))
            if mode == M_SING_P:
                return y1, 0.25 * _safe_exp(self.g_minus(t, y0)) * y1 * y1 * y1
            x0, x1 = self.par[0], self.par[1]
            xi = (2.0 * math.log(t) - x0 - x1) / (x1 - x0)
            ch = self.cheb
            e = _clenshaw(ch[1], xi)
            gp = _clenshaw(ch[2], xi)
            gpp = _clenshaw(ch[3], xi)
            y2 = _clenshaw(ch[4], xi)
            delta = y2 + y0
            arg = 0.0
            dk = delta * delta * delta
            for k in range(5, len(ch)):
                arg += _clenshaw(ch[k], xi) * dk
                dk *= delta
            arg += gp * y0 + 0.5 * gpp * delta * delta
            return y1, -_clenshaw(ch[0], xi) - e * math.expm1(arg)
        except (OverflowError, ValueError):
            return math.nan, math.nan

    def event(self, t, y0, y1):
        if self.mode == M_REG:
            return y0 <= -self.par[0]
        if self.mode == M_SING_Y:
            return y0 < self.par[0] or y1 > self.par[1]
        return False


def _lin(c, ks, i):
    """c[0]*ks[0][i] + c[1]*ks[1][i] + ..., skipping zero weights, left to right."""
    acc = None
    for cj, k in zip(c, ks):
        if cj != 0.0:
            acc = cj * k[i] if acc is None else acc + cj * k[i]
    return acc


def _dp_step(ctx, t, y, k1, h):
    # the association order mirrors the compiled twin so both round alike
    a21 = _A[1][0]
    k2 = ctx.rhs(t + _C[1] * h, y[0] + h * a21 * k1[0], y[1] + h * a21 * k1[1])
    ks = [k1, k2]
    for i in range(2, 6):
        a = _A[i]
        ks.append(ctx.rhs(t + _C[i] * h, y[0] + h * _lin(a, ks, 0), y[1] + h * _lin(a, ks, 1)))
    yn0 = y[0] + h * _lin(_B, ks, 0)
    yn1 = y[1] + h * _lin(_B, ks, 1)
    k7 = ctx.rhs(t + h, yn0, yn1)
    ks.append(k7)
    err0 = h * _lin(_E, ks, 0)
    err1 = h * _lin(_E, ks, 1)
    ok = all(math.isfinite(v) for v in (yn0, yn1, k7[0], k7[1]))
    return (yn0, yn1), k7, (err0, err1), ok


def rhs(mode, ops, vals, par, cheb, t, y0, y1, use_dd=0):
    """Right-hand side of the selected mode (for tests and diagnostics)."""
    return _Ctx(mode, ops, vals, par, cheb, use_dd).rhs(t, y0, y1)


def rk_step(mode, ops, vals, par, cheb, t, y0, y1, h, use_dd=0):
    """A single fifth-order step of size h (used for event polishing)."""
    ctx = _Ctx(mode, ops, vals, par, cheb, use_dd)
    yn, _, _, _ = _dp_step(ctx, t, (y0, y1), ctx.rhs(t, y0, y1), h)
    return yn


def integrate(mode, ops, vals, par, cheb, t0, y0, y1, t_end, rtol, atol0, atol1,
              h0, max_steps, use_dd=0, stride=1):
    """Adaptive DP5(4) integration; see the compiled twin for the contract."""
    ctx = _Ctx(mode, ops, vals, par, cheb, use_dd)
    direction = 1.0 if t_end >= t0 else -1.0
    h = float(h0)
    if h == 0.0 or (h > 0) != (direction > 0):
        h = direction * 1e-3 * abs(t_end - t0)
    t = float(t0)
    y = (float(y0), float(y1))
    k1 = ctx.rhs(t, *y)
    T, Y, F = [t], [y], [k1]
    if not all(math.isfinite(v) for v in k1):
        return np.array(T), np.array(Y), np.array(F), 3
    nstep = since = 0
    status = 2
    atol = (atol0, atol1)
    while nstep < max_steps:
        last = False
        if direction * (t + h - t_end) >= 0.0:
            h = t_end - t
            last = True
        if abs(h) < 1e-15 * abs(t) + 1e-300:
            status = 3
            break
        yn, k7, err, ok = _dp_step(ctx, t, y, k1, h)
        if ok:
            en = 0.0
            for i in range(2):
                r = err[i] / (atol[i] + rtol * max(abs(y[i]), abs(yn[i])))
                en += r * r   # r * r gives inf like the C twin; ** 2 would raise
            en = math.sqrt(0.5 * en)
        else:
            en = 1e10
        if en <= 1.0:
            t = t_end if last else t + h
            y, k1 = yn, k7
            nstep += 1
            since += 1
            status = 0 if last else (1 if ctx.event(t, *y) else 2)
            if since >= stride or status < 2:
                T.append(t)
                Y.append(y)
                F.append(k1)
                since = 0
            if status < 2:
                break
            fac = min(5.0, 0.9 * en ** -0.2) if en > 1e-10 else 5.0
            h *= fac
        else:
            h *= 0.25 if not ok else max(0.2, 0.9 * en ** -0.2)
    if status >= 2 and since > 0:
        T.append(t)
        Y.append(y)
        F.append(k1)
    return np.array(T), np.array(Y, dtype=float).reshape(-1, 2), np.array(F, dtype=float).reshape(-1, 2), status
