# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3, initializedcheck=False
"""Compiled hot loops: stack-program evaluation of g (double and
double-double) and a Dormand-Prince 5(4) driver for the four right-hand
sides used by the ODE layer.

``_kernels_py`` implements the identical interface in pure Python; the
two are selected at import time by :mod:`singular2d.ode.backend`.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, pow, fabs, expm1, sqrt, isfinite, ldexp, round as cround, INFINITY, NAN

cnp.import_array()

cdef enum:
    MAXSTACK = 64

# right-hand-side modes
cdef enum:
    M_REG = 0
    M_SING_Y = 1
    M_SING_P = 2
    M_ETA = 3


# --------------------------------------------------------------------------
# double-double primitives (Veltkamp splitting, as in singular2d.ddouble)

cdef struct dd:
    double hi
    double lo

cdef inline dd _mk(double a, double b) noexcept nogil:
    cdef dd r
    r.hi = a
    r.lo = b
    return r

cdef inline dd _two_sum(double a, double b) noexcept nogil:
    cdef double s = a + b
    cdef double bb = s - a
    return _mk(s, (a - (s - bb)) + (b - bb))

cdef inline dd _qts(double a, double b) noexcept nogil:
    cdef double s = a + b
    return _mk(s, b - (s - a))

cdef inline dd _add(dd a, dd b) noexcept nogil:
    cdef dd s = _two_sum(a.hi, b.hi)
    cdef dd t = _two_sum(a.lo, b.lo)
    cdef double e = s.lo + t.hi
    s = _qts(s.hi, e)
    e = s.lo + t.lo
    return _qts(s.hi, e)

cdef inline dd _neg(dd a) noexcept nogil:
    return _mk(-a.hi, -a.lo)

cdef inline dd _split(double a) noexcept nogil:
    cdef double t, hi
    cdef dd r
    if fabs(a) > 6.69692879491417e299:
        r = _split(a * 3.7252902984e-09)
        return _mk(r.hi * 268435456.0, r.lo * 268435456.0)
    t = 134217729.0 * a
    hi = t - (t - a)
    return _mk(hi, a - hi)

cdef inline dd _mul(dd a, dd b) noexcept nogil:
    cdef double p = a.hi * b.hi
    if not isfinite(p):
        return _mk(p, 0.0)
    cdef dd sa = _split(a.hi)
    cdef dd sb = _split(b.hi)
    cdef double e = ((sa.hi * sb.hi - p) + sa.hi * sb.lo + sa.lo * sb.hi) + sa.lo * sb.lo
    e += a.hi * b.lo + a.lo * b.hi
    return _qts(p, e)

cdef inline dd _div(dd a, dd b) noexcept nogil:
    cdef double q1 = a.hi / b.hi
    if not isfinite(q1):
        return _mk(q1, 0.0)
    cdef dd r = _add(a, _neg(_mul(b, _mk(q1, 0.0))))
    cdef double q2 = r.hi / b.hi
    r = _add(r, _neg(_mul(b, _mk(q2, 0.0))))
    cdef double q3 = r.hi / b.hi
    cdef dd s = _qts(q1, q2)
    return _add(s, _mk(q3, 0.0))

cdef dd _exp(dd a) noexcept nogil:
    cdef double x = a.hi
    cdef int n, k
    cdef dd r, term, acc
    if x > 709.78:
        return _mk(INFINITY, 0.0)
    if x < -745.2:
        return _mk(0.0, 0.0)
    k = <int>cround(x / 0.6931471805599453)
    r = _add(a, _neg(_mul(_mk(0.6931471805599453, 2.3190468138462996e-17), _mk(<double>k, 0.0))))
    r = _mk(ldexp(r.hi, -10), ldexp(r.lo, -10))
    term = r
    acc = r
    for n in range(2, 14):
        term = _div(_mul(term, r), _mk(<double>n, 0.0))
        acc = _add(acc, term)
        if fabs(term.hi) < 1e-36:
            break
    for n in range(10):
        acc = _add(_mk(2.0 * acc.hi, 2.0 * acc.lo), _mul(acc, acc))
    acc = _add(acc, _mk(1.0, 0.0))
    return _mk(ldexp(acc.hi, k), ldexp(acc.lo, k))

cdef dd _log(dd a) noexcept nogil:
    cdef dd y, e
    cdef int it
    if not a.hi > 0.0:
        if a.hi == 0.0:
            return _mk(-INFINITY, 0.0)
        return _mk(NAN, 0.0)
    if not isfinite(a.hi):
        return _mk(INFINITY, 0.0)
    y = _mk(log(a.hi), 0.0)
    for it in range(2):
        e = _exp(_neg(y))
        y = _add(y, _add(_mul(a, e), _mk(-1.0, 0.0)))
    return y

cdef dd _pow(dd a, double c) noexcept nogil:
    cdef int n
    cdef dd res, base
    if c == 0.0:
        return _mk(1.0, 0.0)
    if c == <double>(<int>c) and fabs(c) <= 64:
        n = <int>fabs(c)
        res = _mk(1.0, 0.0)
        base = a
        while n:
            if n & 1:
                res = _mul(res, base)
            base = _mul(base, base)
            n >>= 1
        if c < 0:
            return _div(_mk(1.0, 0.0), res)
        return res
    if a.hi == 0.0:
        if c > 0:
            return _mk(0.0, 0.0)
        return _mk(INFINITY, 0.0)
    return _exp(_mul(_log(a), _mk(c, 0.0)))


# --------------------------------------------------------------------------
# stack programs

cdef double _prog(const int* ops, const double* vals, int n, double s) noexcept nogil:
    cdef double st[MAXSTACK]
    cdef int sp = 0
    cdef int i, op
    cdef double a, b
    for i in range(n):
        op = ops[i]
        if op == 0:
            st[sp] = vals[i]
            sp += 1
        elif op == 1:
            st[sp] = s
            sp += 1
        elif op == 6:
            st[sp - 1] = -st[sp - 1]
        elif op == 7:
            st[sp - 1] = exp(st[sp - 1])
        elif op == 8:
            a = st[sp - 1]
            st[sp - 1] = log(a) if a > 0.0 else NAN
        elif op == 9:
            st[sp - 1] = pow(st[sp - 1], vals[i])
        else:
            b = st[sp - 1]
            a = st[sp - 2]
            sp -= 1
            if op == 2:
                st[sp - 1] = a + b
            elif op == 3:
                st[sp - 1] = a - b
            elif op == 4:
                st[sp - 1] = a * b
            elif op == 5:
                st[sp - 1] = a / b
            else:
                st[sp - 1] = exp(b * log(a)) if a > 0.0 else NAN
    return st[sp - 1]


cdef dd _prog_dd(const int* ops, const double* vals, int n, dd s) noexcept nogil:
    cdef dd st[MAXSTACK]
    cdef int sp = 0
    cdef int i, op
    cdef dd a, b
    for i in range(n):
        op = ops[i]
        if op == 0:
            st[sp] = _mk(vals[i], 0.0)
            sp += 1
        elif op == 1:
            st[sp] = s
            sp += 1
        elif op == 6:
            st[sp - 1] = _neg(st[sp - 1])
        elif op == 7:
            st[sp - 1] = _exp(st[sp - 1])
        elif op == 8:
            st[sp - 1] = _log(st[sp - 1])
        elif op == 9:
            st[sp - 1] = _pow(st[sp - 1], vals[i])
        else:
            b = st[sp - 1]
            a = st[sp - 2]
            sp -= 1
            if op == 2:
                st[sp - 1] = _add(a, b)
            elif op == 3:
                st[sp - 1] = _add(a, _neg(b))
            elif op == 4:
                st[sp - 1] = _mul(a, b)
            elif op == 5:
                st[sp - 1] = _div(a, b)
            else:
                st[sp - 1] = _exp(_mul(b, _log(a)))
    return st[sp - 1]


def g_eval(int[::1] ops, double[::1] vals, double s):
    """g(s) from a stack program."""
    return _prog(&ops[0], &vals[0], ops.shape[0], s)


def g_eval_dd(int[::1] ops, double[::1] vals, double hi, double lo):
    """g at the double-double point (hi, lo); returns (hi, lo)."""
    cdef dd r = _prog_dd(&ops[0], &vals[0], ops.shape[0], _mk(hi, lo))
    return r.hi, r.lo


# --------------------------------------------------------------------------
# right-hand sides

cdef struct Ctx:
    int mode
    int use_dd
    const int* ops
    const double* vals
    int nops
    const double* par
    const double* cheb
    int ncheb_rows
    int ncheb_cols


cdef inline double _clenshaw(const double* c, int n, double x) noexcept nogil:
    cdef double b0 = 0.0, b1 = 0.0, b2 = 0.0
    cdef int k
    for k in range(n - 1, 0, -1):
        b2 = b1
        b1 = b0
        b0 = 2.0 * x * b1 - b2 + c[k]
    return x * b0 - b1 + c[0]


cdef inline double _g_minus(Ctx* ctx, double y, double rho) noexcept nogil:
    """g(y) - rho, compensated in dd mode."""
    cdef dd r
    if ctx.use_dd:
        r = _prog_dd(ctx.ops, ctx.vals, ctx.nops, _mk(y, 0.0))
        r = _add(r, _mk(-rho, 0.0))
        return r.hi + r.lo
    return _prog(ctx.ops, ctx.vals, ctx.nops, y) - rho


cdef void _rhs(Ctx* ctx, double t, double y0, double y1, double* f0, double* f1) noexcept nogil:
    cdef double d, xi, e, gp, gpp, y2, delta, arg, dk, vc
    cdef dd r
    cdef int k, nc = ctx.ncheb_cols
    if ctx.mode == M_REG:
        # state (v, dv/dt), v = u - alpha, t = log of the rescaled radius;
        # trial stages beyond the zero see g frozen at u = 0
        vc = y0 if y0 > -ctx.par[0] else -ctx.par[0]
        if ctx.use_dd:
            r = _prog_dd(ctx.ops, ctx.vals, ctx.nops, _two_sum(ctx.par[0], vc))
            r = _add(r, _mk(-ctx.par[1], -ctx.par[2]))
            d = r.hi + r.lo
        else:
            d = _prog(ctx.ops, ctx.vals, ctx.nops, ctx.par[0] + vc) - ctx.par[1]
        f0[0] = y1
        f1[0] = -exp(2.0 * t + d)
    elif ctx.mode == M_SING_Y:
        # state (y, dy/drho)
        f0[0] = y1
        f1[0] = -0.25 * exp(_g_minus(ctx, y0, t))
    elif ctx.mode == M_SING_P:
        # independent variable y; state (rho, p = drho/dy)
        f0[0] = y1
        f1[0] = 0.25 * exp(_g_minus(ctx, t, y0)) * y1 * y1 * y1
    else:
        # remainder eta = y - y1 - y2; coefficients tabulated in log(rho)
        xi = (2.0 * log(t) - ctx.par[0] - ctx.par[1]) / (ctx.par[1] - ctx.par[0])
        e = _clenshaw(ctx.cheb + nc, nc, xi)
        gp = _clenshaw(ctx.cheb + 2 * nc, nc, xi)
        gpp = _clenshaw(ctx.cheb + 3 * nc, nc, xi)
        y2 = _clenshaw(ctx.cheb + 4 * nc, nc, xi)
        delta = y2 + y0
        arg = 0.0
        dk = delta * delta * delta
        for k in range(5, ctx.ncheb_rows):
            arg += _clenshaw(ctx.cheb + k * nc, nc, xi) * dk
            dk *= delta
        arg += gp * y0 + 0.5 * gpp * delta * delta
        f0[0] = y1
        f1[0] = -_clenshaw(ctx.cheb, nc, xi) - e * expm1(arg)


cdef int _event(Ctx* ctx, double t, double y0, double y1) noexcept nogil:
    if ctx.mode == M_REG:
        return y0 <= -ctx.par[0]
    if ctx.mode == M_SING_Y:
        return y0 < ctx.par[0] or y1 > ctx.par[1]
    return 0


# Dormand-Prince 5(4) tableau
cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0


cdef int _dp_step(Ctx* ctx, double t, double* y, double* k1, double h,
                  double* ynew, double* k7, double* err) noexcept nogil:
    """One DP5 step; k1 holds f(t, y) on entry.  Returns 1 if finite."""
    cdef double k2[2], k3[2], k4[2], k5[2], k6[2], z[2]
    cdef int i
    for i in range(2):
        z[i] = y[i] + h * A21 * k1[i]
    _rhs(ctx, t + C2 * h, z[0], z[1], &k2[0], &k2[1])
    for i in range(2):
        z[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    _rhs(ctx, t + C3 * h, z[0], z[1], &k3[0], &k3[1])
    for i in range(2):
        z[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    _rhs(ctx, t + C4 * h, z[0], z[1], &k4[0], &k4[1])
    for i in range(2):
        z[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    _rhs(ctx, t + C5 * h, z[0], z[1], &k5[0], &k5[1])
    for i in range(2):
        z[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
    _rhs(ctx, t + h, z[0], z[1], &k6[0], &k6[1])
    for i in range(2):
        ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
    _rhs(ctx, t + h, ynew[0], ynew[1], &k7[0], &k7[1])
    for i in range(2):
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
    return isfinite(ynew[0]) and isfinite(ynew[1]) and isfinite(k7[0]) and isfinite(k7[1])


cdef void _setup(Ctx* ctx, int mode, const int[::1] ops, const double[::1] vals,
                 const double[::1] par, const double[:, ::1] cheb, int use_dd):
    ctx.mode = mode
    ctx.use_dd = use_dd
    ctx.ops = &ops[0]
    ctx.vals = &vals[0]
    ctx.nops = ops.shape[0]
    ctx.par = &par[0] if par.shape[0] > 0 else NULL
    ctx.cheb = &cheb[0, 0] if cheb.shape[0] > 0 else NULL
    ctx.ncheb_rows = cheb.shape[0]
    ctx.ncheb_cols = cheb.shape[1]


def rhs(int mode, int[::1] ops, double[::1] vals, double[::1] par, double[:, ::1] cheb,
        double t, double y0, double y1, int use_dd=0):
    """Right-hand side of the selected mode (for tests and diagnostics)."""
    cdef Ctx ctx
    cdef double f0, f1
    _setup(&ctx, mode, ops, vals, par, cheb, use_dd)
    _rhs(&ctx, t, y0, y1, &f0, &f1)
    return f0, f1


def rk_step(int mode, int[::1] ops, double[::1] vals, double[::1] par, double[:, ::1] cheb,
            double t, double y0, double y1, double h, int use_dd=0):
    """A single fifth-order step of size h (used for event polishing)."""
    cdef Ctx ctx
    cdef double y[2], k1[2], yn[2], k7[2], err[2]
    _setup(&ctx, mode, ops, vals, par, cheb, use_dd)
    y[0] = y0
    y[1] = y1
    _rhs(&ctx, t, y0, y1, &k1[0], &k1[1])
    _dp_step(&ctx, t, y, k1, h, yn, k7, err)
    return yn[0], yn[1]


def integrate(int mode, int[::1] ops, double[::1] vals, double[::1] par, double[:, ::1] cheb,
              double t0, double y0, double y1, double t_end, double rtol,
              double atol0, double atol1, double h0, long max_steps, int use_dd=0,
              long stride=1):
    """Adaptive DP5(4) integration from t0 towards t_end.

    Returns ``(T, Y, F, status)``: accepted points (every ``stride``-th plus
    the first and last), states and derivatives.  ``status`` is 0 when
    t_end was reached, 1 on a mode event, 2 when ``max_steps`` ran out,
    3 on a non-finite state or step-size underflow.
    """
    cdef Ctx ctx
    _setup(&ctx, mode, ops, vals, par, cheb, use_dd)
    cdef long cap = max_steps // stride + 3
    T_arr = np.empty(cap)
    Y_arr = np.empty((cap, 2))
    F_arr = np.empty((cap, 2))
    cdef double[::1] T = T_arr
    cdef double[:, ::1] Y = Y_arr
    cdef double[:, ::1] F = F_arr
    cdef double y[2], k1[2], yn[2], k7[2], err[2]
    cdef double t = t0, h = h0, direction, en, sc, fac, hmin
    cdef long nstep = 0, nout = 0, since = 0
    cdef int status = 2, ok, i, last
    direction = 1.0 if t_end >= t0 else -1.0
    if h == 0.0 or (h > 0) != (direction > 0):
        h = direction * 1e-3 * fabs(t_end - t0)
    y[0] = y0
    y[1] = y1
    _rhs(&ctx, t, y[0], y[1], &k1[0], &k1[1])
    T[0] = t
    Y[0, 0] = y[0]
    Y[0, 1] = y[1]
    F[0, 0] = k1[0]
    F[0, 1] = k1[1]
    nout = 1
    if not (isfinite(k1[0]) and isfinite(k1[1])):
        return T_arr[:1], Y_arr[:1], F_arr[:1], 3
    with nogil:
        while nstep < max_steps:
            last = 0
            if direction * (t + h - t_end) >= 0.0:
                h = t_end - t
                last = 1
            hmin = 1e-15 * fabs(t) + 1e-300
            if fabs(h) < hmin:
                status = 3
                break
            ok = _dp_step(&ctx, t, y, k1, h, yn, k7, err)
            if ok:
                en = 0.0
                for i in range(2):
                    sc = (atol0 if i == 0 else atol1) + rtol * (fabs(y[i]) if fabs(y[i]) > fabs(yn[i]) else fabs(yn[i]))
                    en += (err[i] / sc) * (err[i] / sc)
                en = sqrt(0.5 * en)
            else:
                en = 1e10
            if en <= 1.0:
                t = t_end if last else t + h
                y[0] = yn[0]
                y[1] = yn[1]
                k1[0] = k7[0]
                k1[1] = k7[1]
                nstep += 1
                since += 1
                status = 0 if last else (1 if _event(&ctx, t, y[0], y[1]) else 2)
                if since >= stride or status < 2:
                    T[nout] = t
                    Y[nout, 0] = y[0]
                    Y[nout, 1] = y[1]
                    F[nout, 0] = k1[0]
                    F[nout, 1] = k1[1]
                    nout += 1
                    since = 0
                if status < 2:
                    break
                fac = 0.9 * pow(en, -0.2) if en > 1e-10 else 5.0
                if fac > 5.0:
                    fac = 5.0
                h = h * fac
            else:
                if not ok:
                    fac = 0.25
                else:
                    fac = 0.9 * pow(en, -0.2)
                    if fac < 0.2:
                        fac = 0.2
                h = h * fac
        if status >= 2 and since > 0:
            T[nout] = t
            Y[nout, 0] = y[0]
            Y[nout, 1] = y[1]
            F[nout, 0] = k1[0]
            F[nout, 1] = k1[1]
            nout += 1
    return T_arr[:nout], Y_arr[:nout], F_arr[:nout], status
