"""Compiled versus pure-Python kernels.

Times the expression evaluator (plain and double-double) and whole
integrations that spend their time in the kernels: regular shots, a
singular solution and a short bifurcation sweep.  Each workload is run
on every available backend; the outputs are compared for equality so a
speed-up never hides a different result.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import platform
import time

import numpy as np

from singular2d import bifurc, nonlin, ode
from singular2d.ode import backend


def _best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads():
    double_exp = nonlin.parse_nonlinearity("exp_pow")
    f2 = nonlin.parse_nonlinearity("f2")
    ops, vals = f2.program
    pts = np.linspace(1.0, 6.0, 20000)

    def g_plain():
        k = backend.kernels
        return [k.g_eval(ops, vals, float(s)) for s in pts]

    def g_dd():
        k = backend.kernels
        return [k.g_eval_dd(ops, vals, float(s), 0.0) for s in pts[:5000]]

    def shots():
        return [ode.integrate_regular(double_exp, a, 1e-10).lam for a in (1.0, 5.0, 10.0, 20.0)]

    def singular():
        sol = ode.integrate_singular(f2, (2e4, 0.0), tol=1e-11)
        return sol.rho_zero

    def sweep():
        return bifurc.trace_curve(double_exp, np.linspace(0.5, 6.0, 24), 1e-10).rows()

    return {"g_eval x20000": g_plain, "g_eval_dd x5000": g_dd,
            "regular shots (4, e^{e^s})": shots, "singular f2 rho<=2e4": singular,
            "bifurcation sweep (24 shots)": sweep}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="write the timings here")
    args = ap.parse_args(argv)

    names = backend.available_backends()
    start = backend.backend_name()
    results = {}
    try:
        for label, fn in workloads().items():
            row, outs = {}, {}
            for name in names:
                backend.use_backend(name)
                row[name], outs[name] = _best_of(fn, args.repeat)
            same = all(repr(outs[n]) == repr(outs[names[0]]) for n in names[1:])
            results[label] = {"seconds": row, "identical": same}
    finally:
        backend.use_backend(start)

    print("%-30s %12s %12s %9s  %s" % ("workload", "python [s]", "compiled [s]", "speed-up", "same output"))
    for label, res in results.items():
        py = res["seconds"].get("python")
        cc = res["seconds"].get("compiled")
        ratio = "%8.1fx" % (py / cc) if py and cc else "      n/a"
        print("%-30s %12.4f %12s %9s  %s" % (label, py, "%.4f" % cc if cc else "n/a", ratio,
                                             res["identical"]))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"platform": platform.platform(), "python": platform.python_version(),
                       "results": results}, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
