"""Command line entry point.

Subcommands::

    inspect    criticality report of a nonlinearity (JSON)
    singular   singular solution (CSV) and its expansion error (CSV)
    shoot      one regular solution (CSV) and lambda (JSON)
    bifurc     bifurcation curve (trace: CSV + JSON, report: JSON)
    lyap       energy trace along a singular solution (CSV)
    intersect  intersection numbers Z(U_inf - v_alpha) (CSV)
    verify     the acceptance checks (JSON)

``asym dump``, ``ode shoot`` and ``ode singular`` are accepted as aliases.
Options may also come from ``--config FILE``, a flat ``key = value`` file
with the same keys as the flags (``param`` may repeat); flags win.

Exit status: 0 success, 1 failed acceptance check, 2 bad input or
configuration, 3 numerical failure (diagnostics as JSON on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, ConvergenceError, IntegrationError, NumericError, Singular2dError

__all__ = ["RunConfig", "main", "run_command", "parse_config_text"]

_ARITH = {"f64": "f64", "double": "f64", "dd": "dd", "compensated": "dd", "auto": "auto"}


# --------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's numerical output."""

    spec: str | None = None
    params: tuple = ()
    tol: float = 1e-10
    quad_tol: float = 1e-12
    rho_max: float = 800.0
    alpha: str | None = None
    arith: str = "auto"
    threads: int = 1
    seed: int | None = None

    def to_text(self) -> str:
        """Flat key = value text; parses back to an equal RunConfig."""
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name == "params":
                lines.extend("param = %s=%r" % (k, v) for k, v in val)
            elif val is not None:
                lines.append("%s = %s" % (f.name, repr(val) if isinstance(val, float) else val))
        return "\n".join(lines) + "\n"

    @property
    def param_map(self) -> dict:
        return dict(self.params)


_KEYS = {f.name for f in fields(RunConfig)} - {"params"} | {"param"}


def _parse_param(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise ConfigError("parameter must look like name=value: %r" % text)
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError:
        raise ConfigError("parameter value is not a number: %r" % text) from None


def _coerce(key: str, value: str):
    try:
        if key in ("tol", "quad_tol", "rho_max"):
            return float(value)
        if key in ("threads", "seed"):
            return int(value)
    except ValueError:
        raise ConfigError("bad value for %s: %r" % (key, value)) from None
    if key == "arith":
        if value not in _ARITH:
            raise ConfigError("arith must be one of %s" % sorted(_ARITH))
        return _ARITH[value]
    return value


def parse_config_text(text: str) -> RunConfig:
    """Parse flat key = value text; blank lines and # comments are skipped.

    Raises
    ------
    ConfigError
        On unknown keys or malformed lines.
    """
    kw: dict = {}
    params: dict = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key = value" % n)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError("line %d: unknown key %r" % (n, key))
        if key == "param":
            k, v = _parse_param(value)
            params[k] = v
        else:
            kw[key] = _coerce(key, value)
    kw["params"] = tuple(sorted(params.items()))
    return RunConfig(**kw)


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            cfg = parse_config_text(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError("cannot read config file: %s" % exc) from None
    updates = {}
    for key in ("spec", "tol", "quad_tol", "rho_max", "alpha", "threads", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            updates[key] = val
    if getattr(args, "arith", None):
        updates["arith"] = _ARITH[args.arith]
    if getattr(args, "param", None):
        merged = dict(cfg.params)
        merged.update(_parse_param(p) for p in args.param)
        updates["params"] = tuple(sorted(merged.items()))
    return replace(cfg, **updates)


# --------------------------------------------------------------------------
# output helpers

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return repr(float(v))


def _write_csv(path, header, rows, stdout) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    if path in (None, "-"):
        stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _clean(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _dump_json(doc) -> str:
    doc = json.loads(json.dumps(doc, default=_json_default))
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def _emit_json(doc, args, stdout) -> None:
    text = _dump_json(doc)
    target = getattr(args, "json", None)
    if target and target != "-":
        Path(target).write_text(text)
    elif target == "-" or getattr(args, "out", None) not in (None, "-"):
        stdout.write(text)


def _spec(cfg: RunConfig):
    from .nonlin import parse_nonlinearity
    if not cfg.spec:
        raise ConfigError("--spec is required")
    return parse_nonlinearity(cfg.spec, cfg.param_map)


def _alpha_values(text: str | None) -> np.ndarray:
    """``a``, ``a:b:n`` (inclusive linspace) or ``a,b,c``."""
    if not text:
        raise ConfigError("--alpha is required")
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return np.linspace(float(a), float(b), n)
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise ConfigError("bad alpha value %r (use a, a:b:n or a,b,c)" % text) from None


# --------------------------------------------------------------------------
# commands

def cmd_inspect(args, cfg, stdout, stderr) -> int:
    from .nonlin import F_tail, criticality_report
    spec = _spec(cfg)
    doc = {"spec": spec.name, "source": cfg.spec, "params": cfg.param_map,
           "s_floor": spec.s_floor, "s_admit": spec.s_admit,
           "critical_exponential": spec.critical_exponential}
    if spec.critical_exponential or spec.s_admit is None:
        doc["singular_admissible"] = False
        doc["report"] = None
    else:
        doc["singular_admissible"] = True
        doc["report"] = criticality_report(spec).to_dict()
        s0 = float(spec.s_admit)
        lm, m = F_tail(spec, s0, rtol=cfg.quad_tol)
        doc["F_tail_at_s_admit"] = {"s": s0, "log_magnitude": lm, "mantissa": m}
    text = _dump_json(doc)
    if args.json and args.json != "-":
        Path(args.json).write_text(text)
    else:
        stdout.write(text)
    return 0


def cmd_singular(args, cfg, stdout, stderr) -> int:
    from .asym import expansion_g
    from .ode import integrate_singular
    from .ode.types import g_array
    spec = _spec(cfg)
    arith = "auto" if cfg.arith == "auto" else cfg.arith
    sol = integrate_singular(spec, (cfg.rho_max, 0.0), tol=cfg.tol, arith=arith)
    eta = sol.eta if sol.eta is not None else np.full_like(sol.y, np.nan)
    _write_csv(args.out, ["rho", "y", "dy", "eta"],
               zip(sol.rho_grid, sol.y, sol.dy, eta), stdout)
    err_path = args.err_out
    if err_path is None and args.out not in (None, "-"):
        err_path = str(Path(args.out).with_suffix("")) + ".expansion.csv"
    if err_path:
        from .asym import rho_base
        lo = max(rho_base(spec), 1.0)
        rows = []
        for r, y in zip(sol.rho_grid, sol.y):
            if r >= lo:
                e = expansion_g(spec, float(r)).g_of_u
                gy = float(g_array(spec, y))
                rows.append((r, gy, e, abs(gy - e)))
        _write_csv(err_path, ["rho", "g_of_y", "expansion_g", "err"], rows, stdout)
    _emit_json({"spec": spec.name, "rho_zero": sol.rho_zero, "n": int(sol.rho_grid.size),
                "forms": [list(f) for f in sol.meta.get("forms", [])]}, args, stdout)
    return 0


def cmd_shoot(args, cfg, stdout, stderr) -> int:
    from .ode import integrate_regular
    spec = _spec(cfg)
    alphas = _alpha_values(cfg.alpha)
    if alphas.size != 1:
        raise ConfigError("shoot takes a single --alpha value")
    sol = integrate_regular(spec, float(alphas[0]), cfg.tol, arith=cfg.arith)
    _write_csv(args.out, ["r", "u", "du", "log_r", "r_du"],
               zip(sol.r_grid, sol.u, sol.du, sol.log_r, sol.r_du), stdout)
    _emit_json({"spec": spec.name, "alpha": float(alphas[0]), "lambda": sol.lam,
                "r0": sol.first_zero, "log_lambda": sol.meta["log_lambda"],
                "arith": sol.meta["arith"], "steps": sol.meta["steps"]}, args, stdout)
    return 0


def _lambda_inf_or_none(spec, tol):
    from .bifurc import lambda_infinity
    if spec.critical_exponential or spec.s_admit is None:
        return None
    return lambda_infinity(spec, tol=max(tol, 1e-11))


def cmd_bifurc(args, cfg, stdout, stderr) -> int:
    from .bifurc import summary_json, trace_curve
    from .nonlin import estimate_q
    spec = _spec(cfg)
    grid = _alpha_values(cfg.alpha or "0.1:10:100")
    curve = trace_curve(spec, grid, cfg.tol, refine=args.refine, arith=cfg.arith,
                        workers=cfg.threads)
    li = _lambda_inf_or_none(spec, cfg.tol)
    if li is not None:
        curve.set_lambda_inf(li)
    q = None if spec.critical_exponential else float(estimate_q(spec)[0])
    summary = json.loads(summary_json(curve, q))
    if args.action == "trace":
        _write_csv(args.out, ["alpha", "lambda", "r0", "is_turning", "lambda_minus_lambdainf"],
                   curve.rows(), stdout)
        _emit_json(summary, args, stdout)
    else:
        # the summary is the primary artifact here; --json, when given, gets a copy
        text = _dump_json(summary)
        to_stdout = args.out in (None, "-")
        if not to_stdout:
            Path(args.out).write_text(text)
        if args.json and args.json != "-":
            Path(args.json).write_text(text)
        if to_stdout or args.json == "-":
            stdout.write(text)
    return 0


def _read_emden_csv(path):
    from .ode.types import EmdenSolution
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError("cannot read %s: %s" % (path, exc)) from None
    if not rows or not {"rho", "y", "dy"} <= set(rows[0]):
        raise ConfigError("%s lacks the rho, y, dy columns" % path)
    rho = np.array([float(r["rho"]) for r in rows])
    y = np.array([float(r["y"]) for r in rows])
    dy = np.array([float(r["dy"]) for r in rows])
    order = np.argsort(rho)
    return EmdenSolution(rho[order], y[order], dy[order], "singular")


def cmd_lyap(args, cfg, stdout, stderr) -> int:
    from .lyap import EPS, EPS0, calibrate_C, energy_trace
    from .ode import integrate_singular
    spec = _spec(cfg)
    if args.singular:
        sol = _read_emden_csv(args.singular)
    else:
        sol = integrate_singular(spec, (cfg.rho_max, 0.0), tol=cfg.tol)
    eps = EPS if args.eps is None else args.eps
    sub = sol.restrict(args.rho_min, np.inf)
    C = args.C if args.C is not None else calibrate_C(spec, sub, eps=eps, rho_lo=args.rho_min)["C"]
    tr = energy_trace(spec, sub, C, eps, EPS0 if args.eps0 is None else args.eps0)
    _write_csv(args.out, ["rho", "w", "t", "dWdt", "Hcal", "L"], tr.rows(), stdout)
    _emit_json({"spec": spec.name, "params": tr.params, "n": int(tr.rho_grid.size)}, args, stdout)
    return 0


def cmd_intersect(args, cfg, stdout, stderr) -> int:
    from .intersect import z_table
    spec = _spec(cfg)
    alphas = _alpha_values(args.alphas or cfg.alpha or "5,10,15,20")
    rows = z_table(spec, alphas, tol=min(cfg.tol, 1e-11), workers=cfg.threads)
    _write_csv(args.out, ["alpha", "Z", "r_min_used"],
               [(r["alpha"], r["Z"], r["r_min_used"]) for r in rows], stdout)
    _emit_json({"spec": spec.name, "rows": rows}, args, stdout)
    return 0


def cmd_asym(args, cfg, stdout, stderr) -> int:
    from .asym import dump_rows
    spec = _spec(cfg)
    rhos = _alpha_values(args.rho_grid)
    header = ["rho", "y1", "y2", "dy2", "G", "a", "b", "expansion_g"]
    rows = dump_rows(spec, rhos)
    if args.format == "json":
        doc = [dict(zip(header, r)) for r in rows]
        text = _dump_json(doc)
        if args.out not in (None, "-"):
            Path(args.out).write_text(text)
        else:
            stdout.write(text)
    else:
        _write_csv(args.out, header, rows, stdout)
    return 0


def cmd_verify(args, cfg, stdout, stderr) -> int:
    from .acceptance import CHECKS, run_check
    numbers = sorted(CHECKS)
    if args.only:
        try:
            numbers = [int(x) for x in args.only.split(",")]
        except ValueError:
            raise ConfigError("--only takes comma-separated check numbers") from None
        bad = [n for n in numbers if n not in CHECKS]
        if bad:
            raise ConfigError("unknown check numbers %s" % bad)
    results = []
    for n in numbers:
        res = run_check(n, seed=cfg.seed)
        stderr.write(res.line + "\n")
        results.append(res)
    doc = {"passed": all(r.passed for r in results), "checks": [r.to_dict() for r in results]}
    text = _dump_json(doc)
    if args.json and args.json != "-":
        Path(args.json).write_text(text)
    else:
        stdout.write(text)
    return 0 if doc["passed"] else 1


# --------------------------------------------------------------------------
# argument parsing

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--spec", help="catalog name or expression for g(s) = log f(s)")
    p.add_argument("--param", action="append", metavar="K=V", help="parameter binding (repeatable)")
    p.add_argument("--tol", type=float, help="ODE tolerance")
    p.add_argument("--quad-tol", dest="quad_tol", type=float, help="quadrature tolerance (F_tail)")
    p.add_argument("--rho-max", dest="rho_max", type=float, help="top of the singular integration")
    p.add_argument("--alpha", help="a, a:b:n or a,b,c")
    p.add_argument("--arith", choices=sorted(_ARITH), help="f64 or dd (compensated)")
    p.add_argument("--out", help="primary output file (default stdout)")
    p.add_argument("--json", help="summary JSON file ('-' for stdout)")
    p.add_argument("--threads", type=int, help="worker threads for sweeps")
    p.add_argument("--seed", type=int, help="seed for randomised checks")
    p.add_argument("--config", help="flat key = value configuration file")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="singular2d", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("inspect", parents=[common], help="criticality report")

    def add_singular(p):
        p.add_argument("--err-out", dest="err_out", help="expansion-error CSV")

    add_singular(sub.add_parser("singular", parents=[common], help="singular solution"))
    sub.add_parser("shoot", parents=[common], help="one regular solution")

    p = sub.add_parser("bifurc", parents=[common], help="bifurcation curve")
    p.add_argument("action", nargs="?", choices=["trace", "report"], default="trace")
    p.add_argument("--refine", dest="refine", action="store_true", default=True)
    p.add_argument("--no-refine", dest="refine", action="store_false")

    p = sub.add_parser("lyap", parents=[common], help="energy trace")
    p.add_argument("action", nargs="?", choices=["trace"], default="trace")
    p.add_argument("--singular", help="singular-solution CSV (rho, y, dy)")
    p.add_argument("--rho-min", dest="rho_min", type=float, default=100.0)
    p.add_argument("--C", dest="C", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--eps0", type=float)

    p = sub.add_parser("intersect", parents=[common], help="intersection numbers")
    p.add_argument("action", nargs="?", choices=["count"], default="count")
    p.add_argument("--alphas", help="comma-separated central values")

    p = sub.add_parser("verify", parents=[common], help="acceptance checks")
    p.add_argument("--only", help="comma-separated check numbers")

    p = sub.add_parser("asym", parents=[common], help="asymptotic frame table")
    p.add_argument("action", nargs="?", choices=["dump"], default="dump")
    p.add_argument("--rho-grid", dest="rho_grid", default="100:1000:10")
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("ode", parents=[common], help="aliases for shoot and singular")
    p.add_argument("action", choices=["shoot", "singular"])
    add_singular(p)
    return parser


_COMMANDS = {"inspect": cmd_inspect, "singular": cmd_singular, "shoot": cmd_shoot,
             "bifurc": cmd_bifurc, "lyap": cmd_lyap, "intersect": cmd_intersect,
             "verify": cmd_verify, "asym": cmd_asym}


def _diagnostics(exc) -> dict:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConvergenceError):
        doc["diagnostics"] = exc.diagnostics
    if isinstance(exc, IntegrationError):
        doc["last_x"] = exc.last_x
    return doc


def run_command(argv, stdout=None, stderr=None) -> int:
    """Run one command; returns the exit status instead of exiting."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = args.command
    if command == "ode":
        command = args.action
    try:
        cfg = _config_from_args(args)
        if cfg.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return _COMMANDS[command](args, cfg, stdout, stderr)
    except ConfigError as exc:
        stderr.write("error: %s\n" % exc)
        return 2
    except NumericError as exc:
        stderr.write(_dump_json(_diagnostics(exc)))
        return 3
    except Singular2dError as exc:  # pragma: no cover - every subclass is handled above
        stderr.write("error: %s\n" % exc)
        return 3


def main(argv=None) -> None:
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))
