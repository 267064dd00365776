"""Built-in nonlinearities g = log f with closed-form H and q.

Each entry stores its DSL source, parameter defaults with admissible
ranges, and independent closed forms of H(s) and q used as golden values
by the tests.  ``docs/catalog.md`` lists the same table for humans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

from ..errors import ParameterError

__all__ = ["CatalogEntry", "CATALOG", "closed_form_H", "closed_form_q", "resolve_params"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    label: str
    source: str
    defaults: Mapping[str, float]
    check: Callable[[Mapping[str, float]], str | None]
    H: Callable[[float, Mapping[str, float]], float]
    q: Callable[[Mapping[str, float]], float]
    equiv: Callable[[Mapping[str, float]], bool]


def _H_f1(s, p):
    B = p["B"]
    Bp = B / (B - 1.0)
    L = math.log(s)
    c = math.log(4.0 / (B * Bp))
    k = 2.0 * Bp - 1.0
    t = s ** (-Bp)
    # constant term carries Bp*(Bp-1); it vanishes for B = 2 where c = 0
    num = (-Bp * (Bp - 1.0) * k * L + Bp * (Bp - 1.0) * c + k * k - k * k * t * L
           + (k * c - k * k / B) * t)
    return 1.0 / B + num / (s ** Bp * (Bp - k * t) ** 2)


def _H_exp_pow(s, p):
    i = p["i"]
    return 1.0 + i / ((1.0 + i) * s ** (1.0 + i))


def _H_pow_sum(s, p):
    P, r = p["p"], p["r"]
    num = (P - 2 * r) * (P - 1) + r * (r - 1) + r * (r - 1 - (P - 1) * r / P) * s ** (r - P)
    return (P - 1) / P + num / (s ** (P - r) * (P + r * s ** (r - P)) ** 2)


def _H_pow_log(s, p):
    P, i = p["p"], p["i"]
    L = math.log(s)
    num = i + (i * (i - 1) - (P - 1) / P * i * i) / L
    return (P - 1) / P + num / (L * (P + i / L) ** 2)


def _H_f2(s, p):
    e = math.exp(-s)
    return 1.0 + ((-2.0 * s + 4.0 + math.log(4.0)) - 4.0 * e) * e / (1.0 - 2.0 * e) ** 2


def _H_double_exp(s, p):
    return 1.0 + math.exp(-s)


def _H_triple_exp(s, p):
    ee = math.exp(-math.exp(s))
    return 1.0 + ee + math.exp(-s) * ee


def _need(cond, msg):
    return None if cond else msg


CATALOG: dict[str, CatalogEntry] = {
    "f1": CatalogEntry(
        name="f1", label="(i)",
        source="s^(B/(B-1)) - (2*B/(B-1) - 1)*log(s) + log(4/(B*B/(B-1)))",
        defaults={"B": 2.0},
        check=lambda p: _need(p["B"] > 1.0, "f1 requires B > 1"),
        H=_H_f1, q=lambda p: p["B"], equiv=lambda p: True,
    ),
    "exp_pow": CatalogEntry(
        name="exp_pow", label="(ii)", source="exp(s^(i+1))",
        defaults={"i": 0.0},
        check=lambda p: _need(p["i"] > -1.0, "exp_pow requires i > -1"),
        H=_H_exp_pow, q=lambda p: 1.0, equiv=lambda p: p["i"] == 0.0,
    ),
    "pow_sum": CatalogEntry(
        name="pow_sum", label="(iii)", source="s^p + s^r",
        defaults={"p": 3.0, "r": 1.0},
        check=lambda p: _need(p["p"] > p["r"] > 0.0 and p["p"] > 1.0,
                              "pow_sum requires p > r > 0 and p > 1"),
        H=_H_pow_sum, q=lambda p: p["p"] / (p["p"] - 1.0),
        equiv=lambda p: p["p"] > 2.0 * p["r"],
    ),
    "pow_log": CatalogEntry(
        name="pow_log", label="(iv)", source="s^p*log(s)^i",
        defaults={"p": 3.0, "i": 0.0},
        check=lambda p: _need(p["p"] > 1.0, "pow_log requires p > 1"),
        H=_H_pow_log, q=lambda p: p["p"] / (p["p"] - 1.0),
        equiv=lambda p: p["i"] == 0.0,
    ),
    "f2": CatalogEntry(
        name="f2", label="(v)", source="exp(s) - 2*s + log(4)", defaults={},
        check=lambda p: None, H=_H_f2, q=lambda p: 1.0, equiv=lambda p: True,
    ),
    "double_exp": CatalogEntry(
        name="double_exp", label="(vi)", source="exp(exp(s))", defaults={},
        check=lambda p: None, H=_H_double_exp, q=lambda p: 1.0,
        equiv=lambda p: False,
    ),
    "triple_exp": CatalogEntry(
        name="triple_exp", label="(vii)", source="exp(exp(exp(s)))", defaults={},
        check=lambda p: None, H=_H_triple_exp, q=lambda p: 1.0,
        equiv=lambda p: False,
    ),
}


def resolve_params(entry: CatalogEntry, params: Mapping[str, float] | None) -> dict:
    """Merge user parameters over the defaults and validate the range."""
    merged = dict(entry.defaults)
    for key, val in (params or {}).items():
        if key not in merged:
            raise ParameterError("catalog entry %r has no parameter %r" % (entry.name, key))
        merged[key] = float(val)
    msg = entry.check(merged)
    if msg:
        raise ParameterError(msg)
    return merged


def closed_form_H(name: str, s: float, params: Mapping[str, float] | None = None) -> float:
    entry = CATALOG[name]
    return entry.H(s, resolve_params(entry, params))


def closed_form_q(name: str, params: Mapping[str, float] | None = None) -> float:
    entry = CATALOG[name]
    return entry.q(resolve_params(entry, params))
