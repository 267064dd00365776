import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from singular2d import bifurc, nonlin
from singular2d.errors import ConfigError, InadmissibleSpecError

P = nonlin.parse_nonlinearity


def gelfand_lambda(alpha):
    return 8.0 * (math.exp(alpha / 2) - 1.0) / math.exp(alpha)


# mpmath (30 digits) values of 8(e^{a/2} - 1)/e^a at a = 1, log 4, 3, 6
GELFAND_ORACLE = {
    1.0: 1.90920974832952881606620611863777,
    math.log(4.0): 2.0,
    3.0: 1.38674473424452708763150444091183,
    6.0: 0.378466529529580676450377985753917,
}


def test_gelfand_curve_pointwise(gelfand):
    curve = bifurc.trace_curve(gelfand, sorted(GELFAND_ORACLE), 1e-10, refine=False)
    for a, lam in zip(curve.alpha, curve.lam):
        assert lam == pytest.approx(GELFAND_ORACLE[min(GELFAND_ORACLE, key=lambda k: abs(k - a))],
                                    rel=1e-6)


def test_gelfand_fold(gelfand):
    curve = bifurc.trace_curve(gelfand, np.linspace(0.25, 8.0, 32), 1e-10)
    assert len(curve.turning_points) == 1
    a, lam, kind = curve.turning_points[0]
    assert kind == "max"
    assert a == pytest.approx(math.log(4.0), abs=1e-3)
    assert lam == pytest.approx(2.0, abs=1e-4)
    flagged = [row for row in curve.rows() if row[3]]
    assert len(flagged) == 1


def test_small_alpha_linear(gelfand):
    alphas = np.array([1e-3, 2e-3, 4e-3])
    curve = bifurc.trace_curve(gelfand, alphas, 1e-10, refine=False)
    assert np.all(curve.lam > 0)
    # linearisation: lambda ~ 4 alpha / f(0) with f(0) = 1
    assert np.allclose(curve.lam / alphas, 4.0, rtol=5e-3)


def test_subcritical_power_single_fold():
    curve = bifurc.trace_curve(P("s^1.5"), np.linspace(0.5, 25.0, 60), 1e-10)
    assert len(curve.turning_points) == 1


@given(st.lists(st.floats(0.2, 3.0), min_size=3, max_size=8, unique=True))
def test_turning_points_alternate(alphas):
    curve = bifurc.trace_curve(P("exp_pow"), sorted(alphas), 1e-9, refine=False)
    kinds = [tp[2] for tp in curve.turning_points]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))
    assert np.all(curve.lam > 0)


def test_threads_do_not_change_results():
    spec = P("f2")
    grid = np.linspace(0.5, 4.0, 12)
    a = bifurc.trace_curve(spec, grid, 1e-10, workers=1)
    b = bifurc.trace_curve(spec, grid, 1e-10, workers=3)
    assert a.rows() == b.rows()
    assert a.turning_points == b.turning_points


def test_lambda_inf_anchors(f1, f2):
    assert bifurc.lambda_infinity(f1) == pytest.approx(1.0, abs=1e-3)
    assert bifurc.lambda_infinity(f2) == pytest.approx(math.exp(-1.0), abs=1e-3)


def test_lambda_inf_rejects_critical_exponential(gelfand):
    with pytest.raises(InadmissibleSpecError):
        bifurc.lambda_infinity(gelfand)


def test_oscillation_needs_lambda_inf(gelfand):
    curve = bifurc.trace_curve(gelfand, np.linspace(0.5, 4.0, 8), 1e-10, refine=False)
    with pytest.raises(ConfigError):
        bifurc.oscillation_report(curve)


def test_monotone_curve_has_no_oscillation():
    curve = bifurc.BifurcationCurve.from_arrays(np.linspace(1, 2, 10), np.linspace(1, 2, 10), 0.5)
    assert bifurc.oscillation_report(curve) == (0, 0)


def test_synthetic_oscillation_counts():
    a = np.linspace(0.1, 4 * math.pi - 0.1, 400)
    curve = bifurc.BifurcationCurve.from_arrays(a, 1.0 + 0.5 * np.sin(a), 1.0)
    n_t, n_c = bifurc.oscillation_report(curve)
    assert n_t == 4
    assert n_c == 3


def test_summary_json_fields(f2):
    curve = bifurc.trace_curve(f2, np.linspace(0.5, 4.0, 16), 1e-10)
    curve.set_lambda_inf(bifurc.lambda_infinity(f2))
    doc = json.loads(bifurc.summary_json(curve, 1.0))
    assert set(doc) == {"q", "lambda_inf", "n_turning", "n_crossings", "turning_points"}
    assert doc["n_turning"] >= 2
