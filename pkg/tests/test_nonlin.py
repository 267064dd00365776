import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from singular2d import nonlin
from singular2d.errors import (DomainError, InadmissibleSpecError, ParameterError, ParseError,
                               UnknownIdentifierError)

P = nonlin.parse_nonlinearity
E = math.e

# mpmath (30 digits): sqrt(pi)/2 * erfc(2)
ERFC_TAIL_2 = 0.00414553469033633368160270575652


# -- parsing ---------------------------------------------------------------

def test_identity_expression():
    spec = P("s")
    assert spec.g(2.5) == 2.5
    assert spec.critical_exponential


def test_double_exp_matches_catalog():
    assert P("exp(exp(s))") == P("double_exp")


def test_syntax_error_offset():
    with pytest.raises(ParseError) as info:
        P("exp(s^")
    assert info.value.offset == 6


def test_offsets_are_utf8_bytes():
    with pytest.raises(ParseError) as info:
        P("s + é")
    assert info.value.offset == 4


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        P("exp(t)")


def test_parameter_range_checked():
    with pytest.raises(ParameterError):
        P("f1", {"B": 0.5})


def test_catalog_parameters_override_defaults():
    spec = P("pow_sum", {"p": 4.0, "r": 2.0})
    assert spec.param_map == {"p": 4.0, "r": 2.0}
    assert spec.g(2.0) == pytest.approx(20.0)


# -- jets ------------------------------------------------------------------

def test_polynomial_jet():
    assert nonlin.taylor_jet(P("s^2"), 3.0).as_tuple() == (9.0, 6.0, 2.0, 0.0)


def test_exponential_jet():
    assert nonlin.taylor_jet(P("exp(s)"), 1.0).as_tuple() == pytest.approx((E, E, E, E), rel=1e-15)


def test_double_exponential_jet():
    # chain-rule oracle: (e, e, 2e, 5e) at s = 0
    jet = nonlin.taylor_jet(P("exp(exp(s))"), 0.0).as_tuple()
    assert jet == pytest.approx((E, E, 2 * E, 5 * E), rel=1e-14)


def test_jet_below_floor_rejected():
    with pytest.raises(DomainError):
        nonlin.taylor_jet(P("f1"), 0.5)


@given(st.sampled_from(["exp(s)*s^2", "log(1+s)*s^3", "exp(s^1.5)", "s^3+s"]),
       st.floats(0.5, 3.0))
def test_jet_matches_finite_differences(src, s):
    spec = P(src)
    jet = nonlin.taylor_jet(spec, s)
    h = 1e-4
    fd1 = (spec.g(s + h) - spec.g(s - h)) / (2 * h)
    fd2 = (spec.g(s + h) - 2 * spec.g(s) + spec.g(s - h)) / h ** 2
    assert jet.d1 == pytest.approx(fd1, rel=1e-6)
    assert jet.d2 == pytest.approx(fd2, rel=1e-4)


@given(st.sampled_from(sorted(nonlin.CATALOG)), st.floats(0.0, 1.0))
def test_admitted_specs_are_positive_increasing_convex(name, t):
    spec = P(name)
    s = spec.s_admit + 0.01 + 5.0 * t
    if name == "triple_exp":
        s = spec.s_admit + 0.01 + 1.5 * t
    jet = nonlin.taylor_jet(spec, s)
    assert jet.v > 0 and jet.d1 > 0 and jet.d2 > 0


# -- H and q ---------------------------------------------------------------

def test_H_exponential_is_one():
    for s in (0.5, 3.0, 40.0):
        assert nonlin.eval_H(P("exp(s)"), s)[0] == 1.0


def test_H_double_exponential():
    assert nonlin.eval_H(P("exp(exp(s))"), 2.0)[0] == pytest.approx(1 + math.exp(-2.0), rel=1e-14)


def test_H_cubic():
    for s in (1.0, 7.0, 100.0):
        assert nonlin.eval_H(P("s^3"), s)[0] == pytest.approx(2.0 / 3.0, rel=1e-14)


@given(st.sampled_from(sorted(nonlin.CATALOG)), st.floats(0.0, 1.0))
def test_H_matches_closed_form(name, t):
    spec = P(name)
    s = spec.s_admit + 0.1 + (2.0 if name == "triple_exp" else 8.0) * t
    assert nonlin.eval_H(spec, s)[0] == pytest.approx(nonlin.closed_form_H(name, s), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("src, params, q", [
    ("f1", {"B": 2.0}, 2.0),
    ("s^3+s", {}, 1.5),
    ("exp(exp(exp(s)))", {}, 1.0),
])
def test_q_estimates(src, params, q):
    assert nonlin.estimate_q(P(src, params))[0] == pytest.approx(q, abs=1e-3)


@pytest.mark.parametrize("name", sorted(nonlin.CATALOG))
def test_report_invariants(name):
    rep = nonlin.criticality_report(P(name))
    assert rep.q >= 1.0 - rep.q_ci
    assert abs(rep.B2_limit - 1.0 / rep.q) <= max(rep.B2_ci, 1e-3)


def test_critical_exponential_report_rejected():
    with pytest.raises(InadmissibleSpecError):
        nonlin.criticality_report(P("s"))


# -- tail integral ---------------------------------------------------------

def test_tail_of_exponential():
    lm, m = nonlin.F_tail(P("s"), 5.0)
    assert math.exp(lm) * m == pytest.approx(math.exp(-5.0), rel=1e-10)


def test_tail_erfc_oracle():
    lm, m = nonlin.F_tail(P("s^2"), 2.0)
    assert math.exp(lm) * m == pytest.approx(ERFC_TAIL_2, rel=1e-10)


@pytest.mark.parametrize("name", sorted(nonlin.CATALOG))
def test_tail_bound_at_g_50(name):
    spec = P(name)
    s = nonlin.solve_g(spec, 50.0)
    lm, m = nonlin.F_tail(spec, s)
    jet = nonlin.taylor_jet(spec, s)
    H = nonlin.eval_H(spec, s)[0]
    # f'(s) F(s) = g'(s) e^{g(s)} F(s) = g' * mantissa when lm = -g(s)
    prod = jet.d1 * m * math.exp(lm + jet.v)
    assert 1.0 - 2.0 * H / 50.0 <= prod <= 1.0


def test_tail_underflow_safe():
    spec = P("double_exp")
    lm, m = nonlin.F_tail(spec, 6.0)
    assert lm < -400 and 0.0 < m < 1.0


# -- criticality flags -----------------------------------------------------

def test_cubic_is_supercritical():
    rep = nonlin.criticality_report(P("s^3"))
    assert rep.supercritical
    assert rep.primitive_limit == pytest.approx(1.0 / 3.0, abs=1e-2)


def test_f3_equivalence_flags():
    assert nonlin.criticality_report(P("f1", {"B": 2.0})).f3_equiv
    assert not nonlin.criticality_report(P("exp(exp(exp(s)))")).f3_equiv


def test_solve_g_inverts():
    spec = P("triple_exp")
    for rho in (20.0, 1e3, 1e8):
        assert spec.g(nonlin.solve_g(spec, rho)) == pytest.approx(rho, rel=1e-12)
