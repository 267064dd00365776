import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from singular2d import asym, nonlin

P = nonlin.parse_nonlinearity
NAMES = ["f1", "f2", "exp_pow", "pow_sum", "pow_log", "double_exp", "triple_exp"]


# -- inversion ----------------------------------------------------------------

def test_invert_square():
    assert asym.invert_g(P("s^2"), 100.0) == pytest.approx(10.0, rel=1e-15)


def test_invert_exponential():
    assert asym.invert_g(P("exp(s)"), 100.0) == pytest.approx(math.log(100.0), rel=1e-15)


def test_invert_double_exponential():
    assert asym.invert_g(P("exp(exp(s))"), math.exp(10.0)) == pytest.approx(math.log(10.0), rel=1e-14)


# -- frame invariants ---------------------------------------------------------

@given(st.sampled_from(NAMES), st.floats(2.0, 6.0))
def test_frame_invariants(name, log10_rho):
    spec = P(name)
    rho = 10.0 ** log10_rho
    fr = asym.frame_at(spec, rho)
    assert spec.g(fr.y1) == pytest.approx(rho, rel=1e-12)
    lhs = math.exp(fr.gp * fr.y2)
    assert lhs == pytest.approx(4.0 * fr.G / (rho * fr.gp), rel=1e-10)
    assert fr.a ** 2 * fr.db == pytest.approx(1.0, rel=1e-15)
    assert fr.y2 < 0.0


def test_y7_identity_f2():
    fr = asym.frame_at(P("f2"), 200.0)
    assert abs(math.exp(fr.gp * fr.y2) - 4.0 * fr.G / (200.0 * fr.gp)) <= 1e-10 * 4.0 * fr.G / (200.0 * fr.gp)


def test_dy2_against_finite_difference():
    spec = P("pow_sum", {"p": 3.0, "r": 1.0})
    h = 0.01
    fd = (asym.frame_at(spec, 300.0 + h).y2 - asym.frame_at(spec, 300.0 - h).y2) / (2 * h)
    assert asym.frame_at(spec, 300.0).dy2 == pytest.approx(fd, rel=1e-5)


def test_dy2_decay_bound_f1():
    spec = P("f1", {"B": 2.0})
    q = 2.0
    for rho in np.linspace(100.0, 1000.0, 31):
        fr = asym.frame_at(spec, float(rho))
        assert abs(fr.dy2) <= 50.0 * math.log(rho) / rho ** (1 + 1 / q - 0.1)


def test_phase_derivative_matches_db():
    spec = P("f2")
    h = 1e-3
    fd = (asym.phase(spec, 400.0 + h) - asym.phase(spec, 400.0 - h)) / (2 * h)
    assert fd == pytest.approx(asym.frame_at(spec, 400.0).db, rel=1e-7)


# -- expansion ---------------------------------------------------------------

@given(st.sampled_from(NAMES), st.floats(2.0, 5.0))
def test_terms_reassemble_exactly(name, log10_rho):
    e = asym.expansion_g(P(name), 10.0 ** log10_rho)
    acc = 0.0
    for key in asym.expansion.TERM_ORDER:
        acc += e.terms[key]
    assert acc == e.g_of_u


def test_expansion_tracks_exact_f1_solution():
    spec = P("f1", {"B": 2.0})
    errs = [abs(spec.g(math.sqrt(rho)) - asym.expansion_g(spec, rho).g_of_u)
            for rho in (1e3, 1e4, 1e5)]
    assert errs[1] <= 0.05
    assert errs[0] > errs[1] > errs[2]


def test_f2_expansion_has_no_log_q_term():
    # the difference is log H(g^{-1}(rho)), with H - 1 = O(log rho / rho)
    spec = P("f2")
    diffs = []
    for rho in (1e3, 1e4, 1e5, 1e6):
        e = asym.expansion_g(spec, rho)
        y1 = asym.invert_g(spec, rho)
        jet = nonlin.taylor_jet(spec, y1)
        base = rho - 2 * math.log(rho) + math.log(jet.v / jet.d1) + math.log(4.0)
        diffs.append(abs(e.g_of_u - base))
        assert diffs[-1] <= 2.0 * math.log(rho) / rho
    assert diffs == sorted(diffs, reverse=True)


def test_expansion_alt_terms():
    e = asym.expansion_g(P("f2"), 500.0, q=1.0)
    assert e.alt_terms["log(4/q)"] + e.alt_terms["log(qH)"] == pytest.approx(e.terms["log 4H"], rel=1e-14)


def test_expansion_eps_range():
    with pytest.raises(ValueError):
        asym.expansion_g(P("f2"), 500.0, eps=0.7)


def test_tilde_u_close_to_exact_f1():
    spec = P("f1", {"B": 2.0})
    r = 1e-40
    assert asym.tilde_u(spec, r) == pytest.approx(math.sqrt(-2 * math.log(r)), rel=1e-2)


def test_tilde_u_rate_pow_sum():
    spec = P("pow_sum", {"p": 3.0, "r": 1.0})
    q = 1.5
    for rho in (100.0, 400.0, 2000.0):
        y1 = asym.invert_g(spec, rho)
        jet = nonlin.taylor_jet(spec, y1)
        target = rho - 2 * math.log(rho) + math.log(jet.v / jet.d1) + math.log(4.0) - math.log(q)
        assert abs(spec.g(asym.tilde_u_rho(spec, rho)) - target) * math.sqrt(rho) <= 10.0


def test_dump_csv_header_and_rows():
    text = asym.dump_csv(P("f2"), [100.0, 200.0])
    lines = text.strip().split("\n")
    assert lines[0] == "rho,y1,y2,dy2,G,a,b,expansion_g"
    assert len(lines) == 3
    assert float(lines[1].split(",")[0]) == 100.0
