import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from singular2d import asym, nonlin, ode
from singular2d.errors import DomainError, InadmissibleSpecError

P = nonlin.parse_nonlinearity


# -- regular solutions --------------------------------------------------------

def test_gelfand_fold_radius(gelfand):
    # closed form w = log(8 mu / (1 + mu r^2)^2), mu = e^alpha / 8: r0 = sqrt(2) at alpha = log 4
    v = ode.integrate_regular(gelfand, math.log(4.0), 1e-10)
    assert v.first_zero == pytest.approx(math.sqrt(2.0), rel=1e-9)
    assert v.lam == pytest.approx(2.0, rel=1e-9)


@given(st.sampled_from(["s", "f2", "exp_pow", "s^1.5", "double_exp"]), st.floats(0.2, 3.0))
def test_regular_solution_invariants(name, alpha):
    spec = P(name)
    v = ode.integrate_regular(spec, alpha, 1e-10)
    assert v.first_zero is not None and v.first_zero > 0
    assert v.u[-1] == pytest.approx(0.0, abs=1e-9)
    assert np.all(np.diff(v.u) < 0)
    E = v.energy(spec)
    assert np.max(np.diff(E)) <= 1e-12 * np.max(np.abs(E))


def test_regular_needs_finite_f(f1):
    with pytest.raises(DomainError):
        ode.integrate_regular(f1, 2.0, 1e-10)


def test_large_alpha_uses_compensated_arithmetic():
    v = ode.integrate_regular(P("double_exp"), 3.0, 1e-10)
    assert v.meta["arith"] == "dd"
    assert v.lam < 0.05


def test_twin_backends_agree_bitwise(restore_backend):
    spec = P("exp_pow")
    out = {}
    for name in ode.available_backends():
        ode.use_backend(name)
        out[name] = ode.integrate_regular(spec, 3.0, 1e-10)
    runs = list(out.values())
    for other in runs[1:]:
        assert np.array_equal(runs[0].u, other.u)
        assert runs[0].lam == other.lam


# -- singular solutions -------------------------------------------------------

def test_singular_f1_matches_exact(f1_singular):
    m = f1_singular.rho_grid >= 50.0
    exact = np.sqrt(f1_singular.rho_grid[m])
    assert np.max(np.abs(f1_singular.y[m] - exact) / exact) <= 1e-2


def test_singular_f1_first_zero(f1_singular):
    assert ode.to_radial(f1_singular).first_zero == pytest.approx(1.0, abs=1e-4)


def test_singular_bound_on_g(f2, f2_singular):
    sol = f2_singular
    m = sol.y > f2.s_floor
    assert np.all(ode.g_array(f2, sol.y[m]) <= sol.rho_grid[m] + math.log(4.0))


def test_singular_slope(f2_singular):
    assert np.all(f2_singular.dy >= 0.0)
    top = f2_singular.rho_grid >= 400.0
    assert np.all(np.diff(f2_singular.dy[top]) <= 0.0)
    assert f2_singular.dy[-1] == pytest.approx(1.0 / 800.0, rel=1e-5)


def test_remainder_weighted_bound_f2(f2, f2_singular):
    # g'(y1) rho^{1/2} |eta| <= 1e-2 and non-increasing on [100, rho_max]
    sol = f2_singular.restrict(100.0, 800.0)
    gp = np.array([asym.frame_at(f2, float(r)).gp for r in sol.rho_grid])
    val = gp * np.sqrt(sol.rho_grid) * np.abs(sol.eta)
    assert np.all(val <= 1e-2)
    assert np.all(np.diff(val) <= 0.0)


def test_remainder_matches_exact_solution(f2, f2_singular):
    # the f2 singular solution is y = log rho, so eta = log rho - y1 - y2;
    # started at rho = 800 the local start rule is off by O(eta / rho)
    sol = f2_singular.restrict(100.0, 800.0)
    exact = np.array([math.log(r) - asym.frame_at(f2, float(r)).y for r in sol.rho_grid])
    assert np.max(np.abs(sol.eta - exact)) <= 1e-6


def test_singular_compensated_agrees(f2):
    a = ode.integrate_singular(f2, (800.0, 0.0), tol=1e-11, arith="dd")
    b = ode.integrate_singular(f2, (800.0, 0.0), tol=1e-11, arith="f64")
    assert a.rho_zero == pytest.approx(b.rho_zero, abs=1e-7)
    assert a.rho_zero == pytest.approx(1.0, abs=1e-6)


def test_singular_remainder_form_far_out(f2):
    sol = ode.integrate_singular(f2, (1e6, 100.0), tol=1e-11, eta_stride=20)
    assert ("eta" in [form[0] for form in sol.meta["forms"]])
    y_exact = np.log(sol.rho_grid)
    assert np.max(np.abs(sol.y - y_exact)) <= 1e-7


def test_singular_rejects_critical_exponential(gelfand):
    with pytest.raises(InadmissibleSpecError):
        ode.integrate_singular(gelfand)


# -- transforms ---------------------------------------------------------------

def test_rho_zero_is_unit_radius():
    sol = ode.EmdenSolution(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.5, 0.8]),
                            np.array([0.6, 0.4, 0.2]), "singular")
    rad = ode.to_radial(sol)
    assert rad.r_grid[-1] == 1.0
    assert rad.r_grid[0] == pytest.approx(math.exp(-1.0), rel=1e-15)


def test_round_trip(f2_singular):
    back = ode.to_emden(ode.to_radial(f2_singular))
    assert np.max(np.abs(back.y - f2_singular.y)) <= 1e-12
    assert np.allclose(back.rho_grid, f2_singular.rho_grid, rtol=1e-12, atol=1e-12)


def test_restrict_keeps_range(f2_singular):
    sub = f2_singular.restrict(100.0, 200.0)
    assert sub.rho_grid[0] >= 100.0 and sub.rho_grid[-1] <= 200.0
    assert sub.kind == "singular"
