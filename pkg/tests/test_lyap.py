import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from singular2d import lyap, nonlin, ode
from singular2d.errors import ConfigError

P = nonlin.parse_nonlinearity


@pytest.fixture(scope="module")
def calibrated(f2, f2_singular):
    return lyap.calibrate_C(f2, f2_singular.restrict(100.0, 800.0))["C"]


@pytest.fixture(scope="module")
def f2_long(f2):
    return ode.integrate_singular(f2, (1e5, 0.0), tol=1e-11)


# -- calF and L ---------------------------------------------------------------

def test_calF_derivative_against_finite_difference(f2, calibrated):
    for s in lyap.working_grid(f2, 100.0, 800.0, with_q_grid=False)[::8]:
        s = float(s)
        h = 1e-6 * s
        fd = (lyap.calF(f2, s + h, calibrated) - lyap.calF(f2, s - h, calibrated)) / (2 * h)
        assert lyap.calF_derivatives(f2, s, calibrated)[0] == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("name", ["f1", "f2", "pow_sum", "double_exp"])
def test_calF_tracks_g_along_q_grid(name):
    spec = P(name)
    ss, _ = nonlin.q_grid(spec)
    r1, r2 = [], []
    for s in ss:
        F1, F2 = lyap.calF_derivatives(spec, float(s), 1.0)
        jet = nonlin.taylor_jet(spec, float(s))
        r1.append(abs(F1 / jet.d1 - 1.0))
        r2.append(abs(F2 / jet.d2 - 1.0))
    assert r1[-1] < 1e-3 and r2[-1] < 1e-3
    assert r1[-1] < r1[0] or r1[0] < 1e-12


@pytest.mark.parametrize("name, q", [("f1", 2.0), ("f2", 1.0), ("pow_sum", 1.5)])
def test_L_ratio_limit(name, q):
    spec = P(name)
    ss, _ = nonlin.q_grid(spec)
    dev = []
    for s in ss:
        L, _ = lyap.L_derivatives(spec, float(s), 1.0)
        F1, F2 = lyap.calF_derivatives(spec, float(s), 1.0)
        dev.append(abs(L * F2 / F1 ** 2 - 1.0 / q))
    assert dev[-1] < 1e-2
    assert dev[-1] < dev[0]


def test_L_positive_and_nondecreasing(f2, calibrated):
    for s in lyap.working_grid(f2, 100.0, 800.0):
        L, Lp = lyap.L_derivatives(f2, float(s), calibrated)
        assert L > 0.0
        assert Lp >= -1e-8


def test_calibration_keeps_w_nonpositive(f2, f2_singular, calibrated):
    sol = f2_singular.restrict(100.0, 800.0)
    w = np.array([lyap.w_of(f2, y, r, calibrated) for y, r in zip(sol.y, sol.rho_grid)])
    assert np.all(w <= 0.0)
    assert np.max(np.abs(w) * sol.rho_grid ** (1 - lyap.EPS)) <= 10.0


def test_w_window_and_decay(f2, f2_singular, calibrated):
    sol = f2_singular.restrict(200.0, 800.0)
    w = np.array([lyap.w_of(f2, y, r, calibrated) for y, r in zip(sol.y, sol.rho_grid)])
    assert np.all((w >= -1.0) & (w <= 0.0))
    assert np.max(np.abs(w) * np.sqrt(sol.rho_grid)) <= 2.0


# -- energy trace -------------------------------------------------------------

def test_trace_time_increases(f2, f2_singular, calibrated):
    tr = lyap.energy_trace(f2, f2_singular.restrict(100.0, 800.0), calibrated)
    assert np.all(np.diff(tr.t) > 0)
    assert tr.params == {"C": calibrated, "eps": lyap.EPS, "eps0": lyap.EPS0, "q": 1.0}


def test_Hcal_nondecreasing_on_rising_stretches(f2, f2_long):
    tr = lyap.energy_trace(f2, f2_long.restrict(1e3, 1e5), 1.0)
    runs = [(i, j) for i, j in tr.rising_stretches() if j > i]
    assert runs
    for i, j in runs:
        assert np.all(np.diff(tr.Hcal[i:j + 1]) >= 0.0)


def test_Hcal_margin_far_out(f2, f2_long):
    tr = lyap.energy_trace(f2, f2_long.restrict(5e3, 1e5), 1.0)
    q = tr.params["q"]
    for i, j in tr.rising_stretches():
        if j <= i:
            continue
        dH = np.diff(tr.Hcal[i:j + 1])
        dw = np.diff(tr.w[i:j + 1])
        assert np.all(dH >= tr.params["eps0"] / (2 * q) * dw - 1e-15)


def test_constant_w_gives_constant_Hcal(f2):
    C, c = 1.0, -0.5
    rho = np.linspace(200.0, 800.0, 121)
    z = np.array([brentq(lambda s: lyap.calF(f2, s, C) - (r + c), 2.0, 10.0, xtol=1e-15, rtol=1e-15)
                  for r in rho])
    dz = np.array([1.0 / lyap.calF_derivatives(f2, float(s), C)[0] for s in z])
    sol = ode.EmdenSolution(rho, z, dz, "singular")
    tr = lyap.energy_trace(f2, sol, C)
    assert np.allclose(tr.w, c, atol=1e-12)
    expected = (math.exp(c) - (1 - lyap.EPS0) * c) / tr.params["q"]
    assert np.allclose(tr.Hcal, expected, rtol=1e-12)


def test_trace_requires_singular_kind(f2, f2_singular):
    sol = ode.EmdenSolution(f2_singular.rho_grid, f2_singular.y, f2_singular.dy,
                            "transformed_regular")
    with pytest.raises(ConfigError):
        lyap.energy_trace(f2, sol.restrict(100.0, 800.0), 1.0)


# -- trichotomy ---------------------------------------------------------------

def test_identical_solutions_case_ii(f2, f2_singular, calibrated):
    res = lyap.classify_trichotomy(f2, f2_singular, f2_singular, calibrated)
    assert res.case == "ii"


def test_constant_offset_case_ii(f2, f2_singular):
    C = 1.0
    rho = np.linspace(100.0, 800.0, 200)
    z = np.array([brentq(lambda s: lyap.calF(f2, s, C) - (r - 10.0), 1.0, 10.0, xtol=1e-14)
                  for r in rho])
    dz = np.array([1.0 / lyap.calF_derivatives(f2, float(s), C)[0] for s in z])
    synthetic = ode.EmdenSolution(rho, z, dz, "singular")
    res = lyap.classify_trichotomy(f2, synthetic, f2_singular, C, C1=10.0)
    assert res.case == "ii"
    assert res.diagnostics["C1_empirical"] == pytest.approx(10.0, rel=1e-9)


def test_upward_perturbation_case_i_or_iii(f2, f2_singular, calibrated):
    top = f2_singular.rho_grid[-1]

    def rhs(rho, Y):
        return [Y[1], -0.25 * math.exp(f2.g(Y[0]) - rho)]

    y0 = [f2_singular.y[-1] + 1e-3, f2_singular.dy[-1]]
    out = solve_ivp(rhs, (top, 100.0), y0, method="DOP853", rtol=1e-11, atol=1e-13,
                    dense_output=True)
    rho = np.linspace(100.0, top, 600)
    Y = out.sol(rho)
    z = ode.EmdenSolution(rho, Y[0], Y[1], "singular")
    res = lyap.classify_trichotomy(f2, z, f2_singular, calibrated)
    assert res.case in ("i", "iii")
