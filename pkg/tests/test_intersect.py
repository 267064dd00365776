import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from singular2d import intersect, nonlin, ode
from singular2d.errors import ConfigError, DomainError

P = nonlin.parse_nonlinearity


# -- Hardy quotients ----------------------------------------------------------

def test_zero_function():
    phi = intersect.AnnulusTestFunction(np.linspace(1.0, 2.0, 10), np.zeros(10))
    assert intersect.hardy_ratio(phi) == (0.0, 0.0)


@given(st.floats(0.05, 50.0), st.floats(1.05, 1e3),
       st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=30))
def test_hardy_inequality_random_piecewise_linear(x0, ratio, inner):
    x = np.geomspace(x0, x0 * ratio, len(inner) + 2)
    phi = np.concatenate(([0.0], inner, [0.0]))
    lhs, rhs = intersect.hardy_ratio(intersect.AnnulusTestFunction(x, phi))
    assert lhs <= rhs * (1 + 1e-12)


@given(st.integers(0, 2**32 - 1))
def test_hardy_inequality_random_bumps(seed):
    from singular2d.acceptance import random_bump
    rng = np.random.default_rng(seed)
    lhs, rhs = intersect.hardy_ratio(random_bump(rng))
    assert lhs <= rhs


def test_constructed_annuli_nearly_optimal():
    for i in range(6):
        lhs, rhs = intersect.hardy_ratio(intersect.hardy_annulus(i))
        assert rhs < 1.5 * lhs


def test_optimal_quotient_value():
    # 1 + 4 (pi / width)^2 with width = 16 log 2 in log X
    lhs, rhs = intersect.hardy_ratio(intersect.hardy_annulus(2, n=400))
    assert rhs / lhs == pytest.approx(1 + 4 * (math.pi / (16 * math.log(2))) ** 2, rel=1e-4)


def test_support_touching_origin():
    with pytest.raises(DomainError):
        intersect.AnnulusTestFunction.from_radii(np.array([0.0, 0.5, 0.9]), np.array([0.0, 1.0, 0.0]))


def test_endpoints_must_vanish():
    with pytest.raises(ConfigError):
        intersect.AnnulusTestFunction(np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, 0.5]))


def test_from_radii_round_trip():
    r = np.geomspace(1e-3, 0.5, 20)
    phi = np.sin(np.linspace(0, math.pi, 20))
    phi[0] = phi[-1] = 0.0
    f = intersect.AnnulusTestFunction.from_radii(r, phi)
    assert np.allclose(np.sort(f.r_grid), r, rtol=1e-14)


# -- stability test -----------------------------------------------------------

@pytest.fixture(scope="module")
def f2_far(f2):
    return ode.to_radial(ode.integrate_singular(f2, (2.0 ** 34, 0.0), eta_stride=20))


@pytest.mark.parametrize("i", [0, 1])
def test_singular_solution_unstable_on_annuli(f2, f2_far, i):
    assert intersect.instability_test(f2, f2_far, intersect.annulus_bounds(i), in_log=True)


def test_bounded_potential_stable():
    # first Dirichlet eigenvalue of a thin annulus in X dwarfs a bounded weight
    x = np.linspace(1.0, 1.1, 100)
    mu, _ = intersect.min_rayleigh(x, lambda X: 5.0 + 0.0 * X)
    assert mu == pytest.approx((math.pi / 0.1) ** 2 / 5.0, rel=1e-3)
    assert mu > 1.0


@pytest.mark.parametrize("i", [0, 1, 3])
def test_hardy_weight_is_sharp(i):
    lo, hi = intersect.annulus_bounds(i)
    mu, _ = intersect.min_rayleigh(np.geomspace(lo, hi, 300), lambda X: 0.25 / X ** 2)
    assert mu > 1.0


def test_potential_outside_range(f2, f2_singular):
    with pytest.raises(ConfigError):
        intersect.potential_density(f2, ode.to_radial(f2_singular), np.array([1e6]))


# -- intersection counts ------------------------------------------------------

def _profile(lr, u, du_dlogr):
    r = np.exp(lr)
    return ode.RadialSolution(r, u, du_dlogr / r, 1.0)


@given(st.integers(1, 12))
def test_count_synthetic_crossings(k):
    lr = np.linspace(-3.0, -0.1, 800)
    base = 1.0 - 0.2 * lr
    # k zeros of sin(k pi t) strictly inside t in (0, 1): t = j / k, j = 1..k-1, plus shift
    t = (lr - lr[0]) / (lr[-1] - lr[0])
    wave = 0.05 * np.sin(k * math.pi * t + 0.5)
    U = _profile(lr, base, -0.2 + 0 * lr)
    v = _profile(lr, base + wave, -0.2 + 0.05 * k * math.pi * np.cos(k * math.pi * t + 0.5) / (lr[-1] - lr[0]))
    expected = int(np.sum(np.diff(np.sign(wave)) != 0))
    assert intersect.count_intersections(U, v) == expected


def test_disjoint_ranges_warn():
    a = _profile(np.linspace(-5, -3, 50), np.ones(50), np.zeros(50))
    b = _profile(np.linspace(-2, -1, 50), np.ones(50), np.zeros(50))
    with pytest.warns(RuntimeWarning):
        assert intersect.count_intersections(a, b) == 0


def test_degenerate_comparison():
    a = _profile(np.linspace(-5, -1, 50), np.ones(50), np.zeros(50))
    with pytest.raises(ConfigError):
        intersect.count_intersections(a, a)


def test_z_grows_along_double_exponential_shots():
    rows = intersect.z_table(P("exp_pow"), [5.0, 10.0, 15.0])
    Z = [r["Z"] for r in rows]
    assert Z == sorted(Z) and Z[-1] >= 3
    assert [r["alpha"] for r in rows] == [5.0, 10.0, 15.0]
