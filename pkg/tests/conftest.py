import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from singular2d import nonlin, ode

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def f1():
    return nonlin.parse_nonlinearity("f1", {"B": 2.0})


@pytest.fixture(scope="session")
def f2():
    return nonlin.parse_nonlinearity("f2")


@pytest.fixture(scope="session")
def gelfand():
    return nonlin.parse_nonlinearity("s")


@pytest.fixture(scope="session")
def f2_singular(f2):
    """Singular solution of f2 from rho = 800 down to its zero."""
    return ode.integrate_singular(f2, (800.0, 0.0), tol=1e-11)


@pytest.fixture(scope="session")
def f1_singular(f1):
    return ode.integrate_singular(f1, (800.0, 0.0), tol=1e-11)


@pytest.fixture
def restore_backend():
    name = ode.backend_name()
    yield
    ode.use_backend(name)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)

