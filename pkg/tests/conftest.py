import functools

import numpy as np
import pytest

from floatdecay import exterior_field, kernel, solid_motion

FIG4 = solid_motion.PhysicalParams(rho=1000.0, rho_m=500.0, h0=15.0, R=10.0, H=10.0, g=9.81)


@functools.lru_cache(maxsize=None)
def convolution_run(delta0, mode="nonlinear", tol=1e-8, **kwargs):
    return solid_motion.simulate(FIG4, delta0, 40.0, tol, mode, **kwargs)


@functools.lru_cache(maxsize=None)
def oracle_run(delta0, dr=0.25, exterior_head=True):
    return exterior_field.cosimulate(FIG4, delta0, 40.0, dr=dr, exterior_head=exterior_head)


@pytest.fixture(scope="session")
def fig4():
    return FIG4


@pytest.fixture(scope="session")
def f0_table():
    return kernel.default_table()


@pytest.fixture(scope="session")
def uniform_times():
    return np.linspace(0.0, 40.0, 4001)
