import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from floatdecay.kernel import (
    LAMBDA,
    KernelConvergenceError,
    KernelParams,
    KernelTable,
    branchcut_kernel,
    cut_jump,
    default_table,
    f0_of_s,
    f_of_s,
    invert_bromwich,
    kernel_l1_norm,
)
from floatdecay.special_functions import hankel


def f0_reference(s):
    """``f0 = (1 - K0(s)/K1(s)) / 2`` from a reference library."""
    return 0.5 * (1.0 - special.kve(0, s) / special.kve(1, s))


@pytest.mark.parametrize("s", [0.01, 0.3 + 2j, 5 - 1j, 40 + 300j, 1e3])
def test_f0_matches_modified_bessel_form(s):
    assert abs(f0_of_s(s) - f0_reference(s)) <= 1e-10 * abs(f0_reference(s))


def test_f_large_s_behaviour():
    params = KernelParams(R=10.0, v0=12.0)
    for s in (1e3, 1e4, 2e3 + 5e3j):
        assert f_of_s(s, params) * 4 * s == pytest.approx(1.0, abs=5e-3)


def test_f_small_s_limit():
    params = KernelParams(R=10.0, v0=12.0)
    for s, tol in ((1e-3, 0.02), (1e-6, 1e-4)):
        assert f_of_s(s, params).real == pytest.approx(params.R / (2 * params.v0), rel=tol)


def test_f_on_imaginary_axis_is_square_integrable():
    omega = np.linspace(1e-3, 2000.0, 200001)
    vals = np.abs(f0_of_s(1j * omega)) ** 2
    assert np.all(np.isfinite(vals))
    head = integrate.trapezoid(vals, omega)
    tail = 1.0 / (16 * omega[-1])  # |f0|^2 ~ 1/(16 w^2)
    assert head + tail < 1.0
    assert vals[-1] * omega[-1] ** 2 == pytest.approx(1 / 16, rel=1e-2)


def test_params_validation():
    with pytest.raises(ValueError):
        KernelParams(R=0.0)
    with pytest.raises(ValueError):
        KernelParams(d_omega=-1.0)


def test_grid_validation():
    params = KernelParams()
    with pytest.raises(ValueError):
        invert_bromwich(params, np.array([0.1, 0.2, 0.3]))
    with pytest.raises(ValueError):
        invert_bromwich(params, np.array([0.0, 0.1, 0.3]))


def test_convergence_error_reports_bound():
    with pytest.raises(KernelConvergenceError, match="exceeds tol"):
        invert_bromwich(KernelParams(omega_max=50.0, tol=1e-6), 0.05 * np.arange(201))


def test_initial_value(f0_table):
    assert f0_table.values[0] == pytest.approx(LAMBDA, abs=1e-3)


def test_integral_identity(f0_table):
    assert abs(f0_table.integral() - 0.5) <= 0.005


def test_l1_norm(f0_table):
    assert f0_table.l1_norm >= 0.5
    assert kernel_l1_norm(f0_table) == f0_table.l1_norm
    shorter = kernel_l1_norm(f0_table, t_tail=50.0)
    assert abs(shorter - f0_table.l1_norm) < f0_table.tail_coeff / 50.0


def test_decay_envelope(f0_table):
    # frozen regression value 0.7375 from the first build
    envelope = np.max(np.abs(f0_table.values) * (1 + f0_table.times) ** 2)
    assert envelope <= 2.0
    assert envelope == pytest.approx(0.7375, abs=2e-3)


def test_table_tail_metadata(f0_table):
    assert f0_table.tail_coeff == 0.5
    assert 20.0 <= f0_table.t_tail <= 100.0
    t = f0_table.t_tail
    assert abs(f0_table(t) * t * t / f0_table.tail_coeff - 1) <= 0.02
    assert f0_table(2 * t) == pytest.approx(f0_table.tail_coeff / (2 * t) ** 2)
    assert f0_table.tail_mask().sum() == np.count_nonzero(f0_table.times > t)


def test_table_is_immutable(f0_table):
    with pytest.raises(ValueError):
        f0_table.values[0] = 1.0


def test_decay_bracket(f0_table):
    t = f0_table.times
    sel = (t >= 50) & (t <= 200)
    scaled = 2 * t[sel] ** 2 * f0_table.values[sel]
    assert scaled.min() >= 0.9 and scaled.max() <= 1.1


def test_c_independence():
    grid = 0.025 * np.arange(8001)
    tol = 1e-4
    a = invert_bromwich(KernelParams(c_bromwich=0.5, tol=tol), grid)
    # the larger abscissa amplifies the truncation bound by e^{c}; widen the band to keep it below tol
    b = invert_bromwich(KernelParams(c_bromwich=2.0, omega_max=8000.0, tol=tol), grid)
    assert np.max(np.abs(a.values - b.values)) <= 10 * tol


def test_rescaling_matches_direct_tabulation(f0_table):
    R, v0 = 10.0, math.sqrt(9.81 * 15.0)
    tau = R / v0
    direct = invert_bromwich(KernelParams(R=R, v0=v0), tau * f0_table.times)
    scaled = f0_table.rescaled(R, v0)
    assert scaled.dt == pytest.approx(direct.dt, rel=1e-12)
    assert np.max(np.abs(direct.values - scaled.values)) <= 1e-4
    assert scaled.l1_norm == pytest.approx(direct.l1_norm, rel=1e-6)
    assert scaled.tail_coeff == pytest.approx(0.5 * tau ** 2)


def test_physical_integral_is_R_over_2v0(f0_table):
    R, v0 = 10.0, math.sqrt(9.81 * 15.0)
    assert f0_table.rescaled(R, v0).integral() == pytest.approx(R / (2 * v0), rel=0.01)


@pytest.mark.parametrize("t", [20.0, 35.0, 50.0, 80.0])
def test_branchcut_agrees_with_bromwich(f0_table, t):
    assert branchcut_kernel(t) == pytest.approx(float(f0_table(t)), rel=0.02)


@pytest.mark.parametrize("t", [50.0, 100.0, 200.0, 400.0])
def test_branchcut_decay_bracket(t):
    assert 0.9 <= 2 * t * t * branchcut_kernel(t) <= 1.1


def test_branchcut_warns_below_t_min():
    with pytest.warns(UserWarning, match="t_min"):
        branchcut_kernel(5.0)


def test_branchcut_no_warning_above_t_min():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        branchcut_kernel(20.0)


def test_cut_jump_small_x():
    for x in (-1e-2, -1e-3, -1e-4):
        ratio = cut_jump(x) / (-math.pi * 1j * x)
        assert abs(ratio - 1) <= 10 * abs(x)


def test_cut_jump_is_imaginary():
    x = -np.logspace(-4, -0.5, 30)
    j = cut_jump(x)
    assert np.max(np.abs(j.real)) <= 1e-12 * np.max(np.abs(j))


def test_cut_jump_rejects_non_negative():
    with pytest.raises(ValueError):
        cut_jump(0.1)


def textbook_jump(x):
    """Jump from the closed-form combination of principal-branch Hankel functions."""
    z = 1j * x
    h10, h11 = hankel(1, 0, z), hankel(1, 1, z)
    h20, h21 = hankel(2, 0, z), hankel(2, 1, z)
    return 0.5j * ((3 * h10 + 2 * h20) / (3 * h11 + 2 * h21) - h10 / h11)


def test_textbook_jump_agrees_to_leading_order():
    for x in (-1e-3, -1e-4, -1e-5):
        assert abs(textbook_jump(x) / cut_jump(x) - 1) <= 50 * abs(x)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0.0, 150.0))
def test_table_call_is_continuous_and_positive(t):
    table = default_table()
    assert table(t) > 0
    assert table(t) == pytest.approx(float(table(t + 1e-9)), rel=1e-6)


def test_rescaled_table_round_trip(f0_table):
    back = f0_table.rescaled(2.0, 3.0).rescaled(3.0, 2.0)
    assert isinstance(back, KernelTable)
    assert back.dt == pytest.approx(f0_table.dt)
    assert back.tail_coeff == pytest.approx(f0_table.tail_coeff)
