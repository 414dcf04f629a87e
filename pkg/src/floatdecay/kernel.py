"""Radiation impulse-response kernel ``F`` from its Laplace transform.

The transform is ``f(s) = i R H0(isR/v0) / (2 v0 H1(isR/v0)) + R/(2 v0)``.
With ``tau = R/v0`` it rescales as ``f(s) = tau f0(tau s)`` and
``F(t) = F0(t / tau)``, so one dimensionless table ``F0`` serves every
geometry.  Tables default to ``R = v0 = 1``, i.e. ``F0`` units.

Two independent representations are provided:

* :func:`invert_bromwich` -- the Bromwich line ``Re s = c`` with the
  ``1/(4s)`` behaviour subtracted, summed with the trapezoid rule.  The
  trapezoid sum over a uniform frequency grid is exactly a periodic
  summation in time, so it is evaluated for all times at once with an FFT
  and the (known) periodic images of the subtracted constant are removed.
* :func:`branchcut_kernel` -- the contour folded onto ``Re s = -eps`` plus
  the jump across the negative real axis, valid for large times.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .special_functions import hankel_ratio

logger = logging.getLogger(__name__)

LAMBDA = 0.25
TAIL_AGREEMENT = 0.02
TAIL_CAP = 100.0
BRANCHCUT_EPS = 0.1
BRANCHCUT_T_MIN = 10.0


class KernelConvergenceError(RuntimeError):
    """The truncated Bromwich integrand is not below the requested tolerance."""


@dataclass(frozen=True)
class KernelParams:
    """Geometry and quadrature settings for the kernel.

    ``c_bromwich``, ``omega_max`` and ``d_omega`` are in ``F0`` units.  The
    abscissa actually used is ``c_bromwich / t_max`` (``t_max`` being the
    last requested time in ``F0`` units) so that ``e^{c t}`` never amplifies
    quadrature error by more than ``e^{c_bromwich}``.
    """

    R: float = 1.0
    v0: float = 1.0
    c_bromwich: float = 1.0
    omega_max: float = 4000.0
    d_omega: float | None = None
    tol: float = 1e-4

    def __post_init__(self):
        for name in ("R", "v0", "c_bromwich", "omega_max", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.d_omega is not None and not self.d_omega > 0:
            raise ValueError("d_omega must be positive")

    @property
    def tau(self) -> float:
        """Time unit ``R / v0`` of the dimensionless kernel."""
        return self.R / self.v0


@dataclass(frozen=True)
class KernelTable:
    """Uniform samples ``values[k] = F(k * dt)`` with a ``tail_coeff / t**2`` tail.

    Times are in the units of the parameters that built the table (``F0``
    units when ``R = v0 = 1``).  Instances are immutable and can be shared
    between concurrent simulations.
    """

    dt: float
    values: np.ndarray
    t_tail: float
    tail_coeff: float
    l1_norm: float

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.times, self.values)

    def __call__(self, t):
        """Evaluate ``F`` at arbitrary ``t >= 0``; tail law beyond ``t_tail``."""
        t = np.asarray(t, dtype=float)
        inside = t <= self.t_tail
        safe = np.where(inside, t, self.t_tail)
        return np.where(inside, self._spline(safe), self.tail_coeff / np.maximum(t, self.t_tail) ** 2)

    def tail_mask(self) -> np.ndarray:
        return self.times > self.t_tail

    def integral(self) -> float:
        """Signed integral of ``F`` over ``[0, inf)`` (trapezoid plus tail)."""
        n = int(round(self.t_tail / self.dt))
        return float(integrate.trapezoid(self.values[: n + 1], dx=self.dt)) + self.tail_coeff / self.t_tail

    def rescaled(self, R: float, v0: float) -> "KernelTable":
        """Physical table ``F(t) = F0(v0 t / R)`` from an ``F0`` table."""
        tau = R / v0
        return KernelTable(
            dt=self.dt * tau,
            values=np.array(self.values),
            t_tail=self.t_tail * tau,
            tail_coeff=self.tail_coeff * tau * tau,
            l1_norm=self.l1_norm * tau,
        )


def f0_of_s(s):
    """Dimensionless transform ``f0(s) = i H0(is) / (2 H1(is)) + 1/2``."""
    return 0.5j * hankel_ratio(s) + 0.5


def f_of_s(s, params: KernelParams):
    """Laplace transform of the kernel for geometry ``(R, v0)``."""
    tau = params.tau
    return tau * f0_of_s(np.asarray(s, dtype=complex) * tau)


def _check_grid(t_grid: np.ndarray) -> float:
    if t_grid.ndim != 1 or len(t_grid) < 2:
        raise ValueError("t_grid must be a 1-D array with at least two times")
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    dt = t_grid[1] - t_grid[0]
    if not dt > 0 or not np.allclose(np.diff(t_grid), dt, rtol=1e-9, atol=0):
        raise ValueError("t_grid must be uniform and increasing")
    return float(dt)


def _bromwich_values(params: KernelParams, dt: float, n_out: int) -> np.ndarray:
    tau = params.tau
    t_max = dt * (n_out - 1)
    omega_max = params.omega_max / tau
    d_omega_target = params.d_omega if params.d_omega is not None else min(0.01, math.pi / (8.0 * t_max / tau))
    d_omega_target /= tau
    c = params.c_bromwich / t_max

    # fine time step h = dt/m so the FFT frequency span 2 pi / h covers omega_max
    m = max(1, math.ceil(omega_max * dt / (2.0 * math.pi)))
    h = dt / m
    n_fft = 1 << math.ceil(math.log2(2.0 * math.pi / (h * d_omega_target)))
    n_fft = max(n_fft, m * (n_out - 1) + 1)
    d_omega = 2.0 * math.pi / (n_fft * h)
    period = n_fft * h

    omega = d_omega * np.arange(n_fft)
    s = c + 1j * omega
    g = f_of_s(s, params) - LAMBDA / s
    envelope = abs(g[-1]) * omega[-1] / math.pi * math.exp(params.c_bromwich)
    if envelope > params.tol:
        raise KernelConvergenceError(
            f"truncated integrand bound {envelope:.3e} exceeds tol {params.tol:.3e}; raise omega_max"
        )
    logger.debug("Bromwich: c=%.4g n_fft=%d d_omega=%.4g tail bound=%.2e", c, n_fft, d_omega, envelope)

    g[0] *= 0.5
    sums = np.fft.ifft(g)[: m * (n_out - 1) + 1 : m] * n_fft
    t = dt * np.arange(n_out)
    # periodic images of (F - lambda) beyond the first period contribute
    # -lambda * sum_k e^{-c k T}; F itself is negligible there
    images = LAMBDA * math.exp(-c * period) / (1.0 - math.exp(-c * period))
    return np.exp(c * t) * (d_omega / math.pi) * sums.real + LAMBDA + images


def _find_t_tail(times: np.ndarray, values: np.ndarray, tail_coeff: float, cap: float) -> float:
    """Latest tabulated time (at most ``cap``) where table and tail law agree."""
    usable = np.nonzero(times <= cap)[0]
    for k in usable[::-1]:
        if k == 0:
            break
        if abs(values[k] * times[k] ** 2 / tail_coeff - 1.0) <= TAIL_AGREEMENT:
            return float(times[k])
    logger.warning("tail law never agrees with the table within %.0f%%; using the table end", 100 * TAIL_AGREEMENT)
    return float(times[usable[-1]])


def invert_bromwich(params: KernelParams, t_grid) -> KernelTable:
    """Tabulate ``F`` on a uniform grid starting at 0 by Bromwich inversion.

    Raises :class:`KernelConvergenceError` when the integrand left out
    beyond ``omega_max`` could exceed ``params.tol``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    dt = _check_grid(t_grid)
    values = _bromwich_values(params, dt, len(t_grid))
    tail_coeff = 0.5 * params.tau ** 2
    t_tail = _find_t_tail(t_grid, values, tail_coeff, TAIL_CAP * params.tau)
    table = KernelTable(dt=dt, values=values, t_tail=t_tail, tail_coeff=tail_coeff, l1_norm=0.0)
    return KernelTable(dt=dt, values=values, t_tail=t_tail, tail_coeff=tail_coeff,
                       l1_norm=kernel_l1_norm(table))


def kernel_l1_norm(table: KernelTable, t_tail: float | None = None) -> float:
    """``||F||_1``: trapezoid of ``|F|`` up to ``t_tail`` plus the analytic tail."""
    t_tail = table.t_tail if t_tail is None else t_tail
    n = int(round(t_tail / table.dt))
    if n >= len(table.values):
        raise ValueError("t_tail lies beyond the tabulated range")
    head = float(integrate.trapezoid(np.abs(table.values[: n + 1]), dx=table.dt))
    return head + table.tail_coeff / (n * table.dt)


@lru_cache(maxsize=8)
def default_table(t_max: float = 200.0, dt: float = 0.025, c_bromwich: float = 1.0) -> KernelTable:
    """Cached ``F0`` table used by the simulators."""
    n = int(round(t_max / dt))
    return invert_bromwich(KernelParams(c_bromwich=c_bromwich), dt * np.arange(n + 1))


# --------------------------------------------------------------------------
# Branch-cut representation
# --------------------------------------------------------------------------

def cut_jump(x):
    """``lim f0(x - i0) - f0(x + i0)`` across the cut, for ``x < 0``.

    Evaluated from the two side-tagged limits of the continued Hankel ratio.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x >= 0):
        raise ValueError("the cut lies on the negative real axis")
    below = np.empty(x.shape, dtype=complex)
    below.real, below.imag = x, -0.0
    above = np.empty(x.shape, dtype=complex)
    above.real, above.imag = x, 0.0
    jump = 0.5j * (np.asarray(hankel_ratio(below)) - np.asarray(hankel_ratio(above)))
    return complex(jump) if jump.ndim == 0 else jump


def _g0_shifted(y: float, eps: float) -> complex:
    s = complex(-eps, y)
    return complex(f0_of_s(s)) - 0.25 / s


def branchcut_kernel(t: float, eps: float = BRANCHCUT_EPS, t_min: float = BRANCHCUT_T_MIN) -> float:
    """``F0(t)`` from the contour folded around the negative real axis.

    ``F0(t) = e^{-eps t}/pi * Re int_0^inf g0(-eps + iy) e^{iyt} dy
             + 1/(2 pi i) int_{-eps}^0 jump(x) e^{xt} dx``

    where ``g0 = f0 - 1/(4s)`` (the ``1/(4s)`` part integrates to zero on
    the shifted line).  Intended for large ``t``; a warning is issued below
    ``t_min`` where the oscillatory quadrature becomes less reliable.
    """
    if t < t_min:
        warnings.warn(f"branch-cut representation used at t={t} < t_min={t_min}", stacklevel=2)
    opts = dict(limlst=200, limit=200)
    re_part, _ = integrate.quad(lambda y: _g0_shifted(y, eps).real, 0.0, np.inf, weight="cos", wvar=t, **opts)
    im_part, _ = integrate.quad(lambda y: _g0_shifted(y, eps).imag, 0.0, np.inf, weight="sin", wvar=t, **opts)
    line = math.exp(-eps * t) / math.pi * (re_part - im_part)

    cut, _ = integrate.quad(lambda x: (cut_jump(x) / (2j * math.pi)).real * math.exp(x * t), -eps, 0.0,
                            limit=200, epsabs=1e-14, epsrel=1e-10)
    return line + cut
