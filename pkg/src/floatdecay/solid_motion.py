"""Heave motion of a floating vertical-walled cylinder.

The displacement ``delta`` of the centre of mass from equilibrium obeys

    (m + m_a(delta)) delta'' = -c delta + c zeta_e(t, R)
                               + (b / h_e(t, R)**2 + beta(delta)) delta'**2

with the exterior surface elevation at the wall given by the convolution
trace ``zeta_e(t, R) = int_0^t F(s) delta'(t - s) ds - (R / 2 v0) delta'(t)``
and ``h_e = h0 + zeta_e``.  Linearising about equilibrium gives the Cummins
equation ``(m + m_a(0)) delta'' = -c delta + c zeta_e``.

Time integration uses the Bogacki-Shampine (2,3) pair with cubic Hermite
dense output; the convolution is a trapezoid sum on a fixed lag grid.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .kernel import KernelTable, default_table

logger = logging.getLogger(__name__)

BOUND_SLACK = 1e-9
DT_CONV = 0.1
CONV_WINDOW = 100

TRACE_COLUMNS = ("t", "delta", "delta_dot", "delta_ddot", "zeta_e_R", "h_w", "E_sol", "E_int", "E_ext", "E_tot")


class ConfigurationError(ValueError):
    """Physical parameters violate a structural invariant."""


class PositivityError(ArithmeticError):
    """A fluid height under or next to the solid became non-positive."""


class BoundViolationError(RuntimeError):
    """An a-priori bound on the displacement or velocity was exceeded."""


class StepSizeError(RuntimeError):
    """The adaptive step size underflowed."""


class Mode(str, Enum):
    NONLINEAR = "nonlinear"
    LINEAR = "linear"


# --------------------------------------------------------------------------
# Parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PhysicalParams:
    """Fluid and solid properties in SI units (defaults: 10 m cylinder in 15 m of water)."""

    rho: float = 1000.0
    rho_m: float = 500.0
    h0: float = 15.0
    R: float = 10.0
    H: float = 10.0
    g: float = 9.81

    def __post_init__(self):
        for name in ("rho", "rho_m", "h0", "R", "H", "g"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be a positive finite number, got {value!r}")
        if not self.rho_m < self.rho:
            raise ConfigurationError(f"rho_m={self.rho_m} must be below rho={self.rho} for the body to float")
        if not self.h0 - self.rho_m * self.H / self.rho > 0:
            raise ConfigurationError("fluid height under the solid at equilibrium, h0 - rho_m*H/rho, must be positive")


@dataclass(frozen=True)
class DerivedConstants:
    """Coefficients of the equation of motion."""

    m: float
    c_hydro: float
    v0: float
    nu: float
    b: float
    h_w_eq: float
    z_G_eq: float
    R: float
    h0: float
    g: float

    @property
    def tau(self) -> float:
        return self.R / self.v0

    def h_w(self, delta):
        return self.h_w_eq + delta

    def added_mass(self, delta):
        return self.b / self.h_w(delta)

    def beta(self, delta):
        return self.b / (2.0 * self.h_w(delta) ** 2)


def derived_constants(p: PhysicalParams) -> DerivedConstants:
    """Mass, hydrostatic stiffness and the other coefficients for ``p``."""
    h_w_eq = p.h0 - p.rho_m * p.H / p.rho
    if not h_w_eq > 0:
        raise ConfigurationError(f"h_w_eq = {h_w_eq} must be positive")
    c_hydro = p.rho * p.g * math.pi * p.R ** 2
    v0 = math.sqrt(p.g * p.h0)
    return DerivedConstants(
        m=p.rho_m * math.pi * p.R ** 2 * p.H,
        c_hydro=c_hydro,
        v0=v0,
        nu=c_hydro * p.R / (2.0 * v0),
        b=math.pi * p.rho * p.R ** 4 / 8.0,
        h_w_eq=h_w_eq,
        z_G_eq=(0.5 - p.rho_m / p.rho) * p.H,
        R=p.R,
        h0=p.h0,
        g=p.g,
    )


def velocity_bound_factor(p: PhysicalParams) -> float:
    """``sqrt(rho g / (rho_m H))``: velocity bound per metre of initial displacement."""
    return math.sqrt(p.rho * p.g / (p.rho_m * p.H))


@dataclass(frozen=True)
class SolidState:
    delta: float
    delta_dot: float


# --------------------------------------------------------------------------
# History and convolution
# --------------------------------------------------------------------------

class HistoryBuffer:
    """Accepted solution nodes with cubic Hermite interpolation between them.

    Before ``t = 0`` the body is held at rest: ``delta = delta0`` and
    ``delta_dot = 0``.
    """

    def __init__(self, delta0: float, capacity: int = 1024):
        self.delta0 = float(delta0)
        self._t = np.empty(capacity)
        self._d = np.empty(capacity)
        self._v = np.empty(capacity)
        self._a = np.empty(capacity)
        self._n = 0

    def __len__(self):
        return self._n

    @property
    def t_end(self) -> float:
        return float(self._t[self._n - 1])

    @property
    def last(self) -> tuple[float, float, float, float]:
        k = self._n - 1
        return float(self._t[k]), float(self._d[k]), float(self._v[k]), float(self._a[k])

    def append(self, t: float, delta: float, delta_dot: float, delta_ddot: float) -> None:
        if self._n and not t > self._t[self._n - 1]:
            raise ValueError("history nodes must be strictly increasing in time")
        if self._n == len(self._t):
            for name in ("_t", "_d", "_v", "_a"):
                old = getattr(self, name)
                new = np.empty(2 * len(old))
                new[: len(old)] = old
                setattr(self, name, new)
        k = self._n
        self._t[k], self._d[k], self._v[k], self._a[k] = t, delta, delta_dot, delta_ddot
        self._n += 1

    def segments(self):
        """Yield ``(t_start, t_end)`` of each interpolation segment."""
        for k in range(self._n - 1):
            yield float(self._t[k]), float(self._t[k + 1])

    def _hermite(self, times, y, dy, before):
        times = np.asarray(times, dtype=float)
        n = self._n
        if np.any(times > self._t[n - 1] * (1 + 1e-14) + 1e-300):
            raise ValueError("history queried beyond its last node")
        out = np.full(times.shape, before, dtype=float)
        inside = times >= 0.0
        if n == 1 or not np.any(inside):
            out[inside] = y[0]
            return out
        ti = times[inside]
        k = np.clip(np.searchsorted(self._t[:n], ti, side="right") - 1, 0, n - 2)
        t0, t1 = self._t[k], self._t[k + 1]
        h = t1 - t0
        x = (ti - t0) / h
        x2, x3 = x * x, x * x * x
        out[inside] = ((2 * x3 - 3 * x2 + 1) * y[k] + (x3 - 2 * x2 + x) * h * dy[k]
                       + (-2 * x3 + 3 * x2) * y[k + 1] + (x3 - x2) * h * dy[k + 1])
        return out

    def velocity(self, times):
        return self._hermite(times, self._v, self._a, 0.0)

    def position(self, times):
        return self._hermite(times, self._d, self._v, self.delta0)


class ConvolutionQuadrature:
    """Trapezoid rule for ``int_0^t F(s) v(t - s) ds`` on lags ``s_k = k * dt_conv``.

    ``table`` is the kernel in physical time.  Lags up to ``window * dt_conv``
    use the tabulated kernel; beyond that the ``tail_coeff / s**2`` law.  The
    integrand vanishes for ``s > t`` (body at rest before ``t = 0``), so only
    the ``s = 0`` node carries half weight.
    """

    def __init__(self, table: KernelTable, dt_conv: float = DT_CONV, window: int = CONV_WINDOW):
        if not dt_conv > 0 or window < 1:
            raise ValueError("dt_conv must be positive and window at least 1")
        if window * dt_conv > table.times[-1]:
            raise ValueError("convolution window exceeds the tabulated kernel range")
        self.table = table
        self.dt_conv = float(dt_conv)
        self.window = int(window)
        self._weights = np.empty(0)

    def weights(self, n: int) -> np.ndarray:
        """Weights ``w_k`` for ``k = 0..n-1``."""
        if n > len(self._weights):
            n_new = max(n, 2 * len(self._weights), self.window + 1)
            s = self.dt_conv * np.arange(n_new)
            F = np.empty(n_new)
            head = min(n_new, self.window + 1)
            F[:head] = self.table(s[:head])
            F[head:] = self.table.tail_coeff / s[head:] ** 2
            w = self.dt_conv * F
            w[0] *= 0.5
            self._weights = w
        return self._weights[:n]


def boundary_trace(hist: HistoryBuffer, quad: ConvolutionQuadrature, dc: DerivedConstants, t: float,
                   delta_dot: float | None = None, check: bool = True) -> tuple[float, float]:
    """Exterior elevation ``zeta_e(t, R)`` and depth ``h_e(t, R)`` at the wall.

    ``delta_dot`` is the velocity at ``t`` when ``t`` lies beyond the last
    history node (a Runge-Kutta stage); lags falling inside that gap use the
    quadratic through the last node's velocity and acceleration and the
    stage velocity.  ``check=False`` skips the ``h_e > 0`` test.
    """
    t_last, _, v_last, a_last = hist.last
    if delta_dot is None:
        if t > t_last:
            raise ValueError("stage velocity required beyond the history")
        delta_dot = float(hist.velocity(np.array([t]))[0])
    n = int(math.floor(t / quad.dt_conv * (1 + 1e-14))) + 1
    lags = quad.dt_conv * np.arange(n)
    u = t - lags
    v = np.empty(n)
    ahead = u > t_last
    if np.any(ahead):
        gap = t - t_last
        c2 = (delta_dot - v_last - a_last * gap) / gap ** 2
        x = u[ahead] - t_last
        v[ahead] = v_last + a_last * x + c2 * x * x
    v[~ahead] = hist.velocity(np.minimum(u[~ahead], t_last))
    v[0] = delta_dot
    conv = float(np.dot(quad.weights(n), v))
    zeta = conv - dc.tau / 2.0 * delta_dot
    h_e = zeta + dc.h0
    if check and not h_e > 0:
        raise PositivityError(f"exterior depth at the wall h_e={h_e:.6g} <= 0 at t={t:.6g}")
    return zeta, h_e


# --------------------------------------------------------------------------
# Equations of motion
# --------------------------------------------------------------------------

def acceleration(delta: float, delta_dot: float, zeta_e: float, dc: DerivedConstants,
                 mode: Mode | str = Mode.NONLINEAR, exterior_head: bool = True) -> float:
    """``delta''`` given the state and the exterior elevation at the wall.

    ``exterior_head=False`` drops the ``b / h_e**2`` part of the quadratic
    coefficient.  That closure (wall pressure correction from the interior
    velocity head only) is the one for which the coupled fluid-solid energy
    is exactly conserved; the term itself does work ``b delta'**3 / h_e**2``.
    """
    mode = Mode(mode)
    c = dc.c_hydro
    if mode is Mode.LINEAR:
        return (-c * delta + c * zeta_e) / (dc.m + dc.added_mass(0.0))
    h_w = dc.h_w(delta)
    if not h_w > 0:
        raise PositivityError(f"fluid height under the solid h_w={h_w:.6g} <= 0")
    h_e = zeta_e + dc.h0
    if not h_e > 0:
        raise PositivityError(f"exterior depth at the wall h_e={h_e:.6g} <= 0")
    quad_coeff = (dc.b / h_e ** 2 if exterior_head else 0.0) + dc.beta(delta)
    return (-c * delta + c * zeta_e + quad_coeff * delta_dot ** 2) / (dc.m + dc.b / h_w)


def rhs_nonlinear(t: float, state: SolidState, hist: HistoryBuffer, quad: ConvolutionQuadrature,
                  dc: DerivedConstants, exterior_head: bool = True) -> float:
    zeta, _ = boundary_trace(hist, quad, dc, t, state.delta_dot)
    return acceleration(state.delta, state.delta_dot, zeta, dc, Mode.NONLINEAR, exterior_head)


def rhs_linear(t: float, state: SolidState, hist: HistoryBuffer, quad: ConvolutionQuadrature,
               dc: DerivedConstants, exterior_head: bool = True) -> float:
    zeta, _ = boundary_trace(hist, quad, dc, t, state.delta_dot, check=False)
    return acceleration(state.delta, state.delta_dot, zeta, dc, Mode.LINEAR)


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    margin_hw: float
    margin_he: float


def admissibility(p: PhysicalParams, dc: DerivedConstants, table: KernelTable, delta0: float) -> Admissibility:
    """Check ``|delta0| < min(h_w_eq, sqrt(rho_m H/(rho g)) h0 / (||F||_1 + R/(2 v0)))``.

    ``table`` is the kernel in physical time (its ``l1_norm`` is used).
    """
    second = math.sqrt(p.rho_m * p.H / (p.rho * p.g)) * p.h0 / (table.l1_norm + dc.tau / 2.0)
    margin_hw = dc.h_w_eq - abs(delta0)
    margin_he = second - abs(delta0)
    return Admissibility(margin_hw > 0 and margin_he > 0, margin_hw, margin_he)


# --------------------------------------------------------------------------
# Energy
# --------------------------------------------------------------------------

def energy_breakdown(delta: float, delta_dot: float, p: PhysicalParams, dc: DerivedConstants,
                     E_ext: float | None = None) -> tuple[float, float, float, float]:
    """``(E_sol, E_int, E_ext, E_tot)``; the last two are NaN without ``E_ext``.

    ``E_int`` vanishes at equilibrium.  With these normalisations the total
    is ``m g z_G_eq + c delta0**2 / 2`` for a body released from rest.
    """
    if not dc.h_w(delta) > 0:
        raise PositivityError("energy undefined for h_w <= 0")
    E_sol = 0.5 * dc.m * delta_dot ** 2 + dc.m * p.g * (delta + dc.z_G_eq)
    s = p.rho_m * p.H / p.rho
    E_int = (0.5 * dc.c_hydro * (delta - s) ** 2 - 0.5 * dc.c_hydro * s ** 2
             + dc.b / (2.0 * dc.h_w(delta)) * delta_dot ** 2)
    if E_ext is None:
        return E_sol, E_int, math.nan, math.nan
    return E_sol, E_int, E_ext, E_sol + E_int + E_ext


def interior_discharge(r, delta_dot):
    """Radial discharge under the solid, ``q_i = -r delta_dot / 2``."""
    return -0.5 * np.multiply(r, delta_dot)


# --------------------------------------------------------------------------
# Compatibility conditions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExteriorData:
    """Exterior fields and radial derivatives at ``(t, r) = (0, R)``.

    ``dflux_dr`` is ``d/dr (q_e**2 / h_e)``.
    """

    zeta: float = 0.0
    dzeta_dr: float = 0.0
    q: float = 0.0
    dflux_dr: float = 0.0


def compatibility_check(p: PhysicalParams, dc: DerivedConstants, delta0: float, delta1: float,
                        data: ExteriorData = ExteriorData()) -> tuple[float, float]:
    """Signed residuals of the order-0 and order-1 compatibility conditions.

    Order 0: ``q_e(0, R) + (R/2) delta1``.  Order 1: the exterior momentum
    balance ``-d_r(q^2/h) - q^2/(R h) - g h d_r zeta`` minus
    ``-(R/2) delta''(0)`` from the equation of motion.
    """
    h_e = p.h0 + data.zeta
    order0 = data.q + 0.5 * p.R * delta1
    lhs = -data.dflux_dr - data.q ** 2 / (p.R * h_e) - p.g * h_e * data.dzeta_dr
    force = (-dc.c_hydro * delta0 + dc.c_hydro * data.zeta
             + (dc.b / h_e ** 2 + dc.beta(delta0)) * delta1 ** 2)
    rhs = -p.R / (2.0 * (dc.m + dc.added_mass(delta0))) * force
    return order0, lhs - rhs


# --------------------------------------------------------------------------
# Time integration
# --------------------------------------------------------------------------

@dataclass
class SimTrace:
    """Accepted-step trace; columns as in :data:`TRACE_COLUMNS`."""

    delta0: float
    mode: str
    t: np.ndarray
    delta: np.ndarray
    delta_dot: np.ndarray
    delta_ddot: np.ndarray
    zeta_e_R: np.ndarray
    h_w: np.ndarray
    E_sol: np.ndarray
    E_int: np.ndarray
    E_ext: np.ndarray
    E_tot: np.ndarray
    error_estimate: float = 0.0
    n_rejected: int = 0
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.t)

    def rows(self) -> np.ndarray:
        return np.column_stack([getattr(self, name) for name in TRACE_COLUMNS])

    def interpolate(self, times) -> np.ndarray:
        """Displacement at arbitrary times inside the trace (cubic Hermite)."""
        return CubicHermiteSpline(self.t, self.delta, self.delta_dot)(times)


def build_trace(delta0: float, mode: str, rows: list, p: PhysicalParams, dc: DerivedConstants,
                E_ext=None) -> SimTrace:
    """Assemble a :class:`SimTrace` from ``(t, delta, delta_dot, delta_ddot, zeta_e_R)`` rows."""
    arr = np.asarray(rows, dtype=float).reshape(-1, 5)
    t, d, v, a, z = arr.T
    ext = np.full(len(t), np.nan) if E_ext is None else np.asarray(E_ext, dtype=float)
    energies = np.array([energy_breakdown(di, vi, p, dc, None if np.isnan(ei) else ei)
                         for di, vi, ei in zip(d, v, ext)]).reshape(-1, 4)
    return SimTrace(delta0=delta0, mode=mode, t=t, delta=d, delta_dot=v, delta_ddot=a, zeta_e_R=z,
                    h_w=dc.h_w(d), E_sol=energies[:, 0], E_int=energies[:, 1], E_ext=energies[:, 2],
                    E_tot=energies[:, 3])


class BoundChecker:
    """A-priori bounds ``|delta| <= |delta0|``, ``|delta'| <= k |delta0|``, ``h_w >= h_w_eq - |delta0|``."""

    def __init__(self, p: PhysicalParams, dc: DerivedConstants, delta0: float, strict: bool = True):
        self.d_max = abs(delta0) + BOUND_SLACK
        self.v_max = velocity_bound_factor(p) * abs(delta0) + BOUND_SLACK
        self.hw_min = dc.h_w_eq - abs(delta0) - BOUND_SLACK
        self.dc = dc
        self.strict = strict
        self.messages: list[str] = []

    def __call__(self, t: float, delta: float, delta_dot: float) -> None:
        problems = []
        if abs(delta) > self.d_max:
            problems.append(f"|delta|={abs(delta):.12g} > {self.d_max:.12g}")
        if abs(delta_dot) > self.v_max:
            problems.append(f"|delta_dot|={abs(delta_dot):.12g} > {self.v_max:.12g}")
        if self.dc.h_w(delta) < self.hw_min:
            problems.append(f"h_w={self.dc.h_w(delta):.12g} < {self.hw_min:.12g}")
        if not problems:
            return
        message = f"t={t:.6g}: " + "; ".join(problems)
        if self.strict:
            raise BoundViolationError(message)
        if not self.messages:
            warnings.warn(f"a-priori bound exceeded ({message})", stacklevel=3)
        self.messages.append(message)


_BS_C = (0.0, 0.5, 0.75)
_BS_B = (2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0)
_BS_E = (-5.0 / 72.0, 1.0 / 12.0, 1.0 / 9.0, -1.0 / 8.0)


def physical_kernel(p: PhysicalParams, table: KernelTable | None = None) -> KernelTable:
    """Kernel table in seconds for the geometry of ``p``."""
    table = default_table() if table is None else table
    dc = derived_constants(p)
    return table.rescaled(dc.R, dc.v0)


def simulate(p: PhysicalParams, delta0: float, T: float, tol: float = 1e-8,
             mode: Mode | str = Mode.NONLINEAR, *, table: KernelTable | None = None,
             dt_conv: float = DT_CONV, window: int = CONV_WINDOW, override: bool = False,
             exterior_head: bool = True, h_init: float = 1e-3) -> SimTrace:
    """Integrate from rest at ``delta0`` over ``[0, T]``.

    ``table`` is the dimensionless kernel (default :func:`default_table`);
    it is rescaled to the geometry of ``p``.  With ``override`` an
    inadmissible ``delta0`` is run anyway and bound violations become
    warnings.  ``exterior_head`` is passed to :func:`acceleration`.
    """
    mode = Mode(mode)
    if not T > 0 or not tol > 0:
        raise ValueError("T and tol must be positive")
    dc = derived_constants(p)
    kernel = physical_kernel(p, table)
    adm = admissibility(p, dc, kernel, delta0)
    if not adm.admissible:
        if not override:
            raise ConfigurationError(
                f"delta0={delta0} is not admissible (margins h_w: {adm.margin_hw:.4g} m, "
                f"h_e: {adm.margin_he:.4g} m); set override to run anyway")
        warnings.warn(f"running inadmissible delta0={delta0}", stacklevel=2)
    quad = ConvolutionQuadrature(kernel, dt_conv, window)
    check = BoundChecker(p, dc, delta0, strict=not override)
    rhs = rhs_linear if mode is Mode.LINEAR else rhs_nonlinear

    t, y = 0.0, np.array([float(delta0), 0.0])
    a0 = acceleration(y[0], 0.0, 0.0, dc, mode, exterior_head)
    hist = HistoryBuffer(delta0)
    hist.append(0.0, y[0], y[1], a0)
    rows = [(0.0, y[0], y[1], a0, 0.0)]
    f1 = np.array([y[1], a0])

    h_max = dt_conv
    h = min(h_init, h_max, T)
    err_sum = 0.0
    n_rejected = 0
    while t < T:
        h = min(h, T - t)
        if h < 1e-12 * max(1.0, t):
            raise StepSizeError(f"step size underflow at t={t:.6g}")
        k = [f1]
        for c in _BS_C[1:]:
            ys = y + h * c * k[-1]
            k.append(np.array([ys[1], rhs(t + c * h, SolidState(*ys), hist, quad, dc, exterior_head)]))
        y_new = y + h * (_BS_B[0] * k[0] + _BS_B[1] * k[1] + _BS_B[2] * k[2])
        a_new = rhs(t + h, SolidState(*y_new), hist, quad, dc, exterior_head)
        f_new = np.array([y_new[1], a_new])
        err_vec = h * (_BS_E[0] * k[0] + _BS_E[1] * k[1] + _BS_E[2] * k[2] + _BS_E[3] * f_new)
        scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
        err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0:
            t_new = t + h
            if T - t_new < 1e-12 * T:
                t_new = T
            check(t_new, y_new[0], y_new[1])
            hist.append(t_new, y_new[0], y_new[1], a_new)
            zeta, _ = boundary_trace(hist, quad, dc, t_new, y_new[1], check=mode is Mode.NONLINEAR)
            rows.append((t_new, y_new[0], y_new[1], a_new, zeta))
            err_sum += abs(err_vec[0])
            t, y, f1 = t_new, y_new, f_new
        else:
            n_rejected += 1
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** (-1.0 / 3.0)))
        h = min(h * factor, h_max)

    logger.info("simulate(%s, delta0=%g): %d steps, %d rejected", mode.value, delta0, len(rows) - 1, n_rejected)
    trace = build_trace(float(delta0), mode.value, rows, p, dc)
    trace.error_estimate = err_sum
    trace.n_rejected = n_rejected
    trace.warnings = list(check.messages)
    return trace
