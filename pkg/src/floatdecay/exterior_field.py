"""Linear radial shallow-water equations outside the floating cylinder.

    d_t zeta + d_r q + q / r = 0,      d_t q + v0**2 d_r zeta = 0,   r > R

with the discharge prescribed at the wall, ``q(t, R) = -(R/2) delta'(t)``.
Staggered leapfrog: ``zeta`` lives at cell centres and integer time levels,
``q`` at cell faces and half time levels.  The domain is long enough that
nothing reflected at the outer wall can return to ``R`` during a run.

:func:`cosimulate` couples the solver to the solid equation of motion in
place of the convolution trace.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .solid_motion import (
    ConfigurationError,
    DerivedConstants,
    Mode,
    PhysicalParams,
    SimTrace,
    acceleration,
    admissibility,
    build_trace,
    derived_constants,
    physical_kernel,
)

logger = logging.getLogger(__name__)

CFL_MAX = 0.9
DEFAULT_CFL = 0.5
DEFAULT_DR = 0.25


class CFLError(ValueError):
    """Time step too large for the grid spacing."""


@dataclass(frozen=True)
class RadialGrid:
    """``n_cells`` uniform cells between ``r_min = R`` and ``r_max = L``."""

    r_min: float
    r_max: float
    n_cells: int

    def __post_init__(self):
        if not (self.r_max > self.r_min > 0 and self.n_cells >= 2):
            raise ValueError("need 0 < r_min < r_max and at least two cells")

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.r_min + self.dr * (np.arange(self.n_cells) + 0.5)

    @property
    def faces(self) -> np.ndarray:
        return self.r_min + self.dr * np.arange(self.n_cells + 1)


def make_grid(p: PhysicalParams, T: float, dr: float = DEFAULT_DR) -> RadialGrid:
    """Grid reaching past ``R + v0 T`` (plus a few cells) at spacing ``dr``."""
    v0 = math.sqrt(p.g * p.h0)
    n = int(math.ceil(v0 * T / dr)) + 8
    return RadialGrid(p.R, p.R + n * dr, n)


@dataclass(frozen=True)
class ExteriorField:
    """``zeta`` at cell centres (time ``t``) and ``q`` at faces (time ``t - dt/2``)."""

    grid: RadialGrid
    zeta: np.ndarray
    q: np.ndarray
    t: float = 0.0

    @classmethod
    def at_rest(cls, grid: RadialGrid) -> "ExteriorField":
        return cls(grid, np.zeros(grid.n_cells), np.zeros(grid.n_cells + 1), 0.0)

    def wall_elevation(self) -> float:
        """``zeta`` extrapolated linearly from the first two cells to ``r = R``."""
        return 1.5 * self.zeta[0] - 0.5 * self.zeta[1]


def step(field: ExteriorField, boundary_delta_dot: float, dt: float, p: PhysicalParams,
         dc: DerivedConstants | None = None) -> ExteriorField:
    """Advance ``q`` by ``dt`` using the wall velocity at the half step, then ``zeta``."""
    grid = field.grid
    dr = grid.dr
    v0 = dc.v0 if dc is not None else math.sqrt(p.g * p.h0)
    if v0 * dt / dr > CFL_MAX:
        raise CFLError(f"CFL number {v0 * dt / dr:.3f} exceeds {CFL_MAX}")
    q = np.empty_like(field.q)
    q[1:-1] = field.q[1:-1] - dt * v0 ** 2 * np.diff(field.zeta) / dr
    q[0] = -0.5 * p.R * boundary_delta_dot
    q[-1] = 0.0
    rq = grid.faces * q
    zeta = field.zeta - dt * np.diff(rq) / (grid.centers * dr)
    return ExteriorField(grid, zeta, q, field.t + dt)


def exterior_energy(field: ExteriorField, p: PhysicalParams, q_next: np.ndarray | None = None) -> float:
    """``pi rho g int zeta^2 r dr + pi (rho/h0) int q^2 r dr`` on the grid.

    ``q`` is staggered by half a step; passing the following half-step
    discharge ``q_next`` uses the product ``q q_next``, which is the quantity
    the leapfrog scheme conserves.
    """
    grid = field.grid
    dr = grid.dr
    pot = math.pi * p.rho * p.g * float(np.sum(field.zeta ** 2 * grid.centers)) * dr
    qq = field.q ** 2 if q_next is None else field.q * q_next
    w = grid.faces * dr
    w[0] *= 0.5
    w[-1] *= 0.5
    kin = math.pi * p.rho / p.h0 * float(np.dot(qq, w))
    return pot + kin


def cosimulate(p: PhysicalParams, delta0: float, T: float, dt: float | None = None, *,
               dr: float = DEFAULT_DR, mode: Mode | str = Mode.NONLINEAR,
               exterior_head: bool = True, override: bool = False) -> tuple[SimTrace, np.ndarray]:
    """Solid motion driven by the directly computed exterior field.

    Each step: predict the wall velocity at the half step, advance ``q`` and
    ``zeta``, average the wall elevation over the step, then advance the
    solid by the midpoint rule (``exterior_head`` as in
    :func:`~floatdecay.solid_motion.acceleration`).  Returns the trace
    (with ``E_ext`` and ``E_tot``) and ``zeta_e(t, R)`` at the trace times.
    """
    mode = Mode(mode)
    dc = derived_constants(p)
    adm = admissibility(p, dc, physical_kernel(p), delta0)
    if not adm.admissible and not override:
        raise ConfigurationError(f"delta0={delta0} is not admissible")
    grid = make_grid(p, T, dr)
    if dt is None:
        dt = DEFAULT_CFL * grid.dr / dc.v0
    n_steps = int(math.ceil(T / dt - 1e-9))
    dt = T / n_steps
    if dc.v0 * dt / grid.dr > CFL_MAX:
        raise CFLError(f"CFL number {dc.v0 * dt / grid.dr:.3f} exceeds {CFL_MAX}")

    field = ExteriorField.at_rest(grid)
    d, v = float(delta0), 0.0
    zeta_R = 0.0
    a = acceleration(d, v, zeta_R, dc, mode, exterior_head)
    rows, e_ext = [], []
    for n in range(n_steps + 1):
        v_half = v + 0.5 * dt * a
        new = step(field, v_half, dt, p, dc)
        e_ext.append(exterior_energy(field, p, new.q))
        rows.append((n * dt, d, v, a, zeta_R))
        if n == n_steps:
            break
        zeta_new = new.wall_elevation()
        d_half = d + 0.5 * dt * v
        a_half = acceleration(d_half, v_half, 0.5 * (zeta_R + zeta_new), dc, mode, exterior_head)
        d = d + dt * v_half
        v = v + dt * a_half
        zeta_R = zeta_new
        a = acceleration(d, v, zeta_R, dc, mode, exterior_head)
        field = new
    logger.info("cosimulate(delta0=%g): %d steps on %d cells", delta0, n_steps, grid.n_cells)
    trace = build_trace(float(delta0), mode.value, rows, p, dc, E_ext=e_ext)
    return trace, trace.zeta_e_R.copy()
