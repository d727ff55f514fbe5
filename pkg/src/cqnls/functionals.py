"""Scalar functionals of a radial field, cutoffs, and space-time norms.

Conventions (all integrals over the ball, measure 4*pi*r^2 dr):

    mass     = int |u|^2
    kinetic  = int |du/dr|^2
    l4, l6   = int |u|^4, int |u|^6
    energy   = kinetic/2 + l4/4 - l6/6          (conserved Hamiltonian)
    energy_c = kinetic/2 - l6/6                 (quintic-only part)
    k        = 2*(kinetic - l6) + 1.5*l4        (scaling derivative of energy)
    h        = (kinetic + l6)/6
    kc       = 2*(kinetic - l6)

so that energy = h + k/6 holds identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ContractError
from .grid import RadialField, RadialGrid, integrate_ball, radial_derivative

# Closed forms for the static bubble W(r) = (1 + r^2/3)^(-1/2), the optimizer
# of the sharp Sobolev inequality l6 <= C3 * kinetic^3.  Both the kinetic norm
# and the L^6 norm of W equal 3*sqrt(3)*pi^2/4.
GROUND_STATE_KINETIC = 0.75 * math.sqrt(3.0) * math.pi**2
GROUND_STATE_L6 = GROUND_STATE_KINETIC
GROUND_STATE_ENERGY_C = GROUND_STATE_KINETIC / 3.0
SHARP_SOBOLEV_C3 = GROUND_STATE_KINETIC**-2


@dataclass
class FunctionalReport:
    """Every scalar functional of one field, from a single quadrature pass."""

    mass: float
    kinetic: float
    l4: float
    l6: float
    energy: float
    energy_c: float
    k: float
    h: float
    kc: float
    y_ratio: float

    CSV_HEADER = "mass,kinetic,l4,l6,energy,energy_c,k,h,kc,y_ratio"

    def to_csv_row(self) -> str:
        return ",".join(
            repr(v)
            for v in (self.mass, self.kinetic, self.l4, self.l6, self.energy,
                      self.energy_c, self.k, self.h, self.kc, self.y_ratio)
        )


def report(u: RadialField) -> FunctionalReport:
    """Compute all scalar functionals of a field in one pass."""
    grid = u.grid
    a2 = np.abs(u.values) ** 2
    du = radial_derivative(grid, u.values)
    mass = integrate_ball(grid, a2)
    kinetic = integrate_ball(grid, np.abs(du) ** 2)
    l4 = integrate_ball(grid, a2 * a2)
    l6 = integrate_ball(grid, a2 * a2 * a2)
    return FunctionalReport(
        mass=mass,
        kinetic=kinetic,
        l4=l4,
        l6=l6,
        energy=kinetic / 2 + l4 / 4 - l6 / 6,
        energy_c=kinetic / 2 - l6 / 6,
        k=2 * (kinetic - l6) + 1.5 * l4,
        h=(kinetic + l6) / 6,
        kc=2 * (kinetic - l6),
        y_ratio=kinetic / GROUND_STATE_KINETIC,
    )


def local_l6(u: RadialField, R: float) -> float:
    """Sextic mass inside the ball of radius R (the evacuation monitor)."""
    if R > u.grid.r_max:
        raise ContractError(f"local radius {R} exceeds the domain radius {u.grid.r_max}")
    mask = u.grid.nodes <= R
    a2 = np.abs(u.values[mask]) ** 2
    return float(np.sum(u.grid.weights[mask] * a2**3))


# ---------------------------------------------------------------------------
# cutoffs

@dataclass
class CutoffProfile:
    """Radial cutoff: quintic-smoothstep chi or a sharp ball indicator."""

    kind: str = "smooth-chi"
    radius: float = 10.0

    def __post_init__(self):
        if self.kind not in ("smooth-chi", "ball-indicator"):
            raise ContractError(f"unknown cutoff kind {self.kind!r}")
        if self.radius <= 0:
            raise ContractError("cutoff radius must be positive")


def chi(s: NDArray) -> NDArray:
    """C^2 plateau cutoff: 1 on [0, 1/2], quintic-smoothstep decay to 0 at 1."""
    s = np.asarray(s, dtype=float)
    x = np.clip(2.0 * s - 1.0, 0.0, 1.0)
    ramp = 1.0 - x**3 * (10.0 - 15.0 * x + 6.0 * x * x)
    return np.where(s >= 1.0, 0.0, np.where(s <= 0.5, 1.0, ramp))


def chi_derivatives(s: NDArray) -> tuple[NDArray, NDArray]:
    """First and second derivative of chi with respect to s."""
    s = np.asarray(s, dtype=float)
    x = np.clip(2.0 * s - 1.0, 0.0, 1.0)
    on_ramp = (s > 0.5) & (s < 1.0)
    d1 = np.where(on_ramp, -2.0 * (30.0 * x**2 - 60.0 * x**3 + 30.0 * x**4), 0.0)
    d2 = np.where(on_ramp, -4.0 * (60.0 * x - 180.0 * x**2 + 120.0 * x**3), 0.0)
    return d1, d2


def cutoff_values(grid: RadialGrid, c: CutoffProfile) -> NDArray:
    if c.kind == "ball-indicator":
        return (grid.nodes <= c.radius).astype(float)
    return chi(grid.nodes / c.radius)


def apply_cutoff(u: RadialField, c: CutoffProfile) -> RadialField:
    """Pointwise product chi_R * u (or indicator * u)."""
    return RadialField(u.grid, cutoff_values(u.grid, c) * u.values, meta=u.meta)


def cutoff_identity_residual(u: RadialField, R: float) -> float:
    """Discrete check of int chi^2 |grad u|^2 = int |grad(chi u)|^2 + int chi Lap(chi) |u|^2.

    Returns |lhs - rhs|/(1 + |lhs|); a small value certifies that quadrature
    and differentiation are mutually consistent under integration by parts.
    """
    grid = u.grid
    s = grid.nodes / R
    ch = chi(s)
    d1, d2 = chi_derivatives(s)
    chi_r = d1 / R
    chi_rr = d2 / R**2
    lap_chi = chi_rr + 2.0 * chi_r / grid.nodes
    du = radial_derivative(grid, u.values)
    lhs = integrate_ball(grid, ch**2 * np.abs(du) ** 2)
    d_chu = radial_derivative(grid, ch * u.values)
    rhs = integrate_ball(grid, np.abs(d_chu) ** 2) + integrate_ball(
        grid, ch * lap_chi * np.abs(u.values) ** 2
    )
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def radial_weighted_sup(u: RadialField) -> float:
    """max_j r_j |u(r_j)|, the quantity controlled by radial Sobolev embedding."""
    return float(np.max(u.grid.nodes * np.abs(u.values)))


# ---------------------------------------------------------------------------
# discrete space-time norms

def spatial_norm(u: RadialField, r: float) -> float:
    """L^r norm over the ball; r = inf gives the sup over nodes."""
    if math.isinf(r):
        return float(np.max(np.abs(u.values)))
    return integrate_ball(u.grid, np.abs(u.values) ** r) ** (1.0 / r)


def spacetime_norm(traj, q: float, r: float) -> float:
    """Discrete L^q_t L^r_x norm over a trajectory's snapshots.

    Trapezoid in time of the spatial norm to the q-th power (max over
    snapshots when q = inf).  Snapshots must be equally spaced in time.
    """
    if not (1 <= q) or not (1 <= r):
        raise ContractError("exponents must lie in [1, inf]")
    times = np.asarray(traj.snapshot_times, dtype=float)
    snaps = traj.snapshots
    if len(snaps) == 0:
        raise ContractError("empty trajectory")
    vals = np.array([spatial_norm(s, r) for s in snaps])
    if math.isinf(q):
        return float(np.max(vals))
    if len(snaps) == 1:
        return 0.0
    return float(np.trapezoid(vals**q, times) ** (1.0 / q))
