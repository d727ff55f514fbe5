"""Radial grid, quadrature, differentiation and the sine-spectral Laplacian.

A ball of radius ``r_max`` is discretized on the uniform interior nodes
``r_j = j*dr`` with ``dr = r_max/(n+1)``.  Radial complex profiles u(r) are
manipulated through the substitution w = r*u, which turns the 3D radial
Laplacian into a plain second derivative with Dirichlet ends w(0) = 0 and
w(r_max) = 0.  On these nodes the eigenbasis of w'' is sin(k*pi*r/r_max),
i.e. a type-I discrete sine transform, so the Laplacian and the free
propagator e^{it*Laplacian} are diagonal.

Grid sizes of the form 2**k - 1 map the DST-I onto a radix-2 FFT and are
roughly an order of magnitude faster than neighbouring sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from numpy.typing import NDArray
from scipy.fft import dst, idst

from .errors import ContractError

DEFAULT_R_MAX = 256.0
DEFAULT_N = 2**14 - 1


@dataclass
class RadialGrid:
    """Uniform interior nodes of [0, r_max] with 4*pi*r^2 dr quadrature.

    Attributes:
        r_max: Ball radius (Dirichlet end for w = r*u).
        n: Interior node count; nodes exclude r = 0 and r = r_max.
    """

    r_max: float = DEFAULT_R_MAX
    n: int = DEFAULT_N

    def __post_init__(self):
        if self.r_max <= 0:
            raise ContractError("r_max must be positive")
        if self.n < 8:
            raise ContractError("need at least 8 interior nodes")
        self.dr = self.r_max / (self.n + 1)
        self.nodes = np.arange(1, self.n + 1) * self.dr
        # composite trapezoid on the 4*pi*r^2 measure; both endpoint values
        # are taken as 0 (integrands are expected to vanish at r=0 and r_max)
        self.weights = 4.0 * np.pi * self.nodes**2 * self.dr

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and self.r_max == other.r_max and self.n == other.n

    def __hash__(self):
        return hash((self.r_max, self.n))


@dataclass
class RadialField:
    """Complex radial profile u(r_j) on a grid; the state of the PDE."""

    grid: RadialGrid
    values: NDArray[np.complex128]
    meta: str | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n,):
            raise ContractError(
                f"field has {self.values.shape} values for a grid of {self.grid.n} nodes"
            )
        if not np.all(np.isfinite(self.values.view(float))):
            raise ContractError("field contains non-finite entries")

    def copy(self, meta: str | None = None) -> "RadialField":
        return RadialField(self.grid, self.values.copy(), meta if meta is not None else self.meta)


@dataclass
class SpectralPlan:
    """Diagonalization data for the Dirichlet Laplacian on w = r*u."""

    grid: RadialGrid
    eigenvalues: NDArray[np.float64] = field(init=False)

    def __post_init__(self):
        k = np.arange(1, self.grid.n + 1)
        self.eigenvalues = (k * np.pi / self.grid.r_max) ** 2

    _cache: ClassVar[dict] = {}

    @classmethod
    def for_grid(cls, grid: RadialGrid) -> "SpectralPlan":
        plan = cls._cache.get((grid.r_max, grid.n))
        if plan is None:
            plan = cls(grid)
            cls._cache[(grid.r_max, grid.n)] = plan
        return plan

    def forward(self, w: NDArray) -> NDArray:
        return dst(w, type=1)

    def inverse(self, c: NDArray) -> NDArray:
        return idst(c, type=1)


def integrate_ball(grid: RadialGrid, samples: NDArray) -> float:
    """Quadrature of a real profile over the ball: sum w_j * f(r_j) * 4*pi*r_j^2.

    Endpoint contributions at r = 0 and r = r_max are included with value 0,
    which is exact for integrands vanishing there.
    """
    samples = np.asarray(samples)
    if samples.shape != (grid.n,):
        raise ContractError("sample array does not match the grid")
    return float(np.sum(grid.weights * samples))


def radial_derivative(grid: RadialGrid, values: NDArray) -> NDArray:
    """4th-order finite-difference d/dr with one-sided closure at both ends."""
    y = np.asarray(values)
    h = grid.dr
    d = np.empty_like(y)
    d[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return d


def gradient_norm_sq(u: RadialField) -> float:
    """Kinetic quadratic form: integral of |du/dr|^2 over the ball."""
    du = radial_derivative(u.grid, u.values)
    return integrate_ball(u.grid, np.abs(du) ** 2)


def _boundary_lift(grid: RadialGrid, w: NDArray) -> NDArray:
    """Subtract the linear ramp matching the extrapolated boundary value.

    The DST-I basis assumes w(r_max) = 0.  Slowly decaying profiles (the
    static bubble in particular) have w = r*u tending to a nonzero constant,
    whose odd periodic extension would ring through the second derivative.
    The ramp c*r/r_max carries the boundary value and has zero Laplacian,
    so subtracting it is exact.  c is a cubic extrapolation from the last
    four nodes.
    """
    c = 4.0 * w[-1] - 6.0 * w[-2] + 4.0 * w[-3] - w[-4]
    return w - c * (grid.nodes / grid.r_max)


def laplacian(u: RadialField, plan: SpectralPlan | None = None) -> RadialField:
    """3D radial Laplacian, computed as (1/r) * (sine-spectral (r*u)'')."""
    grid = u.grid
    if plan is None:
        plan = SpectralPlan.for_grid(grid)
    w = _boundary_lift(grid, grid.nodes * u.values)
    d2 = plan.inverse(-plan.eigenvalues * plan.forward(w))
    return RadialField(grid, d2 / grid.nodes, meta=u.meta)


def free_propagate(u: RadialField, t: float, plan: SpectralPlan | None = None) -> RadialField:
    """Exact free Schrodinger flow: multiply sine coefficients by e^{-i*lam_k*t}."""
    grid = u.grid
    if plan is None:
        plan = SpectralPlan.for_grid(grid)
    c = plan.forward(grid.nodes * u.values)
    w = plan.inverse(np.exp(-1j * plan.eigenvalues * t) * c)
    return RadialField(grid, w / grid.nodes, meta=u.meta)


def cubic_resample(u: RadialField, radii: NDArray) -> NDArray:
    """Values of u at arbitrary radii by cubic Lagrange interpolation.

    Interpolates the odd extension of w = r*u on the uniform lattice (w(0)=0
    exactly, w(-r_j) = -w(r_j)), then divides by the query radius.  Queries
    beyond r_max return 0 (zero extension).
    """
    grid = u.grid
    n, dr = grid.n, grid.dr
    w_ext = np.zeros(n + 6, dtype=complex)  # lattice j = -3 .. n+2
    w_ext[4:4 + n] = grid.nodes * u.values
    w_ext[0:3] = -w_ext[6:3:-1]
    x = np.asarray(radii) / dr
    b = np.clip(np.floor(x).astype(np.int64), 0, n)
    t = x - b
    base = b + 3
    vals = (
        (-t * (t - 1) * (t - 2) / 6) * w_ext[base - 1]
        + ((t + 1) * (t - 1) * (t - 2) / 2) * w_ext[base]
        + (-(t + 1) * t * (t - 2) / 2) * w_ext[base + 1]
        + ((t + 1) * t * (t - 1) / 6) * w_ext[base + 2]
    )
    safe_r = np.where(radii > 0, radii, 1.0)
    return np.where(radii <= grid.r_max, vals / safe_r, 0.0)
