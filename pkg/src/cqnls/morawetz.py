"""Piecewise Morawetz weight, the action M(t), its rate identity, and the
time-averaged local L^6 estimate.

The weight is a(r) = r^2 inside radius R and a(r) = 3R*r beyond 2R, glued on
(R, 2R] by the unique degree-7 polynomial matching value and three
derivatives at both junctions (so the distributional bilaplacian carries no
boundary terms).  In the dimensionless variable s = (r - R)/R the patch is

    q(s) = 1 + 2s + s^2 + 80 s^4 - 193 s^5 + 161 s^6 - 46 s^7,   a = R^2 q(s).

The patch is monotone (a' >= 0 everywhere) but cannot be convex: any
transition between these two pinned branches needs average slope 5R across
the annulus while ending at slope 3R, so a'' < 0 somewhere in (R, 2R) for
*every* admissible interpolant.  The build scan therefore enforces a' >= 0
and junction smoothness, and records the (necessarily negative) minimum of
a'' on the annulus as a diagnostic instead of failing on it.

For a radial field the rate of M(t) = 2 Im int conj(u) u_r a'(r) splits as

    dM/dt = 4 int a''|u_r|^2 - int |u|^2 LapLap(a)
            + int Lap(a) (|u|^4 - (4/3)|u|^6),

grouped by region into (main, err1, err2): ball, exterior, transition.
On the ball this is 8*(kinetic - l6 + 0.75*l4) of the localized field; the
angular-derivative part of the Hessian term vanishes identically on radial
data and is hard-wired to zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ContractError, WeightConstructionError
from .grid import RadialField, integrate_ball, radial_derivative
from .functionals import local_l6

# dimensionless transition patch q(s) and its derivatives (exact integers)
_Q = np.array([1.0, 2.0, 1.0, 0.0, 80.0, -193.0, 161.0, -46.0])
_Q1 = np.polynomial.polynomial.polyder(_Q)
_Q2 = np.polynomial.polynomial.polyder(_Q, 2)
_Q3 = np.polynomial.polynomial.polyder(_Q, 3)
_Q4 = np.polynomial.polynomial.polyder(_Q, 4)
_polyval = np.polynomial.polynomial.polyval


@dataclass
class MorawetzWeight:
    """Evaluators for the piecewise radial weight and its derivatives."""

    R: float
    transition_min_a_rr: float = field(init=False, default=0.0)

    def _regions(self, r: NDArray):
        inner = r <= self.R
        outer = r > 2 * self.R
        mid = ~inner & ~outer
        return inner, mid, outer

    def a(self, r: NDArray) -> NDArray:
        r = np.asarray(r, dtype=float)
        inner, mid, outer = self._regions(r)
        out = np.empty_like(r)
        out[inner] = r[inner] ** 2
        out[outer] = 3 * self.R * r[outer]
        out[mid] = self.R**2 * _polyval((r[mid] - self.R) / self.R, _Q)
        return out

    def a_r(self, r: NDArray) -> NDArray:
        r = np.asarray(r, dtype=float)
        inner, mid, outer = self._regions(r)
        out = np.empty_like(r)
        out[inner] = 2 * r[inner]
        out[outer] = 3 * self.R
        out[mid] = self.R * _polyval((r[mid] - self.R) / self.R, _Q1)
        return out

    def a_rr(self, r: NDArray) -> NDArray:
        r = np.asarray(r, dtype=float)
        inner, mid, outer = self._regions(r)
        out = np.empty_like(r)
        out[inner] = 2.0
        out[outer] = 0.0
        out[mid] = _polyval((r[mid] - self.R) / self.R, _Q2)
        return out

    def _a_rrr(self, r: NDArray) -> NDArray:
        r = np.asarray(r, dtype=float)
        inner, mid, outer = self._regions(r)
        out = np.zeros_like(r)
        out[mid] = _polyval((r[mid] - self.R) / self.R, _Q3) / self.R
        return out

    def _a_rrrr(self, r: NDArray) -> NDArray:
        r = np.asarray(r, dtype=float)
        inner, mid, outer = self._regions(r)
        out = np.zeros_like(r)
        out[mid] = _polyval((r[mid] - self.R) / self.R, _Q4) / self.R**2
        return out

    def delta_a(self, r: NDArray) -> NDArray:
        """3D Laplacian of the weight: a'' + 2 a'/r (6 inside, 6R/r outside)."""
        return self.a_rr(r) + 2.0 * self.a_r(r) / np.asarray(r, dtype=float)

    def delta_a_prime(self, r: NDArray) -> NDArray:
        """d/dr of the Laplacian; continuous across the junctions (a is C^3)."""
        r = np.asarray(r, dtype=float)
        return self._a_rrr(r) + 2.0 * self.a_rr(r) / r - 2.0 * self.a_r(r) / r**2

    def bilaplacian_a(self, r: NDArray) -> NDArray:
        """LapLap(a); identically zero outside the transition annulus."""
        r = np.asarray(r, dtype=float)
        a1, a2 = self.a_r(r), self.a_rr(r)
        a3, a4 = self._a_rrr(r), self._a_rrrr(r)
        g1 = a3 + 2 * a2 / r - 2 * a1 / r**2
        g2 = a4 + 2 * a3 / r - 4 * a2 / r**2 + 4 * a1 / r**3
        return g2 + 2 * g1 / r

    def hessian_eigenvalues(self, r: NDArray) -> tuple[NDArray, NDArray]:
        """Radial and tangential eigenvalues (a'', a'/r) of the Hessian."""
        r = np.asarray(r, dtype=float)
        return self.a_rr(r), self.a_r(r) / r


def weight_build(R: float, scan_points: int = 1001) -> MorawetzWeight:
    """Construct the weight and verify its build-time inequalities.

    Checks junction continuity of a..a''' to 1e-10 (relative to R-scaled
    magnitudes) and monotonicity a' >= 0 on a dense scan of the transition;
    either failure aborts construction.
    """
    if R <= 0:
        raise ContractError("weight radius must be positive")
    w = MorawetzWeight(R)
    eps = 1e-10
    for r0, inner_vals in (
        (R, (R**2, 2 * R, 2.0, 0.0)),
        (2 * R, (6 * R**2, 3 * R, 0.0, 0.0)),
    ):
        s = (r0 - R) / R
        patch = (
            R**2 * _polyval(s, _Q),
            R * _polyval(s, _Q1),
            float(_polyval(s, _Q2)),
            float(_polyval(s, _Q3)) / R,
        )
        scales = (R**2, R, 1.0, 1.0 / R)
        for got, want, sc in zip(patch, inner_vals, scales):
            if abs(got - want) > eps * max(sc, 1.0):
                raise WeightConstructionError(
                    f"junction mismatch at r = {r0}: {got!r} vs {want!r}"
                )
    s = np.linspace(0.0, 1.0, scan_points)
    q1 = _polyval(s, _Q1)
    if np.any(q1 < -1e-12):
        bad = s[np.argmin(q1)]
        raise WeightConstructionError(
            f"weight is not monotone: a' < 0 at r = {R * (1 + bad):.6g}"
        )
    w.transition_min_a_rr = float(np.min(_polyval(s, _Q2)))
    return w


def morawetz_action(u: RadialField, w: MorawetzWeight) -> float:
    """M = 2 int Im(conj(u) du/dr) a'(r) over the ball."""
    du = radial_derivative(u.grid, u.values)
    integrand = np.imag(np.conj(u.values) * du) * w.a_r(u.grid.nodes)
    return 2.0 * integrate_ball(u.grid, integrand)


def _smooth_rate_density(u: RadialField, w: MorawetzWeight) -> NDArray:
    r = u.grid.nodes
    du = radial_derivative(u.grid, u.values)
    a2 = np.abs(u.values) ** 2
    da = w.delta_a(r)
    # 4 Re(conj(u_i) a_ij u_j) = 4 a''|u_r|^2 on radial data; the tangential
    # part 12R/r |angular grad u|^2 of the exterior group is identically 0.
    return 4.0 * w.a_rr(r) * np.abs(du) ** 2 + da * (a2**2 - (4.0 / 3.0) * a2**3)


def _bilaplacian_term(u: RadialField, w: MorawetzWeight) -> float:
    """-int LapLap(a) |u|^2, supported on the transition annulus.

    LapLap(a) jumps at both junctions, which a node-based quadrature samples
    at O(dr * jump) error; one integration by parts trades it for the
    continuous (Delta a)' against (|u|^2)' plus the exact surface value
    4 pi (2R)^2 (Delta a)'(2R) |u(2R)|^2 = -24 pi R |u(2R)|^2
    (the inner surface vanishes since Delta a is constant there).
    """
    from .grid import cubic_resample

    grid = u.grid
    r = grid.nodes
    _, mid, _ = w._regions(r)
    a2 = np.abs(u.values) ** 2
    da2 = radial_derivative(grid, a2)
    smooth = float(np.sum(grid.weights[mid] * w.delta_a_prime(r[mid]) * da2[mid]))
    u_edge = cubic_resample(u, np.array([2.0 * w.R]))[0]
    return 24.0 * np.pi * w.R * float(np.abs(u_edge) ** 2) + smooth


def morawetz_rate(u: RadialField, w: MorawetzWeight) -> tuple[float, float, float]:
    """The three regional groups of dM/dt: (ball, exterior, transition)."""
    r = u.grid.nodes
    dens = _smooth_rate_density(u, w)
    weights = u.grid.weights
    inner, mid, outer = w._regions(r)
    main = float(np.sum(weights[inner] * dens[inner]))
    err1 = float(np.sum(weights[outer] * dens[outer]))
    err2 = float(np.sum(weights[mid] * dens[mid])) + _bilaplacian_term(u, w)
    return main, err1, err2


@dataclass
class MorawetzSeries:
    """Per-step action values with the three rate groups."""

    times: NDArray
    m_values: NDArray
    rate_main: NDArray
    rate_err1: NDArray
    rate_err2: NDArray

    def fd_rate(self) -> NDArray:
        """Centered finite difference of m_values (endpoints one-sided)."""
        t, m = self.times, self.m_values
        out = np.empty_like(m)
        out[1:-1] = (m[2:] - m[:-2]) / (t[2:] - t[:-2])
        out[0] = (m[1] - m[0]) / (t[1] - t[0])
        out[-1] = (m[-1] - m[-2]) / (t[-1] - t[-2])
        return out

    def to_csv(self, path) -> None:
        data = np.column_stack(
            [self.times, self.m_values, self.rate_main, self.rate_err1,
             self.rate_err2, self.fd_rate()]
        )
        np.savetxt(path, data, delimiter=",", header="t,M,main,err1,err2,fd_rate",
                   comments="")


def series_from_trajectory(traj) -> MorawetzSeries:
    s = traj.series
    if "morawetz_m" not in s:
        raise ContractError("trajectory was recorded without a Morawetz weight")
    return MorawetzSeries(
        times=traj.times,
        m_values=s["morawetz_m"],
        rate_main=s["morawetz_main"],
        rate_err1=s["morawetz_err1"],
        rate_err2=s["morawetz_err2"],
    )


def identity_residual(traj, w: MorawetzWeight) -> float:
    """Max over interior steps of the normalized dM/dt identity defect.

    |centered-difference dM/dt - (main + err1 + err2)| / (1 + |rate|).
    """
    ms = series_from_trajectory(traj)
    if traj.series_meta.get("morawetz_radius") != w.R:
        raise ContractError("trajectory was recorded with a different weight radius")
    rate = ms.rate_main + ms.rate_err1 + ms.rate_err2
    dt = np.diff(ms.times)
    if dt.size >= 2 and np.max(dt) > 1.5 * np.min(dt):
        warnings.warn("unevenly spaced series; residual accuracy degraded")
    fd = (ms.m_values[2:] - ms.m_values[:-2]) / (ms.times[2:] - ms.times[:-2])
    res = np.abs(fd - rate[1:-1]) / (1.0 + np.abs(rate[1:-1]))
    return float(np.max(res))


def averaged_local_l6(traj, R: float) -> float:
    """Time average (1/T) int_0^T of the local sextic mass inside radius R."""
    if traj.series_meta.get("l6_local_radius") == R and "l6_local" in traj.series:
        times, vals = traj.times, traj.series["l6_local"]
    else:
        times = np.asarray(traj.snapshot_times, dtype=float)
        vals = np.array([local_l6(s, R) for s in traj.snapshots])
    T = times[-1] - times[0]
    if T <= 0:
        return float(vals[0])
    return float(np.trapezoid(vals, times) / T)
