"""Ground-state bubble, sharp thresholds, K+/K- classification and coercivity.

The static bubble W(r) = (1 + r^2/3)^(-1/2) solves -Lap W = W^5 and
saturates the sharp Sobolev inequality l6 <= C3 * kinetic^3.  Its kinetic
norm equals its L^6 norm (both 3*sqrt(3)*pi^2/4 ~= 12.821), and the
dichotomy threshold is the quintic-only energy at W,
ec_W = kinetic(W)/3 ~= 4.2737.

W is not square-integrable (|W| ~ sqrt(3)/r), so dynamical experiments use
cutoff bubbles; the threshold integrals themselves converge absolutely
(integrands decay like r^-4 and r^-6) and are computed on large grids
without a cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ContractError, ResolutionError
from .functionals import (
    GROUND_STATE_ENERGY_C,
    GROUND_STATE_KINETIC,
    GROUND_STATE_L6,
    SHARP_SOBOLEV_C3,
    FunctionalReport,
    report,
)
from .grid import RadialField, RadialGrid, cubic_resample, integrate_ball, radial_derivative

K_PLUS = "KPlus"
K_MINUS = "KMinus"
ABOVE_THRESHOLD = "AboveThreshold"


def ground_state(grid: RadialGrid) -> RadialField:
    """The bubble W evaluated exactly on the grid nodes."""
    return RadialField(grid, (1.0 + grid.nodes**2 / 3.0) ** -0.5, meta="W")


@dataclass
class Thresholds:
    """Quadrature values of the bubble norms on a given grid.

    grad_w_sq and w_l6 agree up to domain truncation (the kinetic integrand
    has an r^-4 tail, so the ball of radius r_max misses ~ 12*pi/r_max).
    """

    grad_w_sq: float
    w_l6: float
    ec_w: float
    c3: float


def thresholds(grid: RadialGrid) -> Thresholds:
    """Compute bubble norms and the sharp constant by quadrature."""
    if grid.r_max < 100.0:
        raise AccuracyError(
            f"r_max = {grid.r_max} is too small for the slowly decaying bubble; "
            f"the kinetic tail beyond the ball is ~ {12 * math.pi / grid.r_max:.3f} "
            "(need r_max >= 100)"
        )
    w = ground_state(grid)
    dw = radial_derivative(grid, w.values.real)
    grad_w_sq = integrate_ball(grid, dw**2)
    w_l6 = integrate_ball(grid, w.values.real**6)
    th = Thresholds(
        grad_w_sq=grad_w_sq,
        w_l6=w_l6,
        ec_w=grad_w_sq / 2 - w_l6 / 6,
        c3=grad_w_sq**-2,
    )
    if abs(th.grad_w_sq - th.w_l6) > 1e-2 * th.grad_w_sq:
        raise AccuracyError(
            f"bubble norms disagree beyond tolerance on this grid: "
            f"kinetic {th.grad_w_sq:.5f} vs l6 {th.w_l6:.5f}"
        )
    return th


@dataclass
class Classification:
    """Sign data placing a field relative to the dichotomy threshold."""

    tag: str
    report: FunctionalReport
    energy_margin: float  # ec_W - E(u); positive below threshold
    k_value: float
    grad_margin: float  # ||grad W||^2 - ||grad u||^2
    kbar_agrees: bool  # K-sign test and gradient-comparison test coincide


def classify(u: RadialField, th: Thresholds) -> Classification:
    rep = report(u)
    energy_margin = th.ec_w - rep.energy
    grad_margin = th.grad_w_sq - rep.kinetic
    if energy_margin <= 0:
        tag = ABOVE_THRESHOLD
    elif rep.k >= 0:
        tag = K_PLUS
    else:
        tag = K_MINUS
    kbar_agrees = (rep.k >= 0) == (grad_margin >= 0)
    return Classification(tag, rep, energy_margin, rep.k, grad_margin, kbar_agrees)


# ---------------------------------------------------------------------------
# the two scaling families

def _support_radius(u: RadialField) -> float:
    amax = np.max(np.abs(u.values))
    if amax == 0:
        return 0.0
    idx = np.nonzero(np.abs(u.values) > 1e-8 * amax)[0]
    return float(u.grid.nodes[idx[-1]])


def _rescale(u: RadialField, amplitude: float, stretch: float, meta: str) -> RadialField:
    """amplitude * u(stretch * r), resampled cubically onto the same grid."""
    supp = _support_radius(u)
    if supp > 0 and supp / stretch < 4 * u.grid.dr:
        raise ResolutionError(
            f"rescaled support {supp / stretch:.3g} falls below 4 nodes "
            f"(dr = {u.grid.dr:.3g})"
        )
    vals = amplitude * cubic_resample(u, stretch * u.grid.nodes)
    return RadialField(u.grid, vals, meta=meta)


def scale_phi(u: RadialField, lam: float) -> RadialField:
    """Mass-preserving dilation e^{3*lam} u(e^{2*lam} r).

    The derivative of the energy along this family at lam = 0 is the
    functional k of the report.
    """
    if lam == 0:
        return u.copy()
    return _rescale(u, math.exp(3 * lam), math.exp(2 * lam), meta="scale_phi")


def scale_f12(u: RadialField, lam: float) -> RadialField:
    """h-preserving dilation e^{3*lam/2} u(e^{3*lam} r).

    Leaves kinetic, l6 (hence h) invariant while the quartic norm scales by
    e^{-3*lam}, so k along the family interpolates between k and kc:

        k(u^lam) = kc(u) + 1.5 * e^{-3*lam} * l4(u).
    """
    if lam == 0:
        return u.copy()
    return _rescale(u, math.exp(1.5 * lam), math.exp(3 * lam), meta="scale_f12")


# ---------------------------------------------------------------------------
# coercivity

def coercivity_gap(u: RadialField) -> float:
    """kinetic - l6; nonnegative with margin for fields well below the bubble."""
    rep = report(u)
    return rep.kinetic - rep.l6


@dataclass
class BallCoercivity:
    passes: bool
    gap: float


def coercive_on_ball(
    u: RadialField, R: float, th: Thresholds, delta: float | None = None
) -> BallCoercivity:
    """Kinetic/sextic gap of the cutoff field chi_R * u.

    passes iff kinetic(chi_R u) <= (1 - delta) * grad_w_sq.  When delta is
    not given it defaults to half the field's own relative gradient margin,
    i.e. the largest delta with kinetic(u) <= (1 - 2*delta) * grad_w_sq.
    """
    from .functionals import CutoffProfile, apply_cutoff

    if delta is None:
        delta = 0.5 * (1.0 - report(u).kinetic / th.grad_w_sq)
    loc = apply_cutoff(u, CutoffProfile("smooth-chi", R))
    rep = report(loc)
    return BallCoercivity(passes=rep.kinetic <= (1.0 - delta) * th.grad_w_sq,
                          gap=rep.kinetic - rep.l6)


def coercive_radius(
    u: RadialField, th: Thresholds, delta: float, r_start: float = 4.0
) -> float:
    """Smallest scanned radius where the cutoff correction term is negligible.

    Scans R upward (geometrically) until |int chi_R Lap(chi_R) |u|^2| falls
    below delta * grad_w_sq / 2, so that localization cannot push the kinetic
    norm past the (1 - delta) ceiling.
    """
    from .functionals import chi, chi_derivatives

    grid = u.grid
    a2 = np.abs(u.values) ** 2
    R = r_start
    while R <= grid.r_max:
        s = grid.nodes / R
        ch = chi(s)
        d1, d2 = chi_derivatives(s)
        lap_chi = d2 / R**2 + 2.0 * (d1 / R) / grid.nodes
        corr = abs(integrate_ball(grid, ch * lap_chi * a2))
        if corr < delta * th.grad_w_sq / 2:
            return R
        R *= 1.3
    raise AccuracyError("no coercive radius found within the domain")


def cubic_barrier(y0: float, delta0: float) -> float:
    """Continuity-argument ceiling for y(t) = kinetic(t)/grad_w_sq.

    Returns the smallest positive root of (3/2) y - (1/2) y^3 = 1 - delta0.
    The cubic increases from 0 to 1 on [0, 1], so the root exists and is
    unique there; the hypothesis of the argument requires y0 below it.
    """
    if not (0 < delta0 < 1):
        raise ContractError("delta0 must lie in (0, 1)")
    if not (0 <= y0 < 1):
        raise ContractError("y0 must lie in [0, 1)")
    target = 1.0 - delta0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 1.5 * mid - 0.5 * mid**3 < target:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    if y0 >= root:
        raise ContractError(
            f"hypothesis violated: y0 = {y0:.6f} is not below the barrier {root:.6f}"
        )
    return root


__all__ = [
    "ABOVE_THRESHOLD",
    "BallCoercivity",
    "Classification",
    "GROUND_STATE_ENERGY_C",
    "GROUND_STATE_KINETIC",
    "GROUND_STATE_L6",
    "K_MINUS",
    "K_PLUS",
    "SHARP_SOBOLEV_C3",
    "Thresholds",
    "classify",
    "coercive_on_ball",
    "coercive_radius",
    "coercivity_gap",
    "cubic_barrier",
    "ground_state",
    "scale_f12",
    "scale_phi",
    "thresholds",
]
