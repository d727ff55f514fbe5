"""Strang stepping, conservation, outcomes, and the local flux identity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqnls.dynamics import (
    BLEW_UP,
    SCATTERED,
    UNDECIDED,
    StepperConfig,
    evolve,
    flux_identity_residual,
    nonlinear_phase_step,
    strang_step,
)
from cqnls.errors import ContractError
from cqnls.functionals import GROUND_STATE_KINETIC
from cqnls.grid import RadialField, RadialGrid, free_propagate

from conftest import gaussian, random_smooth_field


def test_nonlinear_phase_fixed_modulus_one(grid64):
    vals = np.full(grid64.n, 0.5, dtype=complex)
    vals[10] = 1.0  # |u|^2 - |u|^4 vanishes at unit modulus
    out = nonlinear_phase_step(RadialField(grid64, vals), dt=0.37)
    assert out.values[10] == pytest.approx(1.0, abs=1e-15)


def test_nonlinear_phase_zero(grid64):
    out = nonlinear_phase_step(RadialField(grid64, np.zeros(grid64.n)), dt=0.1)
    assert np.all(out.values == 0)


def test_nonlinear_phase_explicit_value(grid64):
    vals = np.zeros(grid64.n, dtype=complex)
    vals[5] = 2.0
    out = nonlinear_phase_step(RadialField(grid64, vals), dt=0.1)
    # phase -dt (|u|^2 - |u|^4) = -0.1 (4 - 16) = +1.2 radians, modulus kept
    assert out.values[5] == pytest.approx(2.0 * np.exp(1.2j), rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(dt=st.floats(1e-5, 0.5), amp=st.floats(0.1, 3.0))
def test_nonlinear_phase_preserves_modulus(dt, amp):
    g = RadialGrid(16.0, 255)
    u = RadialField(g, amp * np.exp(-g.nodes**2) * np.exp(0.3j * g.nodes**2))
    out = nonlinear_phase_step(u, dt)
    assert np.max(np.abs(np.abs(out.values) - np.abs(u.values))) <= 1e-15 * amp


def test_strang_linear_regime(grid64):
    u = RadialField(grid64, 1e-6 * np.exp(-grid64.nodes**2).astype(complex))
    dt = 1e-3
    split = strang_step(u, dt)
    free = free_propagate(u, dt)
    assert np.max(np.abs(split.values - free.values)) <= 1e-12 * np.max(np.abs(u.values))


def test_strang_self_convergence_order():
    g = RadialGrid(64.0, 2**12 - 1)
    u0 = gaussian(g)

    def run(dt):
        u = u0
        for _ in range(round(1.0 / dt)):
            u = strang_step(u, dt)
        return u.values

    ref = run(1 / 1024)
    errs = [np.max(np.abs(run(dt) - ref)) for dt in (1 / 32, 1 / 64)]
    order = np.log2(errs[0] / errs[1])
    assert 1.8 <= order <= 2.2


def test_time_reversal(grid64):
    rng = np.random.default_rng(20)
    u = random_smooth_field(grid64, rng)
    fwd = strang_step(u, 2e-3)
    back = np.conj(strang_step(RadialField(grid64, np.conj(fwd.values)), 2e-3).values)
    assert np.max(np.abs(back - u.values)) <= 1e-10


def test_conservation_short_run(kplus_run):
    _, cfg, traj, _ = kplus_run
    T = traj.times[-1]
    mass = traj.series["mass"]
    energy = traj.series["energy"]
    assert np.max(np.abs(mass - mass[0])) / mass[0] / T <= 1e-10
    assert np.max(np.abs(energy - energy[0])) / abs(energy[0]) / T <= 1e-6


def test_kinetic_ceiling_kplus(kplus_run):
    # coercivity: the kinetic norm of below-threshold data never reaches the
    # bubble's kinetic norm
    _, _, traj, _ = kplus_run
    y = traj.series["kinetic"] / GROUND_STATE_KINETIC
    assert np.max(y) < 1.0


def test_determinism(grid64):
    u = gaussian(grid64, amplitude=0.3)
    cfg = StepperConfig(dt=1e-3, t_end=0.1, snapshot_stride=100)
    t1, o1 = evolve(u, cfg)
    t2, o2 = evolve(u, cfg)
    for key in t1.series:
        assert np.array_equal(t1.series[key], t2.series[key])
    assert np.array_equal(t1.snapshots[-1].values, t2.snapshots[-1].values)
    assert o1.tag == o2.tag


def test_evolve_zero_data(grid64):
    zero = RadialField(grid64, np.zeros(grid64.n))
    cfg = StepperConfig(dt=1e-2, t_end=1.0, snapshot_stride=10)
    traj, outcome = evolve(zero, cfg)
    assert outcome.tag == UNDECIDED
    assert len(traj.times) == 101
    for key in ("mass", "energy", "kinetic", "l6_local"):
        assert np.all(traj.series[key] == 0.0)


def test_evolve_scattering():
    grid = RadialGrid(128.0, 2**12 - 1)
    u0 = gaussian(grid, amplitude=0.1)
    cfg = StepperConfig(dt=2e-3, t_end=60.0, snapshot_stride=10**9, sponge=True,
                        evacuation_radius=10.0, evacuation_epsilon=0.3)
    traj, outcome = evolve(u0, cfg)
    assert outcome.tag == SCATTERED
    assert outcome.evidence["min_local_l6"] <= 0.3**6
    y = traj.series["kinetic"] / GROUND_STATE_KINETIC
    assert np.max(y) < 1.0


def test_evolve_blowup(th1024):
    from cqnls.config import InitialData
    from cqnls.experiments import build_initial, find_kminus_amplitude
    from cqnls.variational import classify

    grid = RadialGrid(64.0, 2**14 - 1)
    a = find_kminus_amplitude(grid, th1024)
    u0 = build_initial(grid, InitialData(family="bubble", amplitude=a, scale=16.0, cutoff=10.0))
    assert classify(u0, th1024).tag == "KMinus"
    cfg = StepperConfig(dt=5e-5, t_end=10.0, snapshot_stride=10**9)
    traj, outcome = evolve(u0, cfg)
    assert outcome.tag == BLEW_UP
    assert outcome.t_event is not None and outcome.t_event < 10.0
    assert outcome.evidence["max_kinetic_ratio"] >= cfg.blowup_gradient_factor


def test_trajectory_series_length(grid64):
    u = gaussian(grid64, amplitude=0.2)
    cfg = StepperConfig(dt=1e-3, t_end=0.05, snapshot_stride=10)
    traj, _ = evolve(u, cfg)
    n_steps = round(0.05 / 1e-3)
    assert len(traj.times) == n_steps + 1
    assert traj.times[0] == 0.0
    assert np.all(np.diff(traj.times) > 0)
    for arr in traj.series.values():
        assert len(arr) == n_steps + 1


def test_flux_identity_free_gaussian(grid64):
    u0 = gaussian(grid64)
    cfg = StepperConfig(dt=1e-3, t_end=2.0, snapshot_stride=10**9, linear=True,
                        flux_radius=8.0)
    traj, _ = evolve(u0, cfg)
    assert flux_identity_residual(traj, 8.0) <= 5e-3


def test_flux_identity_zero(grid64):
    zero = RadialField(grid64, np.zeros(grid64.n))
    cfg = StepperConfig(dt=1e-3, t_end=0.01, snapshot_stride=10**9, flux_radius=8.0)
    traj, _ = evolve(zero, cfg)
    assert flux_identity_residual(traj, 8.0) == 0.0


def test_flux_identity_nonlinear_run(grid64):
    u0 = gaussian(grid64, amplitude=0.5)
    cfg = StepperConfig(dt=1e-3, t_end=2.0, snapshot_stride=10**9, flux_radius=8.0)
    traj, _ = evolve(u0, cfg)
    assert flux_identity_residual(traj, 8.0) <= 1e-2


def test_flux_identity_radius_mismatch(grid64):
    u0 = gaussian(grid64, amplitude=0.5)
    cfg = StepperConfig(dt=1e-3, t_end=0.01, snapshot_stride=10**9, flux_radius=8.0)
    traj, _ = evolve(u0, cfg)
    with pytest.raises(ContractError):
        flux_identity_residual(traj, 4.0)


def test_nonfinite_state_aborts_undecided(grid64, monkeypatch):
    """A NaN appearing mid-run aborts; without a gradient trigger the tag is Undecided."""
    import cqnls.dynamics as dyn

    real_phase = dyn._phase
    count = {"n": 0}

    def poisoned(v, dt):
        count["n"] += 1
        out = real_phase(v, dt)
        if count["n"] == 5:
            out = out.copy()
            out[0] = np.nan
        return out

    monkeypatch.setattr(dyn, "_phase", poisoned)
    u0 = gaussian(grid64, amplitude=0.3)
    cfg = StepperConfig(dt=1e-3, t_end=0.02, snapshot_stride=10**9)
    traj, outcome = evolve(u0, cfg)
    assert outcome.tag == UNDECIDED
    assert outcome.evidence.get("aborted_nonfinite")
    assert len(traj.times) == 5  # recorded through the last finite step
    assert np.all(np.isfinite(traj.series["mass"]))


def test_stepper_config_validation():
    with pytest.raises(ContractError):
        StepperConfig(dt=-1.0)
    with pytest.raises(ContractError):
        StepperConfig(dt=1.0, t_end=0.5)
    with pytest.raises(ContractError):
        StepperConfig(evacuation_epsilon=1.5)
    with pytest.raises(ContractError):
        StepperConfig(blowup_gradient_factor=0.5)
