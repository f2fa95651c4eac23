import math

import numpy as np
import pytest

from epipattern.kinetics import ModelParams, e2_equilibrium
from epipattern.patterns import (
    PatternClass,
    classify_pattern,
    cosine_spectrum,
    temporal_period,
    transient_onset,
)
from epipattern.pde import (
    FieldState,
    Grid1D,
    SimConfig,
    default_initial,
    simulate,
)
from epipattern.spectral import DiffusionParams

GRID = Grid1D(5.0, 512)


def make_states(times, field_of_t):
    """Synthetic trajectory: S is constant, I = field_of_t(t, x)."""
    x = GRID.x
    return [FieldState(float(t), np.full(GRID.n, 2.0), field_of_t(t, x))
            for t in times]


# ---------------------------------------------------------------------------
# spectra

def test_spectrum_of_constant_field():
    sp = cosine_spectrum(np.full(GRID.n, 3.25), GRID, 12)
    assert sp.amplitudes[0] == pytest.approx(3.25, rel=1e-12)
    assert np.all(np.abs(sp.amplitudes[1:]) <= 1e-12)


def test_spectrum_recovers_pure_mode():
    f = 3.0 * np.cos(5.0 * GRID.x / GRID.ell)
    sp = cosine_spectrum(f, GRID, 12)
    assert sp.amplitudes[5] == pytest.approx(3.0, abs=1e-6)
    others = np.delete(sp.amplitudes, 5)
    assert np.all(np.abs(others) <= 1e-8)
    assert sp.dominant_k == 5


def test_orthogonality_up_to_mode_ten():
    for j in range(1, 11):
        sp = cosine_spectrum(np.cos(j * GRID.x / GRID.ell), GRID, 14)
        for k in range(15):
            if k != j:
                assert abs(sp.amplitudes[k]) <= 1e-8


# ---------------------------------------------------------------------------
# periods

def test_period_of_synthetic_sinusoid():
    t = np.arange(0.0, 100.0, 0.01)
    v = np.sin(2.0 * math.pi * t / 7.0)
    assert temporal_period(t, v) == pytest.approx(7.0, abs=0.02)


def test_period_of_constant_is_none():
    t = np.linspace(0.0, 10.0, 500)
    assert temporal_period(t, np.full(500, 1.0)) is None


def test_period_rejects_nonmonotone_times():
    with pytest.raises(ValueError):
        temporal_period(np.array([0.0, 1.0, 0.5]), np.zeros(3))


# ---------------------------------------------------------------------------
# classification on synthetic trajectories

def test_classify_constant_steady():
    times = np.linspace(0.0, 100.0, 200)
    states = make_states(times, lambda t, x: np.full_like(x, 0.75))
    rep = classify_pattern(states, GRID, (0.0, 100.0))
    assert rep.pattern is PatternClass.CONSTANT_STEADY
    assert rep.temporal_period is None and rep.dominant_modes == ()


def test_classify_homogeneous_periodic():
    times = np.linspace(0.0, 100.0, 400)
    states = make_states(
        times, lambda t, x: 0.75 + 0.05 * math.sin(2 * math.pi * t / 7.0)
        + 0.0 * x)
    rep = classify_pattern(states, GRID, (0.0, 100.0))
    assert rep.pattern is PatternClass.HOMOGENEOUS_PERIODIC
    assert rep.temporal_period == pytest.approx(7.0, abs=0.3)


def test_classify_stationary_pattern():
    times = np.linspace(0.0, 100.0, 200)
    states = make_states(times, lambda t, x: 0.75 + 0.2 * np.cos(4 * x / 5.0))
    rep = classify_pattern(states, GRID, (0.0, 100.0))
    assert rep.pattern is PatternClass.STATIONARY_PATTERN
    assert rep.dominant_modes == (4,)
    assert rep.temporal_period is None


def test_classify_spatiotemporal():
    times = np.linspace(0.0, 100.0, 400)
    states = make_states(
        times, lambda t, x: 0.75 + 0.2 * math.sin(2 * math.pi * t / 9.0)
        * np.cos(3 * x / 5.0))
    rep = classify_pattern(states, GRID, (0.0, 100.0))
    assert rep.pattern is PatternClass.SPATIOTEMPORAL_PATTERN
    assert 3 in rep.dominant_modes


def test_window_validation():
    times = np.linspace(0.0, 10.0, 50)
    states = make_states(times, lambda t, x: np.full_like(x, 1.0))
    with pytest.raises(ValueError):
        classify_pattern(states, GRID, (0.0, 20.0))
    with pytest.raises(ValueError):
        classify_pattern(states, GRID, (8.0, 3.0))


# ---------------------------------------------------------------------------
# transient onset

def synthetic_ramp(t, x, t_on=50.0):
    amp = 0.0 if t < t_on else 0.3 * min(1.0, (t - t_on) / 10.0)
    return 0.75 + amp * np.cos(4 * x / 5.0)


def test_onset_of_ramped_pattern():
    times = np.linspace(0.0, 200.0, 400)
    states = make_states(times, synthetic_ramp)
    onset = transient_onset(states, GRID)
    assert onset == pytest.approx(51.0, abs=2.0)


def test_onset_zero_for_pattern_from_start():
    times = np.linspace(0.0, 100.0, 200)
    states = make_states(times, lambda t, x: 0.75 + 0.2 * np.cos(4 * x / 5.0))
    assert transient_onset(states, GRID) == 0.0


def test_onset_none_for_steady_run():
    times = np.linspace(0.0, 100.0, 200)
    states = make_states(times, lambda t, x: np.full_like(x, 0.75))
    assert transient_onset(states, GRID) is None


# ---------------------------------------------------------------------------
# reconstruction and linear mode selection

def test_reconstruction_from_half_spectrum():
    # a Neumann-compatible smooth field reconstructs from modes 0..n/2-1
    # to better than 1e-6 relative L2 (coefficients decay fast)
    grid = Grid1D(5.0, 256)
    x = grid.x
    f = np.exp(0.3 * np.cos(3 * x / 5.0)) + 0.05 * np.cos(7 * x / 5.0)
    k_max = grid.n // 2 - 1
    sp = cosine_spectrum(f, grid, k_max)
    ks = np.arange(k_max + 1)
    recon = np.cos(np.outer(x / grid.ell, ks)) @ sp.amplitudes
    w = np.full(grid.n, grid.dx)
    w[0] = w[-1] = grid.dx / 2
    err = math.sqrt(float(w @ (recon - f) ** 2) / float(w @ f**2))
    assert err <= 1e-6


def test_fastest_growing_mode_is_kbreve_at_onset():
    # r1 between the lowest threshold (k = 5) and the next one (k = 4):
    # seeding modes 3..7 equally, mode 5 outgrows the rest linearly
    p = ModelParams(A=0.4, d=0.1, beta=0.1, mu0=0.1, mu1=0.2, b=0.3)
    e2 = e2_equilibrium(p)
    grid = Grid1D(5.0, 256)
    diff = DiffusionParams(1.63, 0.01, 5.0)
    bump = sum(1e-6 * np.cos(k * grid.x / 5.0) for k in range(3, 8))
    init = FieldState(0.0, e2.S + bump, e2.I + bump)
    cfg = SimConfig(grid, dt=0.01, t_end=1200.0, snapshot_stride=2000)
    res = simulate(p, diff, cfg, init)
    sp = cosine_spectrum(res.final.I - float(np.mean(res.final.I)), grid, 10)
    assert sp.dominant_k == 5


# ---------------------------------------------------------------------------
# stride invariance on a real (short) simulation

def test_classification_invariant_to_stride_doubling():
    p = ModelParams(A=0.4, d=0.1, beta=0.1, mu0=0.1, mu1=0.2, b=0.3)
    e2 = e2_equilibrium(p)
    grid = Grid1D(5.0, 128)
    diff = DiffusionParams(1.0, 0.01, 5.0)
    cfg = SimConfig(grid, dt=0.01, t_end=60.0, snapshot_stride=50)
    res = simulate(p, diff, cfg, default_initial(e2, grid))
    full = classify_pattern(res.states, grid, (30.0, 60.0))
    halved = classify_pattern(res.states[::2], grid, (30.0, 60.0))
    assert full.pattern is halved.pattern
