"""Classification of simulated space-time fields.

Snapshots are projected onto the Neumann cosine basis; the time-averaged
energy in the nonzero modes measures spatial inhomogeneity, while the
peak-to-peak wander of the spatial mean and of the dominant mode amplitude
measures temporal oscillation.  Crossing the (relative) thresholds in either
direction separates the four regimes: constant steady state, spatially
homogeneous oscillation, stationary spatial pattern, and spatiotemporal
pattern.  Classification runs on the infected field; susceptible-field
indices are reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.signal import find_peaks

from .pde import FieldState, Grid1D, SimulationResult

__all__ = [
    "ModeSpectrum",
    "PatternClass",
    "PatternReport",
    "cosine_spectrum",
    "mode_series",
    "temporal_period",
    "classify_pattern",
    "transient_onset",
]

# relative thresholds separating solver noise (~1e-6) from patterns (~1)
SPATIAL_REL_TOL = 1e-3
TEMPORAL_REL_TOL = 1e-3
PEAK_PROMINENCE_FRAC = 0.05


@dataclass(frozen=True)
class ModeSpectrum:
    """Cosine-basis projection a_k of one snapshot; a_0 is the spatial mean."""

    amplitudes: np.ndarray

    @property
    def dominant_k(self) -> int:
        if len(self.amplitudes) < 2:
            return 0
        return int(np.argmax(np.abs(self.amplitudes[1:]))) + 1


class PatternClass(Enum):
    CONSTANT_STEADY = "constant_steady"
    HOMOGENEOUS_PERIODIC = "homogeneous_periodic"
    STATIONARY_PATTERN = "stationary_pattern"
    SPATIOTEMPORAL_PATTERN = "spatiotemporal_pattern"


@dataclass(frozen=True)
class PatternReport:
    pattern: PatternClass
    dominant_modes: tuple[int, ...]
    temporal_period: float | None
    transient_onset: float | None
    indices: dict = field(default_factory=dict)


def cosine_spectrum(f: np.ndarray, grid: Grid1D, k_max: int) -> ModeSpectrum:
    """Project a field onto cos(k*x/ell), k = 0..k_max, by trapezoid
    quadrature on the solver grid: a_k = (2 - delta_k0)/(ell*pi) *
    integral f(x) cos(kx/ell) dx."""
    x = grid.x
    w = np.full(grid.n, grid.dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    ks = np.arange(k_max + 1)
    basis = np.cos(np.outer(ks, x) / grid.ell)       # (k_max+1, n)
    scale = np.where(ks == 0, 1.0, 2.0) / (grid.ell * math.pi)
    return ModeSpectrum(scale * (basis @ (w * np.asarray(f, dtype=float))))


def mode_series(states: list[FieldState], grid: Grid1D, k_max: int,
                which: str = "I") -> tuple[np.ndarray, np.ndarray]:
    """Times and the (len(states), k_max+1) matrix of mode amplitudes."""
    ts = np.array([s.t for s in states])
    amps = np.stack([cosine_spectrum(getattr(s, which), grid, k_max).amplitudes
                     for s in states])
    return ts, amps


def temporal_period(times: np.ndarray, values: np.ndarray) -> float | None:
    """Mean peak-to-peak spacing of local maxima with prominence >= 5% of the
    series range; None with fewer than 3 peaks."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    rng = values.max() - values.min()
    if rng <= 0:
        return None
    peaks, _ = find_peaks(values, prominence=PEAK_PROMINENCE_FRAC * rng)
    if len(peaks) < 3:
        return None
    return float(np.mean(np.diff(times[peaks])))


def _window_states(result, window: tuple[float, float]) -> list[FieldState]:
    states = result.states if isinstance(result, SimulationResult) else list(result)
    t_last = states[-1].t
    t0, t1 = window
    if t1 > t_last * (1.0 + 1e-12) or t0 < 0 or t0 >= t1:
        raise ValueError(f"analysis window {window} exceeds trajectory "
                         f"(last t = {t_last:g})")
    return [s for s in states if t0 <= s.t <= t1]


def classify_pattern(result, grid: Grid1D, window: tuple[float, float],
                     k_max: int = 16) -> PatternReport:
    """Classify the late-time regime of a simulation over a time window.

    Spatial index sigma_x: time average of max_{k>=1} |a_k| of the infected
    field.  Temporal index sigma_t: the larger of the peak-to-peak spans of
    a_0(t) and of the dominant-mode amplitude a_k(t).  Both are compared
    against 1e-3 of the mean infection level.
    """
    states = _window_states(result, window)
    if len(states) < 4:
        raise ValueError("analysis window holds too few snapshots")
    ts, amps = mode_series(states, grid, k_max, which="I")
    _, amps_S = mode_series(states, grid, k_max, which="S")

    a0 = amps[:, 0]
    nonzero = np.abs(amps[:, 1:])
    sigma_x = float(nonzero.max(axis=1).mean())
    dominant = int(np.argmax(nonzero.mean(axis=0))) + 1
    dom_series = amps[:, dominant]
    p2p_a0 = float(a0.max() - a0.min())
    p2p_dom = float(dom_series.max() - dom_series.min())
    sigma_t = max(p2p_a0, p2p_dom)
    scale = max(abs(float(a0.mean())), 1e-300)

    spatial = sigma_x > SPATIAL_REL_TOL * scale
    temporal = sigma_t > TEMPORAL_REL_TOL * scale

    if spatial and temporal:
        cls = PatternClass.SPATIOTEMPORAL_PATTERN
    elif spatial:
        cls = PatternClass.STATIONARY_PATTERN
    elif temporal:
        cls = PatternClass.HOMOGENEOUS_PERIODIC
    else:
        cls = PatternClass.CONSTANT_STEADY

    period = None
    if temporal:
        series = a0 if p2p_a0 >= p2p_dom else dom_series
        period = temporal_period(ts, series)

    # modes whose mean amplitude is within a factor 3 of the dominant one
    mean_amp = nonzero.mean(axis=0)
    dom_set = tuple(int(k) + 1 for k in np.flatnonzero(mean_amp >= mean_amp.max() / 3.0)) \
        if spatial else ()

    peak_I = max(float(s.I.max()) for s in states)
    return PatternReport(
        pattern=cls,
        dominant_modes=dom_set or ((dominant,) if spatial else ()),
        temporal_period=period,
        transient_onset=None,
        indices={
            "sigma_x": sigma_x,
            "sigma_t": sigma_t,
            "scale": scale,
            "p2p_a0": p2p_a0,
            "p2p_dominant": p2p_dom,
            "dominant_k": dominant,
            "peak_I": peak_I,
            "sigma_x_S": float(np.abs(amps_S[:, 1:]).max(axis=1).mean()),
            "window": (float(ts[0]), float(ts[-1])),
        })


def transient_onset(result, grid: Grid1D, threshold_fraction: float = 0.2,
                    k_max: int = 16) -> float | None:
    """Earliest time the spatial index reaches ``threshold_fraction`` of its
    late-time plateau without ever falling back below half that level.

    None when the trajectory never develops spatial structure (plateau
    indistinguishable from solver noise).
    """
    states = result.states if isinstance(result, SimulationResult) else list(result)
    ts, amps = mode_series(states, grid, k_max, which="I")
    sx = np.abs(amps[:, 1:]).max(axis=1)
    late = sx[ts >= ts[-1] - 0.1 * (ts[-1] - ts[0])]
    plateau = float(np.median(late))
    scale = max(abs(float(amps[:, 0].mean())), 1e-300)
    if plateau <= SPATIAL_REL_TOL * scale:
        return None
    thr = threshold_fraction * plateau
    above_half = sx >= 0.5 * thr
    for i in range(len(ts)):
        if sx[i] >= thr and above_half[i:].all():
            return float(ts[i])
    return None
