"""Time integration of the homogeneous kinetics and limit-cycle census.

Cycles are located on the Poincare section {S = S2, dS/dt > 0} (upward
crossings happen at I < I2).  Seed trajectories provide first estimates of
return-map fixed points; the census then scans the one-dimensional return map
P(I) for sign changes of P(I) - I and polishes each root with Brent, which
remains fast even for the weakly attracting cycles near the generalized Hopf
point where naive orbit-following would need ~1e4 time units to settle.
Stability comes from the finite-difference multiplier P'(I*); every unstable
cycle is additionally confirmed as an attracting cycle of the time-reversed
field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .kinetics import ModelParams, e2_equilibrium, kinetics_rhs

__all__ = [
    "OdeTrajectory",
    "CycleStability",
    "LimitCycle",
    "integrate_ode",
    "return_map",
    "find_limit_cycles",
    "seed_attractors",
]

RETURN_RESIDUAL_REL = 1e-7      # |P(I*) - I*| <= this * I* at convergence
CYCLE_AMPLITUDE_FLOOR = 1e-5    # section offsets below this * (1+I2) are E2
MIN_RETURNS = 8


@dataclass
class OdeTrajectory:
    times: np.ndarray            # shape (m,)
    states: np.ndarray           # shape (m, 2) of (S, I)
    status: str = "ok"           # "ok" or the solver failure message

    @property
    def S(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def I(self) -> np.ndarray:
        return self.states[:, 1]


class CycleStability(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class LimitCycle:
    period: float
    section_points: tuple[tuple[float, float], ...]   # (S, I) on the section
    stability: CycleStability
    amplitude: float             # max I - min I around the cycle
    multiplier: float            # return-map derivative P'(I*)
    residual: float              # |P(I*) - I*|
    i_min: float
    i_max: float

    @property
    def section_I(self) -> float:
        return self.section_points[0][1]


def _rhs(t, y, params: ModelParams, sign: float):
    dS, dI = kinetics_rhs(params, y[0], y[1])
    return (sign * dS, sign * dI)


def integrate_ode(params: ModelParams, initial: tuple[float, float],
                  t_end: float, tol: float = 1e-8,
                  t_eval: np.ndarray | None = None,
                  reverse: bool = False) -> OdeTrajectory:
    """Integrate the kinetics with an adaptive embedded 4(5) pair.

    The initial state should lie in the invariant region
    {S >= 0, I >= 0, S + I <= A/d}; trajectories then stay there up to
    integrator tolerance.  A solver failure returns the partial trajectory
    with the failure message in ``status``.
    """
    S0, I0 = initial
    if S0 < 0 or I0 < 0 or S0 + I0 > params.A / params.d * (1.0 + 1e-9):
        raise ValueError("initial state outside the invariant region")
    sol = solve_ivp(_rhs, (0.0, t_end), [S0, I0], method="RK45",
                    rtol=tol, atol=tol * 1e-3, t_eval=t_eval,
                    args=(params, -1.0 if reverse else 1.0))
    return OdeTrajectory(sol.t, sol.y.T.copy(),
                         "ok" if sol.success else sol.message)


# ---------------------------------------------------------------------------
# Poincare return map on {S = S2, dS/dt > 0}

def _crossing_event(S2: float, direction: float):
    def ev(t, y, *args):
        return y[0] - S2
    ev.direction = direction
    ev.terminal = True
    return ev


def return_map(params: ModelParams, I: float, S2: float,
               n: int = 1, tol: float = 1e-11, t_cap: float = 2000.0,
               reverse: bool = False) -> tuple[float, float]:
    """n-th return (I_n, t_n) of the orbit started at (S2, I) to the section.

    Upward S-crossings for the forward field, downward for the reversed one
    (the reversed field flips the crossing orientation).
    """
    ev = _crossing_event(S2, -1.0 if reverse else 1.0)
    y = [S2, I]
    t_acc, left = 0.0, n
    sign = -1.0 if reverse else 1.0
    # the event function is exactly zero at departure, which scipy would
    # report as an immediate crossing; hop a microscopic step off the
    # section before arming the terminal event
    hop = 1e-5 / max(1.0, math.sqrt(abs(kinetics_rhs(params, S2, I)[0]) + 1.0))
    while left > 0:
        pre = solve_ivp(_rhs, (0.0, hop), y, method="RK45",
                        rtol=tol, atol=1e-14, args=(params, sign))
        t_acc += pre.t[-1]
        sol = solve_ivp(_rhs, (0.0, t_cap), pre.y[:, -1], method="RK45",
                        rtol=tol, atol=1e-14, events=ev, args=(params, sign))
        if not sol.t_events[0].size:
            raise RuntimeError(f"orbit did not return to the section within "
                               f"t={t_cap:g} (started at I={I:g})")
        t_acc += sol.t_events[0][0]
        y = list(sol.y_events[0][0])
        left -= 1
    return y[1], t_acc


def _aitken(seq: np.ndarray) -> float | None:
    """Aitken delta-squared limit estimate of a near-geometric sequence."""
    if len(seq) < 3:
        return None
    x0, x1, x2 = seq[-3], seq[-2], seq[-1]
    d2 = x2 - 2.0 * x1 + x0
    if d2 == 0.0:
        return float(x2)
    return float(x2 - (x2 - x1) ** 2 / d2)


def _collect_returns(params: ModelParams, initial: tuple[float, float],
                     S2: float, t_transient: float, t_measure: float,
                     tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Section crossings (times, I-values) after a transient, from any seed."""
    tr = integrate_ode(params, initial, t_transient, tol=tol)
    y0 = tr.states[-1]
    ev = _crossing_event(S2, +1.0)
    ev.terminal = False
    sol = solve_ivp(_rhs, (0.0, t_measure), y0, method="RK45",
                    rtol=tol, atol=1e-13, events=ev, args=(params, 1.0))
    return sol.t_events[0], sol.y_events[0][:, 1] if sol.t_events[0].size else np.array([])


def _polish_fixed_point(params: ModelParams, S2: float, lo: float, hi: float,
                        tol: float = 1e-11) -> float:
    g = lambda I: return_map(params, I, S2, tol=tol)[0] - I
    return brentq(g, lo, hi, xtol=1e-12, maxiter=200)


def _measure_cycle(params: ModelParams, I_star: float, S2: float,
                   tol: float = 1e-11) -> LimitCycle:
    PI, period = return_map(params, I_star, S2, tol=tol)
    residual = abs(PI - I_star)
    eps = max(1e-7, 1e-3 * abs(I_star - PI), 1e-4 * abs(e2_of(params) - I_star))
    Pp = (return_map(params, I_star + eps, S2, tol=tol)[0]
          - return_map(params, I_star - eps, S2, tol=tol)[0]) / (2.0 * eps)
    # one lap with dense output for the amplitude
    sol = solve_ivp(_rhs, (0.0, period), [S2, I_star], method="RK45",
                    rtol=tol, atol=1e-14, args=(params, 1.0), dense_output=True)
    ts = np.linspace(0.0, period, 2000)
    I_lap = sol.sol(ts)[1]
    stability = CycleStability.STABLE if abs(Pp) < 1.0 else CycleStability.UNSTABLE
    down = _crossing_event(S2, -1.0)
    down.terminal = True
    sol2 = solve_ivp(_rhs, (0.0, period), [S2, I_star], method="RK45",
                     rtol=tol, atol=1e-14, events=down, args=(params, 1.0))
    pts = [(S2, I_star)]
    if sol2.t_events[0].size:
        pts.append((S2, float(sol2.y_events[0][0][1])))
    return LimitCycle(period=float(period), section_points=tuple(pts),
                      stability=stability,
                      amplitude=float(I_lap.max() - I_lap.min()),
                      multiplier=float(Pp), residual=float(residual),
                      i_min=float(I_lap.min()), i_max=float(I_lap.max()))


def e2_of(params: ModelParams) -> float:
    return e2_equilibrium(params).I


def find_limit_cycles(params: ModelParams,
                      seeds: list[tuple[float, float]] | None = None,
                      t_transient: float = 500.0, t_measure: float = 300.0,
                      scan_points: int = 40,
                      scan_lo_frac: float = 0.15) -> list[LimitCycle]:
    """Census of periodic orbits around E2, smallest section offset first.

    Seed orbits (forward, after ``t_transient``) contribute return sequences
    whose Aitken limits widen the scan interval; the census itself brackets
    every root of P(I) - I on the section segment (scan_lo_frac*I2, I2) and
    classifies each by its multiplier.  Unstable cycles are cross-checked by
    reversed-time integration (they attract the reversed flow).
    """
    e2 = e2_equilibrium(params)
    S2, I2 = e2.S, e2.I
    lo = scan_lo_frac * I2

    if seeds:
        for seed in seeds:
            try:
                _, Is = _collect_returns(params, seed, S2,
                                         t_transient, t_measure)
            except (RuntimeError, ValueError):
                continue
            if len(Is) >= 3:
                est = _aitken(Is)
                if est is not None and 0 < est < I2:
                    lo = min(lo, 0.8 * est)

    grid = np.linspace(lo, I2 * (1.0 - 1e-3), scan_points)
    gvals = np.full(grid.shape, np.nan)
    for i, I in enumerate(grid):
        try:
            gvals[i] = return_map(params, float(I), S2)[0] - I
        except RuntimeError:
            pass

    cycles = []
    for i in range(len(grid) - 1):
        g0, g1 = gvals[i], gvals[i + 1]
        if not (math.isfinite(g0) and math.isfinite(g1)) or g0 * g1 >= 0:
            continue
        I_star = _polish_fixed_point(params, S2, float(grid[i]), float(grid[i + 1]))
        if abs(I_star - I2) < CYCLE_AMPLITUDE_FLOOR * (1.0 + I2):
            continue   # converged onto the equilibrium, not a cycle
        cyc = _measure_cycle(params, I_star, S2)
        if cyc.residual > RETURN_RESIDUAL_REL * max(abs(I_star), 1e-12):
            continue
        if cyc.stability is CycleStability.UNSTABLE:
            if not _confirm_reversed(params, cyc, S2):
                continue
        cycles.append(cyc)
    cycles.sort(key=lambda c: abs(c.section_I - I2))
    return cycles


def _confirm_reversed(params: ModelParams, cyc: LimitCycle, S2: float) -> bool:
    """An unstable forward cycle must be an attracting cycle of the reversed
    field: a few reversed returns from the cycle stay on it and reproduce the
    period to 1e-4 relative."""
    try:
        I1, t1 = return_map(params, cyc.section_I, S2, n=3, reverse=True)
    except RuntimeError:
        return False
    period_rev = t1 / 3.0
    on_cycle = abs(I1 - cyc.section_I) <= 1e-4 * (1.0 + abs(cyc.section_I))
    period_ok = abs(period_rev - cyc.period) <= 1e-4 * cyc.period
    return on_cycle and period_ok


def seed_attractors(params: ModelParams, seeds: list[tuple[float, float]],
                    cycles: list[LimitCycle],
                    t_transient: float = 500.0, t_measure: float = 300.0
                    ) -> list[str]:
    """Label the forward attractor of each seed.

    Returns one of "equilibrium", "cycle[i]" (index into ``cycles``), or
    "undetermined" per seed, from the Aitken limit of its return sequence.
    """
    from .kinetics import stability_E2, E2Stability

    e2 = e2_equilibrium(params)
    S2, I2 = e2.S, e2.I
    e2_attracting = stability_E2(params) is not E2Stability.UNSTABLE
    candidates = [("equilibrium", I2)] if e2_attracting else []
    candidates += [(f"cycle[{i}]", c.section_I) for i, c in enumerate(cycles)
                   if c.stability is CycleStability.STABLE]

    labels = []
    for seed in seeds:
        try:
            _, Is = _collect_returns(params, seed, S2, t_transient, t_measure)
        except (RuntimeError, ValueError):
            labels.append("undetermined")
            continue
        if len(Is) < 3:
            # stopped crossing the section: settled at an equilibrium
            tr = integrate_ode(params, seed, t_transient + t_measure)
            S_end, I_end = tr.states[-1]
            near_e2 = abs(S_end - e2.S) + abs(I_end - I2) < 1e-3 * (1.0 + I2)
            labels.append("equilibrium" if near_e2 else "undetermined")
            continue
        if not candidates:
            labels.append("undetermined")
            continue
        # monotone drift of the return tail points at the attractor; the
        # convergence is far too slow near the generalized Hopf point for a
        # three-point extrapolation to be trustworthy
        tail = Is[-min(10, len(Is)):]
        drift = tail[-1] - tail[0]
        noise = 1e-9 * (1.0 + abs(tail[-1]))
        pool = candidates
        if abs(drift) > noise:
            ahead = [(name, c) for name, c in candidates
                     if (c - tail[-1]) * math.copysign(1.0, drift) >= -noise]
            if ahead:
                pool = ahead
        name = min(pool, key=lambda nc: abs(nc[1] - tail[-1]))[0]
        labels.append(name)
    return labels
