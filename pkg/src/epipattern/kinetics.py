"""Reaction kinetics of the SIR model with a saturating, resource-limited
recovery rate.

The spatially homogeneous dynamics are

    dS/dt = A - d*S - beta*S*I
    dI/dt = beta*S*I - d*I - h(I)*I,      h(I) = mu0 + (mu1 - mu0)*b/(I + b)

This module provides the parameter container, the recovery function, the
basic reproduction number, constant steady states (via the quadratic that
endemic infection levels satisfy), the Jacobian at a steady state, and the
cubic criterion deciding the stability of the upper endemic state E2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ModelParams",
    "Equilibrium",
    "EquilibriumKind",
    "QuadraticCoeffs",
    "OdeJacobian",
    "PsiCase",
    "PsiClassification",
    "E2Stability",
    "recovery_rate",
    "recovery_rate_derivative",
    "basic_reproduction_number",
    "endemic_quadratic",
    "find_equilibria",
    "endemic_equilibria",
    "kinetics_rhs",
    "ode_jacobian",
    "classify_psi",
    "stability_E2",
]

# Tolerances for degenerate-root handling; exact-arithmetic conditions in the
# theory are replaced by these floating-point guards.
DELTA_REL_TOL = 1e-12
ROOT_COLLAPSE_TOL = 1e-8
MARGINAL_B1_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """The six positive constants of the reaction kinetics.

    A     recruitment rate of susceptibles (individuals/time)
    d     natural death rate (1/time)
    beta  transmission rate (1/(individuals*time))
    mu0   minimum per-capita recovery rate (1/time)
    mu1   maximum per-capita recovery rate (1/time)
    b     health-resource availability (individuals)
    """

    A: float
    d: float
    beta: float
    mu0: float
    mu1: float
    b: float

    def __post_init__(self):
        for name in ("A", "d", "beta", "mu0", "mu1", "b"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"parameter {name} must be finite and > 0, got {v!r}")
        if self.mu1 < self.mu0:
            raise ValueError(f"mu1 ({self.mu1}) must be >= mu0 ({self.mu0})")

    def replace(self, **kw) -> "ModelParams":
        d = dict(A=self.A, d=self.d, beta=self.beta, mu0=self.mu0, mu1=self.mu1, b=self.b)
        d.update(kw)
        return ModelParams(**d)


class EquilibriumKind(Enum):
    DISEASE_FREE = "disease_free"
    ENDEMIC_LOW = "endemic_low"      # E1, lower root of the endemic quadratic
    ENDEMIC_HIGH = "endemic_high"    # E2, upper root
    DEGENERATE = "degenerate"        # E*, coalesced double root


@dataclass(frozen=True)
class Equilibrium:
    S: float
    I: float
    kind: EquilibriumKind


@dataclass(frozen=True)
class QuadraticCoeffs:
    """Coefficients of f(I) = a2*I^2 + a1*I + a0 whose positive roots are the
    endemic infection levels, plus its discriminant (expanded form)."""

    a2: float
    a1: float
    a0: float
    delta: float


@dataclass(frozen=True)
class OdeJacobian:
    """Jacobian entries of the kinetics at a steady state.

    The characteristic polynomial is lambda^2 + b1*lambda + b0, i.e. b1 is the
    negated trace and b0 the determinant.
    """

    d11: float
    d12: float
    d21: float
    d22: float

    @property
    def b1(self) -> float:
        return -(self.d11 + self.d22)

    @property
    def b0(self) -> float:
        return self.d11 * self.d22 - self.d12 * self.d21

    @property
    def trace(self) -> float:
        return self.d11 + self.d22

    @property
    def det(self) -> float:
        return self.b0

    def eigenvalues(self) -> tuple[complex, complex]:
        tr, det = self.trace, self.det
        disc = tr * tr - 4.0 * det
        if disc >= 0.0:
            s = math.sqrt(disc)
            return ((tr + s) / 2.0 + 0j, (tr - s) / 2.0 + 0j)
        s = math.sqrt(-disc)
        return (complex(tr / 2.0, s / 2.0), complex(tr / 2.0, -s / 2.0))


class PsiCase(Enum):
    ALWAYS_POSITIVE = "always_positive"
    DOUBLE_ROOT = "double_root"
    TWO_ROOTS = "two_roots"


@dataclass(frozen=True)
class PsiClassification:
    """Sign structure of the cubic Psi(I) = (I+b)^2 * B1(I) on I > 0.

    B1 < 0 (and E2 unstable) exactly on the interval between the two positive
    roots, when they exist.
    """

    omega: float
    omega_bar: float
    case: PsiCase
    roots: tuple[float, ...] = ()   # (I_tilde,) or (I_check, I_hat)


class E2Stability(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL_HOPF = "marginal_hopf"


# ---------------------------------------------------------------------------
# elementary pieces

def recovery_rate(params: ModelParams, I: float):
    """Saturating recovery rate h(I) = mu0 + (mu1 - mu0)*b/(I + b).

    Non-increasing in I, with h(0) = mu1 and h -> mu0 as I -> infinity.
    Accepts scalars or arrays; raises for negative infection levels.
    """
    I = np.asarray(I, dtype=float)
    if np.any(I < 0):
        raise ValueError("infected level I must be >= 0")
    out = params.mu0 + (params.mu1 - params.mu0) * params.b / (I + params.b)
    return float(out) if out.ndim == 0 else out


def recovery_rate_derivative(params: ModelParams, I: float):
    """h'(I) = -(mu1 - mu0)*b/(I + b)^2  (<= 0)."""
    I = np.asarray(I, dtype=float)
    out = -(params.mu1 - params.mu0) * params.b / (I + params.b) ** 2
    return float(out) if out.ndim == 0 else out


def basic_reproduction_number(params: ModelParams) -> float:
    """R0 = beta*A / (d*(d + mu1)), from the next-generation matrix at the
    disease-free state."""
    return params.beta * params.A / (params.d * (params.d + params.mu1))


def kinetics_rhs(params: ModelParams, S, I):
    """Right-hand side (dS/dt, dI/dt) of the homogeneous kinetics.

    Vectorized over S, I arrays; used by both the ODE and PDE integrators.
    """
    h = params.mu0 + (params.mu1 - params.mu0) * params.b / (I + params.b)
    dS = params.A - params.d * S - params.beta * S * I
    dI = (params.beta * S - params.d - h) * I
    return dS, dI


# ---------------------------------------------------------------------------
# steady states

def endemic_quadratic(params: ModelParams) -> QuadraticCoeffs:
    """Quadratic f(I) whose positive roots are endemic infection levels.

    a2 = (d + mu0)*beta
    a1 = d^2 + (b*beta + mu0)*d + (b*mu1 - A)*beta
    a0 = b*d*(d + mu1)*(1 - R0)

    ``delta`` is the discriminant in its fully expanded form, which agrees
    with a1^2 - 4*a2*a0 up to rounding.
    """
    A, d, beta, mu0, mu1, b = (params.A, params.d, params.beta,
                               params.mu0, params.mu1, params.b)
    a2 = (d + mu0) * beta
    a1 = d * d + (b * beta + mu0) * d + (b * mu1 - A) * beta
    a0 = b * d * (d + mu1) * (1.0 - basic_reproduction_number(params))
    delta = ((d + mu1) ** 2 * beta**2 * b**2
             + 2.0 * A * (d + 2.0 * mu0 - mu1) * beta**2 * b
             - 2.0 * d * (d + mu1) * (d + mu0) * beta * b
             + A**2 * beta**2
             - 2.0 * d * (d + mu0) * A * beta
             + d**2 * (d + mu0) ** 2)
    return QuadraticCoeffs(a2, a1, a0, delta)


def _quadratic_roots(q: QuadraticCoeffs) -> tuple[float, float]:
    """Both roots of f, in increasing order, via the cancellation-safe form
    (relevant when a0 ~ 0, i.e. R0 ~ 1)."""
    disc = q.a1 * q.a1 - 4.0 * q.a2 * q.a0
    s = math.sqrt(max(disc, 0.0))
    sign = 1.0 if q.a1 >= 0 else -1.0
    p = -(q.a1 + sign * s) / 2.0
    if p == 0.0:   # a1 == 0 and disc == 0
        return 0.0, 0.0
    r1, r2 = p / q.a2, q.a0 / p
    return (r1, r2) if r1 <= r2 else (r2, r1)


def _endemic_point(params: ModelParams, I: float, kind: EquilibriumKind) -> Equilibrium:
    S = (recovery_rate(params, I) + params.d) / params.beta
    return Equilibrium(S, I, kind)


def find_equilibria(params: ModelParams) -> list[Equilibrium]:
    """All constant steady states: the disease-free state plus endemic roots.

    Case analysis on (R0, a1, delta): a unique upper state E2 for R0 > 1 (or
    R0 = 1 with a1 < 0); a pair E1 < E2 for R0 < 1, delta > 0, a1 < 0,
    collapsing to a degenerate E* when delta ~ 0; otherwise disease-free only.
    """
    out = [Equilibrium(params.A / params.d, 0.0, EquilibriumKind.DISEASE_FREE)]
    q = endemic_quadratic(params)
    disc = q.a1 * q.a1 - 4.0 * q.a2 * q.a0

    if q.a0 < 0.0:                      # R0 > 1: exactly one positive root
        _, hi = _quadratic_roots(q)
        out.append(_endemic_point(params, hi, EquilibriumKind.ENDEMIC_HIGH))
        return out
    if q.a0 == 0.0:                     # R0 = 1: positive root iff a1 < 0
        if q.a1 < 0.0:
            out.append(_endemic_point(params, -q.a1 / q.a2, EquilibriumKind.ENDEMIC_HIGH))
        return out

    # R0 < 1: need a1 < 0 and delta >= 0 for positive roots
    if q.a1 >= 0.0:
        return out
    disc_tol = DELTA_REL_TOL * max(q.a1 * q.a1, 4.0 * abs(q.a2 * q.a0))
    if disc < -disc_tol:
        return out
    lo, hi = _quadratic_roots(q)
    if abs(disc) <= disc_tol or (hi - lo) <= ROOT_COLLAPSE_TOL * (1.0 + abs(hi)):
        out.append(_endemic_point(params, 0.5 * (lo + hi), EquilibriumKind.DEGENERATE))
        return out
    out.append(_endemic_point(params, lo, EquilibriumKind.ENDEMIC_LOW))
    out.append(_endemic_point(params, hi, EquilibriumKind.ENDEMIC_HIGH))
    return out


def endemic_equilibria(params: ModelParams) -> list[Equilibrium]:
    return [e for e in find_equilibria(params) if e.kind is not EquilibriumKind.DISEASE_FREE]


def e2_equilibrium(params: ModelParams) -> Equilibrium:
    """The upper endemic state E2 (or the degenerate E*); raises if absent."""
    for e in find_equilibria(params):
        if e.kind in (EquilibriumKind.ENDEMIC_HIGH, EquilibriumKind.DEGENERATE):
            return e
    raise ValueError("E2 does not exist for these parameters")


# ---------------------------------------------------------------------------
# linearization

def ode_jacobian(params: ModelParams, eq: Equilibrium) -> OdeJacobian:
    """Jacobian of the kinetics at a steady state.

    Uses the general partials, which reduce at an endemic point to
    [[-(d+beta*I), -(h+d)], [beta*I, -h'(I)*I]].
    """
    S, I = eq.S, eq.I
    h = recovery_rate(params, I)
    hp = recovery_rate_derivative(params, I)
    return OdeJacobian(
        d11=-(params.d + params.beta * I),
        d12=-params.beta * S,
        d21=params.beta * I,
        d22=params.beta * S - params.d - h - hp * I,
    )


def b1_b0(params: ModelParams, I: float) -> tuple[float, float]:
    """Negated trace and determinant of the Jacobian at an endemic level I."""
    h = recovery_rate(params, I)
    hp = recovery_rate_derivative(params, I)
    b1 = params.d + params.beta * I + hp * I
    b0 = (params.d + params.beta * I) * hp * I + params.beta * (h + params.d) * I
    return b1, b0


# ---------------------------------------------------------------------------
# stability of E2 via the cubic Psi

def _psi_poly(params: ModelParams) -> tuple[float, float, float, float]:
    """Coefficients (c3, c2, c1, c0) of Psi(I) = (I+b)^2 * B1(I)."""
    d, beta, mu0, mu1, b = params.d, params.beta, params.mu0, params.mu1, params.b
    return (beta,
            2.0 * b * beta + d,
            b * b * beta + 2.0 * b * d - b * mu1 + b * mu0,
            b * b * d)


def psi_value(params: ModelParams, I):
    c3, c2, c1, c0 = _psi_poly(params)
    return ((c3 * I + c2) * I + c1) * I + c0


def classify_psi(params: ModelParams) -> PsiClassification:
    """Decide whether Psi(I) has positive roots.

    With wbar = mu1 - mu0 and the threshold
    w = [8 b^2 beta^2 + 20 b beta d - d^2 + sqrt(d (8 b beta + d)^3)] / (8 b beta),
    Psi > 0 on I > 0 when wbar <= w; a double root occurs at wbar = w; two
    simple positive roots I_check < I_hat exist when wbar > w.  Roots are
    bracketed via the positive critical point of Psi and refined with Brent.
    """
    d, beta, b = params.d, params.beta, params.b
    omega_bar = params.mu1 - params.mu0
    omega = (8.0 * b**2 * beta**2 + 20.0 * b * beta * d - d**2
             + math.sqrt(d * (8.0 * b * beta + d) ** 3)) / (8.0 * b * beta)

    if omega_bar <= b * beta + 2.0 * d or omega_bar < omega:
        return PsiClassification(omega, omega_bar, PsiCase.ALWAYS_POSITIVE)

    c3, c2, c1, c0 = _psi_poly(params)
    # positive critical point of Psi (exists since Psi'(0) = c1 < 0 here)
    crit = (-c2 + math.sqrt(c2 * c2 - 3.0 * c3 * c1)) / (3.0 * c3)

    if omega_bar == omega or abs(omega_bar - omega) <= 1e-12 * max(1.0, abs(omega)):
        return PsiClassification(omega, omega_bar, PsiCase.DOUBLE_ROOT, (crit,))

    f = lambda I: ((c3 * I + c2) * I + c1) * I + c0
    if f(crit) >= 0.0:
        # wbar > w analytically but the minimum does not dip below zero in
        # floating point: treat as the boundary double-root case
        return PsiClassification(omega, omega_bar, PsiCase.DOUBLE_ROOT, (crit,))

    # upper bracket: start from a Cauchy-style bound and expand until Psi > 0
    ub = 1.0 + (2.0 * b * beta + d) / beta + abs(c1) / beta + c0 / beta
    while f(ub) <= 0.0:
        ub *= 2.0
    lo = brentq(f, 0.0, crit, xtol=1e-12, maxiter=200)
    hi = brentq(f, crit, ub, xtol=1e-12, maxiter=200)
    return PsiClassification(omega, omega_bar, PsiCase.TWO_ROOTS, (lo, hi))


def stability_E2(params: ModelParams) -> E2Stability:
    """Local stability of E2: unstable exactly when the infection level I2
    falls strictly between the two positive roots of Psi; marginal when the
    damping coefficient B1(I2) vanishes to tolerance."""
    e2 = e2_equilibrium(params)
    b1, _ = b1_b0(params, e2.I)
    if abs(b1) <= MARGINAL_B1_TOL * (params.d + params.beta * e2.I):
        return E2Stability.MARGINAL_HOPF
    cls = classify_psi(params)
    if cls.case is PsiCase.TWO_ROOTS:
        lo, hi = cls.roots
        if lo < e2.I < hi:
            return E2Stability.UNSTABLE
    return E2Stability.STABLE
