"""Codimension-1 and -2 bifurcation structure of the kinetics in the
(b, beta) parameter plane.

Threshold curves:
    C0        R0 = 1 (horizontal line beta = d*(d+mu1)/A)
    C1        a1 = 0 (hyperbola)
    CDelta+-  discriminant of the endemic quadratic = 0 (saddle-node arc)
    H         B1(I2) = 0 (Hopf locus of the upper endemic state)

Along H the first Lyapunov number decides super/subcritical crossings; its
zero is the generalized Hopf (Bautin) point.  The Hopf curve meets the
saddle-node arc at the two Bogdanov-Takens points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .kinetics import (
    ModelParams,
    Equilibrium,
    EquilibriumKind,
    endemic_quadratic,
    find_equilibria,
    e2_equilibrium,
    recovery_rate,
    recovery_rate_derivative,
    b1_b0,
)

__all__ = [
    "CurveTag",
    "BifCurvePoint",
    "Region",
    "CubicSystemCoeffs",
    "BifurcationType",
    "BifurcationPoint",
    "NotFoundError",
    "curve_c0",
    "curve_c1",
    "curve_cdelta",
    "b_tilde",
    "special_points",
    "classify_region",
    "cubic_coeffs",
    "first_lyapunov",
    "first_lyapunov_printed",
    "hopf_beta_at",
    "trace_hopf_curve",
    "locate_generalized_hopf",
    "locate_bt_points",
]

ROOT_XTOL = 1e-12
ROOT_MAXITER = 200


class CurveTag(Enum):
    C0 = "C0"
    C1 = "C1"
    CDELTA_PLUS = "CDelta+"
    CDELTA_MINUS = "CDelta-"
    HOPF = "H"


@dataclass(frozen=True)
class BifCurvePoint:
    b: float
    beta: float
    curve: CurveTag
    diagnostics: dict = field(default_factory=dict)


class Region(Enum):
    V0 = "V0"   # no endemic state
    V1 = "V1"   # E2 only
    V2 = "V2"   # E1 and E2
    ON_C0 = "on_C0"
    ON_CDELTA_PLUS = "on_CDelta+"


@dataclass(frozen=True)
class CubicSystemCoeffs:
    """Taylor coefficients at E2 of the orbit-equivalent cubic system obtained
    by rescaling time with the factor (I + b).

    jXY is the linear part ((I2+b) times the kinetics Jacobian); aij / bij are
    the coefficients of x^i y^j in the S- and I-equations.
    """

    j11: float
    j12: float
    j21: float
    j22: float
    a11: float
    a02: float
    a12: float
    b11: float
    b02: float
    b12: float


class BifurcationType(Enum):
    FORWARD_TRANSCRITICAL = "forward_transcritical"
    BACKWARD_TRANSCRITICAL = "backward_transcritical"
    SADDLE_NODE = "saddle_node"
    HOPF_SUPER = "hopf_supercritical"
    HOPF_SUB = "hopf_subcritical"
    GENERALIZED_HOPF = "generalized_hopf"
    BOGDANOV_TAKENS = "bogdanov_takens"


@dataclass(frozen=True)
class BifurcationPoint:
    type: BifurcationType
    b: float
    beta: float
    diagnostics: dict = field(default_factory=dict)


class NotFoundError(RuntimeError):
    """A requested bifurcation point does not exist in the scanned range."""


# ---------------------------------------------------------------------------
# threshold curves

def curve_c0(params: ModelParams, b: float = 0.0) -> float:
    """beta on C0 (R0 = 1); independent of b."""
    if b < 0:
        raise ValueError("b must be >= 0")
    return params.d * (params.d + params.mu1) / params.A


def curve_c1(params: ModelParams, b: float) -> float:
    """beta on C1 (a1 = 0): d*(d+mu0)/(A - b*(d+mu1)); pole at b = A/(d+mu1)."""
    den = params.A - b * (params.d + params.mu1)
    if not 0 <= b < params.A / (params.d + params.mu1) or den <= 0:
        raise ValueError("curve C1 requires 0 <= b < A/(d+mu1)")
    return params.d * (params.d + params.mu0) / den


def curve_cdelta(params: ModelParams, b: float, branch: int = +1) -> float:
    """beta on the discriminant-zero curve; branch=+1 is the saddle-node arc."""
    if b < 0:
        raise ValueError("b must be >= 0")
    A, d, mu0, mu1 = params.A, params.d, params.mu0, params.mu1
    num = d * (d + mu0) * (b * d + b * mu1 + A)
    num += branch * 2.0 * (d + mu0) * d * math.sqrt((mu1 - mu0) * A * b)
    den = A**2 + 2.0 * b * (2.0 * mu0 + d - mu1) * A + b**2 * (d + mu1) ** 2
    return num / den


def b_tilde(params: ModelParams) -> float:
    """Abscissa where CDelta+ and C1 meet C0: A*(mu1 - mu0)/(d + mu1)^2."""
    return params.A * (params.mu1 - params.mu0) / (params.d + params.mu1) ** 2


def special_points(params: ModelParams) -> dict:
    """Named anchors of the diagram: P0 = (b_tilde, Phi0), P1/P2 on the
    beta-axis, and b_tilde itself."""
    phi0 = curve_c0(params)
    bt = b_tilde(params)
    return {
        "P0": (bt, phi0),
        "P1": (0.0, phi0),
        "P2": (0.0, params.d * (params.d + params.mu0) / params.A),
        "b_tilde": bt,
    }


def classify_region(params: ModelParams, b: float, beta: float,
                    on_tol: float = 0.0) -> Region:
    """Which existence region the point (b, beta) falls in.

    V1 above C0 (one endemic state), V2 between CDelta+ and C0 for b < b_tilde
    (two), V0 elsewhere (none).  With ``on_tol`` > 0, points within that
    relative distance of C0 / CDelta+ report the boundary tags.
    """
    if b <= 0 or beta <= 0:
        raise ValueError("b and beta must be > 0")
    p = params.replace(b=b, beta=beta)
    phi0 = curve_c0(p)
    if on_tol > 0 and abs(beta - phi0) <= on_tol * phi0:
        return Region.ON_C0
    if beta > phi0:
        return Region.V1
    bt = b_tilde(p)
    if b < bt:
        phidp = curve_cdelta(p, b, +1)
        if on_tol > 0 and abs(beta - phidp) <= on_tol * phidp:
            return Region.ON_CDELTA_PLUS
        if phidp < beta < phi0:
            return Region.V2
    return Region.V0


# ---------------------------------------------------------------------------
# cubic system and first Lyapunov number

def cubic_coeffs(params: ModelParams, e2: Equilibrium) -> CubicSystemCoeffs:
    """Taylor coefficients of the time-rescaled field at E2.

    The y^2 coefficient of the infection equation is beta*S2 - d - mu0,
    evaluated at the expansion point E2 itself so that every entry matches a
    numerical Taylor expansion of the rescaled field.
    """
    b, beta, d, mu0 = params.b, params.beta, params.d, params.mu0
    S2, I2 = e2.S, e2.I
    h2 = recovery_rate(params, I2)
    hp2 = recovery_rate_derivative(params, I2)
    w = I2 + b
    return CubicSystemCoeffs(
        j11=-(d + beta * I2) * w,
        j12=-(h2 + d) * w,
        j21=beta * I2 * w,
        j22=-hp2 * I2 * w,
        a11=-(b * beta + 2.0 * beta * I2 + d),
        a02=-(h2 + d),
        a12=-beta,
        b11=b * beta + 2.0 * beta * I2,
        b02=beta * S2 - d - mu0,
        b12=beta,
    )


def first_lyapunov(params: ModelParams, e2: Equilibrium) -> float:
    """First Lyapunov number of the Hopf point at E2, by the classical planar
    formula (Andronov; see also Perko) applied to the rescaled cubic system.

    Meaningful on the Hopf locus B1(I2) = 0; negative means supercritical.
    Raises if the linear part is not of focus type (det <= 0).
    """
    c = cubic_coeffs(params, e2)
    a, b_, cc = c.j11, c.j12, c.j21
    det = c.j11 * c.j22 - c.j12 * c.j21
    if det <= 0.0:
        raise ValueError("not a Hopf point: det of linear part must be > 0")
    # nonzero quadratic/cubic terms: a11, a02, a12 (x-eq); b11, b02, b12 (y-eq)
    g1 = (a * cc * (c.a11**2 + c.a11 * c.b02 + c.a02 * c.b11 - 2.0 * c.b02**2)
          + a * b_ * c.b11**2
          + cc**2 * (c.a11 * c.a02 + 2.0 * c.a02 * c.b02)
          + (b_ * cc - 2.0 * a**2) * c.b11 * c.b02)
    g2 = (a**2 + b_ * cc) * (2.0 * a * c.b12 + cc * c.a12)
    return -3.0 * math.pi / (2.0 * b_ * det**1.5) * (g1 - g2)


def first_lyapunov_printed(params: ModelParams, e2: Equilibrium) -> float:
    """Literal transcription of the published Lyapunov-number expression,
    kept for comparison; it carries apparent misprints (an extra a11*b02
    cross term and a j12*j12 product where j12*j21 is expected) and does not
    change sign along the Hopf curve.  ``first_lyapunov`` is the working
    formula."""
    c = cubic_coeffs(params, e2)
    det = c.j11 * c.j22 - c.j12 * c.j21
    if det <= 0.0:
        raise ValueError("not a Hopf point: det of linear part must be > 0")
    num1 = (c.j11 * c.j21 * (c.a11**2 + c.a11 * c.b02 + c.a02 * c.b11 - 2.0 * c.b02**2)
            + c.j11 * c.j12 * (c.b11**2 + c.a11 * c.b02)
            + c.j12 * c.j21 * c.b11 * c.b02)
    num2 = (c.j21**2 * (c.a11 * c.a02 + 2.0 * c.a02 * c.b02)
            - 2.0 * c.j11**2 * c.b11 * c.b02
            - (c.j11**2 + c.j12 * c.j12) * (2.0 * c.j11 * c.b12 + c.j21 * c.a12))
    return -3.0 * math.pi * (num1 + num2) / (2.0 * c.j12 * det**1.5)


# ---------------------------------------------------------------------------
# Hopf curve tracing

def _b1_of_beta(params: ModelParams, b: float, beta: float) -> float:
    p = params.replace(b=b, beta=beta)
    eqs = find_equilibria(p)
    for e in eqs:
        if e.kind is EquilibriumKind.ENDEMIC_HIGH:
            return b1_b0(p, e.I)[0]
    return math.nan


def hopf_beta_at(params: ModelParams, b: float,
                 beta_lo: float | None = None, beta_hi: float | None = None,
                 n_scan: int = 400) -> float:
    """Solve B1(I2(b, beta)) = 0 for beta at fixed b by bracketed root
    finding over the window where E2 exists.

    Raises NotFoundError when no sign change is bracketed.
    """
    p0 = params.replace(b=b)
    phi0 = curve_c0(p0)
    if beta_lo is None:
        # E2 exists above CDelta+ when b < b_tilde, else above C0
        if b < b_tilde(p0):
            beta_lo = curve_cdelta(p0, b, +1) * (1.0 + 1e-9)
        else:
            beta_lo = phi0 * (1.0 + 1e-12)
    if beta_hi is None:
        beta_hi = phi0 * 1e3
    grid = np.geomspace(beta_lo, beta_hi, n_scan)
    vals = np.array([_b1_of_beta(params, b, g) for g in grid])
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if math.isfinite(v0) and math.isfinite(v1) and v0 * v1 < 0:
            return brentq(lambda be: _b1_of_beta(params, b, be),
                          grid[i], grid[i + 1], xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
    raise NotFoundError(f"no Hopf beta bracketed at b={b:g} "
                        f"in ({beta_lo:g}, {beta_hi:g})")


def b1_derivative(params: ModelParams, I: float) -> float:
    """d/dI of the damping coefficient B1(I) = d + beta*I + h'(I)*I."""
    hp = recovery_rate_derivative(params, I)
    hpp = 2.0 * (params.mu1 - params.mu0) * params.b / (I + params.b) ** 3
    return params.beta + hp + hpp * I


def hopf_transversality(params: ModelParams, e2: Equilibrium) -> float:
    """d Re(lambda)/dA across the Hopf locus:
    -beta*(I2+b)*B1'(I2) / (2*sqrt(delta))."""
    q = endemic_quadratic(params)
    disc = q.a1 * q.a1 - 4.0 * q.a2 * q.a0
    return (-params.beta * (e2.I + params.b) * b1_derivative(params, e2.I)
            / (2.0 * math.sqrt(disc)))


def trace_hopf_curve(params: ModelParams, b_range: tuple[float, float],
                     n_points: int = 100) -> list[BifCurvePoint]:
    """Points of the Hopf locus over a b-window, one beta root per abscissa.

    Each point records I2, det (must be positive for a genuine Hopf), the
    transversality derivative, and both Lyapunov-number evaluations.
    Abscissae where no root is bracketed are skipped.
    """
    pts = []
    for b in np.linspace(b_range[0], b_range[1], n_points):
        try:
            beta = hopf_beta_at(params, float(b))
        except NotFoundError:
            continue
        p = params.replace(b=float(b), beta=beta)
        e2 = e2_equilibrium(p)
        b1, b0 = b1_b0(p, e2.I)
        if b0 <= 0:
            continue   # zero eigenvalue, not a Hopf point (BT side)
        pts.append(BifCurvePoint(
            b=float(b), beta=beta, curve=CurveTag.HOPF,
            diagnostics={
                "I2": e2.I,
                "B1_residual": b1,
                "D0": b0,
                "transversality": hopf_transversality(p, e2),
                "L1": first_lyapunov(p, e2),
                "L1_printed": first_lyapunov_printed(p, e2),
            }))
    return pts


def locate_generalized_hopf(params: ModelParams, hopf_curve: list[BifCurvePoint]
                            ) -> BifurcationPoint:
    """Zero of the first Lyapunov number along a traced Hopf curve.

    Bisects in the abscissa between the two curve points where L1 changes
    sign; raises NotFoundError when it does not.
    """
    bs = [p.b for p in hopf_curve]
    l1 = [p.diagnostics["L1"] for p in hopf_curve]
    bracket = None
    for i in range(len(bs) - 1):
        if l1[i] * l1[i + 1] < 0:
            bracket = (bs[i], bs[i + 1])
            break
    if bracket is None:
        raise NotFoundError("L1 does not change sign along the supplied Hopf curve")

    def l1_at(b: float) -> float:
        beta = hopf_beta_at(params, b)
        p = params.replace(b=b, beta=beta)
        return first_lyapunov(p, e2_equilibrium(p))

    b_gh = brentq(l1_at, bracket[0], bracket[1], xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
    beta_gh = hopf_beta_at(params, b_gh)
    p = params.replace(b=b_gh, beta=beta_gh)
    e2 = e2_equilibrium(p)
    return BifurcationPoint(
        BifurcationType.GENERALIZED_HOPF, b_gh, beta_gh,
        diagnostics={
            "L1": first_lyapunov(p, e2),
            "I2": e2.I,
            "transversality": hopf_transversality(p, e2),
        })


def locate_bt_points(params: ModelParams, b_range: tuple[float, float],
                     n_scan: int = 400) -> list[BifurcationPoint]:
    """Bogdanov-Takens candidates: simultaneous zeros of {B1(I2), delta}.

    Solved as zeros of B1 along the saddle-node arc beta = CDelta+(b) (which
    enforces delta = 0 exactly), scanned over the given b-window.  Reported
    without normal-form coefficients.
    """
    bt = b_tilde(params)
    lo = max(b_range[0], 1e-12)
    hi = min(b_range[1], bt * (1.0 - 1e-9))
    if hi <= lo:
        return []

    def b1_on_arc(b: float) -> float:
        beta = curve_cdelta(params.replace(b=b), b, +1)
        p = params.replace(b=b, beta=beta)
        eqs = [e for e in find_equilibria(p)
               if e.kind in (EquilibriumKind.DEGENERATE, EquilibriumKind.ENDEMIC_HIGH)]
        if not eqs:
            return math.nan
        return b1_b0(p, eqs[0].I)[0]

    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([b1_on_arc(float(g)) for g in grid])
    out = []
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if math.isfinite(v0) and math.isfinite(v1) and v0 * v1 < 0:
            b_bt = brentq(b1_on_arc, grid[i], grid[i + 1],
                          xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
            beta_bt = curve_cdelta(params.replace(b=b_bt), b_bt, +1)
            out.append(BifurcationPoint(
                BifurcationType.BOGDANOV_TAKENS, float(b_bt), float(beta_bt),
                diagnostics={"B1_residual": b1_on_arc(float(b_bt))}))
    return out
