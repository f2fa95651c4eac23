"""Linear spectral analysis of the reaction-diffusion system at constant
steady states on the interval [0, ell*pi] with zero-flux boundaries.

Perturbations decompose onto the Neumann cosine modes cos(k*x/ell); mode k
evolves under J_k = J0 - (k/ell)^2 * diag(r1, r2).  From the traces and
determinants of the J_k come the diffusion-driven (Turing) thresholds
r1 = r1^(k), the k-mode Hopf thresholds in beta, and the detection of
Turing-Hopf, Turing-Turing, and double-zero points.
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
    recovery_rate,
    recovery_rate_derivative,
    find_equilibria,
    e2_equilibrium,
    ode_jacobian,
)
from .bifurcation import NotFoundError, curve_c0, curve_cdelta, b_tilde

__all__ = [
    "DiffusionParams",
    "SpectralMode",
    "TuringThresholds",
    "DiffusionClass",
    "DiffusionClassification",
    "Deltas",
    "deltas_at",
    "jk_matrix",
    "trace_det_k",
    "dispersion_scan",
    "gamma_bounds",
    "turing_thresholds",
    "classify_with_diffusion",
    "hopf_mode_threshold",
    "TuringHopfResult",
    "turing_hopf_detect",
    "turing_turing_points",
    "double_zero_detect",
]

# |D_k| below this fraction of |D_0| counts as "on threshold"
THRESHOLD_DK_REL = 1e-4


@dataclass(frozen=True)
class DiffusionParams:
    """Diffusion rates of the two fields and the domain scale (domain is
    [0, ell*pi]).  r1 = r2 = 0 is allowed only for the ODE-limit pathway."""

    r1: float
    r2: float
    ell: float

    def __post_init__(self):
        if self.r1 < 0 or self.r2 < 0:
            raise ValueError("diffusion rates must be >= 0")
        if self.ell <= 0:
            raise ValueError("domain scale ell must be > 0")

    def replace(self, **kw) -> "DiffusionParams":
        d = dict(r1=self.r1, r2=self.r2, ell=self.ell)
        d.update(kw)
        return DiffusionParams(**d)


@dataclass(frozen=True)
class SpectralMode:
    k: int
    wavenumber: float
    tk: float
    dk: float
    eigenvalues: tuple[complex, complex]

    @property
    def max_real_part(self) -> float:
        return max(self.eigenvalues[0].real, self.eigenvalues[1].real)

    @property
    def unstable(self) -> bool:
        return self.max_real_part > 0.0


@dataclass(frozen=True)
class TuringThresholds:
    """Critical susceptible-diffusion rates r1^(k) for k = 1..k_bar.

    k_hat is the real minimizer of the U-shaped threshold function, k_breve
    the integer argmin.  The gamma triple bounds the diffusion ratio r2/r1
    below which instability is possible.
    """

    table: tuple[tuple[int, float], ...]
    k_bar: int
    k_hat: float
    k_breve: int
    gamma_minus: float
    gamma_bar: float
    gamma_plus: float
    multi_minimum: bool = False

    @property
    def stable(self) -> bool:
        """True when no mode can be destabilized (empty table)."""
        return len(self.table) == 0

    def r1_at(self, k: int) -> float:
        for kk, r in self.table:
            if kk == k:
                return r
        raise KeyError(f"mode {k} not in threshold table")


class DiffusionClass(Enum):
    STABLE_A = "stable_a"            # gamma > gamma_minus
    STABLE_B = "stable_b"            # gamma < gamma_minus, delta4*ell^2 <= r2
    STABLE_C = "stable_c"            # gamma < gamma_minus, r1 below min threshold
    TURING_UNSTABLE = "turing_unstable"
    ON_TURING_THRESHOLD = "on_turing_threshold"


@dataclass(frozen=True)
class DiffusionClassification:
    verdict: DiffusionClass
    unstable_modes: tuple[int, ...] = ()
    threshold_modes: tuple[int, ...] = ()
    thresholds: TuringThresholds | None = None


@dataclass(frozen=True)
class Deltas:
    """Jacobian entries at E2 in sign-normalized notation
    (d1 < 0, d2 < 0, d3 > 0, d4 > 0 at a stable upper endemic state)."""

    d1: float
    d2: float
    d3: float
    d4: float

    @property
    def det(self) -> float:
        return self.d1 * self.d4 - self.d2 * self.d3

    @property
    def trace(self) -> float:
        return self.d1 + self.d4


def deltas_at(params: ModelParams, eq: Equilibrium) -> Deltas:
    j = ode_jacobian(params, eq)
    return Deltas(j.d11, j.d12, j.d21, j.d22)


# ---------------------------------------------------------------------------
# per-mode linearization

def jk_matrix(params: ModelParams, diff: DiffusionParams, eq: Equilibrium,
              k: int) -> np.ndarray:
    """J_k = J0 - (k/ell)^2 * diag(r1, r2)."""
    if k < 0 or k != int(k):
        raise ValueError("mode index k must be a non-negative integer")
    j = ode_jacobian(params, eq)
    ksq = (k / diff.ell) ** 2
    return np.array([[j.d11 - diff.r1 * ksq, j.d12],
                     [j.d21, j.d22 - diff.r2 * ksq]])


def trace_det_k(d: Deltas, diff: DiffusionParams, k: float) -> tuple[float, float]:
    """Trace and determinant of J_k (k may be treated as continuous)."""
    ksq = (k / diff.ell) ** 2
    tk = d.d1 + d.d4 - (diff.r1 + diff.r2) * ksq
    dk = (d.d1 - diff.r1 * ksq) * (d.d4 - diff.r2 * ksq) - d.d2 * d.d3
    return tk, dk


def _mode_from_tk_dk(k: int, ell: float, tk: float, dk: float) -> SpectralMode:
    disc = tk * tk - 4.0 * dk
    if disc >= 0.0:
        s = math.sqrt(disc)
        lam = ((tk + s) / 2.0 + 0j, (tk - s) / 2.0 + 0j)
    else:
        s = math.sqrt(-disc)
        lam = (complex(tk / 2.0, s / 2.0), complex(tk / 2.0, -s / 2.0))
    return SpectralMode(k, k / ell, tk, dk, lam)


def dispersion_scan(params: ModelParams, diff: DiffusionParams, eq: Equilibrium,
                    k_max: int) -> list[SpectralMode]:
    """Modes 0..k_max with trace, determinant, and eigenvalue pair of J_k."""
    d = deltas_at(params, eq)
    return [_mode_from_tk_dk(k, diff.ell, *trace_det_k(d, diff, k))
            for k in range(k_max + 1)]


# ---------------------------------------------------------------------------
# Turing thresholds

def gamma_bounds(params: ModelParams, eq: Equilibrium) -> tuple[float, float, float]:
    """Roots (gamma-, gamma+) of the discriminant of D_k in k^2 as a function
    of the diffusion ratio gamma = r2/r1, plus gamma_bar = -d4/d1 between
    them.  Requires the endemic sign pattern d1<0, d2<0, d3>0, d4>0."""
    d = deltas_at(params, eq)
    if not (d.d1 < 0 and d.d2 < 0 and d.d3 > 0 and d.d4 > 0):
        raise ValueError("gamma bounds require the endemic sign pattern at E2")
    rad = math.sqrt(-d.d3 * d.d2 * (d.d1 * d.d4 - d.d3 * d.d2))
    gm = (d.d1 * d.d4 - 2.0 * d.d3 * d.d2 - 2.0 * rad) / d.d1**2
    gp = (d.d1 * d.d4 - 2.0 * d.d3 * d.d2 + 2.0 * rad) / d.d1**2
    return gm, -d.d4 / d.d1, gp


def _r1_threshold(d: Deltas, ell: float, r2: float, k: float) -> float:
    """r1^(k): the susceptible diffusion rate at which D_k = 0."""
    ksq = (k / ell) ** 2
    return (d.det - d.d1 * r2 * ksq) / (ksq * (d.d4 - r2 * ksq))


def turing_thresholds(params: ModelParams, diff: DiffusionParams,
                      eq: Equilibrium) -> TuringThresholds:
    """Threshold table r1^(k) for k = 1..k_bar (independent of diff.r1).

    k_bar is floor(sqrt(d4*ell^2/r2)), dropped by one when the square root is
    itself a positive integer.  Returns an empty table (stable regime) when
    d4*ell^2 <= r2.  Argmin ties within 1e-12 relative go to the smaller k,
    flagged as multi_minimum.
    """
    d = deltas_at(params, eq)
    gm, gb, gp = gamma_bounds(params, eq)
    ell, r2 = diff.ell, diff.r2
    if d.d4 * ell**2 <= r2:
        return TuringThresholds((), 0, 0.0, 0, gm, gb, gp)
    kf = math.sqrt(d.d4 * ell**2 / r2)
    k_bar = int(kf) - 1 if kf == int(kf) else math.floor(kf)
    if k_bar < 1:
        return TuringThresholds((), 0, 0.0, 0, gm, gb, gp)
    table = tuple((k, _r1_threshold(d, ell, r2, k)) for k in range(1, k_bar + 1))
    # real minimizer of the U-shaped threshold curve
    rad = math.sqrt(d.det * (-d.d2 * d.d3))
    k_hat = ell * math.sqrt((d.det - rad) / (d.d1 * r2))
    r_min = min(r for _, r in table)
    minima = [k for k, r in table if r <= r_min * (1.0 + 1e-12)]
    return TuringThresholds(table, k_bar, k_hat, minima[0], gm, gb, gp,
                            multi_minimum=len(minima) > 1)


def classify_with_diffusion(params: ModelParams, diff: DiffusionParams,
                            eq: Equilibrium) -> DiffusionClassification:
    """Stability of an ODE-stable E2 under diffusion.

    Stable case (a) when gamma = r2/r1 exceeds gamma-; case (b) when no mode
    fits in the domain (d4*ell^2 <= r2); case (c) when r1 is below the lowest
    threshold.  Otherwise the modes with D_k < 0 are reported as unstable and
    modes with |D_k| within THRESHOLD_DK_REL of zero as on-threshold.
    """
    d = deltas_at(params, eq)
    th = turing_thresholds(params, diff, eq)
    gamma = diff.r2 / diff.r1 if diff.r1 > 0 else math.inf
    if gamma > th.gamma_minus:
        return DiffusionClassification(DiffusionClass.STABLE_A, thresholds=th)
    if th.stable:
        return DiffusionClassification(DiffusionClass.STABLE_B, thresholds=th)
    tol = THRESHOLD_DK_REL * abs(d.det)
    unstable, on_thr = [], []
    for k in range(1, th.k_bar + 1):
        dk = trace_det_k(d, diff, k)[1]
        if abs(dk) <= tol:
            on_thr.append(k)
        elif dk < 0:
            unstable.append(k)
    if unstable:
        return DiffusionClassification(DiffusionClass.TURING_UNSTABLE,
                                       tuple(unstable), tuple(on_thr), th)
    if on_thr:
        return DiffusionClassification(DiffusionClass.ON_TURING_THRESHOLD,
                                       (), tuple(on_thr), th)
    return DiffusionClassification(DiffusionClass.STABLE_C, thresholds=th)


# ---------------------------------------------------------------------------
# k-mode Hopf and codimension-2 detection in (r1, beta)

def _beta_scan_window(params: ModelParams) -> tuple[float, float]:
    """beta window over which the upper endemic state exists: above the
    saddle-node arc for b < b_tilde (backward-bifurcation regime), above C0
    otherwise.  The upper end is a generous multiple of C0."""
    phi0 = curve_c0(params)
    if params.b < b_tilde(params):
        lo = curve_cdelta(params, params.b, +1) * (1.0 + 1e-7)
    else:
        lo = phi0 * (1.0 + 1e-12)
    return lo, phi0 * 1e3


def _tk_of_beta(params: ModelParams, diff: DiffusionParams, k: int,
                beta: float) -> float:
    p = params.replace(beta=beta)
    for e in find_equilibria(p):
        if e.kind is EquilibriumKind.ENDEMIC_HIGH:
            return trace_det_k(deltas_at(p, e), diff, k)[0]
    return math.nan


def hopf_mode_threshold(params: ModelParams, diff: DiffusionParams, k: int,
                        n_scan: int = 400) -> dict:
    """Solve T_k(beta) = 0 for beta at fixed diffusion rates.

    Scans a log grid over the existence window of E2, brackets the sign
    change, and verifies D_k > 0 (rejecting otherwise), a nonzero derivative
    T_k'(beta), and the mode-isolation identity
    T_j = T_k + (r1+r2)(k^2-j^2)/ell^2.

    Returns a dict with beta, Tk/Dk diagnostics; raises NotFoundError when no
    root is bracketed.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    lo, hi = _beta_scan_window(params)
    grid = np.geomspace(lo, hi, n_scan)
    vals = np.array([_tk_of_beta(params, diff, k, g) for g in grid])
    root = None
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if math.isfinite(v0) and math.isfinite(v1) and v0 * v1 < 0:
            root = brentq(lambda be: _tk_of_beta(params, diff, k, be),
                          grid[i], grid[i + 1], xtol=1e-14, maxiter=200)
            break
    if root is None:
        raise NotFoundError(f"no {k}-mode Hopf threshold bracketed in "
                            f"({lo:g}, {hi:g})")
    p = params.replace(beta=root)
    e2 = e2_equilibrium(p)
    d = deltas_at(p, e2)
    tk, dk = trace_det_k(d, diff, k)
    eps = 1e-6 * root
    tkp = (_tk_of_beta(params, diff, k, root + eps)
           - _tk_of_beta(params, diff, k, root - eps)) / (2.0 * eps)
    out = {
        "k": k, "beta": float(root), "Tk": tk, "Dk": dk,
        "dTk_dbeta": tkp, "I2": e2.I,
        "mode_isolated": all(
            abs(tk + (diff.r1 + diff.r2) * (k * k - j * j) / diff.ell**2) > 1e-12
            for j in range(0, 3 * max(k, 1)) if j != k),
    }
    if dk <= 0:
        out["rejected"] = f"D_{k} = {dk:g} <= 0 at the trace zero"
    return out


@dataclass(frozen=True)
class TuringHopfResult:
    """Outcome of a (k1, k2)-mode Turing-Hopf detection.

    ``accepted`` requires 0 <= k2 < k1 <= k_bar and one of the interleaving
    clauses H1: k2 < k1 <= k_breve <= floor(k_star) or
    H2: k2 <= floor(k_star) <= k_breve <= k1.
    """

    accepted: bool
    k1: int
    k2: int
    r1: float = math.nan
    beta: float = math.nan
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)


def turing_hopf_detect(params: ModelParams, diff: DiffusionParams,
                       k1: int, k2: int, n_scan: int = 400) -> TuringHopfResult:
    """Locate the simultaneous point r1 = r1^(k1)(beta), T_k2(beta) = 0.

    diff supplies r2 and ell; r1 is determined by the k1 threshold at each
    candidate beta (nested root finding in beta).
    """
    if k1 < 1 or k2 < 0 or k1 == k2:
        return TuringHopfResult(False, k1, k2,
                                reason="need k1 in Z+, k2 in Z+ u {0}, k1 != k2")

    def g(beta: float) -> float:
        p = params.replace(beta=beta)
        for e in find_equilibria(p):
            if e.kind is EquilibriumKind.ENDEMIC_HIGH:
                d = deltas_at(p, e)
                if d.d4 * diff.ell**2 <= diff.r2:
                    return math.nan
                kf = math.sqrt(d.d4 * diff.ell**2 / diff.r2)
                if k1 > (int(kf) - 1 if kf == int(kf) else math.floor(kf)):
                    return math.nan
                r1 = _r1_threshold(d, diff.ell, diff.r2, k1)
                return trace_det_k(d, diff.replace(r1=r1), k2)[0]
        return math.nan

    lo, hi = _beta_scan_window(params)
    grid = np.geomspace(lo, hi, n_scan)
    vals = np.array([g(x) for x in grid])
    root = None
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if math.isfinite(v0) and math.isfinite(v1) and v0 * v1 < 0:
            root = brentq(g, grid[i], grid[i + 1], xtol=1e-15, maxiter=200)
            break
    if root is None:
        return TuringHopfResult(False, k1, k2,
                                reason="no simultaneous root bracketed in beta")

    p = params.replace(beta=float(root))
    e2 = e2_equilibrium(p)
    d = deltas_at(p, e2)
    r1 = _r1_threshold(d, diff.ell, diff.r2, k1)
    dstar = diff.replace(r1=r1)
    th = turing_thresholds(p, dstar, e2)
    # complementary root of D_k = 0 in continuous k at r1 = r1^(k1)
    q = diff.ell**2 * d.det - d.d1 * k1 * k1 * diff.r2
    k_star = diff.ell * math.sqrt(
        d.det * (d.d4 * diff.ell**2 - k1 * k1 * diff.r2) / (diff.r2 * q))
    fks = math.floor(k_star)
    tk2, dk2 = trace_det_k(d, dstar, k2)
    _, dk1 = trace_det_k(d, dstar, k1)
    diag = {"k_star": k_star, "floor_k_star": fks, "k_bar": th.k_bar,
            "k_breve": th.k_breve, "Tk2": tk2, "Dk2": dk2, "Dk1": dk1,
            "I2": e2.I}

    if not (0 <= k2 < k1 <= th.k_bar):
        return TuringHopfResult(False, k1, k2, r1, float(root),
                                reason=f"mode ordering 0 <= k2 < k1 <= k_bar={th.k_bar} fails",
                                diagnostics=diag)
    h1 = k2 < k1 <= th.k_breve <= fks
    h2 = k2 <= fks <= th.k_breve <= k1
    if not (h1 or h2):
        return TuringHopfResult(False, k1, k2, r1, float(root),
                                reason="interleaving condition fails "
                                       f"(H1: k2<k1<=k_breve<=floor(k*)={fks}, "
                                       f"H2: k2<=floor(k*)<=k_breve<=k1)",
                                diagnostics=diag)
    branch = "H1" if h1 else "H2"
    if h1 and h2:
        branch = "H1&H2(boundary)"
    diag["branch"] = branch
    return TuringHopfResult(True, k1, k2, r1, float(root), diagnostics=diag)


def turing_turing_points(params: ModelParams, eq: Equilibrium, ell: float,
                         r2_range: tuple[float, float],
                         pairs: list[tuple[int, int]] | None = None,
                         n_scan: int = 200) -> list[dict]:
    """Intersections r1^(i)(r2) = r1^(j)(r2) of two Turing threshold curves
    in the (r2, r1) plane (mode pair simultaneously critical).

    When ``pairs`` is None, all adjacent pairs (k, k+1) present anywhere in
    the range are tried.  Points below the tangency line r1 = r2/gamma- are
    impossible and never returned.
    """
    d = deltas_at(params, eq)
    gm, _, _ = gamma_bounds(params, eq)

    def diff_ij(i: int, j: int, r2: float) -> float:
        return (_r1_threshold(d, ell, r2, i) - _r1_threshold(d, ell, r2, j))

    if pairs is None:
        kmax_global = math.floor(math.sqrt(d.d4 * ell**2 / max(r2_range[0], 1e-300)))
        pairs = [(k, k + 1) for k in range(1, min(kmax_global, 60))]

    out = []
    for i, j in pairs:
        if i == j:
            continue
        hi_mode = max(i, j)
        # both thresholds must exist: r2 < d4*ell^2/hi_mode^2
        r2_hi = min(r2_range[1], 0.999 * d.d4 * ell**2 / hi_mode**2)
        r2_lo = max(r2_range[0], 1e-12)
        if r2_hi <= r2_lo:
            continue
        grid = np.linspace(r2_lo, r2_hi, n_scan)
        vals = [diff_ij(i, j, float(x)) for x in grid]
        for m in range(len(grid) - 1):
            if vals[m] * vals[m + 1] < 0:
                r2s = brentq(lambda x: diff_ij(i, j, x), grid[m], grid[m + 1],
                             xtol=1e-14, maxiter=200)
                r1s = _r1_threshold(d, ell, float(r2s), i)
                if r1s >= r2s / gm - 1e-12 * max(1.0, r1s):
                    out.append({"i": i, "j": j, "r2": float(r2s), "r1": float(r1s)})
                break
    return out


def double_zero_detect(params: ModelParams, diff: DiffusionParams, k: int,
                       n_scan: int = 400) -> dict:
    """Point in (r1, beta) where mode k has T_k = 0 and D_k = 0 together
    (double-zero eigenvalue of J_k).

    Solved like the Turing-Hopf system with k1 = k2 = k.  Raises
    NotFoundError when no root is bracketed.
    """
    if k < 1:
        raise ValueError("double zero needs k >= 1")

    def g(beta: float) -> float:
        p = params.replace(beta=beta)
        for e in find_equilibria(p):
            if e.kind is EquilibriumKind.ENDEMIC_HIGH:
                d = deltas_at(p, e)
                if d.d4 * diff.ell**2 <= diff.r2:
                    return math.nan
                kf = math.sqrt(d.d4 * diff.ell**2 / diff.r2)
                if k > (int(kf) - 1 if kf == int(kf) else math.floor(kf)):
                    return math.nan
                r1 = _r1_threshold(d, diff.ell, diff.r2, k)
                return trace_det_k(d, diff.replace(r1=r1), k)[0]
        return math.nan

    lo, hi = _beta_scan_window(params)
    grid = np.geomspace(lo, hi, n_scan)
    vals = np.array([g(x) for x in grid])
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if math.isfinite(v0) and math.isfinite(v1) and v0 * v1 < 0:
            root = brentq(g, grid[i], grid[i + 1], xtol=1e-15, maxiter=200)
            p = params.replace(beta=float(root))
            e2 = e2_equilibrium(p)
            d = deltas_at(p, e2)
            r1 = _r1_threshold(d, diff.ell, diff.r2, k)
            tk, dk = trace_det_k(d, diff.replace(r1=r1), k)
            return {"k": k, "beta": float(root), "r1": float(r1),
                    "Tk": tk, "Dk": dk, "I2": e2.I}
    raise NotFoundError(f"no double-zero point for mode {k} in ({lo:g}, {hi:g})")
