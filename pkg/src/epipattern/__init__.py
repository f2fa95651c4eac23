"""Numerical laboratory for a diffusive SIR epidemic model whose recovery
rate saturates with the infected load.

Submodules:
    kinetics     parameters, steady states, Jacobians, E2 stability
    bifurcation  (b, beta)-plane curves, Lyapunov number, GH/BT points
    spectral     per-mode linearization, Turing / Turing-Hopf thresholds
    odeflow      kinetics integration and limit-cycle census
    pde          1-D reaction-diffusion solver (Neumann boundaries)
    patterns     space-time classification and transient onset
    cli          batch command-line front end
"""

from .kinetics import (
    ModelParams,
    Equilibrium,
    EquilibriumKind,
    QuadraticCoeffs,
    OdeJacobian,
    PsiCase,
    PsiClassification,
    E2Stability,
    recovery_rate,
    basic_reproduction_number,
    endemic_quadratic,
    find_equilibria,
    e2_equilibrium,
    ode_jacobian,
    classify_psi,
    stability_E2,
)
from .bifurcation import (
    CurveTag,
    BifCurvePoint,
    Region,
    CubicSystemCoeffs,
    BifurcationType,
    BifurcationPoint,
    NotFoundError,
    curve_c0,
    curve_c1,
    curve_cdelta,
    b_tilde,
    classify_region,
    cubic_coeffs,
    first_lyapunov,
    first_lyapunov_printed,
    trace_hopf_curve,
    locate_generalized_hopf,
    locate_bt_points,
)
from .spectral import (
    DiffusionParams,
    SpectralMode,
    TuringThresholds,
    DiffusionClass,
    jk_matrix,
    dispersion_scan,
    gamma_bounds,
    turing_thresholds,
    classify_with_diffusion,
    hopf_mode_threshold,
    TuringHopfResult,
    turing_hopf_detect,
    turing_turing_points,
    double_zero_detect,
)
from .odeflow import (
    OdeTrajectory,
    CycleStability,
    LimitCycle,
    integrate_ode,
    return_map,
    find_limit_cycles,
    seed_attractors,
)
from .pde import (
    Grid1D,
    FieldState,
    Integrator,
    SimConfig,
    SimulationResult,
    laplacian_neumann,
    default_initial,
    simulate,
)
from .patterns import (
    ModeSpectrum,
    PatternClass,
    PatternReport,
    cosine_spectrum,
    temporal_period,
    classify_pattern,
    transient_onset,
)

__version__ = "0.1.0"
