import math

import numpy as np
import pytest
from scipy.optimize import brentq

from epipattern.kinetics import (
    E2Stability,
    EquilibriumKind,
    ModelParams,
    PsiCase,
    basic_reproduction_number,
    classify_psi,
    e2_equilibrium,
    endemic_equilibria,
    endemic_quadratic,
    find_equilibria,
    kinetics_rhs,
    ode_jacobian,
    psi_value,
    recovery_rate,
    stability_E2,
)

FIG4 = ModelParams(A=0.4, d=0.1, beta=0.1, mu0=0.1, mu1=0.2, b=0.3)
EX1 = dict(A=1.0, d=1.0, beta=12.0, mu0=2.0, mu1=10.0)


def random_params(rng) -> ModelParams:
    mu0 = rng.uniform(0.02, 3.0)
    return ModelParams(
        A=10 ** rng.uniform(-1, 1),
        d=10 ** rng.uniform(-2, 0.3),
        beta=10 ** rng.uniform(-3, 1.3),
        mu0=mu0,
        mu1=mu0 * rng.uniform(1.0, 20.0),
        b=10 ** rng.uniform(-3, 0.3),
    )


# ---------------------------------------------------------------------------
# recovery rate

def test_recovery_rate_limits():
    assert recovery_rate(FIG4, 0.0) == pytest.approx(FIG4.mu1, abs=0)
    assert recovery_rate(FIG4, FIG4.b) == pytest.approx((FIG4.mu0 + FIG4.mu1) / 2)
    # (mu0=0.1, mu1=0.2, b=0.3): h(30) = 0.1 + 0.1*0.3/30.3
    assert recovery_rate(FIG4, 30.0) == pytest.approx(0.1 + 0.03 / 30.3)
    assert recovery_rate(FIG4, 30.0) <= 0.101


def test_recovery_rate_monotone_and_range():
    Is = np.linspace(0.0, 50.0, 400)
    h = recovery_rate(FIG4, Is)
    assert np.all(np.diff(h) < 0)
    assert np.all(h > FIG4.mu0) and h[0] == FIG4.mu1
    flat = FIG4.replace(mu1=FIG4.mu0)
    assert np.allclose(recovery_rate(flat, Is), flat.mu0)


def test_recovery_rate_rejects_negative():
    with pytest.raises(ValueError):
        recovery_rate(FIG4, -0.1)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(A=1, d=0, beta=1, mu0=0.1, mu1=0.2, b=0.1)
    with pytest.raises(ValueError):
        ModelParams(A=1, d=1, beta=1, mu0=0.5, mu1=0.2, b=0.1)


# ---------------------------------------------------------------------------
# reproduction number

def test_r0_values():
    assert basic_reproduction_number(FIG4) == pytest.approx(4.0 / 3.0, rel=1e-14)
    p = ModelParams(**EX1, b=0.05)
    assert basic_reproduction_number(p) == pytest.approx(12.0 / 11.0, rel=1e-14)
    # threshold: beta*A = d*(d+mu1)
    thr = FIG4.replace(beta=FIG4.d * (FIG4.d + FIG4.mu1) / FIG4.A)
    assert basic_reproduction_number(thr) == pytest.approx(1.0, rel=1e-14)


# ---------------------------------------------------------------------------
# endemic quadratic

def test_quadratic_a0_vanishes_at_r0_one():
    thr = FIG4.replace(beta=FIG4.d * (FIG4.d + FIG4.mu1) / FIG4.A)
    q = endemic_quadratic(thr)
    assert abs(q.a0) < 1e-15


def steady_state_residual(p: ModelParams, S: float, I: float) -> float:
    dS, dI = kinetics_rhs(p, S, I)
    scale = p.A + p.d + p.beta * (abs(S) + abs(I)) + 1.0
    return max(abs(dS), abs(dI)) / scale


def test_quadratic_root_is_steady_state_of_full_system():
    # brute-force steady state: solve dI/dt = 0 along the S-nullcline by
    # bisection in I, independent of the quadratic machinery
    p = FIG4

    def g(I):
        S = p.A / (p.d + p.beta * I)        # S-nullcline
        return (p.beta * S - p.d - recovery_rate(p, I)) * 1.0

    I_root = brentq(g, 1e-6, p.A / p.d, xtol=1e-14)
    q = endemic_quadratic(p)
    f_at_root = (q.a2 * I_root + q.a1) * I_root + q.a0
    assert abs(f_at_root) < 1e-12
    e2 = e2_equilibrium(p)
    assert e2.I == pytest.approx(I_root, rel=1e-10)


def test_delta_matches_expanded_discriminant():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        p = random_params(rng)
        q = endemic_quadratic(p)
        direct = q.a1**2 - 4.0 * q.a2 * q.a0
        scale = max(abs(q.a1**2), abs(4.0 * q.a2 * q.a0), 1e-300)
        assert abs(q.delta - direct) <= 1e-12 * scale


# ---------------------------------------------------------------------------
# equilibria

def test_fig4_equilibria():
    eqs = find_equilibria(FIG4)
    assert eqs[0].kind is EquilibriumKind.DISEASE_FREE
    assert (eqs[0].S, eqs[0].I) == (4.0, 0.0)
    endemic = endemic_equilibria(FIG4)
    assert len(endemic) == 1 and endemic[0].kind is EquilibriumKind.ENDEMIC_HIGH
    assert endemic[0].I == pytest.approx(0.75, rel=1e-12)
    assert endemic[0].S == pytest.approx((recovery_rate(FIG4, 0.75) + FIG4.d) / FIG4.beta)


def test_forward_bifurcation_across_c0():
    # b > b_tilde: crossing R0 = 1 upward creates E2, nothing below
    p = FIG4.replace(b=0.5)
    bt = p.A * (p.mu1 - p.mu0) / (p.d + p.mu1) ** 2
    assert p.b > bt
    phi0 = p.d * (p.d + p.mu1) / p.A
    below = p.replace(beta=phi0 * 0.999)
    above = p.replace(beta=phi0 * 1.001)
    assert len(endemic_equilibria(below)) == 0
    assert len(endemic_equilibria(above)) == 1


def test_no_endemic_in_global_stability_regime():
    # beta*A <= d*(d+mu0) leaves only the disease-free state
    p = FIG4.replace(beta=FIG4.d * (FIG4.d + FIG4.mu0) / FIG4.A * 0.9)
    eqs = find_equilibria(p)
    assert len(eqs) == 1 and eqs[0].kind is EquilibriumKind.DISEASE_FREE


def test_backward_regime_two_roots():
    # Example 3 kinetics at beta below C0: R0 < 1 yet E1 and E2 exist
    p = ModelParams(A=1.0, d=0.01, beta=0.0073, mu0=0.1, mu1=10.0, b=0.03)
    assert basic_reproduction_number(p) < 1
    endemic = endemic_equilibria(p)
    assert [e.kind for e in endemic] == [EquilibriumKind.ENDEMIC_LOW,
                                         EquilibriumKind.ENDEMIC_HIGH]
    assert endemic[0].I < endemic[1].I


def _oracle_root_count(p: ModelParams) -> int:
    """Positive roots of f on (0, A/d] counted from sign pattern at 0, the
    vertex, and A/d; independent of the root formula."""
    q = endemic_quadratic(p)
    f = lambda I: (q.a2 * I + q.a1) * I + q.a0
    hi = p.A / p.d
    iv = -q.a1 / (2.0 * q.a2)
    pts = [0.0] + ([iv] if 0.0 < iv < hi else []) + [hi]
    vals = [f(x) for x in pts]
    return sum(1 for i in range(len(vals) - 1) if vals[i] * vals[i + 1] < 0)


def test_three_property_suites_on_random_params():
    rng = np.random.default_rng(7)
    n_checked = 0
    for _ in range(10_000):
        p = random_params(rng)
        endemic = endemic_equilibria(p)
        # root count agrees with the sign-pattern oracle
        degenerate = any(e.kind is EquilibriumKind.DEGENERATE for e in endemic)
        if not degenerate:
            assert len(endemic) == _oracle_root_count(p)
        for e in endemic:
            n_checked += 1
            # steady-state residual of the full 2-equation system
            assert steady_state_residual(p, e.S, e.I) <= 1e-9
            # invariant region
            assert e.S + e.I <= p.A / p.d * (1.0 + 1e-9)
            # B0 identity: det(J0) = I f'(I) / (I + b)
            q = endemic_quadratic(p)
            fprime = 2.0 * q.a2 * e.I + q.a1
            jac = ode_jacobian(p, e)
            target = e.I * fprime / (e.I + p.b)
            assert jac.det == pytest.approx(target, rel=1e-9, abs=1e-13)
    assert n_checked > 2000   # the sample really exercises endemic cases


# ---------------------------------------------------------------------------
# Jacobian

def test_jacobian_eigenvalues_at_disease_free():
    eqs = find_equilibria(FIG4)
    jac = ode_jacobian(FIG4, eqs[0])
    lam = sorted(l.real for l in jac.eigenvalues())
    r0 = basic_reproduction_number(FIG4)
    expect = sorted([-FIG4.d, (FIG4.d + FIG4.mu1) * (r0 - 1.0)])
    assert lam == pytest.approx(expect, rel=1e-12)


def test_saddle_structure_of_endemic_pair():
    p = ModelParams(A=1.0, d=0.01, beta=0.0073, mu0=0.1, mu1=10.0, b=0.03)
    e1, e2 = endemic_equilibria(p)
    assert ode_jacobian(p, e1).det < 0    # E1 saddle
    assert ode_jacobian(p, e2).det > 0    # E2 anti-saddle


def test_endemic_jacobian_sign_pattern():
    jac = ode_jacobian(FIG4, e2_equilibrium(FIG4))
    assert jac.d11 < 0 and jac.d12 < 0 and jac.d21 > 0 and jac.d22 > 0


# ---------------------------------------------------------------------------
# Psi classification and E2 stability

def test_psi_always_positive_when_recovery_span_small():
    # mu1 - mu0 < b*beta + 2d
    p = ModelParams(A=1.0, d=1.0, beta=2.0, mu0=1.0, mu1=1.5, b=0.5)
    assert p.mu1 - p.mu0 < p.b * p.beta + 2 * p.d
    assert classify_psi(p).case is PsiCase.ALWAYS_POSITIVE


@pytest.mark.parametrize("b", [0.02, 0.05, 0.08, 0.3])
def test_psi_classification_matches_dense_sampling(b):
    p = ModelParams(**EX1, b=b)
    cls = classify_psi(p)
    Is = np.linspace(1e-6, 5.0, 20_000)
    vals = psi_value(p, Is)
    has_negative = bool((vals < 0).any())
    if cls.case is PsiCase.TWO_ROOTS:
        assert has_negative
        lo, hi = cls.roots
        assert 0 < lo < hi
        assert abs(psi_value(p, lo)) <= 1e-9 * max(1.0, abs(psi_value(p, 2 * hi)))
        assert abs(psi_value(p, hi)) <= 1e-9 * max(1.0, abs(psi_value(p, 2 * hi)))
        eps = 1e-6 * (1 + hi)
        assert psi_value(p, lo + eps) < psi_value(p, lo - eps)   # Psi' < 0 at lo
        assert psi_value(p, hi + eps) > psi_value(p, hi - eps)   # Psi' > 0 at hi
        # negative exactly between the roots
        inside = (Is > lo + 1e-4) & (Is < hi - 1e-4)
        if inside.any():
            assert (vals[inside] < 0).all()
    else:
        assert not has_negative


def test_stability_e2_example1_points():
    assert stability_E2(ModelParams(**EX1, b=0.0522)) is E2Stability.STABLE
    assert stability_E2(ModelParams(**EX1, b=0.052277264)) is E2Stability.UNSTABLE


def test_stability_stable_when_omega_bar_below_omega():
    p = ModelParams(A=1.0, d=1.0, beta=2.0, mu0=1.0, mu1=1.5, b=0.5)
    if basic_reproduction_number(p) > 1:
        assert stability_E2(p) is E2Stability.STABLE
