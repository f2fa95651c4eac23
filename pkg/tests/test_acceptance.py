"""Acceptance gate: one test per numbered criterion, each printing a
PASS/FAIL line with its headline numbers and wall time.

Run as  pytest tests/test_acceptance.py -v -s  to see the lines inline.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

import epipattern as ep
from epipattern.bifurcation import hopf_beta_at
from epipattern.cli import main as cli_main
from epipattern.config import load_config
from epipattern.patterns import classify_pattern, mode_series, transient_onset
from epipattern.spectral import deltas_at, trace_det_k

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

FIG4_FLAGS = ["--A", "0.4", "--d", "0.1", "--beta", "0.1",
              "--mu0", "0.1", "--mu1", "0.2", "--b", "0.3"]


def _line(num: int, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}", flush=True)
    assert ok, detail


def _run_recipe(name: str):
    cfg = load_config(CONFIGS / name)
    params = cfg.model()
    diff = cfg.diffusion()
    sim = cfg.sim()
    e2 = ep.e2_equilibrium(params)
    init = ep.default_initial(e2, sim.grid, cfg.ic_amplitude, cfg.ic_wavenumber,
                              cfg.ic_noise_amplitude, cfg.ic_noise_seed)
    res = ep.simulate(params, diff, sim, init)
    assert res.ok, res.status
    window = cfg.analysis_window(res.states[-1].t)
    rep = classify_pattern(res, sim.grid, window, cfg.k_max)
    return cfg, res, sim.grid, rep


def test_criterion_1_turing_threshold_table(tmp_path):
    expected = {1: 17.045, 2: 4.6028, 3: 2.346, 4: 1.638,
                5: 1.472, 6: 1.859, 7: 10.733}
    t0 = time.perf_counter()
    code = cli_main(["turing-scan", *FIG4_FLAGS, "--r2", "0.01", "--ell", "5",
                     "--out", str(tmp_path), "--no-figures"])
    elapsed = time.perf_counter() - t0
    doc = json.loads((tmp_path / "turing_summary.json").read_text())
    table = {row["k"]: row["r1"] for row in doc["table"]}
    worst = max(abs(table[k] - v) for k, v in expected.items())
    ok = (code == 0 and doc["k_bar"] == 7 and doc["k_breve"] == 5
          and worst <= 5e-3 and elapsed < 1.0)
    _line(1, ok, f"max |r1_k - table| = {worst:.2e} (tol 5e-3), "
                 f"k_bar={doc['k_bar']}, k_breve={doc['k_breve']}, "
                 f"{elapsed:.2f}s (< 1 s)")


def test_criterion_2_generalized_hopf(tmp_path):
    t0 = time.perf_counter()
    code = cli_main(["bifdiagram", "--A", "1", "--d", "1", "--beta", "12",
                     "--mu0", "2", "--mu1", "10", "--b", "0.05",
                     "--out", str(tmp_path), "--no-figures"])
    elapsed = time.perf_counter() - t0
    doc = json.loads((tmp_path / "special_points.json").read_text())
    gh = doc["GH"]
    db = abs(gh["b"] - 0.052935)
    dbeta = abs(gh["beta"] - 12.084927)
    # sign change of L1 across the located point
    p = ep.ModelParams(A=1.0, d=1.0, beta=12.0, mu0=2.0, mu1=10.0, b=0.05)
    l1 = []
    for b in (gh["b"] - 1e-3, gh["b"] + 1e-3):
        pp = p.replace(b=b, beta=hopf_beta_at(p, b))
        l1.append(ep.first_lyapunov(pp, ep.e2_equilibrium(pp)))
    ok = (code == 0 and db <= 2e-3 and dbeta <= 2e-3
          and l1[0] * l1[1] < 0 and elapsed < 10.0)
    _line(2, ok, f"GH=({gh['b']:.6f}, {gh['beta']:.6f}), "
                 f"|db|={db:.1e} |dbeta|={dbeta:.1e} (tol 2e-3), "
                 f"L1 sides=({l1[0]:+.3f}, {l1[1]:+.3f}), {elapsed:.2f}s (< 10 s)")


def test_criterion_3_turing_hopf_point(tmp_path):
    t0 = time.perf_counter()
    code = cli_main(["turing-hopf", "--A", "1", "--d", "0.01", "--beta", "0.01",
                     "--mu0", "0.1", "--mu1", "10", "--b", "0.03",
                     "--r2", "0.01", "--ell", "5", "--k1", "4", "--k2", "3",
                     "--out", str(tmp_path), "--no-figures"])
    elapsed = time.perf_counter() - t0
    doc = json.loads((tmp_path / "turing_hopf.json").read_text())
    dr = abs(doc["r1"] - 0.0721)
    dbeta = abs(doc["beta"] - 0.0073)
    diag = doc["diagnostics"]
    ok = (code == 0 and doc["accepted"] and dr <= 2e-3 and dbeta <= 2e-3
          and diag["branch"] in ("H1", "H2", "H1&H2(boundary)")
          and elapsed < 10.0)
    _line(3, ok, f"(r1, beta)=({doc['r1']:.6f}, {doc['beta']:.6f}), "
                 f"|dr1|={dr:.1e} |dbeta|={dbeta:.1e} (tol 2e-3), "
                 f"branch={diag['branch']}, k*={diag['k_star']:.2f}, "
                 f"{elapsed:.2f}s (< 10 s)")


@pytest.mark.slow
def test_criterion_4_figure_regimes():
    recipes = [
        ("fig5_steady.cfg", ep.PatternClass.CONSTANT_STEADY, None),
        ("fig6_turing.cfg", ep.PatternClass.STATIONARY_PATTERN, {3, 4, 5, 6}),
        ("fig7_homogeneous_oscillation.cfg",
         ep.PatternClass.HOMOGENEOUS_PERIODIC, None),
        ("fig9_turing_hopf.cfg", ep.PatternClass.SPATIOTEMPORAL_PATTERN, None),
    ]
    all_ok = True
    details = []
    for name, expect, dom_set in recipes:
        t0 = time.perf_counter()
        cfg, res, grid, rep = _run_recipe(name)
        elapsed = time.perf_counter() - t0
        ok = rep.pattern is expect and elapsed < 300.0
        if dom_set is not None:
            ok = ok and rep.indices["dominant_k"] in dom_set
        if name.startswith("fig9"):
            ok = ok and 10.0 <= rep.indices["peak_I"] <= 30.0
            details.append(f"{name}: {rep.pattern.value}, "
                           f"peak_I={rep.indices['peak_I']:.1f} (in [10, 30]), "
                           f"{elapsed:.0f}s")
        else:
            details.append(f"{name}: {rep.pattern.value}, "
                           f"dom={rep.indices['dominant_k']}, {elapsed:.0f}s")
        all_ok = all_ok and ok
    _line(4, all_ok, "; ".join(details) + " (each < 5 min)")


@pytest.mark.slow
def test_criterion_5_transient_onset():
    t0 = time.perf_counter()
    cfg = load_config(CONFIGS / "fig12_transient.cfg")
    params, diff, sim = cfg.model(), cfg.diffusion(), cfg.sim()
    e2 = ep.e2_equilibrium(params)
    init = ep.default_initial(e2, sim.grid, cfg.ic_amplitude, cfg.ic_wavenumber,
                              cfg.ic_noise_amplitude, cfg.ic_noise_seed)
    res = ep.simulate(params, diff, sim, init)
    assert res.ok, res.status
    onset = transient_onset(res, sim.grid, cfg.onset_threshold, cfg.k_max)
    elapsed = time.perf_counter() - t0
    ok = onset is not None and 2500.0 <= onset <= 3100.0 and elapsed < 1200.0
    _line(5, ok, f"onset t={onset} (window [2500, 3100], paper ~2800), "
                 f"{elapsed:.0f}s (< 20 min)")


def test_criterion_6_limit_cycle_census():
    t0 = time.perf_counter()
    base = dict(A=1.0, d=1.0, beta=12.0, mu0=2.0, mu1=10.0)
    checks = []

    # (a) no cycles; the quoted seed spirals into E2
    p = ep.ModelParams(**base, b=0.0522)
    cyc = ep.find_limit_cycles(p, scan_points=25)
    lab = ep.seed_attractors(p, [(0.65, 0.14)], cyc,
                             t_transient=300, t_measure=150)
    checks.append(len(cyc) == 0 and lab == ["equilibrium"])

    # (b) one stable cycle; both quoted seeds approach it
    p = ep.ModelParams(**base, b=0.052277264)
    cyc = ep.find_limit_cycles(p, scan_points=25)
    lab = ep.seed_attractors(p, [(0.65, 0.14), (0.4, 0.08)], cyc,
                             t_transient=300, t_measure=150)
    checks.append(len(cyc) == 1
                  and cyc[0].stability is ep.CycleStability.STABLE
                  and lab == ["cycle[0]", "cycle[0]"])

    # (c) two cycles, inner unstable and smaller; the inner-basin seed
    # returns to E2, the others reach the outer stable cycle
    p = ep.ModelParams(**base, b=0.052264417)
    cyc = ep.find_limit_cycles(p, scan_points=30)
    by_amp = sorted(cyc, key=lambda c: c.amplitude)
    lab = ep.seed_attractors(p, [(0.4, 0.08), (0.59, 0.054), (0.51, 0.086)],
                             cyc, t_transient=300, t_measure=150)
    stable_idx = next(i for i, c in enumerate(cyc)
                      if c.stability is ep.CycleStability.STABLE)
    checks.append(len(cyc) == 2
                  and by_amp[0].stability is ep.CycleStability.UNSTABLE
                  and by_amp[1].stability is ep.CycleStability.STABLE
                  and lab == [f"cycle[{stable_idx}]", f"cycle[{stable_idx}]",
                              "equilibrium"])
    elapsed = time.perf_counter() - t0
    ok = all(checks) and elapsed < 60.0
    _line(6, ok, f"census (0, 1, 2) cycles -> {checks}, {elapsed:.0f}s (< 1 min)")


def test_criterion_7_property_suites():
    t0 = time.perf_counter()
    rng = np.random.default_rng(123)
    notes = []

    # -- B0 identity and steady-state residuals on 1e4 random draws
    worst_b0 = 0.0
    n_endemic = 0
    for _ in range(10_000):
        mu0 = rng.uniform(0.02, 3.0)
        p = ep.ModelParams(A=10 ** rng.uniform(-1, 1), d=10 ** rng.uniform(-2, 0.3),
                           beta=10 ** rng.uniform(-3, 1.3), mu0=mu0,
                           mu1=mu0 * rng.uniform(1.0, 20.0),
                           b=10 ** rng.uniform(-3, 0.3))
        q = ep.endemic_quadratic(p)
        for e in ep.find_equilibria(p):
            if e.kind in (ep.EquilibriumKind.ENDEMIC_LOW,
                          ep.EquilibriumKind.ENDEMIC_HIGH):
                n_endemic += 1
                fp = 2.0 * q.a2 * e.I + q.a1
                target = e.I * fp / (e.I + p.b)
                jac = ep.ode_jacobian(p, e)
                rel = abs(jac.det - target) / max(abs(target), 1e-300)
                worst_b0 = max(worst_b0, rel)
    assert n_endemic > 2000
    notes.append(f"B0 identity worst rel={worst_b0:.1e} (tol 1e-9, "
                 f"{n_endemic} endemic states)")
    assert worst_b0 <= 1e-9

    # -- region / root-count agreement at 1e4 points
    p1 = ep.ModelParams(A=1.0, d=1.0, beta=12.0, mu0=2.0, mu1=10.0, b=0.05)
    expected = {ep.Region.V0: 0, ep.Region.V1: 1, ep.Region.V2: 2}
    for _ in range(10_000):
        b = 10 ** rng.uniform(-3, -0.5)
        beta = 10 ** rng.uniform(-0.5, 1.5)
        region = ep.classify_region(p1, b, beta)
        count = sum(1 for e in ep.find_equilibria(p1.replace(b=b, beta=beta))
                    if e.kind is not ep.EquilibriumKind.DISEASE_FREE)
        assert count == expected[region], (b, beta, region, count)
    notes.append("region/root-count agreement at 1e4 points")

    # -- gamma ordering
    fig4 = ep.ModelParams(A=0.4, d=0.1, beta=0.1, mu0=0.1, mu1=0.2, b=0.3)
    e2 = ep.e2_equilibrium(fig4)
    gm, gb, gp = ep.gamma_bounds(fig4, e2)
    assert 0 < gm < gb < gp
    notes.append(f"gamma ordering 0 < {gm:.4f} < {gb:.4f} < {gp:.4f}")

    # -- threshold zeros and crossing derivative
    diff = ep.DiffusionParams(1.0, 0.01, 5.0)
    th = ep.turing_thresholds(fig4, diff, e2)
    d = deltas_at(fig4, e2)
    for k, r1k in th.table:
        _, dk = trace_det_k(d, diff.replace(r1=r1k), k)
        assert abs(dk) <= 1e-10 * abs(d.det)
        formula = (diff.r2 * k**2 - d.d4 * diff.ell**2) * k**2 / diff.ell**4
        eps = 1e-6 * max(1.0, r1k)
        fd = (trace_det_k(d, diff.replace(r1=r1k + eps), k)[1]
              - trace_det_k(d, diff.replace(r1=r1k - eps), k)[1]) / (2 * eps)
        assert formula < 0 and fd == pytest.approx(formula, rel=1e-6)
    notes.append("D_k zeros at r1^(k) (rel 1e-10) and dD_k/dr1 < 0")

    # -- Laplacian eigenfunction error is second order
    errs = {}
    for n in (256, 512):
        g = ep.Grid1D(5.0, n)
        u = np.cos(5.0 * g.x / g.ell)
        lam = -(5.0 / g.ell) ** 2
        errs[n] = float(np.max(np.abs(ep.laplacian_neumann(u, g.dx) - lam * u))
                        / np.max(np.abs(lam * u)))
    assert errs[512] < 1e-3 and errs[256] / errs[512] == pytest.approx(4.0, rel=0.1)
    notes.append(f"Laplacian eigenfunction err {errs[512]:.1e} at n=512, O(dx^2)")

    # -- single-mode growth rate against the dispersion relation (5%)
    diff6 = ep.DiffusionParams(4.6028, 0.01, 5.0)
    lam5 = ep.dispersion_scan(fig4, diff6, e2, 5)[5].max_real_part
    grid = ep.Grid1D(5.0, 256)
    init = ep.FieldState(0.0, e2.S + 1e-6 * np.cos(grid.x),
                         e2.I + 1e-6 * np.cos(grid.x))
    res = ep.simulate(fig4, diff6, ep.SimConfig(grid, 0.01, 200.0, 500), init)
    ts, amps = mode_series(res.states, grid, 6, which="I")
    mask = ts >= 50.0
    slope = float(np.polyfit(ts[mask], np.log(np.abs(amps[mask, 5])), 1)[0])
    assert slope == pytest.approx(lam5, rel=0.05)
    notes.append(f"mode-5 growth {slope:.5f} vs Re lambda {lam5:.5f} (5%)")

    # -- homogeneous PDE limit-cycle period against the kinetics cycle (2%)
    p7 = ep.ModelParams(A=1.0, d=1.0, beta=12.0, mu0=2.0, mu1=10.0,
                        b=0.052277264)
    cyc = ep.find_limit_cycles(p7, scan_points=20, scan_lo_frac=0.5)[0]
    e27 = ep.e2_equilibrium(p7)
    g64 = ep.Grid1D(5.0, 64)
    init7 = ep.FieldState(0.0, np.full(64, e27.S), np.full(64, cyc.section_I))
    res7 = ep.simulate(p7, ep.DiffusionParams(0.01, 0.01, 5.0),
                       ep.SimConfig(g64, 0.01, 8.0 * cyc.period, 5), init7)
    ts7, amps7 = mode_series(res7.states, g64, 2, which="I")
    period = ep.temporal_period(ts7, amps7[:, 0])
    assert period == pytest.approx(cyc.period, rel=0.02)
    notes.append(f"0-mode PDE period {period:.4f} vs ODE {cyc.period:.4f} (2%)")

    # -- cubic coefficients against a finite-difference Taylor expansion
    pgh = ep.ModelParams(A=1.0, d=1.0, beta=12.080550, mu0=2.0, mu1=10.0,
                         b=0.0529)
    egh = ep.e2_equilibrium(pgh)
    c = ep.cubic_coeffs(pgh, egh)

    def F(S, I):
        dS = (pgh.A - pgh.d * S - pgh.beta * S * I) * (I + pgh.b)
        dI = ((pgh.beta * S - pgh.d) * (I + pgh.b) * I
              - (pgh.mu0 * I + pgh.mu1 * pgh.b) * I)
        return dS, dI

    xs = egh.S + 1e-3 * np.arange(-3, 4)
    ys = egh.I + 1e-3 * np.arange(-3, 4)
    G1 = np.array([[F(x, y)[0] for y in ys] for x in xs])
    G2 = np.array([[F(x, y)[1] for y in ys] for x in xs])
    X, Y = np.meshgrid(xs - egh.S, ys - egh.I, indexing="ij")
    terms = [(i, j) for i in range(5) for j in range(5) if i + j <= 4]
    M = np.column_stack([(X ** i * Y ** j).ravel() for i, j in terms])
    c1 = dict(zip(terms, np.linalg.lstsq(M, G1.ravel(), rcond=None)[0]))
    c2 = dict(zip(terms, np.linalg.lstsq(M, G2.ravel(), rcond=None)[0]))
    worst = max(
        abs(got - want) / max(abs(want), 1e-300) for got, want in [
            (c.j11, c1[(1, 0)]), (c.j12, c1[(0, 1)]), (c.j21, c2[(1, 0)]),
            (c.j22, c2[(0, 1)]), (c.a11, c1[(1, 1)]), (c.a02, c1[(0, 2)]),
            (c.a12, c1[(1, 2)]), (c.b11, c2[(1, 1)]), (c.b02, c2[(0, 2)]),
            (c.b12, c2[(1, 2)])])
    assert worst <= 1e-6
    notes.append(f"cubic-coefficient Taylor oracle worst rel={worst:.1e} (1e-6)")

    elapsed = time.perf_counter() - t0
    ok = elapsed < 30.0
    _line(7, ok, "; ".join(notes) + f"; total {elapsed:.1f}s (< 30 s)")
