"""Batch command-line front end.

Each paper-style analysis is one subcommand writing CSV/JSON (byte
reproducible) plus optional PPM rasters and matplotlib PNGs into the output
directory.  Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 requested object not found.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import bifurcation as bif
from . import figures as figs
from . import patterns as pat
from .config import KEY_HELP, ConfigError, RunConfig, dump_config, load_config
from .exporters import (dumps_json, write_csv, write_json,
                        write_mode_series_csv, write_ppm_heatmap,
                        write_spacetime_blob, write_spacetime_csv,
                        read_spacetime)
from .kinetics import (EquilibriumKind, basic_reproduction_number,
                       e2_equilibrium, find_equilibria, ode_jacobian,
                       stability_E2, E2Stability)
from .pde import default_initial, simulate
from .spectral import (DiffusionClass, classify_with_diffusion, deltas_at,
                       dispersion_scan, double_zero_detect, gamma_bounds,
                       hopf_mode_threshold, turing_hopf_detect,
                       turing_thresholds, turing_turing_points)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NOTFOUND = 0, 2, 3, 4


# ---------------------------------------------------------------------------
# argument plumbing

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key = value config file")
    common.add_argument("--out", metavar="DIR", default="out", help="output directory")
    common.add_argument("--raster", action="store_true",
                        help="also write deterministic PPM heatmaps")
    common.add_argument("--no-figures", action="store_true",
                        help="skip matplotlib PNG rendering")
    common.add_argument("--jobs", type=int, default=1, help="sweep worker count")
    common.add_argument("--seed", type=int, default=None,
                        help="reserved; not used by the numerics")
    common.add_argument("--dump-config", action="store_true",
                        help="write the effective configuration to the output dir")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        typ = {"float": float, "int": int, "str": str}[str(f.type)] \
            if isinstance(f.type, str) else f.type
        common.add_argument(flag, dest=f.name, type=typ, default=None,
                            help=KEY_HELP.get(f.name, ""))

    p = argparse.ArgumentParser(
        prog="epipattern",
        description="equilibria, bifurcations, and pattern formation of a "
                    "diffusive epidemic model with saturating recovery")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("equilibria", "constant steady states, region, and stability"),
        ("bifdiagram", "threshold curves and codimension-2 points in (b, beta)"),
        ("dispersion", "per-mode eigenvalues of the linearized system"),
        ("turing-scan", "Turing threshold table r1^(k)"),
        ("hopf-curve", "trace the Hopf locus in (b, beta)"),
        ("turing-hopf", "(k1,k2)-mode Turing-Hopf point detection"),
        ("simulate", "integrate the reaction-diffusion system and classify"),
        ("classify", "classify a previously saved space-time file"),
        ("sweep", "Cartesian parameter sweep"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=helptext)
        if name == "classify":
            sp.add_argument("--input", required=True, metavar="FILE",
                            help="space-time CSV or blob to classify")
    return p


def _config_from_args(args) -> RunConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
    return load_config(args.config, overrides)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stability_tag(params, eq) -> str:
    jac = ode_jacobian(params, eq)
    if jac.det < 0:
        return "saddle"
    if eq.kind in (EquilibriumKind.ENDEMIC_HIGH, EquilibriumKind.DEGENERATE):
        try:
            return stability_E2(params).value
        except ValueError:
            pass
    lam = jac.eigenvalues()
    mx = max(lam[0].real, lam[1].real)
    if mx < 0:
        return "stable"
    if mx > 0:
        return "unstable"
    return "marginal"


# ---------------------------------------------------------------------------
# commands

def cmd_equilibria(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    params = cfg.model()
    region = bif.classify_region(params, params.b, params.beta)
    report = {
        "R0": basic_reproduction_number(params),
        "region": region.value,
        "equilibria": [],
    }
    for eq in find_equilibria(params):
        jac = ode_jacobian(params, eq)
        lam = jac.eigenvalues()
        report["equilibria"].append({
            "kind": eq.kind.value,
            "S": eq.S,
            "I": eq.I,
            "stability": _stability_tag(params, eq),
            "eigenvalues": [[lam[0].real, lam[0].imag], [lam[1].real, lam[1].imag]],
            "trace": jac.trace,
            "det": jac.det,
        })
    path = write_json(out / "equilibria.json", report)
    sys.stdout.write(dumps_json(report))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_bifdiagram(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    params = cfg.model()
    lo, hi = cfg.b_window()
    bs = np.linspace(lo, hi, cfg.n_points)
    bt = bif.b_tilde(params)

    rows, curves = [], {"C0": [], "C1": [], "CDelta+": [], "CDelta-": [], "H": []}
    for b in bs:
        b = float(b)
        curves["C0"].append((b, bif.curve_c0(params, b)))
        if b < params.A / (params.d + params.mu1) * 0.999:
            curves["C1"].append((b, bif.curve_c1(params, b)))
        if b <= bt:
            curves["CDelta+"].append((b, bif.curve_cdelta(params, b, +1)))
            curves["CDelta-"].append((b, bif.curve_cdelta(params, b, -1)))
    hopf_pts = bif.trace_hopf_curve(params, (lo, hi), cfg.n_points)
    curves["H"] = [(p.b, p.beta) for p in hopf_pts]
    for tag, pts in curves.items():
        rows += [(b, beta, tag) for b, beta in pts]
    write_csv(out / "curves.csv", ["b", "beta", "curve"], rows)

    special = dict(bif.special_points(params))
    special_json = {k: (list(v) if isinstance(v, tuple) else v)
                    for k, v in special.items()}
    for p in bif.locate_bt_points(params, (0.0, bt)):
        special_json.setdefault("BT", []).append(
            {"b": p.b, "beta": p.beta, **p.diagnostics})

    gh_found = True
    try:
        gh = bif.locate_generalized_hopf(params, hopf_pts)
        special_json["GH"] = {"b": gh.b, "beta": gh.beta, **gh.diagnostics}
    except bif.NotFoundError as e:
        gh_found = False
        special_json["GH"] = None
        special_json["GH_message"] = str(e)
    write_json(out / "special_points.json", special_json)

    if not args.no_figures:
        marks = {k: tuple(v) for k, v in special.items() if k.startswith("P")}
        if gh_found:
            marks["GH"] = (special_json["GH"]["b"], special_json["GH"]["beta"])
        figs.bifdiagram_figure(out / "bifdiagram.png", curves, marks)
    print(f"wrote {out/'curves.csv'} and {out/'special_points.json'}")
    if not gh_found:
        print("no generalized Hopf point in range", file=sys.stderr)
        return EXIT_NOTFOUND
    return EXIT_OK


def _require_stable_e2(params):
    eqs = find_equilibria(params)
    e2 = next((e for e in eqs if e.kind in
               (EquilibriumKind.ENDEMIC_HIGH, EquilibriumKind.DEGENERATE)), None)
    if e2 is None:
        raise bif.NotFoundError("E2 does not exist at these parameters")
    st = stability_E2(params)
    if st is E2Stability.UNSTABLE:
        raise bif.NotFoundError(
            "E2 is unstable for the kinetics; Turing analysis needs an "
            "ODE-stable steady state")
    return e2


def cmd_dispersion(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    params = cfg.model()
    diff = cfg.diffusion()
    e2 = _require_stable_e2(params)
    th = turing_thresholds(params, diff, e2)
    k_max = cfg.scan_k_max if cfg.scan_k_max > 0 else max(2 * th.k_bar, 50)
    modes = dispersion_scan(params, diff, e2, k_max)
    write_csv(out / "dispersion.csv",
              ["k", "Tk", "Dk", "re_lambda1", "im_lambda1"],
              [(m.k, m.tk, m.dk, m.eigenvalues[0].real, m.eigenvalues[0].imag)
               for m in modes])
    cls = classify_with_diffusion(params, diff, e2)
    write_json(out / "dispersion_summary.json", {
        "classification": cls.verdict.value,
        "unstable_modes": list(cls.unstable_modes),
        "threshold_modes": list(cls.threshold_modes),
        "E2": {"S": e2.S, "I": e2.I},
    })
    if not args.no_figures:
        figs.dispersion_figure(out / "dispersion.png", modes)
    print(f"wrote {out/'dispersion.csv'}; classification: {cls.verdict.value}")
    return EXIT_OK


def cmd_turing_scan(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    params = cfg.model()
    diff = cfg.diffusion()
    e2 = _require_stable_e2(params)
    th = turing_thresholds(params, diff, e2)
    write_csv(out / "turing_thresholds.csv", ["k", "r1_k"], list(th.table))
    summary = {
        "k_bar": th.k_bar,
        "k_breve": th.k_breve,
        "k_hat": th.k_hat,
        "gamma_minus": th.gamma_minus,
        "gamma_bar": th.gamma_bar,
        "gamma_plus": th.gamma_plus,
        "stable": th.stable,
        "multi_minimum": th.multi_minimum,
        "min_threshold": min((r for _, r in th.table), default=None),
        "table": [{"k": k, "r1": r} for k, r in th.table],
    }
    write_json(out / "turing_summary.json", summary)
    if not args.no_figures:
        figs.threshold_figure(out / "turing_thresholds.png", th,
                              deltas_at(params, e2), diff.ell, diff.r2)
    sys.stdout.write(dumps_json(summary))
    return EXIT_OK


def cmd_hopf_curve(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    params = cfg.model()
    pts = bif.trace_hopf_curve(params, cfg.b_window(), cfg.n_points)
    if not pts:
        print("no Hopf locus in the scanned window", file=sys.stderr)
        return EXIT_NOTFOUND
    write_csv(out / "hopf_curve.csv",
              ["b", "beta", "I2", "B1_residual", "D0", "transversality",
               "L1", "L1_printed"],
              [(p.b, p.beta, p.diagnostics["I2"], p.diagnostics["B1_residual"],
                p.diagnostics["D0"], p.diagnostics["transversality"],
                p.diagnostics["L1"], p.diagnostics["L1_printed"]) for p in pts])
    gh_xy = None
    gh_json = None
    try:
        gh = bif.locate_generalized_hopf(params, pts)
        gh_xy = (gh.b, gh.beta)
        gh_json = {"b": gh.b, "beta": gh.beta, **gh.diagnostics}
    except bif.NotFoundError:
        pass
    write_json(out / "hopf_curve.json",
               {"n_points": len(pts), "GH": gh_json})
    if not args.no_figures:
        figs.hopf_curve_figure(out / "hopf_curve.png", pts, gh_xy)
    print(f"wrote {out/'hopf_curve.csv'} ({len(pts)} points)")
    return EXIT_OK


def cmd_turing_hopf(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    params = cfg.model()
    diff = cfg.diffusion()
    res = turing_hopf_detect(params, diff, cfg.k1, cfg.k2)
    report = {
        "accepted": res.accepted,
        "k1": res.k1,
        "k2": res.k2,
        "r1": res.r1,
        "beta": res.beta,
        "reason": res.reason,
        "diagnostics": res.diagnostics,
    }
    write_json(out / "turing_hopf.json", report)
    sys.stdout.write(dumps_json(report))
    if not res.accepted and "no simultaneous root" in res.reason:
        return EXIT_NOTFOUND
    return EXIT_OK


def _run_simulation(cfg: RunConfig, args):
    params = cfg.model()
    diff = cfg.diffusion()
    sim = cfg.sim()
    try:
        e2 = e2_equilibrium(params)
    except ValueError as e:
        raise bif.NotFoundError(str(e)) from e
    initial = default_initial(e2, sim.grid, cfg.ic_amplitude, cfg.ic_wavenumber,
                              cfg.ic_noise_amplitude, cfg.ic_noise_seed)
    return params, diff, sim, simulate(params, diff, sim, initial)


def _classification_outputs(cfg: RunConfig, args, result, grid, out: Path) -> dict:
    window = cfg.analysis_window(result.states[-1].t)
    report = pat.classify_pattern(result, grid, window, cfg.k_max)
    onset = pat.transient_onset(result, grid, cfg.onset_threshold, cfg.k_max)
    doc = {
        "pattern": report.pattern.value,
        "dominant_modes": list(report.dominant_modes),
        "temporal_period": report.temporal_period,
        "transient_onset": onset,
        "indices": report.indices,
        "status": result.status,
    }
    write_json(out / "report.json", doc)
    write_mode_series_csv(out / "modes.csv", result, grid, cfg.k_max)
    if args.raster:
        write_ppm_heatmap(out / "heatmap_S.ppm", result, grid, "S")
        write_ppm_heatmap(out / "heatmap_I.ppm", result, grid, "I")
    if not args.no_figures:
        figs.heatmap_figure(out / "heatmap_S.png", result, grid, "S")
        figs.heatmap_figure(out / "heatmap_I.png", result, grid, "I")
    return doc


def cmd_simulate(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    params, diff, sim, result = _run_simulation(cfg, args)
    if cfg.output_format == "blob":
        write_spacetime_blob(out / "spacetime.bin", result, sim.grid,
                             meta={"config": dump_config(cfg)})
    else:
        write_spacetime_csv(out / "spacetime.csv", result, sim.grid)
    if not result.ok:
        write_json(out / "report.json",
                   {"status": result.status, "steps_done": result.steps_done})
        print(f"solver aborted: {result.status}", file=sys.stderr)
        return EXIT_NUMERIC
    doc = _classification_outputs(cfg, args, result, sim.grid, out)
    print(f"pattern: {doc['pattern']}  (outputs in {out})")
    return EXIT_OK


def cmd_classify(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    result, grid = read_spacetime(args.input)
    doc = _classification_outputs(cfg, args, result, grid, out)
    sys.stdout.write(dumps_json(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep

def _parse_axis(spec: str) -> tuple[str, np.ndarray]:
    try:
        name, _, rng = spec.partition("=")
        lo, hi, count = rng.split(":")
        vals = np.linspace(float(lo), float(hi), int(count))
    except ValueError as e:
        raise ConfigError(f"bad axis spec {spec!r}; want param=lo:hi:count") from e
    name = name.strip()
    if name not in {f.name for f in fields(RunConfig)}:
        raise ConfigError(f"unknown sweep parameter {name!r}")
    return name, vals


def _sweep_cell(job) -> dict:
    """One sweep cell; module-level so process pools can pickle it."""
    cfg_text, updates, mode = job
    cfg = load_config(None)
    for line in cfg_text.splitlines()[1:]:
        key, _, raw = line.partition(" = ")
        setattr(cfg, key, type(getattr(cfg, key))(raw))
    for k, v in updates.items():
        setattr(cfg, k, v)
    try:
        params = cfg.model()
        if mode == "simulate":
            diff, sim = cfg.diffusion(), cfg.sim()
            e2 = e2_equilibrium(params)
            initial = default_initial(e2, sim.grid, cfg.ic_amplitude,
                                      cfg.ic_wavenumber, cfg.ic_noise_amplitude,
                                      cfg.ic_noise_seed)
            result = simulate(params, diff, sim, initial)
            if not result.ok:
                return {"error": result.status, **updates}
            window = cfg.analysis_window(result.states[-1].t)
            rep = pat.classify_pattern(result, sim.grid, window, cfg.k_max)
            return {"pattern": rep.pattern.value,
                    "dominant_modes": list(rep.dominant_modes),
                    "peak_I": rep.indices["peak_I"], **updates}
        # spectral mode: linear summary only
        diff = cfg.diffusion()
        eqs = find_equilibria(params)
        e2 = next((e for e in eqs if e.kind in
                   (EquilibriumKind.ENDEMIC_HIGH, EquilibriumKind.DEGENERATE)), None)
        if e2 is None:
            return {"exists_E2": False, **updates}
        d = deltas_at(params, e2)
        modes = dispersion_scan(params, diff, e2, 24)
        n_unstable = sum(1 for m in modes[1:] if m.dk < 0)
        osc_unstable = [m.k for m in modes
                        if m.tk > 0 and m.eigenvalues[0].imag != 0]
        return {
            "exists_E2": True,
            "T0": d.trace,
            "D0": d.det,
            "n_turing_unstable": n_unstable,
            "oscillatory_unstable_modes": osc_unstable,
            **updates,
        }
    except Exception as e:     # per-cell failures recorded, sweep continues
        return {"error": f"{type(e).__name__}: {e}", **updates}


def cmd_sweep(cfg: RunConfig, args) -> int:
    out = _outdir(args)
    if not cfg.axis1:
        raise ConfigError("sweep needs axis1 (e.g. --axis1 'r1=0.05:0.08:13')")
    name1, vals1 = _parse_axis(cfg.axis1)
    name2, vals2 = (None, None)
    if cfg.axis2:
        name2, vals2 = _parse_axis(cfg.axis2)
    if cfg.sweep_mode not in ("spectral", "simulate"):
        raise ConfigError(f"sweep_mode must be spectral or simulate, "
                          f"got {cfg.sweep_mode!r}")

    cfg_text = dump_config(cfg)
    jobs = []
    for v1 in vals1:
        if vals2 is None:
            jobs.append((cfg_text, {name1: float(v1)}, cfg.sweep_mode))
        else:
            for v2 in vals2:
                jobs.append((cfg_text, {name1: float(v1), name2: float(v2)},
                             cfg.sweep_mode))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            cells = list(pool.map(_sweep_cell, jobs, chunksize=1))
    else:
        cells = [_sweep_cell(j) for j in jobs]

    doc = {
        "mode": cfg.sweep_mode,
        "axis1": {"param": name1, "values": vals1.tolist()},
        "axis2": None if vals2 is None else {"param": name2, "values": vals2.tolist()},
        "cells": cells,
    }
    # codimension-2 point structure comes with any (r1, beta) sweep:
    # (k1,k2)- and (k,0)-mode Turing-Hopf points plus same-mode double zeros
    if cfg.sweep_mode == "spectral" and {"r1", "beta"} <= {name1, name2}:
        params = cfg.model()
        diff = cfg.diffusion()
        th_points, dz_points = [], []
        for k1_ in range(1, 4):
            for k2_ in range(0, k1_):
                r = turing_hopf_detect(params, diff, k1_, k2_)
                if r.accepted:
                    th_points.append({"k1": r.k1, "k2": r.k2,
                                      "r1": r.r1, "beta": r.beta})
            try:
                dz = double_zero_detect(params, diff, k1_)
                dz_points.append(dz)
            except bif.NotFoundError:
                pass
        doc["turing_hopf_points"] = th_points
        doc["double_zero_points"] = dz_points

    # Turing-Turing intersections come with any r2 sweep in spectral mode
    if cfg.sweep_mode == "spectral" and "r2" in (name1, name2):
        r2vals = vals1 if name1 == "r2" else vals2
        params = cfg.model()
        eqs = find_equilibria(params)
        e2 = next((e for e in eqs if e.kind is EquilibriumKind.ENDEMIC_HIGH), None)
        if e2 is not None and stability_E2(params) is not E2Stability.UNSTABLE:
            r2rng = (float(r2vals.min()), float(r2vals.max()))
            tt = turing_turing_points(params, e2, cfg.ell, r2rng)
            doc["turing_turing_points"] = tt
            if not args.no_figures:
                d = deltas_at(params, e2)
                gm, _, _ = gamma_bounds(params, e2)
                figs.turing_turing_figure(out / "turing_turing.png", d, cfg.ell,
                                          r2rng, gm, tt)
    write_json(out / "sweep.json", doc)

    if not args.no_figures:
        key_order = ["pattern", "n_turing_unstable", "T0"]
        def cell_value(c):
            if "error" in c:
                return math.nan
            if "pattern" in c:
                order = ["constant_steady", "homogeneous_periodic",
                         "stationary_pattern", "spatiotemporal_pattern"]
                return float(order.index(c["pattern"]))
            if "n_turing_unstable" in c:
                return float(c["n_turing_unstable"])
            return math.nan
        vals = [cell_value(c) for c in cells]
        if vals2 is None:
            figs.sweep_figure(out / "sweep.png", vals1, None, vals, "cell value")
        else:
            arr = np.array(vals).reshape(len(vals1), len(vals2)).T
            figs.sweep_figure(out / "sweep.png", vals1, vals2, arr, "cell value")
    print(f"wrote {out/'sweep.json'} ({len(cells)} cells)")
    return EXIT_OK


# ---------------------------------------------------------------------------

_COMMANDS = {
    "equilibria": cmd_equilibria,
    "bifdiagram": cmd_bifdiagram,
    "dispersion": cmd_dispersion,
    "turing-scan": cmd_turing_scan,
    "hopf-curve": cmd_hopf_curve,
    "turing-hopf": cmd_turing_hopf,
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.dump_config:
            out = _outdir(args)
            (out / "config.txt").write_text(dump_config(cfg))
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except bif.NotFoundError as e:
        print(f"not found: {e}", file=sys.stderr)
        return EXIT_NOTFOUND
    except (ValueError, RuntimeError, FloatingPointError, ArithmeticError) as e:
        print(f"numeric failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
