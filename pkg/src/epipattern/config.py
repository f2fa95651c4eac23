"""Run configuration: a flat key = value text format plus flag overrides.

Every key has a declared type and default; unknown keys in a config file are
a hard error so that typos cannot silently fall back to defaults.  The same
keys are exposed one-to-one as command-line flags, which take precedence
over the file.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .kinetics import ModelParams
from .spectral import DiffusionParams
from .pde import Grid1D, Integrator, SimConfig

__all__ = ["ConfigError", "RunConfig", "KEY_HELP", "load_config", "dump_config"]


class ConfigError(ValueError):
    """Bad configuration file or flag values."""


@dataclass
class RunConfig:
    # reaction kinetics
    A: float = 0.4
    d: float = 0.1
    beta: float = 0.1
    mu0: float = 0.1
    mu1: float = 0.2
    b: float = 0.3
    # diffusion and domain
    r1: float = 1.0
    r2: float = 0.01
    ell: float = 5.0
    # discretization
    n: int = 512
    dt: float = 0.01
    t_end: float = 200.0
    snapshot_stride: int = 100
    integrator: str = "imex_cn"
    # initial condition
    ic_amplitude: float = 0.01
    ic_wavenumber: float = 0.4
    ic_noise_amplitude: float = 0.0
    ic_noise_seed: int = 0
    # analysis
    window_start: float = -1.0      # < 0: use the trailing window_fraction
    window_end: float = -1.0
    window_fraction: float = 0.5
    k_max: int = 16
    onset_threshold: float = 0.2
    # curve tracing / scans
    b_min: float = 0.0
    b_max: float = -1.0             # < 0: A/(d+mu1), the C1 pole
    n_points: int = 100
    scan_k_max: int = -1            # < 0: max(2*k_bar, 50)
    # Turing-Hopf target modes
    k1: int = 4
    k2: int = 3
    # sweep
    sweep_mode: str = "spectral"    # or "simulate"
    axis1: str = ""                 # "param=lo:hi:count"
    axis2: str = ""
    # space-time output format
    output_format: str = "csv"      # or "blob"

    def model(self) -> ModelParams:
        try:
            return ModelParams(self.A, self.d, self.beta, self.mu0, self.mu1, self.b)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def diffusion(self) -> DiffusionParams:
        try:
            return DiffusionParams(self.r1, self.r2, self.ell)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def grid(self) -> Grid1D:
        try:
            return Grid1D(self.ell, self.n)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def sim(self) -> SimConfig:
        try:
            integ = Integrator(self.integrator)
        except ValueError as e:
            raise ConfigError(f"unknown integrator {self.integrator!r} "
                              f"(use imex_cn or explicit_rk4)") from e
        try:
            return SimConfig(self.grid(), self.dt, self.t_end,
                             self.snapshot_stride, integ)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def analysis_window(self, t_end: float) -> tuple[float, float]:
        if self.window_start >= 0 and self.window_end > self.window_start:
            return (self.window_start, self.window_end)
        return ((1.0 - self.window_fraction) * t_end, t_end)

    def b_window(self) -> tuple[float, float]:
        hi = self.b_max
        if hi < 0:
            hi = 0.98 * self.A / (self.d + self.mu1)
        lo = max(self.b_min, 1e-9)
        if hi <= lo:
            raise ConfigError(f"empty b window [{lo}, {hi}]")
        return lo, hi


KEY_HELP = {
    "A": "recruitment rate of susceptibles",
    "d": "natural death rate",
    "beta": "transmission rate",
    "mu0": "minimum recovery rate",
    "mu1": "maximum recovery rate",
    "b": "health-resource availability",
    "r1": "susceptible diffusion rate",
    "r2": "infected diffusion rate",
    "ell": "domain scale (domain is [0, ell*pi])",
    "n": "grid points",
    "dt": "time step",
    "t_end": "simulation horizon",
    "snapshot_stride": "steps between stored snapshots",
    "integrator": "imex_cn or explicit_rk4",
    "ic_amplitude": "cosine perturbation amplitude",
    "ic_wavenumber": "cosine perturbation wavenumber",
    "ic_noise_amplitude": "extra broadband perturbation amplitude (0 = off)",
    "ic_noise_seed": "generator seed for the broadband perturbation",
    "window_start": "analysis window start time (-1 = trailing fraction)",
    "window_end": "analysis window end time",
    "window_fraction": "trailing fraction analyzed when no window given",
    "k_max": "highest cosine mode tracked by the classifier",
    "onset_threshold": "fraction of the plateau defining transient onset",
    "b_min": "curve-tracing window lower end in b",
    "b_max": "curve-tracing window upper end in b (-1 = auto)",
    "n_points": "points per traced curve",
    "scan_k_max": "dispersion scan mode cutoff (-1 = auto)",
    "k1": "Turing mode index for turing-hopf",
    "k2": "Hopf mode index for turing-hopf",
    "sweep_mode": "sweep cell evaluation: spectral or simulate",
    "axis1": "sweep axis, e.g. r1=0.05:0.08:13",
    "axis2": "optional second sweep axis",
    "output_format": "space-time file format: csv or blob",
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    typ = _FIELD_TYPES[key]
    try:
        if typ in ("int", int):
            return int(raw)
        if typ in ("float", float):
            return float(raw)
        return raw
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {raw!r}") from e


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional file plus override values.

    File syntax: one ``key = value`` per line, '#' starts a comment.  Unknown
    keys raise ConfigError.
    """
    cfg = RunConfig()
    if path is not None:
        text = Path(path).read_text()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key, raw = key.strip(), raw.strip()
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            setattr(cfg, key, _convert(key, raw))
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, val if not isinstance(val, str) else _convert(key, val))
    return cfg


def dump_config(cfg: RunConfig) -> str:
    """Effective configuration in the file format (reload gives an
    equivalent run)."""
    lines = ["# epipattern run configuration"]
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, float):
            v = format(v, ".17g")
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
