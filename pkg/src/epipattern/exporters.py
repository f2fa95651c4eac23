"""Deterministic file writers and readers for all command outputs.

Floats render with 17 significant digits everywhere (CSV and JSON), so a
given configuration always produces byte-identical files.  Space-time data
goes to either a ``t,x,S,I`` CSV (row-major by time then space) or a raw
little-endian float64 blob with a JSON sidecar.  Heatmap rasters are binary
PPM with a fixed built-in colormap: identical grids give identical bytes.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .pde import FieldState, Grid1D, SimulationResult

__all__ = [
    "fmt_float",
    "dumps_json",
    "write_json",
    "write_csv",
    "write_spacetime_csv",
    "write_spacetime_blob",
    "read_spacetime",
    "write_ppm_heatmap",
    "write_trajectory_csv",
    "cycles_to_json",
    "write_mode_series_csv",
]


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _render_json(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    pad_close = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return fmt_float(x)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [_render_json(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(pad + s for s in items) + "\n" + pad_close + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_render_json(v, indent, level + 1)}"
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(pad + s for s in items) + "\n" + pad_close + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_json(obj) -> str:
    """JSON text with sorted keys and 17-significant-digit floats."""
    return _render_json(obj, 2, 0) + "\n"


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj))
    return path


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    """CSV with deterministic float formatting; rows may mix floats, ints,
    and strings."""
    path = Path(path)
    out = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(fmt_float(v))
            else:
                cells.append(str(v))
        out.append(",".join(cells))
    path.write_text("\n".join(out) + "\n")
    return path


def write_spacetime_csv(path: str | Path, result: SimulationResult,
                        grid: Grid1D) -> Path:
    x = grid.x
    rows = []
    for st in result.states:
        for j in range(grid.n):
            rows.append((st.t, x[j], st.S[j], st.I[j]))
    return write_csv(path, ["t", "x", "S", "I"], rows)


def write_spacetime_blob(path: str | Path, result: SimulationResult,
                         grid: Grid1D, meta: dict | None = None) -> tuple[Path, Path]:
    """Raw little-endian float64 array of shape (n_snapshots, 2, n), fields
    ordered (S, I), plus a JSON sidecar describing the layout."""
    path = Path(path)
    arr = np.stack([np.stack([s.S, s.I]) for s in result.states]).astype("<f8")
    path.write_bytes(arr.tobytes(order="C"))
    sidecar = {
        "layout": "time,field,space",
        "fields": ["S", "I"],
        "dtype": "<f8",
        "shape": list(arr.shape),
        "times": [s.t for s in result.states],
        "ell": grid.ell,
        "n": grid.n,
        "dx": grid.dx,
        "status": result.status,
    }
    if meta:
        sidecar["meta"] = meta
    side = path.with_suffix(path.suffix + ".json")
    write_json(side, sidecar)
    return path, side


def read_spacetime(path: str | Path) -> tuple[SimulationResult, Grid1D]:
    """Load a space-time file written by either writer (CSV sniffed by
    extension/header, blob by its sidecar)."""
    path = Path(path)
    side = path.with_suffix(path.suffix + ".json")
    if side.exists():
        meta = json.loads(side.read_text())
        shape = tuple(meta["shape"])
        arr = np.frombuffer(path.read_bytes(), dtype="<f8").reshape(shape)
        grid = Grid1D(meta["ell"], meta["n"])
        states = [FieldState(t, arr[i, 0].copy(), arr[i, 1].copy())
                  for i, t in enumerate(meta["times"])]
        return SimulationResult(states, status=meta.get("status", "ok")), grid

    data = np.loadtxt(path, delimiter=",", skiprows=1)
    ts = np.unique(data[:, 0])
    xs = np.unique(data[:, 1])
    n = len(xs)
    ell = xs[-1] / math.pi
    grid = Grid1D(ell, n)
    states = []
    for i, t in enumerate(ts):
        block = data[i * n:(i + 1) * n]
        states.append(FieldState(float(t), block[:, 2].copy(), block[:, 3].copy()))
    return SimulationResult(states), grid


def write_trajectory_csv(path: str | Path, trajectory) -> Path:
    """Kinetics trajectory as rows of (t, S, I)."""
    rows = [(t, s, i) for t, (s, i) in zip(trajectory.times, trajectory.states)]
    return write_csv(path, ["t", "S", "I"], rows)


def cycles_to_json(cycles) -> list[dict]:
    """Limit-cycle census in plain-dict form for write_json."""
    return [{
        "period": c.period,
        "stability": c.stability.value,
        "amplitude": c.amplitude,
        "multiplier": c.multiplier,
        "residual": c.residual,
        "I_min": c.i_min,
        "I_max": c.i_max,
        "section_points": [list(pt) for pt in c.section_points],
    } for c in cycles]


def write_mode_series_csv(path: str | Path, result: SimulationResult,
                          grid: Grid1D, k_max: int) -> Path:
    """Cosine-mode amplitude time series as rows of (t, k, a_k)."""
    from .patterns import mode_series
    ts, amps = mode_series(result.states, grid, k_max, which="I")
    rows = []
    for i, t in enumerate(ts):
        for k in range(k_max + 1):
            rows.append((t, k, amps[i, k]))
    return write_csv(path, ["t", "k", "a_k"], rows)


# ---------------------------------------------------------------------------
# PPM heatmap raster

# seven-stop blue-to-yellow gradient, interpolated linearly in RGB
_COLOR_STOPS = np.array([
    (68, 1, 84), (71, 44, 122), (59, 81, 139), (44, 113, 142),
    (33, 144, 141), (93, 201, 99), (253, 231, 37)], dtype=float)


def _colormap(v: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] to RGB bytes through the fixed gradient."""
    v = np.clip(v, 0.0, 1.0) * (len(_COLOR_STOPS) - 1)
    lo = np.floor(v).astype(int)
    hi = np.minimum(lo + 1, len(_COLOR_STOPS) - 1)
    frac = (v - lo)[..., None]
    rgb = _COLOR_STOPS[lo] * (1.0 - frac) + _COLOR_STOPS[hi] * frac
    return np.round(rgb).astype(np.uint8)


def write_ppm_heatmap(path: str | Path, result: SimulationResult, grid: Grid1D,
                      which: str = "I", max_rows: int = 1024) -> Path:
    """Binary PPM of one field over (x, t): columns are space, rows are time
    (earliest at the top).  Snapshots are decimated deterministically to at
    most ``max_rows`` rows; values normalize to the global min/max."""
    states = result.states
    step = max(1, -(-len(states) // max_rows))      # ceil division
    picked = states[::step]
    data = np.stack([getattr(s, which) for s in picked])
    vmin, vmax = float(data.min()), float(data.max())
    span = vmax - vmin if vmax > vmin else 1.0
    img = _colormap((data - vmin) / span)
    h, w = img.shape[0], img.shape[1]
    header = (f"P6\n# epipattern heatmap colormap=blue-yellow-v1 field={which} "
              f"vmin={fmt_float(vmin)} vmax={fmt_float(vmax)} "
              f"t0={fmt_float(picked[0].t)} t1={fmt_float(picked[-1].t)}\n"
              f"{w} {h}\n255\n")
    path = Path(path)
    path.write_bytes(header.encode("ascii") + img.tobytes())
    return path
