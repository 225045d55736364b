"""Tabulated surface ``I_sub(P, v)`` with bilinear interpolation and a
plain-text file format.

File layout (UTF-8, one item per line)::

    # psamtrain I_sub grid
    format: isub-grid/1
    rate_unit: nats
    noise_var: 1.0
    config_hash: <hex or empty>
    p_points: 61
    v_points: 60
    p_axis: <p_points floats>
    v_axis: <v_points floats>
    values:
    <p_points rows of v_points floats>

Floats are written with ``repr`` so a save/load round trip is exact.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mi import DEFAULT_QUADRATURE, Quadrature, optimize_isub, to_unit

__all__ = [
    "IsubGrid",
    "default_p_axis",
    "build_grid",
    "grid_config_hash",
    "interpolate",
    "save_grid",
    "load_grid",
]

FORMAT_TAG = "isub-grid/1"
_EDGE_TOL = 1e-9


@dataclass
class IsubGrid:
    p_axis: np.ndarray
    v_axis: np.ndarray
    values: np.ndarray
    noise_var: float
    rate_unit: str = "bits"
    config_hash: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.p_axis = np.asarray(self.p_axis, dtype=float)
        self.v_axis = np.asarray(self.v_axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.p_axis), len(self.v_axis)):
            raise ValueError(
                f"values shape {self.values.shape} does not match axes "
                f"({len(self.p_axis)}, {len(self.v_axis)})")
        if np.any(np.diff(self.p_axis) <= 0) or np.any(np.diff(self.v_axis) <= 0):
            raise ValueError("grid axes must be strictly increasing")

    @property
    def p_max(self) -> float:
        return float(self.p_axis[-1])

    def in_unit(self, unit: str) -> "IsubGrid":
        """Copy of the grid with values converted to ``unit``."""
        nats = self.values if self.rate_unit == "nats" else self.values * math.log(2)
        return IsubGrid(self.p_axis.copy(), self.v_axis.copy(), to_unit(nats, unit),
                        self.noise_var, unit, self.config_hash, dict(self.meta))


def default_p_axis(p_max: float, p_points: int) -> np.ndarray:
    """``P = 0`` followed by ``p_points`` geometrically spaced powers up to
    ``p_max``.

    The ratio is a whole number of steps per decade so that ``p_max / 10``
    (the average power when ``p_max`` is ten times it) is a node.
    """
    if p_points < 2:
        raise ValueError("need at least 2 positive power points")
    per_decade = math.ceil((p_points - 1) / 3)
    j = np.arange(p_points - 1, -1, -1)
    return np.concatenate([[0.0], p_max * 10.0 ** (-j / per_decade)])


def grid_config_hash(p_max: float, p_points: int, v_points: int, noise_var: float,
                     rate_unit: str, quad: Quadrature = DEFAULT_QUADRATURE) -> str:
    """Short digest of everything that determines a grid's contents."""
    payload = json.dumps({
        "p_max": repr(float(p_max)), "p_points": int(p_points),
        "v_points": int(v_points), "noise_var": repr(float(noise_var)),
        "rate_unit": rate_unit,
        "quadrature": [quad.n_re, quad.n_im, quad.n_mag,
                       repr(quad.log_mag_lo), repr(quad.log_mag_hi)],
    }, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _row(args):
    P, v_axis, noise_var, quad = args
    return [optimize_isub(P, float(v), noise_var, quad, unit="nats")[1] for v in v_axis]


def build_grid(p_max: float, p_points: int, v_points: int, noise_var: float,
               rate_unit: str = "bits", quad: Quadrature = DEFAULT_QUADRATURE,
               jobs: int = 1, progress=None) -> IsubGrid:
    """Tabulate ``optimize_isub`` on the default axes.

    Rows are independent, so ``jobs > 1`` farms them out to worker
    processes; the result does not depend on the schedule.
    """
    if not p_max > 0:
        raise ValueError("p_max must be positive")
    if v_points < 2:
        raise ValueError("need at least 2 error-variance points")
    p_axis = default_p_axis(p_max, p_points)
    v_axis = np.linspace(0.0, 1.0, v_points)
    tasks = [(float(P), v_axis, noise_var, quad) for P in p_axis]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = []
        for i, task in enumerate(tasks):
            rows.append(_row(task))
            if progress is not None:
                progress(i + 1, len(tasks))
    values = to_unit(np.array(rows), rate_unit)
    digest = grid_config_hash(p_max, p_points, v_points, noise_var, rate_unit, quad)
    return IsubGrid(p_axis, v_axis, values, noise_var, rate_unit, digest)


def _locate(axis: np.ndarray, x: np.ndarray, name: str):
    lo, hi = axis[0], axis[-1]
    tol = _EDGE_TOL * max(1.0, abs(hi))
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        bad = x[(x < lo - tol) | (x > hi + tol)]
        raise ValueError(f"{name} outside grid range [{lo}, {hi}]: {bad[:5]}")
    x = np.clip(x, lo, hi)
    i = np.clip(np.searchsorted(axis, x, side="right") - 1, 0, len(axis) - 2)
    frac = (x - axis[i]) / (axis[i + 1] - axis[i])
    return i, frac


def interpolate(grid: IsubGrid, P, v):
    """Bilinear interpolation of the grid; exact at nodes, no extrapolation."""
    P_arr, v_arr = np.broadcast_arrays(np.asarray(P, dtype=float),
                                       np.asarray(v, dtype=float))
    i, fp = _locate(grid.p_axis, P_arr, "power")
    j, fv = _locate(grid.v_axis, v_arr, "error variance")
    z = grid.values
    out = ((1 - fp) * (1 - fv) * z[i, j] + fp * (1 - fv) * z[i + 1, j]
           + (1 - fp) * fv * z[i, j + 1] + fp * fv * z[i + 1, j + 1])
    # exact node values, free of 0 * x rounding
    on_node = (fp == 0) & (fv == 0)
    out = np.where(on_node, z[i, j], out)
    if out.ndim == 0:
        return float(out)
    return out


def _floats(xs) -> str:
    return " ".join(repr(float(x)) for x in xs)


def save_grid(grid: IsubGrid, path) -> None:
    lines = [
        "# psamtrain I_sub grid",
        f"format: {FORMAT_TAG}",
        f"rate_unit: {grid.rate_unit}",
        f"noise_var: {float(grid.noise_var)!r}",
        f"config_hash: {grid.config_hash}",
    ]
    for key in sorted(grid.meta):
        lines.append(f"meta.{key}: {grid.meta[key]}")
    lines += [
        f"p_points: {len(grid.p_axis)}",
        f"v_points: {len(grid.v_axis)}",
        f"p_axis: {_floats(grid.p_axis)}",
        f"v_axis: {_floats(grid.v_axis)}",
        "values:",
    ]
    lines += [_floats(row) for row in grid.values]
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def load_grid(path) -> IsubGrid:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    header = {}
    meta = {}
    body_start = None
    for n, line in enumerate(lines):
        if not line or line.startswith("#"):
            continue
        if line == "values:":
            body_start = n + 1
            break
        key, _, val = line.partition(":")
        key, val = key.strip(), val.strip()
        if key.startswith("meta."):
            meta[key[5:]] = val
        else:
            header[key] = val
    if header.get("format") != FORMAT_TAG or body_start is None:
        raise ValueError(f"{path} is not an {FORMAT_TAG} file")
    p_axis = np.array(header["p_axis"].split(), dtype=float)
    v_axis = np.array(header["v_axis"].split(), dtype=float)
    if len(p_axis) != int(header["p_points"]) or len(v_axis) != int(header["v_points"]):
        raise ValueError(f"{path}: axis length does not match header")
    rows = [ln.split() for ln in lines[body_start:] if ln.strip()]
    values = np.array(rows, dtype=float)
    return IsubGrid(p_axis, v_axis, values, float(header["noise_var"]),
                    header["rate_unit"], header.get("config_hash", ""), meta)
