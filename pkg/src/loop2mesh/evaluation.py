"""Distributional comparison of point clouds.

A separable Gaussian-kernel density is summed at the cell centers of a
uniform grid over a named window and normalised to unit mass; two grids over
the same window are compared with a stabilised Kullback-Leibler score
(natural log, epsilon only in the denominator, clipped at zero).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import (
    DegenerateDataError,
    DegenerateDensityError,
    FrameMismatchError,
    InvalidInputError,
    WindowMismatchError,
)
from .fileio import atomic_write_text
from .geometry import PointSet

log = logging.getLogger(__name__)

_REGION_CODE = {"center": "c", "whole": "w"}


@dataclass(frozen=True)
class EvalWindow:
    """Axis-aligned evaluation window with a fixed cell grid."""

    name: str
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    grid_nx: int = 100
    grid_ny: int = 100

    def __post_init__(self):
        object.__setattr__(self, "x_range", (float(self.x_range[0]), float(self.x_range[1])))
        object.__setattr__(self, "y_range", (float(self.y_range[0]), float(self.y_range[1])))
        for lo, hi in (self.x_range, self.y_range):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise InvalidInputError(f"window range ({lo}, {hi}) must be finite and non-empty")
        if self.grid_nx < 2 or self.grid_ny < 2:
            raise InvalidInputError("grid must be at least 2x2")

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        dx = (self.x_range[1] - self.x_range[0]) / self.grid_nx
        dy = (self.y_range[1] - self.y_range[0]) / self.grid_ny
        cx = self.x_range[0] + dx * (np.arange(self.grid_nx) + 0.5)
        cy = self.y_range[0] + dy * (np.arange(self.grid_ny) + 0.5)
        return cx, cy

    def contains(self, xy: np.ndarray) -> np.ndarray:
        return ((xy[:, 0] >= self.x_range[0]) & (xy[:, 0] <= self.x_range[1])
                & (xy[:, 1] >= self.y_range[0]) & (xy[:, 1] <= self.y_range[1]))


def center_window(grid: int = 100) -> EvalWindow:
    """Near-field window around the airfoil: x in [-0.5, 1.5], y in [-0.4, 0.4]."""
    return EvalWindow("center", (-0.5, 1.5), (-0.4, 0.4), grid, grid)


def whole_window(truth: PointSet, pad: float = 0.05, grid: int = 100) -> EvalWindow:
    """Bounding box of the truth cloud, padded by ``pad`` of each axis extent."""
    lo = truth.xy.min(axis=0)
    hi = truth.xy.max(axis=0)
    extent = hi - lo
    if extent[0] <= 0.0 or extent[1] <= 0.0:
        raise DegenerateDataError("truth cloud has zero extent on an axis")
    return EvalWindow("whole",
                      (float(lo[0] - pad * extent[0]), float(hi[0] + pad * extent[0])),
                      (float(lo[1] - pad * extent[1]), float(hi[1] + pad * extent[1])),
                      grid, grid)


@dataclass(frozen=True)
class DensityGrid:
    """Unit-mass density over a window's cell grid, shape (grid_nx, grid_ny)."""

    window: EvalWindow
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        if mass.shape != (self.window.grid_nx, self.window.grid_ny):
            raise InvalidInputError(f"mass shape {mass.shape} does not match the window grid")
        if not np.all(np.isfinite(mass)) or np.any(mass < 0.0):
            raise InvalidInputError("density mass must be finite and non-negative")
        if abs(float(mass.sum()) - 1.0) > 1e-9:
            raise InvalidInputError("density mass must sum to 1 within 1e-9")
        mass = mass.copy()
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)


def scott_bandwidth(ps: PointSet, window: EvalWindow) -> tuple[float, float]:
    """Scott's rule per axis, fitted on the points that fall inside the window.

    h = sigma * n^(-1/6) for 2D data, with the population sigma.
    """
    pts = ps.xy[window.contains(ps.xy)]
    if pts.shape[0] < 2:
        raise DegenerateDataError("bandwidth fit needs at least 2 points inside the window")
    sigma = pts.std(axis=0)
    if sigma[0] == 0.0 or sigma[1] == 0.0:
        raise DegenerateDataError("zero variance inside the window; cannot fit a bandwidth")
    factor = pts.shape[0] ** (-1.0 / 6.0)
    return float(sigma[0] * factor), float(sigma[1] * factor)


def kde(ps: PointSet, window: EvalWindow,
        bandwidth: float | tuple[float, float] | None = None) -> DensityGrid:
    """Gaussian kernel sum at the window's cell centers, normalised to mass 1.

    ``bandwidth``: None fits Scott's rule on ``ps`` restricted to the window;
    a scalar is shared by both axes; a pair is (hx, hy). Points outside the
    window still contribute kernel mass inside it.
    """
    if bandwidth is None:
        hx, hy = scott_bandwidth(ps, window)
    elif np.isscalar(bandwidth):
        hx = hy = float(bandwidth)
    else:
        hx, hy = float(bandwidth[0]), float(bandwidth[1])
    if not (np.isfinite(hx) and np.isfinite(hy) and hx > 0.0 and hy > 0.0):
        raise InvalidInputError(f"bandwidth must be positive and finite, got ({hx}, {hy})")
    cx, cy = window.cell_centers()
    # separable kernel: mass[i, j] = sum_p fx[i, p] * fy[j, p]
    fx = np.exp(-0.5 * ((cx[:, None] - ps.xy[None, :, 0]) / hx) ** 2)
    fy = np.exp(-0.5 * ((cy[:, None] - ps.xy[None, :, 1]) / hy) ** 2)
    mass = fx @ fy.T
    total = float(mass.sum())
    if not np.isfinite(total) or total <= 0.0:
        raise DegenerateDensityError("kernel mass inside the window is numerically zero")
    return DensityGrid(window, mass / total)


def kl_divergence(p: DensityGrid, q: DensityGrid, epsilon: float = 1e-10) -> float:
    """sum P log(P / (Q + epsilon)) with 0 log 0 = 0, clipped at zero."""
    if p.window != q.window:
        raise WindowMismatchError("density grids were built over different windows")
    if not epsilon > 0.0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    mask = p.mass > 0.0
    val = float(np.sum(p.mass[mask] * np.log(p.mass[mask] / (q.mass[mask] + epsilon))))
    return max(val, 0.0)


def evaluate(pred: PointSet, truth: PointSet,
             windows: Optional[list[EvalWindow]] = None, *,
             epsilon: float = 1e-10, grid: int = 100) -> dict[str, float]:
    """KL(pred density || truth density) per window, name -> score.

    The bandwidth is fitted on the truth cloud per window and shared by both
    densities, so identical clouds score exactly zero.
    """
    if pred.frame is not truth.frame:
        raise FrameMismatchError("prediction and truth live in different frames")
    if windows is None:
        windows = [center_window(grid), whole_window(truth, grid=grid)]
    out: dict[str, float] = {}
    for window in windows:
        bw = scott_bandwidth(truth, window)
        p_density = kde(pred, window, bw)
        q_density = kde(truth, window, bw)
        out[window.name] = kl_divergence(p_density, q_density, epsilon)
    return out


@dataclass(frozen=True)
class KLRow:
    ratio: float
    region: str  # "c" or "w"
    nodes: int
    kl: Optional[float]  # None marks a missing sweep cell


def kl_sweep(predictions: Mapping[tuple[float, int], Optional[PointSet]], truth: PointSet,
             windows: Optional[list[EvalWindow]] = None, *,
             epsilon: float = 1e-10, grid: int = 100) -> list[KLRow]:
    """Score a (ratio x node-count) grid of predictions against one truth cloud.

    Rows come out in deterministic order: ratio ascending, region "c" then
    "w", node count ascending. Missing cells (absent key or None) produce a
    row with an empty score and a warning.
    """
    if windows is None:
        windows = [center_window(grid), whole_window(truth, grid=grid)]
    ratios = sorted({r for r, _ in predictions})
    node_counts = sorted({n for _, n in predictions})
    scores: dict[tuple[float, int], Optional[dict[str, float]]] = {}
    for key, pred in predictions.items():
        scores[key] = None if pred is None else evaluate(pred, truth, windows, epsilon=epsilon)
    ordered = sorted(windows, key=lambda w: _REGION_CODE.get(w.name, w.name))
    rows: list[KLRow] = []
    for ratio in ratios:
        for window in ordered:
            region = _REGION_CODE.get(window.name, window.name)
            for nodes in node_counts:
                cell = scores.get((ratio, nodes))
                if cell is None:
                    log.warning("sweep cell ratio=%s nodes=%s is missing; emitting empty row", ratio, nodes)
                    rows.append(KLRow(ratio, region, nodes, None))
                else:
                    rows.append(KLRow(ratio, region, nodes, cell[window.name]))
    return rows


def kl_csv_text(rows: list[KLRow]) -> str:
    lines = ["ratio,region,nodes,kl"]
    for r in rows:
        ratio = f"{r.ratio:g}"
        kl = "" if r.kl is None else repr(r.kl)
        lines.append(f"{ratio},{r.region},{r.nodes},{kl}")
    return "\n".join(lines) + "\n"


def write_kl_csv(rows: list[KLRow], path) -> None:
    atomic_write_text(path, kl_csv_text(rows))
