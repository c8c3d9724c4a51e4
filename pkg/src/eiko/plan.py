"""Path planning on an arrival-cost field: maze ingestion and gradient
backtracking.

A maze raster becomes a two-level cost field (cheap on traversable dark
pixels, expensive on bright obstacle pixels, one node per pixel, unit
spacing).  After a solver produces S from a seed, paths are recovered by
descending the normalized gradient, x <- x - step * grad S / |grad S|, with
the gradient bilinearly interpolated from central differences; every accepted
step strictly lowers the interpolated S.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import GridSpec, ScalarField, SourceSet, gradient_central

DEFAULT_LO = 1.0
DEFAULT_HI = 1000.0


@dataclass(frozen=True)
class MazeCost:
    """Two-level forcing built from a raster; values are lo or hi only."""

    field: ScalarField
    lo: float
    hi: float


@dataclass(frozen=True)
class PathPolyline:
    """Backtracked path in world coordinates, oldest point first."""

    points: tuple[tuple[float, float], ...]
    status: str  # reached_source | max_steps | stalled

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.float64)


def maze_to_forcing(
    image: np.ndarray,
    lo: float = DEFAULT_LO,
    hi: float = DEFAULT_HI,
    threshold: int = 128,
) -> MazeCost:
    """Pixels with intensity >= threshold (bright walls) cost hi, the rest
    (dark corridors) cost lo; one grid node per pixel, spacing 1."""
    px = np.asarray(image)
    if px.ndim != 2 or px.size == 0:
        raise ValueError("maze image must be a nonempty 2D raster")
    if not lo < hi:
        raise ValueError("requires lo < hi")
    if lo <= 0.0:
        raise ValueError("lo must be positive")
    wall = px >= threshold
    if wall.all():
        raise ValueError("maze has no traversable (dark) pixels")
    values = np.where(wall, hi, lo).astype(np.float64)
    grid = GridSpec(px.shape, (0.0, 0.0), (1.0, 1.0))
    return MazeCost(ScalarField(grid, values), float(lo), float(hi))


class _Bilinear:
    def __init__(self, grid: GridSpec, values: np.ndarray):
        self.grid = grid
        self.values = values

    def __call__(self, point) -> float:
        g = self.grid
        t0 = (point[0] - g.origin[0]) / g.spacing[0]
        t1 = (point[1] - g.origin[1]) / g.spacing[1]
        t0 = min(max(t0, 0.0), g.dims[0] - 1.0)
        t1 = min(max(t1, 0.0), g.dims[1] - 1.0)
        i0 = min(int(t0), g.dims[0] - 2)
        j0 = min(int(t1), g.dims[1] - 2)
        a = t0 - i0
        b = t1 - j0
        v = self.values
        return float(
            (1 - a) * (1 - b) * v[i0, j0]
            + a * (1 - b) * v[i0 + 1, j0]
            + (1 - a) * b * v[i0, j0 + 1]
            + a * b * v[i0 + 1, j0 + 1]
        )


def _clip_to_grid(grid: GridSpec, p: np.ndarray) -> np.ndarray:
    out = p.copy()
    for a in range(2):
        lo = grid.origin[a]
        hi = grid.origin[a] + grid.spacing[a] * (grid.dims[a] - 1)
        out[a] = min(max(out[a], lo), hi)
    return out


def backtrack(
    s: ScalarField,
    start,
    sources: SourceSet,
    step: float | None = None,
    eps: float | None = None,
    max_steps: int = 200_000,
    grad_floor: float = 1e-12,
) -> PathPolyline:
    """Descend S from ``start`` (world coordinates) until within eps of a
    seed, stalling if the gradient vanishes or no shrunken step decreases S.

    Defaults: step = half a grid width, eps = one grid width.
    """
    if s.grid.ndim != 2:
        raise ValueError("backtrack requires a 2D field")
    h = s.grid.spacing_scalar()
    if step is None:
        step = 0.5 * h
    if eps is None:
        eps = h
    if step <= 0.0 or eps <= 0.0:
        raise ValueError("step and eps must be positive")
    start = np.asarray(start, dtype=np.float64)
    if not s.grid.contains_point(start):
        raise ValueError(f"start point {tuple(start)} outside grid")
    grads = gradient_central(s)
    gx = _Bilinear(s.grid, grads[0].values)
    gy = _Bilinear(s.grid, grads[1].values)
    sval = _Bilinear(s.grid, s.values)
    seed_pts = sources.world_points(s.grid)

    def near_seed(p) -> bool:
        return bool(np.min(np.hypot(seed_pts[:, 0] - p[0], seed_pts[:, 1] - p[1])) < eps)

    pts = [tuple(start)]
    x = start
    if near_seed(x):
        return PathPolyline(tuple(pts), "reached_source")
    status = "max_steps"
    for _ in range(max_steps):
        g = np.array([gx(x), gy(x)])
        gnorm = float(np.hypot(g[0], g[1]))
        if gnorm < grad_floor:
            status = "stalled"
            break
        direction = g / gnorm
        s_here = sval(x)
        moved = False
        frac = 1.0
        for _ in range(6):
            cand = _clip_to_grid(s.grid, x - (step * frac) * direction)
            if sval(cand) < s_here and not np.array_equal(cand, x):
                x = cand
                moved = True
                break
            frac *= 0.5
        if not moved:
            status = "stalled"
            break
        pts.append(tuple(x))
        if near_seed(x):
            status = "reached_source"
            break
    return PathPolyline(tuple(pts), status)
