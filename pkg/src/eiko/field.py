"""Regular-grid scalar fields, finite-difference operators, and error metrics.

A grid is 1D or 2D with a fixed index-to-world affine map: the world
coordinate of index ``(i, j)`` is ``origin + (i, j) * spacing``, with axis 0
as the first world coordinate.  Values are stored row-major (C order) and are
read-only after construction; all operations here are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple, Sequence

import numpy as np


def _as_tuple(x, n=None, cast=float):
    if np.isscalar(x):
        x = (x,) if n is None else (x,) * n
    t = tuple(cast(v) for v in x)
    if n is not None and len(t) != n:
        raise ValueError(f"expected {n} entries, got {len(t)}")
    return t


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a regular 1D or 2D grid."""

    dims: tuple[int, ...]
    origin: tuple[float, ...]
    spacing: tuple[float, ...]

    def __post_init__(self):
        dims = _as_tuple(self.dims, cast=int)
        nd = len(dims)
        if nd not in (1, 2):
            raise ValueError(f"grids must be 1D or 2D, got {nd} axes")
        origin = _as_tuple(self.origin, nd)
        spacing = _as_tuple(self.spacing, nd)
        if any(d < 2 for d in dims):
            raise ValueError(f"all dims must be >= 2, got {dims}")
        if any(s <= 0 for s in spacing):
            raise ValueError(f"all spacing must be > 0, got {spacing}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.dims

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.dims))

    def spacing_scalar(self) -> float:
        """Uniform grid width; errors if the axes use different spacings."""
        s = self.spacing
        if any(si != s[0] for si in s[1:]):
            raise ValueError(f"operation requires square cells, spacing={s}")
        return s[0]

    def cell_measure(self) -> float:
        """Length (1D) or area (2D) of one grid cell."""
        return float(np.prod(self.spacing))

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.dims[axis])

    def world_mesh(self) -> tuple[np.ndarray, ...]:
        """Per-axis world coordinate arrays of shape ``dims`` ('ij' indexing)."""
        axes = [self.axis_coords(a) for a in range(self.ndim)]
        return tuple(np.meshgrid(*axes, indexing="ij")) if self.ndim > 1 else (axes[0],)

    def world(self, index: Sequence[int]) -> tuple[float, ...]:
        return tuple(
            self.origin[a] + self.spacing[a] * index[a] for a in range(self.ndim)
        )

    def center_index(self) -> tuple[int, ...]:
        return tuple(d // 2 for d in self.dims)

    def contains_index(self, index: Sequence[int]) -> bool:
        return len(index) == self.ndim and all(
            0 <= index[a] < self.dims[a] for a in range(self.ndim)
        )

    def contains_point(self, point: Sequence[float]) -> bool:
        if len(point) != self.ndim:
            return False
        for a in range(self.ndim):
            lo = self.origin[a]
            hi = self.origin[a] + self.spacing[a] * (self.dims[a] - 1)
            if not (lo <= point[a] <= hi):
                return False
        return True


@dataclass(frozen=True)
class ScalarField:
    """Values on a :class:`GridSpec`, one per node, float64, read-only."""

    grid: GridSpec
    values: np.ndarray
    check_finite: bool = dc_field(default=True, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True, order="C")
        if vals.shape != self.grid.shape:
            if vals.size == self.grid.num_nodes:
                vals = vals.reshape(self.grid.shape)
            else:
                raise ValueError(
                    f"values shape {vals.shape} does not match grid {self.grid.shape}"
                )
        if self.check_finite and not np.isfinite(vals).all():
            raise ValueError("field values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)

    def copy_values(self) -> np.ndarray:
        return np.array(self.values)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def __eq__(self, other):
        if not isinstance(other, ScalarField):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class SourceSet:
    """Seed nodes with known values (defaults to 0 at every seed)."""

    points: tuple[tuple[int, ...], ...]
    boundary_values: tuple[float, ...] = ()

    def __post_init__(self):
        pts = tuple(tuple(int(i) for i in p) for p in self.points)
        if not pts:
            raise ValueError("source set must be nonempty")
        if len(set(pts)) != len(pts):
            raise ValueError("source set contains duplicate points")
        vals = tuple(float(v) for v in self.boundary_values)
        if not vals:
            vals = (0.0,) * len(pts)
        if len(vals) != len(pts):
            raise ValueError("boundary_values length must match points")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "boundary_values", vals)

    def __len__(self) -> int:
        return len(self.points)

    def validate_for(self, grid: GridSpec) -> None:
        for p in self.points:
            if not grid.contains_index(p):
                raise ValueError(f"source point {p} outside grid {grid.dims}")

    def index_arrays(self, grid: GridSpec) -> tuple[np.ndarray, ...]:
        self.validate_for(grid)
        idx = np.array(self.points, dtype=np.intp)
        return tuple(idx[:, a] for a in range(grid.ndim))

    def world_points(self, grid: GridSpec) -> np.ndarray:
        self.validate_for(grid)
        return np.array([grid.world(p) for p in self.points], dtype=np.float64)

    def mask(self, grid: GridSpec) -> np.ndarray:
        m = np.zeros(grid.shape, dtype=bool)
        m[self.index_arrays(grid)] = True
        return m

    def delta_field(self, grid: GridSpec, hbar: float | None = None) -> np.ndarray:
        """Unit spikes at the seeds; with ``hbar`` the spike for a seed of
        value h is exp(-h/hbar), so that recovered fields anchor to h."""
        b = np.zeros(grid.shape, dtype=np.float64)
        idx = self.index_arrays(grid)
        if hbar is None:
            b[idx] = 1.0
        else:
            b[idx] = np.exp(-np.array(self.boundary_values) / hbar)
        return b


class PercentErrorResult(NamedTuple):
    percent: float
    max_abs_diff: float


def gradient_central(f: ScalarField) -> tuple[ScalarField, ...]:
    """Central differences on interior nodes, one-sided first order at the
    boundary; exact for linear fields on the interior.  One field per axis."""
    if any(d < 3 for d in f.grid.dims):
        raise ValueError(f"gradient needs dims >= 3 along every axis, got {f.grid.dims}")
    grads = np.gradient(f.values, *f.grid.spacing, edge_order=1)
    if f.grid.ndim == 1:
        grads = [grads]
    return tuple(ScalarField(f.grid, g) for g in grads)


def laplacian_5pt(f: ScalarField) -> ScalarField:
    """Five-point Laplacian with mirrored (Neumann-like) boundary padding."""
    if f.grid.ndim != 2:
        raise ValueError("laplacian_5pt requires a 2D field")
    if any(d < 3 for d in f.grid.dims):
        raise ValueError(f"laplacian_5pt needs dims >= 3, got {f.grid.dims}")
    h = f.grid.spacing_scalar()
    v = np.pad(f.values, 1, mode="reflect")
    lap = (
        v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2] - 4.0 * v[1:-1, 1:-1]
    ) / (h * h)
    return ScalarField(f.grid, lap)


def percent_error(
    estimate: ScalarField,
    reference: ScalarField,
    exclude: SourceSet | None = None,
) -> PercentErrorResult:
    """Mean percentage deviation (100/N) * sum |est - ref| / |ref| plus the
    maximum absolute difference, over nodes not excluded.

    Nodes listed in ``exclude`` (typically the seeds, where the reference
    vanishes) are left out of both statistics; a zero reference anywhere else
    is an error.
    """
    if estimate.grid != reference.grid:
        raise ValueError("percent_error requires fields on the same grid")
    include = np.ones(reference.grid.shape, dtype=bool)
    if exclude is not None:
        include &= ~exclude.mask(reference.grid)
    ref = reference.values
    zero_bad = (ref == 0.0) & include
    if zero_bad.any():
        node = tuple(int(i) for i in np.argwhere(zero_bad)[0])
        raise ValueError(f"reference is zero at included node {node}")
    diff = np.abs(estimate.values - ref)
    percent = 100.0 * float(np.mean(diff[include] / np.abs(ref[include])))
    return PercentErrorResult(percent, float(diff[include].max()))


def l2_norm(values: np.ndarray) -> float:
    return float(np.linalg.norm(values.ravel()))


def distance_to_sources(grid: GridSpec, sources: SourceSet) -> np.ndarray:
    """Per-node Euclidean distance to the nearest seed (world units)."""
    mesh = grid.world_mesh()
    pts = sources.world_points(grid)
    d = None
    for p in pts:
        dk = np.zeros(grid.shape)
        for a in range(grid.ndim):
            dk = dk + (mesh[a] - p[a]) ** 2
        dk = np.sqrt(dk)
        d = dk if d is None else np.minimum(d, dk)
    return d


def viscosity_residual_rms(
    s_star: ScalarField,
    f: ScalarField,
    hbar: float,
    sources: SourceSet,
    source_radius_cells: float = 10.0,
    boundary_margin: int = 1,
) -> float:
    """RMS of (|grad S|^2 - hbar * lap S - f^2) / f^2 over interior nodes
    farther than ``source_radius_cells`` grid widths from every seed.

    Measures how well a recovered field satisfies the smoothed arrival-time
    identity; the seeds and the outermost ring (where one-sided stencils
    apply) are excluded.
    """
    if s_star.grid.ndim != 2:
        raise ValueError("viscosity residual is defined for 2D fields")
    h = s_star.grid.spacing_scalar()
    grads = gradient_central(s_star)
    lap = laplacian_5pt(s_star)
    gsq = sum(g.values**2 for g in grads)
    resid = (gsq - hbar * lap.values - f.values**2) / (f.values**2)
    mask = distance_to_sources(s_star.grid, sources) > source_radius_cells * h
    if boundary_margin > 0:
        m = boundary_margin
        border = np.zeros(s_star.grid.shape, dtype=bool)
        border[m:-m, m:-m] = True
        mask &= border
    if not mask.any():
        return math.nan
    return float(np.sqrt(np.mean(resid[mask] ** 2)))
