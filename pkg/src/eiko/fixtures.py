"""Built-in problem generators: forcing fields, seed sets, default solver
parameters, and (where known) analytic references.

These are self-contained synthetic setups so runs and tests never depend on
external data.  Grid convention: axis 0 is the first world coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import GridSpec, ScalarField, SourceSet
from .sfs import render_lambertian


@dataclass(frozen=True)
class Fixture:
    name: str
    f: ScalarField | None = None
    sources: SourceSet | None = None
    defaults: dict = dc_field(default_factory=dict)
    reference: ScalarField | None = None  # analytic solution when known
    maze: np.ndarray | None = None  # uint8 raster for planning fixtures
    luminance: ScalarField | None = None  # image for shading fixtures
    truth: ScalarField | None = None  # ground-truth height field
    start: tuple[int, int] | None = None  # suggested backtrack start (pixels)


def _small_grid() -> GridSpec:
    n = 257  # [-0.125, 0.125] at width 2^-10
    h = 2.0**-10
    return GridSpec((n, n), (-0.125, -0.125), (h, h))


def radial_exp() -> Fixture:
    """Forcing e^r from a central point seed; exact solution |e^r - 1|."""
    grid = _small_grid()
    x, y = grid.world_mesh()
    r = np.hypot(x, y)
    f = ScalarField(grid, np.exp(r))
    reference = ScalarField(grid, np.abs(np.exp(r) - 1.0))
    src = SourceSet((grid.center_index(),))
    return Fixture(
        "example1",
        f=f,
        sources=src,
        defaults={"hbar": 0.006, "terms": 6, "sweeps": 15},
        reference=reference,
    )


def gaussian_pair() -> Fixture:
    """Unit forcing plus a positive/negative Gaussian bump pair."""
    grid = _small_grid()
    x, y = grid.world_mesh()
    f = 1.0 + 2.0 * (
        np.exp(-2.0 * ((x + 0.05) ** 2 + (y + 0.05) ** 2))
        - np.exp(-2.0 * ((x - 0.05) ** 2 + (y - 0.05) ** 2))
    )
    src = SourceSet((grid.center_index(),))
    return Fixture(
        "example2",
        f=ScalarField(grid, f),
        sources=src,
        defaults={"hbar": 0.015, "terms": 6, "sweeps": 15},
    )


def sinusoid_small() -> Fixture:
    """Sinusoidal forcing with four spread seeds on the small grid."""
    grid = _small_grid()
    x, y = grid.world_mesh()
    f = 1.0 + np.sin(np.pi * (x - 0.05)) * np.sin(np.pi * (y + 0.05))
    c = grid.center_index()
    offsets = ((0, 0), (50, 100), (-25, -75), (30, -40))
    pts = tuple((c[0] + di, c[1] + dj) for di, dj in offsets)
    return Fixture(
        "example3",
        f=ScalarField(grid, f),
        sources=SourceSet(pts),
        defaults={"hbar": 0.0085, "terms": 6, "sweeps": 15},
    )


def sinusoid_large() -> Fixture:
    """Sinusoidal forcing on a coarse [-5, 5]^2 grid; needs tau scaling."""
    grid = GridSpec((41, 41), (-5.0, -5.0), (0.25, 0.25))
    x, y = grid.world_mesh()
    f = 1.0 + 0.3 * np.sin(np.pi * (x + 1.0)) * np.sin(np.pi * (y - 2.0))

    def node(wx, wy):
        return (int(round((wx + 5.0) / 0.25)), int(round((wy + 5.0) / 0.25)))

    pts = (node(0, 0), node(1, 1), node(-2, -3), node(3, -4))
    return Fixture(
        "example4",
        f=ScalarField(grid, f),
        sources=SourceSet(pts),
        defaults={"hbar": 0.001, "terms": 6, "tau": 100.0, "sweeps": 15},
    )


def unit_disc(n: int = 65, hbar: float = 0.01) -> Fixture:
    """Unit forcing on [-1, 1]^2 with a central seed; solution is Euclidean
    distance, handy for identity and consistency checks."""
    h = 2.0 / (n - 1)
    grid = GridSpec((n, n), (-1.0, -1.0), (h, h))
    x, y = grid.world_mesh()
    reference = ScalarField(grid, np.hypot(x, y))
    return Fixture(
        "unit-disc",
        f=ScalarField(grid, np.ones((n, n))),
        sources=SourceSet((grid.center_index(),)),
        defaults={"hbar": hbar, "terms": 6, "sweeps": 15},
        reference=reference,
    )


# ---------------------------------------------------------------------------
# planning fixtures


def open_room(n: int = 11) -> Fixture:
    """All-dark room: shortest paths are straight lines."""
    img = np.zeros((n, n), dtype=np.uint8)
    return Fixture(
        "open-room",
        maze=img,
        defaults={"hbar": 2.0, "source": (n // 2, n // 2)},
        start=(1, 1),
    )


def _spiral_corners(size: int, corridor: int, wall: int):
    """Centerline corner walk of an inward rectangular spiral.

    Consecutive corners are joined by thick axis-aligned legs; each new leg
    stops one pitch short of the corridor it runs toward, leaving `wall`
    bright pixels between windings.
    """
    hw = corridor // 2
    pitch = corridor + wall
    t = l = wall + hw
    b = r = size - 1 - wall - hw
    pts = [(t, l)]
    while True:
        if r - l < pitch:  # rightward leg along the top
            break
        pts.append((t, r))
        if b - t < pitch:  # downward leg along the right
            break
        pts.append((b, r))
        if r - (l + pitch) < pitch:  # leftward leg along the bottom
            break
        pts.append((b, l + pitch))
        if b - (t + pitch) < pitch:  # upward leg along the left
            break
        pts.append((t + pitch, l + pitch))
        t += pitch
        l += pitch
        b -= pitch
        r -= pitch
    return pts, hw


def spiral_maze(size: int = 450, corridor: int = 36, wall: int = 20) -> Fixture:
    """Rectangular spiral corridor carved into a bright canvas.

    One connected dark channel winds from the outer corner to the innermost
    turn; the suggested seed sits at the inner end, the suggested start at
    the outer end.
    """
    if corridor < 3 or wall < 1:
        raise ValueError("corridor must be >= 3 and wall >= 1")
    if size < 2 * (wall + corridor) + corridor:
        raise ValueError("canvas too small for one winding")
    img = np.full((size, size), 255, dtype=np.uint8)
    pts, hw = _spiral_corners(size, corridor, wall)
    for p, q in zip(pts[:-1], pts[1:]):
        r0, r1 = sorted((p[0], q[0]))
        c0, c1 = sorted((p[1], q[1]))
        img[max(r0 - hw, 0) : r1 + hw + 1, max(c0 - hw, 0) : c1 + hw + 1] = 0
    # Obstacles need to defeat lattice tunneling: the discrete operator caps
    # the obstacle surcharge near hbar*log(4 + (hi/hbar)^2) per pixel, so hi
    # is set high enough that crossing a wall always beats spiraling around.
    return Fixture(
        "spiral-maze",
        maze=img,
        defaults={"hbar": 8.0, "lo": 1.0, "hi": 1e8, "source": pts[-1]},
        start=pts[0],
    )


# ---------------------------------------------------------------------------
# shading fixtures


def _shading_grid(n: int) -> GridSpec:
    h = 2.0 / (n - 1)
    return GridSpec((n, n), (-1.0, -1.0), (h, h))


def plane(n: int = 65, slope: float = 1.0) -> Fixture:
    """Tilted plane S = slope * x."""
    grid = _shading_grid(n)
    x, _ = grid.world_mesh()
    truth = ScalarField(grid, slope * x)
    seeds = SourceSet(((n // 2, n // 2),), (0.0,))
    return Fixture(
        "plane",
        truth=truth,
        sources=seeds,
        luminance=render_lambertian(truth).P,
        defaults={"hbar": 2.0 * grid.spacing[0]},
    )


def cone(n: int = 101, radius: float = 0.7, slope: float = 1.0) -> Fixture:
    """Tent surface slope*(radius - r) clipped at 0, apex seeded at its
    height; flat outside the rim."""
    grid = _shading_grid(n)
    x, y = grid.world_mesh()
    r = np.hypot(x, y)
    truth = ScalarField(grid, slope * np.maximum(radius - r, 0.0))
    apex = grid.center_index()
    seeds = SourceSet((apex,), (float(slope * radius),))
    return Fixture(
        "cone",
        truth=truth,
        sources=seeds,
        luminance=render_lambertian(truth).P,
        defaults={"hbar": 2.0 * grid.spacing[0]},
    )


def hemisphere(n: int = 65, radius: float = 1.5) -> Fixture:
    """Spherical cap over the full grid (radius beyond the domain
    half-diagonal keeps the rim, where slopes blow up, outside the image)."""
    grid = _shading_grid(n)
    x, y = grid.world_mesh()
    r2 = x**2 + y**2
    if radius**2 <= r2.max():
        raise ValueError("radius must exceed the domain half-diagonal")
    truth = ScalarField(grid, np.sqrt(radius**2 - r2))
    apex = grid.center_index()
    seeds = SourceSet((apex,), (float(radius),))
    return Fixture(
        "hemisphere",
        truth=truth,
        sources=seeds,
        luminance=render_lambertian(truth).P,
        defaults={"hbar": 2.0 * grid.spacing[0]},
    )


_BUILDERS = {
    "example1": radial_exp,
    "example2": gaussian_pair,
    "example3": sinusoid_small,
    "example4": sinusoid_large,
    "unit-disc": unit_disc,
    "open-room": open_room,
    "spiral-maze": spiral_maze,
    "plane": plane,
    "cone": cone,
    "hemisphere": hemisphere,
}


def available() -> tuple[str, ...]:
    return tuple(sorted(_BUILDERS))


def build(name: str, **kwargs) -> Fixture:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(
            f"unknown fixture {name!r}; available: {', '.join(available())}"
        ) from None
    return builder(**kwargs)
