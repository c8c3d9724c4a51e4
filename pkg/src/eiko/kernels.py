"""Green's functions of the constant-coefficient screened Poisson operator
(-hbar^2 lap + f^2) and FFT-based discrete convolution on grids.

The fundamental solutions with Dirichlet decay at infinity are

    1D:  (1 / (2 hbar f)) exp(-f r / hbar)
    2D:  (1 / (2 pi hbar^2)) K0(f r / hbar)
    3D:  (1 / (4 pi hbar^2)) exp(-f r / hbar) / r

and the modified kernel exp(-f r / hbar) drops the dimension-dependent
prefactor (and with it the 2D/3D origin singularity); the two agree up to
that prefactor, which is asymptotically negligible as hbar -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bessel
from .field import GridSpec, ScalarField

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class KernelParams:
    """hbar, the constant forcing f_const, and the spatial dimension."""

    hbar: float
    f_const: float
    dimension: int = 2

    def __post_init__(self):
        if not (self.hbar > 0.0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not (self.f_const > 0.0 and math.isfinite(self.f_const)):
            raise ValueError(f"f_const must be positive, got {self.f_const}")
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")


@dataclass(frozen=True)
class ConvPolicy:
    """How discrete convolutions treat boundaries and the kernel origin.

    mode:
      zero_padded_linear -- pad both operands so the circular FFT product
        equals the linear convolution restricted to the grid window (default;
        matches a field that vanishes away from the domain).
      circular -- plain FFT product on the unpadded grid; opposite edges wrap.

    origin_regularization (2D exact kernel only, which diverges at r = 0):
      half_cell -- sample K0 at r = spacing/2;
      finite_cap -- clamp the origin sample to cap_value.
    """

    mode: str = "zero_padded_linear"
    origin_regularization: str = "half_cell"
    cap_value: float | None = None

    def __post_init__(self):
        if self.mode not in ("zero_padded_linear", "circular"):
            raise ValueError(f"unknown convolution mode {self.mode!r}")
        if self.origin_regularization not in ("half_cell", "finite_cap"):
            raise ValueError(
                f"unknown origin regularization {self.origin_regularization!r}"
            )
        if self.origin_regularization == "finite_cap":
            if self.cap_value is None or not (
                self.cap_value > 0.0 and math.isfinite(self.cap_value)
            ):
                raise ValueError("finite_cap requires a positive finite cap_value")


def green_1d(r, p: KernelParams):
    if p.dimension != 1:
        raise ValueError("green_1d requires dimension=1 params")
    r = np.asarray(r, dtype=np.float64)
    return np.exp(-p.f_const * r / p.hbar) / (2.0 * p.hbar * p.f_const)


def green_2d(r, p: KernelParams):
    if p.dimension != 2:
        raise ValueError("green_2d requires dimension=2 params")
    r = np.asarray(r, dtype=np.float64)
    if np.any(r == 0.0):
        raise ValueError(
            "green_2d is singular at r=0; use kernel_field with an origin "
            "regularization policy"
        )
    return bessel.k0(p.f_const * r / p.hbar) / (_TWO_PI * p.hbar * p.hbar)


def green_3d(r, p: KernelParams):
    if p.dimension != 3:
        raise ValueError("green_3d requires dimension=3 params")
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0.0):
        raise ValueError("green_3d requires r > 0 (non-integrable at the origin)")
    return np.exp(-p.f_const * r / p.hbar) / (4.0 * math.pi * p.hbar * p.hbar * r)


def modified_green(r, p: KernelParams):
    """exp(-f r / hbar): the prefactor-free kernel, 1 at the origin."""
    r = np.asarray(r, dtype=np.float64)
    return np.exp(-p.f_const * r / p.hbar)


def _center_radii(grid: GridSpec) -> np.ndarray:
    c = grid.center_index()
    if grid.ndim == 1:
        off = (np.arange(grid.dims[0]) - c[0]) * grid.spacing[0]
        return np.abs(off)
    o0 = (np.arange(grid.dims[0]) - c[0]) * grid.spacing[0]
    o1 = (np.arange(grid.dims[1]) - c[1]) * grid.spacing[1]
    return np.hypot(o0[:, None], o1[None, :])


def kernel_field(
    grid: GridSpec,
    p: KernelParams,
    which: str = "exact",
    policy: ConvPolicy = ConvPolicy(),
) -> ScalarField:
    """Sample a kernel at radial distances from the grid's center node.

    The center node is ``dims // 2`` per axis, so that convolving the result
    with a unit spike at some node places the kernel's origin there.
    """
    if which not in ("exact", "modified"):
        raise ValueError(f"which must be 'exact' or 'modified', got {which!r}")
    r = _center_radii(grid)
    if which == "modified":
        return ScalarField(grid, modified_green(r, p))
    if p.dimension != grid.ndim:
        raise ValueError(
            f"exact {p.dimension}D kernel cannot be sampled on a {grid.ndim}D grid"
        )
    if grid.ndim == 1:
        return ScalarField(grid, green_1d(r, p))
    c = grid.center_index()
    if policy.origin_regularization == "half_cell":
        r = r.copy()
        r[c] = 0.5 * grid.spacing_scalar()
        vals = green_2d(r, p)
    else:
        r = r.copy()
        r[c] = 1.0  # placeholder, overwritten below
        vals = green_2d(r, p)
        vals[c] = policy.cap_value
    return ScalarField(grid, vals)


def _next_fast_len(n: int) -> int:
    """Smallest 5-smooth integer >= n (keeps FFT sizes cheap)."""
    if n <= 2:
        return n
    m = n
    while True:
        k = m
        for p in (2, 3, 5):
            while k % p == 0:
                k //= p
        if k == 1:
            return m
        m += 1


class FftConvolver:
    """Reusable FFT convolution against a fixed centered kernel.

    Precomputes the kernel transform once; ``apply`` then costs two FFTs.
    With ``scale_by_cell`` the discrete sum is multiplied by the cell measure
    (grid width in 1D, cell area in 2D) so it approximates the continuous
    convolution integral.
    """

    def __init__(self, kernel: ScalarField, policy: ConvPolicy = ConvPolicy()):
        self.grid = kernel.grid
        self.policy = policy
        dims = self.grid.dims
        self.center = self.grid.center_index()
        if policy.mode == "zero_padded_linear":
            self.pad_shape = tuple(_next_fast_len(2 * n - 1) for n in dims)
            kpad = np.zeros(self.pad_shape)
            kpad[tuple(slice(0, n) for n in dims)] = kernel.values
            self._khat = np.fft.fftn(kpad)
        else:
            self.pad_shape = dims
            self._khat = np.fft.fftn(np.fft.ifftshift(kernel.values))

    def apply(self, values: np.ndarray, scale_by_cell: bool = False) -> np.ndarray:
        dims = self.grid.dims
        if values.shape != dims:
            raise ValueError(f"operand shape {values.shape} != grid {dims}")
        if self.policy.mode == "zero_padded_linear":
            apad = np.zeros(self.pad_shape)
            apad[tuple(slice(0, n) for n in dims)] = values
            full = np.fft.ifftn(np.fft.fftn(apad) * self._khat)
            window = tuple(slice(c, c + n) for c, n in zip(self.center, dims))
            out = full[window]
        else:
            out = np.fft.ifftn(np.fft.fftn(values) * self._khat)
        out_r = out.real
        scale = np.abs(out_r).max()
        if scale > 0.0 and np.abs(out.imag).max() >= 1e-9 * scale:
            raise ValueError("convolution produced a non-negligible imaginary part")
        if scale_by_cell:
            out_r = out_r * self.grid.cell_measure()
        return np.ascontiguousarray(out_r)


def convolve(
    a: ScalarField,
    kernel: ScalarField,
    policy: ConvPolicy = ConvPolicy(),
    scale_by_cell: bool = False,
) -> ScalarField:
    """Discrete convolution of a field with a centered kernel via FFT."""
    if a.grid.dims != kernel.grid.dims:
        raise ValueError(
            f"grid mismatch: field {a.grid.dims} vs kernel {kernel.grid.dims}"
        )
    conv = FftConvolver(kernel, policy)
    return ScalarField(a.grid, conv.apply(a.values, scale_by_cell=scale_by_cell))
