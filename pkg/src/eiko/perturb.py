"""Series solver for -hbar^2 lap(phi) + f^2 phi = sum of seed spikes.

The variable-coefficient operator is split around a constant reference
forcing ftilde: phi_0 is the closed-form constant-forcing field

    phi_0(x) = sum_k w_k exp(-ftilde |x - y_k| / hbar),   w_k = exp(-h_k/hbar)

and successive corrections solve the constant-coefficient equation with the
previous term as source,

    phi_i = G * [(f^2 - ftilde^2) phi_{i-1}],

a convolution against the exact kernel G evaluated with FFTs.  The truncated
alternating sum phi = sum_i (-1)^i phi_i converges geometrically whenever the
contraction bound c0 = sup|f^2 - ftilde^2| / ftilde^2 is below one, which the
optimal ftilde = sqrt((f_min^2 + f_max^2)/2) guarantees for any positive
bounded forcing.  The arrival cost is recovered as S = -hbar log(phi).

Double precision limits the usable dynamic range: correction terms reaching
the FFT rounding floor are zeroed (noise_floor_rel), and grids whose
exponents exceed the representable range should be solved through
scaled_solve, which shrinks the grid by tau and rescales S afterwards.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .field import GridSpec, ScalarField, SourceSet, l2_norm
from .kernels import ConvPolicy, FftConvolver, KernelParams, kernel_field
from .report import SolveReport, finalize_report

PHI_FLOOR = 1e-300
DIRECT_PHI0_MAX_SOURCES = 64


@dataclass(frozen=True)
class PerturbConfig:
    """hbar, series length, reference-forcing strategy, and numerics knobs.

    ftilde=None selects the optimal value from the forcing range.  tau > 1
    makes scaled_solve shrink the problem before solving (see module doc).
    noise_floor_rel zeroes correction-term entries below that fraction of the
    term's peak magnitude; 0 disables the cleanup.
    """

    hbar: float
    terms: int = 6
    ftilde: float | None = None
    tau: float = 1.0
    conv_policy: ConvPolicy = ConvPolicy()
    noise_floor_rel: float = 1e-13
    phi_floor: float = PHI_FLOOR

    def __post_init__(self):
        if not (self.hbar > 0.0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.terms < 0:
            raise ValueError("terms must be >= 0")
        if self.ftilde is not None and not self.ftilde > 0.0:
            raise ValueError("fixed ftilde must be positive")
        if not self.tau > 0.0:
            raise ValueError("tau must be positive")
        if self.noise_floor_rel < 0.0:
            raise ValueError("noise_floor_rel must be >= 0")


def optimal_ftilde(f: ScalarField) -> float:
    """Reference forcing minimizing sup|f^2 - t^2| / t^2 over the field."""
    fmin = f.min()
    fmax = f.max()
    if fmin <= 0.0:
        raise ValueError("forcing function must be bounded away from zero")
    if fmin == fmax:
        return fmin
    return math.sqrt(0.5 * (fmin * fmin + fmax * fmax))


def c0_upper_bound(f: ScalarField, ftilde: float) -> float:
    """Contraction bound sup|f^2 - ftilde^2| / ftilde^2 over grid nodes."""
    if ftilde <= 0.0:
        raise ValueError("ftilde must be positive")
    t2 = ftilde * ftilde
    return float(np.max(np.abs(f.values**2 - t2)) / t2)


def phi_zero(
    grid: GridSpec,
    sources: SourceSet,
    ftilde: float,
    hbar: float,
    method: str = "auto",
    policy: ConvPolicy = ConvPolicy(),
) -> ScalarField:
    """Constant-forcing seed field, by direct summation (exact at the nodes)
    or FFT convolution of the modified kernel with the seed spikes.

    The FFT path samples the kernel over the full (2n-1) offset range, so
    both paths agree to rounding for any seed layout; in circular mode it
    wraps on the grid instead (kept for comparison runs)."""
    if method not in ("auto", "direct", "fft"):
        raise ValueError(f"unknown phi_zero method {method!r}")
    sources.validate_for(grid)
    if method == "auto":
        method = "direct" if len(sources) <= DIRECT_PHI0_MAX_SOURCES else "fft"
    if method == "direct":
        mesh = grid.world_mesh()
        pts = sources.world_points(grid)
        acc = np.zeros(grid.shape)
        for p, h in zip(pts, sources.boundary_values):
            d2 = np.zeros(grid.shape)
            for a in range(grid.ndim):
                d2 = d2 + (mesh[a] - p[a]) ** 2
            acc += np.exp(-(ftilde * np.sqrt(d2) + h) / hbar)
        return ScalarField(grid, acc)
    params = KernelParams(hbar=hbar, f_const=ftilde, dimension=grid.ndim)
    if policy.mode == "circular":
        gtilde = kernel_field(grid, params, which="modified", policy=policy)
        conv = FftConvolver(gtilde, policy)
        return ScalarField(grid, conv.apply(sources.delta_field(grid, hbar=hbar)))
    wide = GridSpec(
        tuple(2 * n - 1 for n in grid.dims), grid.origin, grid.spacing
    )
    gtilde = kernel_field(wide, params, which="modified", policy=policy)
    conv = FftConvolver(gtilde, policy)
    delta_wide = np.zeros(wide.shape)
    delta_wide[tuple(slice(0, n) for n in grid.dims)] = sources.delta_field(
        grid, hbar=hbar
    )
    full = conv.apply(delta_wide)
    window = tuple(slice(0, n) for n in grid.dims)
    return ScalarField(grid, np.ascontiguousarray(full[window]))


def perturb_solve(
    f: ScalarField,
    sources: SourceSet,
    cfg: PerturbConfig,
) -> SolveReport:
    """Run the correction series on f's grid and recover S = -hbar log phi."""
    t0 = time.perf_counter()
    if f.min() <= 0.0:
        raise ValueError("forcing must be strictly positive")
    sources.validate_for(f.grid)
    hbar = cfg.hbar
    ftilde = cfg.ftilde if cfg.ftilde is not None else optimal_ftilde(f)
    c0 = c0_upper_bound(f, ftilde)
    warnings = []
    if c0 >= 1.0:
        warnings.append(
            f"contraction bound c0={c0:.3f} >= 1; series convergence not certified"
        )

    phi0 = phi_zero(f.grid, sources, ftilde, hbar, policy=cfg.conv_policy)
    phi = phi0.copy_values()
    norms = [l2_norm(phi)]
    truncated = []
    if cfg.terms > 0:
        params = KernelParams(hbar=hbar, f_const=ftilde, dimension=f.grid.ndim)
        g = kernel_field(f.grid, params, which="exact", policy=cfg.conv_policy)
        conv = FftConvolver(g, cfg.conv_policy)
        weight = f.values**2 - ftilde * ftilde
        prev = phi0.values
        sign = -1.0
        for _ in range(cfg.terms):
            cur = conv.apply(weight * prev, scale_by_cell=True)
            dropped = 0
            if cfg.noise_floor_rel > 0.0:
                peak = float(np.abs(cur).max())
                if peak > 0.0:
                    low = np.abs(cur) < cfg.noise_floor_rel * peak
                    dropped = int(np.count_nonzero(low & (cur != 0.0)))
                    cur[low] = 0.0
            truncated.append(dropped)
            phi += sign * cur
            norms.append(l2_norm(cur))
            prev = cur
            sign = -sign

    flagged = int(np.count_nonzero(phi < cfg.phi_floor))
    if flagged == phi.size:
        raise ValueError(
            "phi underflowed everywhere; hbar is too small for double "
            "precision on this grid -- solve through scaled_solve with tau > 1"
        )
    phi = np.maximum(phi, cfg.phi_floor)
    s_star = ScalarField(f.grid, -hbar * np.log(phi))
    return finalize_report(
        SolveReport(
            s_star=s_star,
            phi=ScalarField(f.grid, phi),
            backend="perturb",
            hbar=hbar,
            ftilde=ftilde,
            c0_bound=c0,
            term_norms=tuple(norms),
            truncated_counts=tuple(truncated),
            floored_count=flagged,
            warnings=tuple(warnings),
        ),
        f=f,
        sources=sources,
        hbar_eff=hbar,
        t0=t0,
    )


def scaled_solve(
    f: ScalarField,
    sources: SourceSet,
    cfg: PerturbConfig,
) -> SolveReport:
    """perturb_solve on the grid shrunk by cfg.tau, with S rescaled back.

    Shrinking every length by tau is the same problem with forcing f/tau, so
    multiplying the recovered S by tau restores the original solution while
    keeping the exponents exp(-S/(tau hbar)) representable.
    """
    if cfg.tau < 1.0:
        raise ValueError("scaled_solve requires tau >= 1")
    if cfg.tau == 1.0:
        return perturb_solve(f, sources, cfg)
    t0 = time.perf_counter()
    tau = cfg.tau
    small = GridSpec(
        f.grid.dims,
        tuple(o / tau for o in f.grid.origin),
        tuple(s / tau for s in f.grid.spacing),
    )
    f_small = ScalarField(small, f.values)
    src_small = SourceSet(sources.points, tuple(v / tau for v in sources.boundary_values))
    rep = perturb_solve(f_small, src_small, replace(cfg, tau=1.0))
    s_star = ScalarField(f.grid, tau * rep.s_star.values)
    rep = replace(
        rep,
        s_star=s_star,
        phi=ScalarField(f.grid, rep.phi.values),
        tau=tau,
    )
    return finalize_report(rep, f=f, sources=sources, hbar_eff=tau * cfg.hbar, t0=t0)
