import math

import numpy as np
import pytest

from eiko.field import GridSpec, ScalarField
from eiko.kernels import (
    ConvPolicy,
    KernelParams,
    convolve,
    green_1d,
    green_2d,
    green_3d,
    kernel_field,
    modified_green,
)

TWO_PI = 2.0 * math.pi


def brute_convolve(a, kern, center, scale=1.0):
    """Spatial-domain linear convolution restricted to the grid window;
    independent of the FFT path."""
    n0, n1 = a.shape
    out = np.zeros_like(a)
    for i in range(n0):
        for j in range(n1):
            acc = 0.0
            for k in range(n0):
                for l in range(n1):
                    oi = i - k + center[0]
                    oj = j - l + center[1]
                    if 0 <= oi < n0 and 0 <= oj < n1:
                        acc += a[k, l] * kern[oi, oj]
            out[i, j] = acc * scale
    return out


class TestGreenValues:
    def test_1d_at_origin(self):
        p = KernelParams(hbar=1.0, f_const=1.0, dimension=1)
        assert green_1d(0.0, p) == pytest.approx(0.5, rel=1e-15)

    def test_1d_closed_form(self):
        p = KernelParams(hbar=0.5, f_const=2.0, dimension=1)
        assert green_1d(1.0, p) == pytest.approx(0.5 * math.exp(-4.0), rel=1e-13)

    def test_1d_vanishes_as_hbar_to_zero(self):
        vals = [green_1d(0.5, KernelParams(h, 1.0, 1)) for h in (0.1, 0.05, 0.02)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[-1] < 1e-9

    def test_2d_at_unit_argument(self):
        p = KernelParams(hbar=1.0, f_const=1.0, dimension=2)
        # K0(1) from a 40-digit evaluation of the Bessel integral
        assert green_2d(1.0, p) == pytest.approx(
            0.42102443824070834 / TWO_PI, rel=1e-13
        )

    def test_2d_matches_asymptotic_at_large_argument(self):
        hbar, f = 1.0, 1.0
        r = 10.0
        p = KernelParams(hbar=hbar, f_const=f, dimension=2)
        asym = math.exp(-f * r / hbar) / (
            2.0 * hbar * math.sqrt(TWO_PI * hbar * f * r)
        )
        assert green_2d(r, p) == pytest.approx(asym, rel=0.02)

    def test_2d_r_zero_requires_policy(self):
        p = KernelParams(hbar=1.0, f_const=1.0, dimension=2)
        with pytest.raises(ValueError):
            green_2d(0.0, p)

    def test_3d_values(self):
        p = KernelParams(hbar=1.0, f_const=1.0, dimension=3)
        assert green_3d(2.0, p) == pytest.approx(
            math.exp(-2.0) / (8.0 * math.pi), rel=1e-13
        )
        # screened -> bare limit: with a tiny screening constant, r=1 tends
        # to 1/(4 pi)
        p0 = KernelParams(hbar=1.0, f_const=1e-12, dimension=3)
        assert green_3d(1.0, p0) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-9)
        with pytest.raises(ValueError):
            green_3d(0.0, p)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            green_1d(1.0, KernelParams(1.0, 1.0, 2))
        with pytest.raises(ValueError):
            green_2d(1.0, KernelParams(1.0, 1.0, 3))

    def test_modified_kernel(self):
        p = KernelParams(hbar=0.006, f_const=1.0, dimension=2)
        assert modified_green(0.0, p) == 1.0
        assert modified_green(0.05, p) == pytest.approx(
            math.exp(-0.05 / 0.006), rel=1e-13
        )
        r = np.linspace(0.0, 1.0, 50)
        vals = modified_green(r, p)
        assert np.all(np.diff(vals) < 0.0)


class TestPrefactorRelation:
    def test_1d_exact_prefactor(self):
        p = KernelParams(hbar=0.05, f_const=1.3, dimension=1)
        r = np.linspace(0.1, 1.0, 7)
        ratio = green_1d(r, p) * (2.0 * p.hbar * p.f_const) / modified_green(r, p)
        np.testing.assert_allclose(ratio, 1.0, rtol=1e-12)

    @pytest.mark.parametrize("z", [13.0, 20.0, 50.0])
    def test_2d_prefactor_limit(self, z):
        # exact kernel * closed-form prefactor / modified kernel -> 1 from
        # below as the argument grows; within 1% once z >= 13
        hbar, f = 1.0, 1.0
        r = z * hbar / f
        p = KernelParams(hbar=hbar, f_const=f, dimension=2)
        prefactor = 2.0 * hbar * math.sqrt(TWO_PI * hbar * f * r)
        ratio = green_2d(r, p) * prefactor / modified_green(r, p)
        assert ratio == pytest.approx(1.0, abs=0.01)

    def test_2d_ratio_improves_as_hbar_shrinks(self):
        f, r = 1.0, 1.0
        errs = []
        for hbar in (0.1, 0.05, 0.02):
            p = KernelParams(hbar=hbar, f_const=f, dimension=2)
            prefactor = 2.0 * hbar * math.sqrt(TWO_PI * hbar * f * r)
            ratio = green_2d(r, p) * prefactor / modified_green(r, p)
            errs.append(abs(ratio - 1.0))
        assert errs[0] > errs[1] > errs[2]


class TestKernelField:
    def test_modified_center_is_one(self):
        g = GridSpec((9, 9), (0.0, 0.0), (0.1, 0.1))
        p = KernelParams(hbar=0.2, f_const=1.0, dimension=2)
        kf = kernel_field(g, p, which="modified")
        assert kf.values[4, 4] == 1.0

    def test_exact_center_uses_half_cell(self):
        g = GridSpec((9, 9), (0.0, 0.0), (0.1, 0.1))
        p = KernelParams(hbar=0.2, f_const=1.0, dimension=2)
        kf = kernel_field(g, p, which="exact")
        assert kf.values[4, 4] == pytest.approx(float(green_2d(0.05, p)), rel=1e-14)

    def test_exact_center_finite_cap(self):
        g = GridSpec((9, 9), (0.0, 0.0), (0.1, 0.1))
        p = KernelParams(hbar=0.2, f_const=1.0, dimension=2)
        pol = ConvPolicy(origin_regularization="finite_cap", cap_value=7.5)
        kf = kernel_field(g, p, which="exact", policy=pol)
        assert kf.values[4, 4] == 7.5

    def test_reflection_symmetry_odd_grid(self):
        g = GridSpec((7, 7), (0.0, 0.0), (0.2, 0.2))
        p = KernelParams(hbar=0.3, f_const=1.1, dimension=2)
        for which in ("modified", "exact"):
            v = kernel_field(g, p, which=which).values
            np.testing.assert_allclose(v, v[::-1, ::-1], rtol=0, atol=0)

    def test_modified_strictly_positive(self):
        g = GridSpec((8, 6), (0.0, 0.0), (0.5, 0.5))
        p = KernelParams(hbar=0.1, f_const=2.0, dimension=2)
        assert kernel_field(g, p, which="modified").values.min() > 0.0

    def test_exact_3d_on_2d_grid_rejected(self):
        g = GridSpec((5, 5), (0.0, 0.0), (1.0, 1.0))
        p = KernelParams(hbar=1.0, f_const=1.0, dimension=3)
        with pytest.raises(ValueError):
            kernel_field(g, p, which="exact")

    def test_1d_exact(self):
        g = GridSpec((9,), (0.0,), (0.25,))
        p = KernelParams(hbar=0.5, f_const=1.0, dimension=1)
        kf = kernel_field(g, p, which="exact")
        assert kf.values[4] == pytest.approx(1.0 / (2 * 0.5 * 1.0), rel=1e-14)


class TestConvolve:
    def _kernel(self, grid, hbar=0.4):
        p = KernelParams(hbar=hbar, f_const=1.0, dimension=2)
        return kernel_field(grid, p, which="modified")

    def test_delta_identity(self):
        g = GridSpec((9, 9), (0.0, 0.0), (0.5, 0.5))
        kern = self._kernel(g)
        spike = np.zeros((9, 9))
        spike[4, 4] = 1.0
        out = convolve(ScalarField(g, spike), kern)
        np.testing.assert_allclose(out.values, kern.values, rtol=0, atol=1e-12)

    def test_circular_delta_identity(self):
        g = GridSpec((8, 8), (0.0, 0.0), (0.5, 0.5))
        kern = self._kernel(g)
        spike = np.zeros((8, 8))
        spike[4, 4] = 1.0
        out = convolve(ScalarField(g, spike), kern, ConvPolicy(mode="circular"))
        np.testing.assert_allclose(out.values, kern.values, rtol=0, atol=1e-12)

    def test_linearity(self, rng):
        g = GridSpec((8, 8), (0.0, 0.0), (0.5, 0.5))
        kern = self._kernel(g)
        a = rng.normal(size=(8, 8))
        b = rng.normal(size=(8, 8))
        lhs = convolve(ScalarField(g, a + b), kern).values
        rhs = convolve(ScalarField(g, a), kern).values + convolve(
            ScalarField(g, b), kern
        ).values
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("shape", [(8, 8), (7, 9), (16, 16)])
    def test_matches_bruteforce(self, rng, shape):
        g = GridSpec(shape, (0.0, 0.0), (0.5, 0.5))
        kern_vals = rng.normal(size=shape)
        a = rng.normal(size=shape)
        kern = ScalarField(g, kern_vals)
        out = convolve(ScalarField(g, a), kern).values
        ref = brute_convolve(a, kern_vals, g.center_index())
        scale = np.abs(ref).max()
        np.testing.assert_allclose(out, ref, rtol=0, atol=1e-10 * scale)

    def test_cell_scaling(self, rng):
        g = GridSpec((6, 6), (0.0, 0.0), (0.25, 0.25))
        kern_vals = rng.normal(size=(6, 6))
        a = rng.normal(size=(6, 6))
        plain = convolve(ScalarField(g, a), ScalarField(g, kern_vals)).values
        scaled = convolve(
            ScalarField(g, a), ScalarField(g, kern_vals), scale_by_cell=True
        ).values
        np.testing.assert_allclose(scaled, plain * 0.0625, rtol=1e-13)

    def test_grid_mismatch(self, rng):
        a = ScalarField(GridSpec((6, 6), (0.0, 0.0), (1.0, 1.0)), rng.normal(size=(6, 6)))
        k = ScalarField(GridSpec((5, 5), (0.0, 0.0), (1.0, 1.0)), rng.normal(size=(5, 5)))
        with pytest.raises(ValueError):
            convolve(a, k)

    def test_compact_support_equals_linear_convolution(self, rng):
        # with both operands supported near the center, zero padding must
        # reproduce the unrestricted linear convolution on the window
        g = GridSpec((12, 12), (0.0, 0.0), (1.0, 1.0))
        a = np.zeros((12, 12))
        k = np.zeros((12, 12))
        a[5:8, 5:8] = rng.normal(size=(3, 3))
        k[5:8, 5:8] = rng.normal(size=(3, 3))
        out = convolve(ScalarField(g, a), ScalarField(g, k)).values
        ref = brute_convolve(a, k, g.center_index())
        np.testing.assert_allclose(out, ref, rtol=0, atol=1e-12)


class TestPolicyValidation:
    def test_bad_mode(self):
        with pytest.raises(ValueError):
            ConvPolicy(mode="warp")

    def test_finite_cap_needs_value(self):
        with pytest.raises(ValueError):
            ConvPolicy(origin_regularization="finite_cap")

    def test_kernel_params_validation(self):
        with pytest.raises(ValueError):
            KernelParams(hbar=0.0, f_const=1.0)
        with pytest.raises(ValueError):
            KernelParams(hbar=1.0, f_const=-1.0)
        with pytest.raises(ValueError):
            KernelParams(hbar=1.0, f_const=1.0, dimension=4)


class TestOneDimensional:
    def test_delta_identity_1d(self):
        g = GridSpec((9,), (0.0,), (0.5,))
        p = KernelParams(hbar=0.5, f_const=1.0, dimension=1)
        kern = kernel_field(g, p, which="exact")
        spike = np.zeros(9)
        spike[4] = 1.0
        out = convolve(ScalarField(g, spike), kern)
        np.testing.assert_allclose(out.values, kern.values, rtol=0, atol=1e-12)

    def test_cell_scale_is_grid_width(self, rng):
        g = GridSpec((7,), (0.0,), (0.25,))
        a = rng.normal(size=7)
        k = rng.normal(size=7)
        plain = convolve(ScalarField(g, a), ScalarField(g, k)).values
        scaled = convolve(
            ScalarField(g, a), ScalarField(g, k), scale_by_cell=True
        ).values
        np.testing.assert_allclose(scaled, 0.25 * plain, rtol=1e-13)
