import numpy as np
import pytest

from eiko.field import GridSpec, ScalarField, SourceSet, distance_to_sources
from eiko.sweep import SweepConfig, sweep_solve


def unit_forcing(n, half_width=1.0):
    h = 2.0 * half_width / (n - 1)
    grid = GridSpec((n, n), (-half_width, -half_width), (h, h))
    return ScalarField(grid, np.ones((n, n)))


class TestLocalSolve:
    def test_line_exact_along_column(self):
        # on a two-column strip the first column propagates one-sided, so the
        # values there are exactly spacing * index distance
        h = 0.25
        grid = GridSpec((12, 2), (0.0, 0.0), (h, h))
        f = ScalarField(grid, np.ones((12, 2)))
        s = sweep_solve(f, SourceSet(((0, 0),)), SweepConfig(sweeps=4))
        np.testing.assert_allclose(s.values[:, 0], h * np.arange(12), rtol=0, atol=0)

    def test_diagonal_neighbor_quadratic_update(self):
        # both axis neighbors known and equal -> closed-form two-sided value
        grid = GridSpec((3, 3), (0.0, 0.0), (1.0, 1.0))
        f = ScalarField(grid, np.ones((3, 3)))
        s = sweep_solve(f, SourceSet(((0, 0),)), SweepConfig(sweeps=4))
        assert s.values[1, 0] == 1.0
        assert s.values[0, 1] == 1.0
        expected = 0.5 * (1.0 + 1.0 + np.sqrt(2.0 - 0.0))
        assert s.values[1, 1] == pytest.approx(expected, rel=1e-15)

    def test_requires_positive_forcing(self):
        grid = GridSpec((4, 4), (0.0, 0.0), (1.0, 1.0))
        f = ScalarField(grid, np.zeros((4, 4)))
        with pytest.raises(ValueError):
            sweep_solve(f, SourceSet(((0, 0),)))

    def test_requires_2d(self):
        grid = GridSpec((8,), (0.0,), (1.0,))
        with pytest.raises(ValueError):
            sweep_solve(ScalarField(grid, np.ones(8)), SourceSet(((0,),)))


class TestAccuracy:
    def test_euclidean_distance_101(self):
        f = unit_forcing(101)
        src = SourceSet((f.grid.center_index(),))
        s = sweep_solve(f, src, SweepConfig(sweeps=15))
        r = distance_to_sources(f.grid, src)
        h = f.grid.spacing[0]
        sel = r >= 10 * h
        rel = np.abs(s.values[sel] - r[sel]) / r[sel]
        assert rel.mean() <= 0.025

    def test_refinement_reduces_error(self):
        errs = []
        for n in (51, 101):
            f = unit_forcing(n)
            src = SourceSet((f.grid.center_index(),))
            s = sweep_solve(f, src, SweepConfig(sweeps=15))
            r = distance_to_sources(f.grid, src)
            sel = r >= 10 * f.grid.spacing[0]
            errs.append(float(np.mean(np.abs(s.values[sel] - r[sel]) / r[sel])))
        assert errs[1] < errs[0]


class TestInvariants:
    def test_values_non_increasing_across_sweeps(self):
        f = unit_forcing(33)
        src = SourceSet((f.grid.center_index(),))
        prev = None
        for k in range(1, 5):
            s = sweep_solve(f, src, SweepConfig(sweeps=k)).values
            if prev is not None:
                assert np.all(s <= prev + 1e-15)
            prev = s

    def test_causality(self):
        rng = np.random.default_rng(7)
        grid = GridSpec((21, 21), (0.0, 0.0), (0.1, 0.1))
        f = ScalarField(grid, rng.uniform(0.5, 2.0, size=(21, 21)))
        src = SourceSet(((10, 10),))
        s = sweep_solve(f, src, SweepConfig(sweeps=15)).values
        for i in range(21):
            for j in range(21):
                if (i, j) == (10, 10):
                    continue
                nbrs = []
                if i > 0:
                    nbrs.append(s[i - 1, j])
                if i < 20:
                    nbrs.append(s[i + 1, j])
                if j > 0:
                    nbrs.append(s[i, j - 1])
                if j < 20:
                    nbrs.append(s[i, j + 1])
                assert s[i, j] > min(nbrs)

    def test_convergence_tol_stops_early(self):
        f = unit_forcing(41)
        src = SourceSet((f.grid.center_index(),))
        a = sweep_solve(f, src, SweepConfig(sweeps=50, convergence_tol=1e-14)).values
        b = sweep_solve(f, src, SweepConfig(sweeps=50)).values
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    def test_seed_values_respected(self):
        f = unit_forcing(21)
        src = SourceSet(((10, 10), (0, 0)), (0.5, 0.0))
        s = sweep_solve(f, src, SweepConfig(sweeps=15)).values
        assert s[10, 10] == 0.5
        assert s[0, 0] == 0.0


class TestImplementations:
    @pytest.mark.parametrize("n", [17, 24])
    def test_numba_and_wavefront_identical(self, n, rng):
        grid = GridSpec((n, n + 3), (0.0, 0.0), (0.2, 0.2))
        f = ScalarField(grid, rng.uniform(0.5, 3.0, size=(n, n + 3)))
        src = SourceSet(((2, 3), (n - 2, n - 1)), (0.0, 0.1))
        a = sweep_solve(f, src, SweepConfig(sweeps=6), use_numba=True).values
        b = sweep_solve(f, src, SweepConfig(sweeps=6), use_numba=False).values
        np.testing.assert_array_equal(a, b)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(sweeps=0)
        with pytest.raises(ValueError):
            SweepConfig(convergence_tol=-1.0)
