"""Helgason/spherical transforms, inversion on balls, and the Fourier pair on ℤ."""

import math

import numpy as np
import pytest
from pytest import approx

from treeharm import transforms as tr
from treeharm import tree_core as tc
from treeharm.errors import InsufficientDepthError, InvalidInputError
from treeharm.spectral import spherical_function, torus_grid
from treeharm.tree_core import ROOT, TreeParams, Vertex


class TestFiniteFunction:
    def test_from_mapping(self, params2):
        f = tr.from_mapping({Vertex((0, 1)): 2.0}, 2, params2)
        assert f.value(Vertex((0, 1))) == 2.0
        assert f.value(ROOT) == 0.0
        assert f.value(Vertex((0, 1, 1))) == 0.0

    def test_outside_ball(self, params2):
        with pytest.raises(InvalidInputError):
            tr.from_mapping({Vertex((0, 1, 1)): 1.0}, 2, params2)

    def test_non_finite(self, params2):
        with pytest.raises(InvalidInputError):
            tr.from_array([np.nan] + [0.0] * 3, 1, params2)

    def test_radial_profile(self, params2):
        f = tr.radial([1.0, 2.0, 3.0], params2)
        np.testing.assert_allclose(tr.radial_profile(f), [1, 2, 3])
        with pytest.raises(InvalidInputError):
            tr.radial_profile(tr.delta(Vertex((1,)), 1, params2))

    def test_linear_operations(self, params2, rng):
        f = tr.random_function(2, params2, rng)
        g = tr.random_function(2, params2, rng)
        np.testing.assert_allclose((2 * f - g).values, 2 * f.values - g.values)


class TestHelgason:
    def test_delta_at_root(self, params2, grid512):
        table = tr.helgason_transform(tr.delta(ROOT, 0, params2), grid512, D=2)
        np.testing.assert_allclose(table.entries, 1.0)

    def test_delta_next_to_root(self, params2, grid512):
        x = Vertex((0,))
        table = tr.helgason_transform(tr.delta(x, 1, params2), grid512)
        for j, omega in enumerate(table.cylinders):
            h = tc.height(x, omega)
            assert h in (1, -1)
            expected = np.exp((0.5 + 1j * grid512.nodes) * h * params2.log_q)
            np.testing.assert_allclose(table.entries[:, j], expected, atol=1e-13)

    def test_single_point_value(self, params3, rng):
        f = tr.random_function(2, params3, rng)
        omega = tc.boundary_cylinders(2, params3)[7]
        grid = torus_grid(8, params3)
        table = tr.helgason_transform(f, grid)
        assert tr.helgason_value(f, grid.nodes[3], omega) == approx(table.entries[3, 7], abs=1e-12)

    def test_radial_reduces_to_spherical(self, params2, grid512):
        f = tr.radial([1.0, -0.5, 0.25, 2.0], params2)
        table = tr.helgason_transform(f, grid512)
        sph = tr.spherical_transform(f, grid512.nodes, params2)
        np.testing.assert_allclose(table.entries, sph[:, None] * np.ones(table.entries.shape[1]), atol=1e-12)

    def test_shallow_depth(self, params2, grid512):
        with pytest.raises(InsufficientDepthError):
            tr.helgason_transform(tr.delta(ROOT, 3, params2), grid512, D=2)

    def test_periodic(self, params2, rng):
        f = tr.random_function(2, params2, rng)
        omega = tc.boundary_cylinders(2, params2)[4]
        z = 0.37 + 0.1j
        assert tr.helgason_value(f, z + params2.tau, omega) == approx(tr.helgason_value(f, z, omega), abs=1e-12)


class TestInversion:
    def test_delta_at_root(self, params2, grid512):
        table = tr.helgason_transform(tr.delta(ROOT, 0, params2), grid512, D=1)
        assert tr.inverse_helgason(table, ROOT) == approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("q,R", [(2, 1), (2, 3), (2, 4), (3, 2), (3, 3)])
    def test_round_trip(self, q, R):
        params = TreeParams(q)
        grid = torus_grid(512, params)
        rng = np.random.default_rng(100 * q + R)
        for _ in range(3):
            f = tr.random_function(R, params, rng)
            back = tr.reconstruct(tr.helgason_transform(f, grid), R)
            assert np.max(np.abs(back.values - f.values)) < 1e-9

    def test_grid_doubling(self, params2, rng):
        f = tr.random_function(3, params2, rng)
        x = Vertex((2, 1, 0))
        coarse, fine, defect = tr.certify_quadrature(
            lambda g: tr.inverse_helgason(tr.helgason_transform(f, g), x), 512, params2)
        assert defect < 1e-12
        assert coarse == approx(f.value(x), abs=1e-9)

    def test_depth_independence(self, params2, grid512, rng):
        f = tr.random_function(2, params2, rng)
        x = Vertex((1, 1))
        values = [tr.inverse_helgason(tr.helgason_transform(f, grid512, D), x) for D in (2, 3, 5)]
        assert values[1] == approx(values[0], abs=1e-13)
        assert values[2] == approx(values[0], abs=1e-13)

    def test_under_resolved(self, params2, rng):
        f = tr.random_function(3, params2, rng)
        back = tr.reconstruct(tr.helgason_transform(f, torus_grid(8, params2)), 3)
        assert np.max(np.abs(back.values - f.values)) > 1e-8

    def test_vertex_deeper_than_table(self, params2, grid512):
        table = tr.helgason_transform(tr.delta(ROOT, 1, params2), grid512)
        with pytest.raises(InsufficientDepthError):
            tr.inverse_helgason(table, Vertex((0, 0)))

    def test_linearity(self, params2, grid512, rng):
        f = tr.random_function(2, params2, rng)
        g = tr.random_function(2, params2, rng)
        a, b = 0.5 - 1j, 2.0
        lhs = tr.helgason_transform(a * f + b * g, grid512).entries
        rhs = a * tr.helgason_transform(f, grid512).entries + b * tr.helgason_transform(g, grid512).entries
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestSpherical:
    def test_delta(self, params2):
        assert tr.spherical_transform(tr.delta(ROOT, 2, params2), 0.7 + 0.2j, params2) == approx(1.0)

    def test_sphere_indicator(self, params2):
        value = tr.spherical_transform([0.0, 1.0], 0.0, params2)
        assert value == approx(4 / math.sqrt(2))

    def test_even(self, params3, rng):
        prof = rng.standard_normal(4)
        z = rng.uniform(-2, 2, 10) + 1j * rng.uniform(-0.4, 0.4, 10)
        np.testing.assert_allclose(tr.spherical_transform(prof, z, params3),
                                   tr.spherical_transform(prof, -z, params3), atol=1e-12)

    def test_inverse_spherical(self, params2, grid512):
        prof = np.array([1.0, 0.5, -0.25, 0.125])
        F = lambda s: tr.spherical_transform(prof, s, params2)
        np.testing.assert_allclose(tr.inverse_spherical(F, np.arange(4), grid512, params2), prof, atol=1e-10)
        assert tr.inverse_spherical(F, 5, grid512, params2) == approx(0.0, abs=1e-10)

    def test_spherical_function_in_spectral_variable(self, params2, grid512):
        # φ_s(d) is the spherical transform of the unit mass at o, so inverting 1 gives δ_o
        out = tr.inverse_spherical(lambda s: np.ones_like(s), np.arange(4), grid512, params2)
        np.testing.assert_allclose(out, [1.0, 0.0, 0.0, 0.0], atol=1e-10)
        assert spherical_function(0.0, 0, params2) == 1.0


class TestZFourier:
    def test_delta_zero(self, params2, rng):
        f = tr.zfunction([1.0])
        s = rng.uniform(-4, 4, 5)
        np.testing.assert_allclose(tr.z_fourier(f, s, params2), 1.0)
        grid = torus_grid(16, params2)
        assert tr.z_inverse(lambda s: np.ones_like(s), 0, grid, params2) == approx(1.0)
        assert tr.z_inverse(lambda s: np.ones_like(s), 3, grid, params2) == approx(0.0, abs=1e-14)

    def test_delta_one(self, params2):
        f = tr.zfunction({1: 1.0})
        assert tr.z_fourier(f, 0.8, params2) == approx(np.exp(-1j * 0.8 * params2.log_q))

    def test_round_trip(self, params2, rng):
        f = tr.zfunction(rng.standard_normal(11) + 1j * rng.standard_normal(11), l_min=-5)
        grid = torus_grid(64, params2)
        back = tr.z_inverse(lambda s: tr.z_fourier(f, s, params2), np.arange(-7, 8), grid, params2)
        np.testing.assert_allclose(back, f.window(-7, 7), atol=1e-13)

    def test_window(self):
        f = tr.zfunction({-2: 1.0, 1: 3.0})
        assert f.support == (-2, 1)
        np.testing.assert_allclose(f.window(-3, 2), [0, 1, 0, 0, 3, 0])
