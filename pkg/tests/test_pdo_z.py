import numpy as np
import pytest
from pytest import approx

from treeharm import pdo_z as pz
from treeharm import symbols as sy
from treeharm.csv_io import read_csv
from treeharm.errors import InvalidParameterError
from treeharm.spectral import torus_grid
from treeharm.transforms import zfunction


@pytest.fixture
def grid64(params2):
    return torus_grid(64, params2)


@pytest.fixture
def cosine_z(params2):
    return sy.z_multiplier(sy.trig_multiplier([0.0, 1.0], params2))


def _random_symbol(params, rng):
    a = rng.standard_normal(4)
    b = rng.standard_normal(4)
    L = params.log_q

    def psi(l, s):
        s = np.asarray(s)
        return a[l % 4] + b[(l + 1) % 4] * np.cos(s * L) + 0.3j * np.sin(2 * s * L)

    return sy.CallableZSymbol(psi, symbol_id="random", bandwidth=2)


class TestKernel:
    def test_identity(self, params2, grid64):
        one = sy.constant_z_symbol()
        assert pz.z_kernel(one, 3, 0, grid64, params2) == approx(1.0)
        assert pz.z_kernel(one, 3, 2, grid64, params2) == approx(0.0, abs=1e-14)

    def test_single_mode(self, params2, grid64):
        wave = sy.CallableZSymbol(lambda l, s: np.exp(-1j * np.asarray(s) * params2.log_q))
        assert pz.z_kernel(wave, 0, 1, grid64, params2) == approx(1.0)
        assert pz.z_kernel(wave, 0, -1, grid64, params2) == approx(0.0, abs=1e-14)

    def test_cosine(self, params2, grid64, cosine_z):
        assert pz.z_kernel(cosine_z, 5, 1, grid64, params2) == approx(0.5)
        assert pz.z_kernel(cosine_z, 5, -1, grid64, params2) == approx(0.5)
        assert pz.z_kernel(cosine_z, 5, 0, grid64, params2) == approx(0.0, abs=1e-14)

    def test_required_nodes(self):
        assert pz.required_nodes(0) == 4
        assert pz.required_nodes(3) == 16
        assert pz.required_nodes(None) == 4

    def test_required_nodes_for_window(self):
        assert pz.required_nodes(1, window=32) == 132
        assert pz.required_nodes(None, window=8) == 34
        assert pz.required_nodes(40, window=0) == 164

    def test_grid_for_window(self, params2, cosine_z):
        assert pz.grid_for(cosine_z, 64, params2, window=32).n_nodes == 132
        assert pz.grid_for(cosine_z, 64, params2, window=4).n_nodes == 64

    def test_grid_for(self, params2):
        m = sy.z_multiplier(sy.trig_multiplier([0.0] * 40 + [1.0], params2))
        assert pz.grid_for(m, 64, params2).n_nodes == 164
        assert pz.grid_for(m, 512, params2).n_nodes == 512


class TestApply:
    def test_identity(self, params2, grid64, rng):
        f = zfunction(rng.standard_normal(9) + 1j * rng.standard_normal(9), l_min=-4)
        out = pz.apply_zpdo(sy.constant_z_symbol(), f, grid64, params2)
        np.testing.assert_allclose(out.values, f.values, atol=1e-13)

    def test_two_forms_agree(self, params2, grid64, rng):
        sym = _random_symbol(params2, rng)
        f = zfunction(rng.standard_normal(7), l_min=-2)
        window = (-6, 8)
        a = pz.apply_zpdo(sym, f, grid64, params2, window=window)
        b = pz.apply_zpdo_quadrature(sym, f, grid64, params2, window=window)
        assert np.max(np.abs(a.values - b.values)) < 1e-12

    def test_multiplier_is_convolution(self, params2, grid64, rng):
        m = sy.trig_multiplier([0.5, 1.0, -0.25], params2)
        sym = sy.z_multiplier(m)
        f = zfunction(rng.standard_normal(5), l_min=0)
        out = pz.apply_zpdo(sym, f, grid64, params2, window=(-3, 7))
        taps = {0: 0.5, 1: 0.5, -1: 0.5, 2: -0.125, -2: -0.125}
        expected = [sum(taps.get(l - d, 0.0) * f.value(d) for d in range(5)) for l in range(-3, 8)]
        np.testing.assert_allclose(out.values, expected, atol=1e-13)

    def test_factorised_symbol(self, params2, grid64, rng):
        m = sy.trig_multiplier([0.2, 1.0], params2)
        u = lambda l: 1.0 / (1 + abs(l))
        f = zfunction(rng.standard_normal(6), l_min=-3)
        prod = pz.apply_zpdo(sy.z_product(u, m), f, grid64, params2)
        plain = pz.apply_zpdo(sy.z_multiplier(m), f, grid64, params2)
        np.testing.assert_allclose(prod.values, [u(l) * v for l, v in zip(prod.points, plain.values)], atol=1e-12)

    def test_empty_window(self, params2, grid64):
        with pytest.raises(InvalidParameterError):
            pz.apply_zpdo(sy.constant_z_symbol(), zfunction([1.0]), grid64, params2, window=(2, 1))


class TestSections:
    def test_identity(self, params2, grid64):
        sec = pz.finite_section(sy.constant_z_symbol(), 2, grid64, params2)
        assert sec.matrix.shape == (5, 5)
        assert np.max(np.abs(sec.matrix - np.eye(5))) < 1e-13

    def test_toeplitz(self, params2, grid64):
        sym = sy.z_multiplier(sy.trig_multiplier([0.3, 1.0, 0.7], params2))
        assert pz.finite_section(sym, 6, grid64, params2).toeplitz_spread() < 1e-13

    def test_wide_window_does_not_alias(self, params2, grid64, cosine_z):
        sec = pz.finite_section(cosine_z, 32, grid64, params2)
        assert sec.grid.n_nodes >= 132
        n = sec.matrix.shape[0]
        expected = 0.5 * (np.eye(n, k=1) + np.eye(n, k=-1))
        assert np.max(np.abs(sec.matrix - expected)) < 1e-13

    def test_factorised_rows(self, params2, grid64):
        m = sy.trig_multiplier([0.3, 1.0, 0.7], params2)
        u = lambda l: (-1.0) ** l
        prod = pz.finite_section(sy.z_product(u, m), 3, grid64, params2)
        plain = pz.finite_section(sy.z_multiplier(m), 3, grid64, params2)
        scale = np.array([u(l) for l in prod.points])
        np.testing.assert_allclose(prod.matrix, scale[:, None] * plain.matrix, atol=1e-14)

    def test_negative_window(self, params2, grid64):
        with pytest.raises(InvalidParameterError):
            pz.finite_section(sy.constant_z_symbol(), -1, grid64, params2)

    def test_export(self, params2, grid64, cosine_z, tmp_path):
        sec = pz.finite_section(cosine_z, 1, grid64, params2)
        path = pz.export_zsection(sec, str(tmp_path / "z.csv"), header={"p": 1.5})
        lines = open(path, encoding="utf-8").read().splitlines()
        assert lines[:6] == ["# q=2", "# L=1", "# N=64", "# symbol=trig:0,1", "# p=1.5", "l,d,re,im"]
        frame = read_csv(path)
        assert list(frame.l) == [-1, -1, -1, 0, 0, 0, 1, 1, 1]
        assert frame.re.iloc[1] == approx(0.5)


class TestCalderonVaillancourt:
    @pytest.mark.parametrize("p", [1.3, 2.0, 4.0])
    def test_identity(self, params2, grid64, p):
        report = pz.cv_bound_check(sy.constant_z_symbol(), p, 5, grid64, params2)
        assert report.norm_lb == approx(1.0, abs=1e-10)
        assert report.seminorm == approx(1.0)
        assert report.ratio == approx(1.0, abs=1e-10)

    def test_cosine_norm_approaches_sup(self, params2, grid64, cosine_z):
        report = pz.cv_bound_check(cosine_z, 2.0, 32, grid64, params2)
        assert report.norm_lb == approx(1.0, abs=5e-2)
        assert report.norm_lb <= 1.0 + 1e-12

    def test_row_scaling_does_not_increase_norm(self, params2, grid64):
        m = sy.trig_multiplier([0.3, 1.0, 0.7], params2)
        scaled = pz.cv_bound_check(sy.z_product(lambda l: 1.0 / (1 + l * l), m), 2.0, 8, grid64, params2)
        plain = pz.cv_bound_check(sy.z_multiplier(m), 2.0, 8, grid64, params2)
        assert scaled.norm_lb <= plain.norm_lb + 1e-10

    def test_norms_grow_with_window(self, params2, grid64):
        sym = sy.z_multiplier(sy.trig_multiplier([0.3, 1.0, 0.7], params2))
        values = [pz.cv_bound_check(sym, 2.0, L, grid64, params2).norm_lb for L in (1, 2, 4, 8)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
