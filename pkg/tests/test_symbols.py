import logging
import math

import numpy as np
import pytest
from pytest import approx

from treeharm import symbols as sy
from treeharm import tree_core as tc
from treeharm.errors import InvalidParameterError, StripTooNarrowError, SymbolDomainError
from treeharm.spectral import torus_grid
from treeharm.tree_core import ROOT, TreeParams, Vertex


@pytest.fixture
def cosine(params2):
    return sy.trig_multiplier([0.0, 1.0], params2)


class TestMultipliers:
    def test_constant(self, params2, rng):
        m = sy.trig_multiplier([1.0], params2)
        z = rng.uniform(-3, 3, 10) + 1j * rng.uniform(-1, 1, 10)
        np.testing.assert_allclose(m(z), 1.0)
        assert m.bandwidth == 0

    @pytest.mark.parametrize("k", [1, 2])
    def test_trig_derivatives_match_differences(self, params2, rng, k):
        m = sy.trig_multiplier([0.3, -1.0, 0.5], params2)
        z = rng.uniform(-4, 4, 100) + 1j * rng.uniform(-0.4, 0.4, 100)
        exact = m.derivative(z, k)
        fd = sy._finite_difference(m.eval, z, k)
        scale = np.maximum(1.0, np.abs(exact))
        tol = 1e-8 if k == 1 else 1e-4
        assert np.max(np.abs(exact - fd) / scale) < tol

    def test_pole_halfwidth(self, params2):
        m = sy.pole_multiplier(math.cosh(0.1 * math.log(2)), params2)
        assert m.strip_halfwidth == approx(0.1)
        assert sy.pole_multiplier_for_halfwidth(0.1, params2).alpha == approx(m.alpha)

    def test_halfwidth_is_kept_exactly(self, params2):
        assert sy.pole_multiplier_for_halfwidth(0.1, params2).strip_halfwidth == 0.1
        assert sy.parse_symbol("pole-halfwidth:0.1", params2).strip_halfwidth == 0.1

    def test_pole_line_raises_from_parsed_symbol(self, params2):
        sym = sy.parse_symbol("pole-halfwidth:0.1", params2)
        with pytest.raises(SymbolDomainError):
            sym.eval(ROOT, 0.3 + 0.1j)
        with pytest.raises(SymbolDomainError):
            sym.eval(ROOT, 0.3 - 0.1j)

    def test_warns_near_pole_line(self, params2, caplog):
        m = sy.pole_multiplier_for_halfwidth(0.1, params2)
        with caplog.at_level(logging.WARNING, logger="treeharm.symbols"):
            m.eval(0.3 + 0.05j)
            assert not caplog.records
            assert np.isfinite(m.eval(0.3 + 0.0995j))
        assert any("pole line" in r.getMessage() for r in caplog.records)

    @pytest.mark.parametrize("alpha", [1.0, 0.5, -2.0])
    def test_pole_alpha(self, params2, alpha):
        with pytest.raises(InvalidParameterError):
            sy.pole_multiplier(alpha, params2)

    def test_pole_outside_strip(self, params2):
        m = sy.pole_multiplier_for_halfwidth(0.1, params2)
        with pytest.raises(SymbolDomainError):
            m.eval(0.3 + 0.1j)
        with pytest.raises(SymbolDomainError):
            m.eval(np.array([0.0, 0.2 - 0.15j]))
        assert np.isfinite(m.eval(0.3 + 0.09j))

    def test_pole_derivatives(self, params3, rng):
        m = sy.pole_multiplier(1.5, params3)
        z = rng.uniform(-3, 3, 20) + 1j * rng.uniform(-0.2, 0.2, 20)
        for k in (1, 2):
            fd = sy._finite_difference(m.eval, z, k)
            np.testing.assert_allclose(m.derivative(z, k), fd, rtol=1e-4, atol=1e-4)


class TestProducts:
    def test_unit_factor_is_multiplier(self, params2, cosine, rng):
        sym = sy.product_symbol("one", cosine)
        z = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-0.4, 0.4, 100)
        np.testing.assert_allclose(sym.eval(Vertex((1, 0)), z), cosine(z))
        assert sym.is_multiplier

    def test_parity(self, params2, cosine):
        sym = sy.product_symbol("parity", cosine)
        assert not sym.is_multiplier
        assert sym.eval(ROOT, 0.0) == approx(1.5)
        assert sym.eval(Vertex((0,)), 0.0) == approx(0.5)
        assert sym.symbol_id == "parity*trig:0,1"

    def test_unknown_factor(self, cosine):
        with pytest.raises(InvalidParameterError):
            sy.product_symbol("bogus", cosine)

    def test_strip_requirement(self, params2):
        sym = sy.as_tree_symbol(sy.pole_multiplier_for_halfwidth(0.05, params2))
        with pytest.raises(StripTooNarrowError):
            sy.require_strip(sym, 1 / 3)
        sy.require_strip(sym, 0.04)
        sy.require_strip(sym, 0.0)

    def test_strip_barely_wide_enough_warns(self, params2, caplog):
        sym = sy.as_tree_symbol(sy.pole_multiplier_for_halfwidth(0.1, params2))
        with caplog.at_level(logging.WARNING, logger="treeharm.symbols"):
            sy.require_strip(sym, 0.05)
            assert not caplog.records
            sy.require_strip(sym, 0.0995)
        assert any("within 1%" in r.getMessage() for r in caplog.records)


class TestParse:
    @pytest.mark.parametrize("spec,halfwidth", [
        ("one", math.inf),
        ("trig:1,0.5", math.inf),
        ("pole-halfwidth:0.2", 0.2),
        ("decay*trig:0,1", math.inf),
        ("parity*pole-halfwidth:0.4", 0.4),
    ])
    def test_specs(self, params2, spec, halfwidth):
        sym = sy.parse_symbol(spec, params2)
        assert sym.symbol_id == spec
        assert sy.holomorphy_halfwidth(sym) == approx(halfwidth)

    def test_pole_alpha(self, params3):
        sym = sy.parse_symbol("pole:2", params3)
        assert sym.strip_halfwidth == approx(math.acosh(2) / math.log(3))

    @pytest.mark.parametrize("spec", ["", "trig:", "trig:a", "pole:0.5", "nope", "odd*one", "pole-halfwidth:-1"])
    def test_bad_specs(self, params2, spec):
        with pytest.raises(InvalidParameterError):
            sy.parse_symbol(spec, params2)


class TestWeyl:
    def test_cosine(self, params2, cosine):
        report = sy.check_weyl_invariance(cosine, params2, tol=1e-12)
        assert report.passed
        assert report.max_even_defect < 1e-14

    def test_plane_wave_fails(self, params2):
        m = sy.CallableMultiplier(lambda z: np.exp(1j * np.asarray(z) * params2.log_q), symbol_id="wave")
        report = sy.check_weyl_invariance(m, params2)
        assert not report.passed
        assert report.max_even_defect >= 2.0 - 1e-12

    def test_defects_are_absolute(self, params2):
        m = sy.CallableMultiplier(lambda z: 100.0 * np.exp(1j * np.asarray(z) * params2.log_q), symbol_id="wave")
        report = sy.check_weyl_invariance(m, params2)
        # |100 q^{iτ/4} − 100 q^{−iτ/4}| at the first sample
        assert report.max_even_defect >= 200.0 - 1e-9
        assert not report.passed

    def test_parity_product(self, params2, cosine):
        assert sy.check_weyl_invariance(sy.product_symbol("parity", cosine), params2).passed

    @pytest.mark.parametrize("spec", ["one", "trig:0.2,1,-0.3", "pole:1.3", "pole-halfwidth:0.1", "decay*trig:1,2"])
    def test_builders_pass(self, params2, spec):
        assert sy.check_weyl_invariance(sy.parse_symbol(spec, params2), params2, tol=1e-12).passed

    def test_non_finite_is_domain_error(self, params2):
        m = sy.CallableMultiplier(lambda z: np.full(np.shape(z), np.nan), symbol_id="nan")
        with pytest.raises(SymbolDomainError):
            sy.check_weyl_invariance(m, params2)


class TestSeminorm:
    def test_constant(self, params2, grid512):
        sym = sy.parse_symbol("one", params2)
        assert sy.cv_seminorm(sym, tc.ball(2, params2), grid512) == approx(1.0)

    def test_cosine_small_q(self, params2, grid512, cosine):
        assert sy.cv_seminorm(cosine, [ROOT], grid512) == approx(1.0, rel=1e-4)

    def test_cosine_large_q(self):
        params = TreeParams(8)
        m = sy.trig_multiplier([0.0, 1.0], params)
        value = sy.cv_seminorm(m, [ROOT], torus_grid(512, params))
        assert value == approx(math.log(8) ** 2, rel=1e-4)

    def test_refinement_monotone(self, params2):
        sym = sy.parse_symbol("parity*pole-halfwidth:0.3", params2)
        verts = tc.ball(1, params2)
        coarse = sy.cv_seminorm(sym, verts, torus_grid(16, params2), 0.1)
        fine = sy.cv_seminorm(sym, verts, torus_grid(48, params2), 0.1)
        assert fine >= coarse * (1 - 1e-12)

    def test_blows_up_near_pole(self, params2, grid512):
        m = sy.pole_multiplier_for_halfwidth(0.2, params2)
        values = [sy.cv_seminorm(m, [ROOT], grid512, v) for v in (0.0, 0.15, 0.19, 0.199)]
        assert values == sorted(values)
        assert values[-1] > 100 * values[0]

    def test_shift_outside_strip(self, params2, grid512):
        m = sy.pole_multiplier_for_halfwidth(0.2, params2)
        with pytest.raises(SymbolDomainError):
            sy.cv_seminorm(m, [ROOT], grid512, 0.25)


class TestZSymbols:
    def test_induced_along_geodesic(self, params2):
        base = sy.parse_symbol("decay*trig:0,1", params2)
        zs = sy.induced_z_symbol(base, -1 / 6, params2)
        s = 0.4
        for l in (-3, 0, 2):
            expected = np.cos((s - 1j / 6) * params2.log_q) / (1 + abs(l))
            assert zs.eval(l, s) == approx(expected)

    def test_induced_needs_strip(self, params2):
        with pytest.raises(StripTooNarrowError):
            sy.induced_z_symbol(sy.parse_symbol("pole-halfwidth:0.05", params2), -1 / 3, params2)

    def test_builders(self, params2, cosine):
        assert sy.constant_z_symbol().eval(4, np.array([0.1, 0.2])).tolist() == [1, 1]
        assert sy.z_multiplier(cosine).eval(7, 0.0) == approx(1.0)
        assert sy.z_product(lambda l: l, cosine).eval(3, 0.0) == approx(3.0)
