import numpy as np
import pytest

from dlpp_lab.weight_field import (
    DistributionFamily,
    LineSource,
    WeightField,
    geometric_nu,
    preset,
    sigma_from_mean,
)

EXP = DistributionFamily.EXPONENTIAL
GEO = DistributionFamily.GEOMETRIC


class TestSigmaFromMean:
    def test_exponential(self):
        assert sigma_from_mean(EXP, 2.0) == 2.0

    def test_geometric(self):
        assert sigma_from_mean(GEO, 1.0) == pytest.approx(np.sqrt(2.0), rel=1e-15)

    def test_zero_mean(self):
        assert sigma_from_mean(EXP, 0.0) == 0.0
        assert sigma_from_mean(GEO, 0.0) == 0.0

    @pytest.mark.parametrize("bad", [-1.0, np.nan, np.inf])
    def test_rejects_bad_mean(self, bad):
        with pytest.raises(ValueError):
            sigma_from_mean(EXP, bad)


class TestGeometricNu:
    def test_at_one(self):
        assert geometric_nu(1.0) == pytest.approx(1.0 / np.log(2.0), rel=1e-15)

    def test_at_zero(self):
        assert geometric_nu(0.0) == 0.0

    def test_round_trip_parameter(self):
        # q = 1 - exp(-1/nu) must recover 1/(1+mu)
        nu = geometric_nu(1.0)
        assert 1.0 - np.exp(-1.0 / nu) == pytest.approx(0.5, rel=1e-14)

    def test_strictly_increasing(self):
        mu = np.linspace(1e-3, 50.0, 1000)
        nu = geometric_nu(mu)
        assert np.all(np.diff(nu) > 0)

    def test_floor_construction_mean(self):
        # floor(nu * Exp(1)) has mean mu; Monte Carlo at 1e6 samples
        rng = np.random.default_rng(42)
        y = rng.standard_exponential(10**6)
        for mu in [0.5, 1.0, 3.0]:
            x = np.floor(geometric_nu(mu) * y)
            assert x.mean() == pytest.approx(mu, rel=0.01)


def constant_field(mu, family=EXP, **kw):
    return WeightField(family, lambda a, b: np.full(np.broadcast(a, b).shape, mu), **kw)


class TestEffectiveMean:
    def test_constant_interior(self):
        f = constant_field(1.0)
        assert f.effective_mean(5, 7, 100) == 1.0

    def test_boundary_source_adds_on_axes_only(self):
        f = constant_field(1.0, boundary_source=lambda a, b: np.full(np.broadcast(a, b).shape, 2.0))
        assert f.effective_mean(0, 7, 100) == 3.0
        assert f.effective_mean(7, 0, 100) == 3.0
        assert f.effective_mean(5, 7, 100) == 1.0

    def test_line_source_row(self):
        f = preset("line_source", axis="horizontal", offset=0.25, strength=2.0)
        assert f.effective_mean(10, 25, 100) == 3.0
        assert f.effective_mean(10, 26, 100) == 1.0

    def test_line_source_snaps_to_nearest_row(self):
        f = preset("line_source", axis="horizontal", offset=0.333, strength=1.0)
        assert f.effective_mean(0, 33, 100) == 2.0
        assert f.effective_mean(0, 34, 100) == 1.0

    def test_reduces_to_bulk_without_sources(self):
        f = preset("lambda2")
        i = np.arange(1, 50)
        j = np.arange(1, 50)
        assert np.array_equal(f.effective_mean(i, j, 50), f.bulk_mean_at(i / 50, j / 50))


class TestPresets:
    def test_lambda1_branches(self):
        f = preset("lambda1")
        assert f.bulk_mean_at(0.5, 0.1) == 1.0
        assert f.bulk_mean_at(0.25, 0.25) == 0.0

    def test_lambda2_at_gaussian_center(self):
        f = preset("lambda2")
        assert f.bulk_mean_at(0.25, 0.75) == pytest.approx(1.0 + np.exp(-5.0), rel=1e-14)

    def test_lambda3_inside_disk(self):
        f = preset("lambda3")
        assert f.bulk_mean_at(1.0, 0.0) == 0.5
        assert f.bulk_mean_at(0.5, 0.5) == 1.0

    def test_geo_q_mean(self):
        f = preset("geo_q")
        assert f.family is GEO
        assert f.bulk_mean_at(0.25, 0.25) == 0.0
        assert f.bulk_mean_at(0.75, 0.25) == 1.0

    def test_slow_bond(self):
        f = preset("slow_bond(0.5)")
        assert f.has_diagonal_source()
        assert f.effective_mean(7, 7, 100) == 2.0
        assert f.effective_mean(7, 8, 100) == 1.0

    def test_constant_string_form(self):
        f = preset("constant(2.5)")
        assert f.bulk_mean_at(0.3, 0.9) == 2.5

    def test_unknown_name_lists_presets(self):
        with pytest.raises(ValueError, match="lambda1"):
            preset("nope")

    @pytest.mark.parametrize("name", ["lambda1", "lambda2", "lambda3", "geo_q"])
    def test_sigma_consistency(self, name):
        # derived sigma agrees with sigma_from_mean of the effective bulk mean
        f = preset(name)
        i, j = np.meshgrid(np.arange(20), np.arange(20), indexing="ij")
        sig = f.sigma_site(i, j, 20)
        assert np.array_equal(sig, sigma_from_mean(f.family, f.bulk_line_mean(i, j, 20)))


class TestLineSource:
    def test_rejects_bad_axis(self):
        with pytest.raises(ValueError):
            LineSource("skew", 0.0, 1.0)

    def test_rejects_negative_strength(self):
        with pytest.raises(ValueError):
            LineSource("horizontal", 0.0, -1.0)

    def test_diagonal_mask(self):
        src = LineSource("diagonal", 0.0, 1.0)
        assert src.lattice_mask(3, 3, 10)
        assert not src.lattice_mask(3, 4, 10)
