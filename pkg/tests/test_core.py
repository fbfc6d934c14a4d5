import math

import numpy as np
import pytest

from core import (
    Channel,
    PumpSpec,
    ResonatorParams,
    default_mode_grid,
    grid_with_step,
    make_grid,
    validate_params,
)
from exceptions import BadGridSpec, NonPositiveRate, SourceDesignError


class TestValidateParams:
    def test_valid_params_pass_through(self, unit_params):
        assert validate_params(unit_params) is unit_params

    @pytest.mark.parametrize("name", ["kappa_p", "kappa_is", "g_p", "g_is"])
    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
    def test_rejects_non_positive_rates(self, name, bad):
        values = dict(kappa_p=1.0, kappa_is=1.0, g_p=0.3, g_is=0.3)
        values[name] = bad
        with pytest.raises(NonPositiveRate):
            validate_params(ResonatorParams(**values))

    def test_errors_share_base_class(self):
        with pytest.raises(SourceDesignError):
            validate_params(ResonatorParams(kappa_p=-1.0, kappa_is=1.0, g_p=0.3, g_is=0.3))


class TestResonatorParams:
    def test_channel_accessors(self):
        p = ResonatorParams(kappa_p=6.6, kappa_is=1.0, g_p=2.0, g_is=0.3,
                            omega0_p=0.1, omega0_i=0.3, omega0_s=-0.1)
        assert p.kappa(Channel.PUMP) == 6.6
        assert p.kappa("idler") == 1.0
        assert p.g(Channel.SIGNAL) == 0.3
        assert p.center(Channel.IDLER) == 0.3
        assert p.center(Channel.SIGNAL) == -0.1

    def test_scaled_multiplies_every_rate(self, unit_params):
        s = unit_params.scaled(2.5)
        assert s.kappa_p == pytest.approx(2.5)
        assert s.g_is == pytest.approx(2.5 * unit_params.g_is)


class TestPumpSpec:
    def test_fwhm_round_trip(self):
        pump = PumpSpec.from_fwhm(0.45)
        assert pump.fwhm == pytest.approx(0.45, rel=1e-14)
        assert pump.sigma == pytest.approx(0.45 ** 2 / (8 * math.log(2)))

    @pytest.mark.parametrize("sigma", [0.0, -0.1])
    def test_rejects_non_positive_sigma(self, sigma):
        with pytest.raises(NonPositiveRate):
            PumpSpec(sigma=sigma)


class TestMakeGrid:
    def test_symmetric_offsets_with_exact_zero(self):
        grid = make_grid(0.7, 8.0, 65)
        assert grid.offsets[grid.middle] == 0.0
        np.testing.assert_array_equal(grid.offsets, -grid.offsets[::-1])
        assert grid.points[0] == pytest.approx(0.7 - 8.0)
        assert grid.points[-1] == pytest.approx(0.7 + 8.0)

    def test_trapezoidal_weights(self):
        grid = make_grid(0.0, 2.0, 9)
        assert grid.weights[0] == pytest.approx(0.5 * grid.step)
        assert grid.weights[4] == pytest.approx(grid.step)
        assert grid.weights.sum() == pytest.approx(4.0)

    def test_arrays_are_read_only(self):
        grid = make_grid(0.0, 1.0, 5)
        with pytest.raises(ValueError):
            grid.offsets[0] = 1.0

    @pytest.mark.parametrize("half_width,n", [(0.0, 5), (-1.0, 5), (1.0, 4), (1.0, 1), (1.0, 2.5)])
    def test_rejects_bad_specs(self, half_width, n):
        with pytest.raises(BadGridSpec):
            make_grid(0.0, half_width, n)

    def test_refined_keeps_every_sample(self):
        grid = make_grid(0.0, 8.0, 33)
        fine = grid.refined()
        assert fine.n_points == 65
        np.testing.assert_allclose(fine.offsets[::2], grid.offsets, atol=1e-15)


def test_grid_with_step_covers_extent():
    grid = grid_with_step(0.0, 3.3, 0.25)
    assert grid.step == pytest.approx(0.25)
    assert grid.half_width >= 3.3
    assert grid.n_points % 2 == 1


def test_grid_with_step_exact_multiple():
    grid = grid_with_step(0.0, 8.0, 0.25)
    assert grid.n_points == 65


def test_default_mode_grid_follows_channel(ratio_params):
    params = ratio_params(6.6)
    grid = default_mode_grid(params, Channel.PUMP, 17, 8.0)
    assert grid.half_width == pytest.approx(8.0 * 6.6)
    assert default_mode_grid(params, Channel.IDLER, 17).half_width == pytest.approx(8.0)


def test_smallest_grid():
    grid = make_grid(0.0, 1.0, 3)
    np.testing.assert_array_equal(grid.points, [-1.0, 0.0, 1.0])
    np.testing.assert_array_equal(grid.weights, [0.5, 1.0, 0.5])


def test_offset_center_grid():
    grid = make_grid(5.0, 2.0, 5)
    np.testing.assert_array_equal(grid.points, [3.0, 4.0, 5.0, 6.0, 7.0])
    assert 5.0 in grid.points
