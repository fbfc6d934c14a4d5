import numpy as np
import pytest

from biphoton import (
    JsaGrid,
    flat_convolution,
    in_cavity_pump,
    jsa,
    jsa_pump_grid,
    jsi,
    jsi_correlation,
    pump_amplitude,
    pump_convolution,
    pump_grid,
    pump_profile,
)
from core import Channel, PumpSpec, default_mode_grid, make_grid
from exceptions import BadGridSpec, CarrierMismatch, DegenerateKernel
from schmidt import schmidt_decompose
from transfer import coupled_params, transfer_from_detuning


class TestPump:
    @pytest.mark.parametrize("sigma", [0.01, 0.5, 3.0])
    def test_amplitude_is_normalized(self, sigma):
        pump = PumpSpec(sigma=sigma)
        grid = make_grid(0.0, 20.0 * np.sqrt(sigma), 2001)
        norm = np.sum(grid.weights * pump_profile(pump, grid.offsets) ** 2)
        assert norm == pytest.approx(1.0, abs=1e-10)

    def test_amplitude_centred_on_carrier(self):
        pump = PumpSpec(sigma=0.2, omega0=1.5)
        assert pump_amplitude(pump, 1.5) == pytest.approx((2 * np.pi * 0.2) ** -0.25)
        assert pump_amplitude(pump, 1.0) == pytest.approx(pump_amplitude(pump, 2.0))

    def test_gaussian_self_convolution(self):
        # with a flat cavity response the pump integral is exp(-Omega^2 / 8 sigma)
        pump = PumpSpec(sigma=1.0)
        grid = make_grid(0.0, 20.0, 801)
        h = pump_convolution(pump_profile(pump, grid.offsets), grid)
        sums = h.sum_grid.offsets
        inside = np.abs(sums) <= 10.0
        np.testing.assert_allclose(h.values[inside], np.exp(-sums[inside] ** 2 / 8.0), atol=1e-8)

    def test_convolution_rejects_wrong_length(self):
        grid = make_grid(0.0, 1.0, 11)
        with pytest.raises(BadGridSpec):
            pump_convolution(np.ones(10), grid)

    def test_in_cavity_pump_needs_centred_grid(self, unit_params, narrow_pump):
        with pytest.raises(BadGridSpec):
            in_cavity_pump(unit_params, narrow_pump, make_grid(1.0, 4.0, 33))

    def test_lookup_is_zero_outside_sum_grid(self):
        h = flat_convolution(make_grid(0.0, 1.0, 5), make_grid(0.0, 1.0, 5))
        assert h.at(np.array([0.0, 100.0]))[1] == 0


class TestJsa:
    def test_matches_direct_double_integral(self, ratio_params):
        params = ratio_params(2.0)
        pump = PumpSpec.from_fwhm(0.8)
        grid_i = default_mode_grid(params, Channel.IDLER, 65)
        grid_s = default_mode_grid(params, Channel.SIGNAL, 65)
        amplitude = jsa(params, pump, grid_i, grid_s)

        p_grid = jsa_pump_grid(params, pump, grid_i, grid_s)
        w = p_grid.offsets
        f_w = transfer_from_detuning(params.kappa_p, params.g_p, -w) * pump_profile(pump, w)
        sums = (grid_i.offsets[:, None] + grid_s.offsets[None, :])[..., None]
        rest = sums - w[None, None, :]
        f_rest = transfer_from_detuning(params.kappa_p, params.g_p, -rest) * pump_profile(pump, rest)
        h = np.sum(f_rest * (f_w * p_grid.weights)[None, None, :], axis=-1)
        m_i = transfer_from_detuning(1.0, params.g_is, -grid_i.offsets)
        m_s = transfer_from_detuning(1.0, params.g_is, -grid_s.offsets)
        direct = h * m_i[:, None] * m_s[None, :]

        scale = np.abs(direct).max()
        np.testing.assert_allclose(amplitude.values / scale, direct / scale, atol=1e-8)

    def test_symmetric_in_idler_and_signal(self, ratio_params, narrow_pump):
        params = ratio_params(3.0)
        grid = default_mode_grid(params, Channel.IDLER, 33)
        amplitude = jsa(params, narrow_pump, grid, grid)
        np.testing.assert_allclose(amplitude.values, amplitude.values.T, rtol=1e-12, atol=1e-15)

    def test_flat_convolution_is_outer_product(self, unit_params, narrow_pump):
        grid_i = default_mode_grid(unit_params, Channel.IDLER, 33)
        grid_s = default_mode_grid(unit_params, Channel.SIGNAL, 33)
        amplitude = jsa(unit_params, narrow_pump, grid_i, grid_s,
                        convolution=flat_convolution(grid_i, grid_s))
        assert amplitude.pump_grid is None
        assert np.linalg.matrix_rank(amplitude.values, tol=1e-10 * np.abs(amplitude.values).max()) == 1

    def test_shifted_carriers_give_same_amplitude(self, narrow_pump):
        centred = coupled_params(2.0)
        shifted = coupled_params(2.0, omega0_p=0.1, omega0_i=0.3, omega0_s=-0.1)
        pump = PumpSpec(sigma=narrow_pump.sigma, omega0=0.1)
        base = jsa(centred, narrow_pump, default_mode_grid(centred, Channel.IDLER, 33),
                   default_mode_grid(centred, Channel.SIGNAL, 33))
        moved = jsa(shifted, pump, default_mode_grid(shifted, Channel.IDLER, 33),
                    default_mode_grid(shifted, Channel.SIGNAL, 33))
        np.testing.assert_allclose(moved.values, base.values, rtol=1e-9, atol=1e-12)

    def test_carrier_mismatch(self, narrow_pump):
        params = coupled_params(2.0, omega0_p=0.1)
        grid_i = default_mode_grid(params, Channel.IDLER, 17)
        grid_s = default_mode_grid(params, Channel.SIGNAL, 17)
        with pytest.raises(CarrierMismatch):
            jsa(params, narrow_pump, grid_i, grid_s)

    def test_grid_validation(self):
        grid = make_grid(0.0, 1.0, 5)
        with pytest.raises(BadGridSpec):
            JsaGrid(grid_i=grid, grid_s=grid, values=np.ones((5, 3)))
        with pytest.raises(DegenerateKernel):
            JsaGrid(grid_i=grid, grid_s=grid, values=np.zeros((5, 5), dtype=complex))


class TestJsi:
    def test_unit_peak(self, unit_params, narrow_pump):
        grid = default_mode_grid(unit_params, Channel.IDLER, 33)
        intensity = jsi(jsa(unit_params, narrow_pump, grid, grid))
        assert intensity.max() == pytest.approx(1.0)
        assert intensity.min() >= 0.0

    def test_separable_state_is_uncorrelated(self, unit_params, narrow_pump):
        grid = default_mode_grid(unit_params, Channel.IDLER, 33)
        amplitude = jsa(unit_params, narrow_pump, grid, grid, convolution=flat_convolution(grid, grid))
        assert abs(jsi_correlation(amplitude)) < 1e-12

    def test_narrow_pump_anticorrelates(self, ratio_params):
        params = ratio_params(1.0)
        grid = default_mode_grid(params, Channel.IDLER, 129)
        amplitude = jsa(params, PumpSpec.from_fwhm(0.1), grid, grid)
        assert jsi_correlation(amplitude) < -0.5


class TestInCavityPump:
    def test_peak_is_product_of_peaks(self, ratio_params):
        params = ratio_params(6.6)
        pump = PumpSpec.from_fwhm(0.45 * 6.6)
        grid = make_grid(0.0, 8.0 * 6.6, 257)
        f = in_cavity_pump(params, pump, grid)
        expected = (2 * np.pi * pump.sigma) ** -0.25 * np.sqrt(params.kappa_p) / params.g_p
        assert f[grid.middle] == pytest.approx(expected)

    def test_negligible_at_grid_edges(self, ratio_params):
        params = ratio_params(6.6)
        pump = PumpSpec.from_fwhm(0.45 * 6.6)
        grid = jsa_pump_grid(params, pump, default_mode_grid(params, Channel.IDLER),
                             default_mode_grid(params, Channel.SIGNAL))
        f = np.abs(in_cavity_pump(params, pump, grid))
        assert max(f[0], f[-1]) < 1e-8 * f.max()

    def test_conjugate_symmetric(self, unit_params, narrow_pump):
        grid = make_grid(0.0, 8.0, 129)
        f = in_cavity_pump(unit_params, narrow_pump, grid)
        np.testing.assert_allclose(f[::-1], np.conj(f), rtol=1e-13)


def test_self_convolution_peaks_at_twice_carrier(ratio_params):
    params = ratio_params(2.0, omega0_p=0.5, omega0_i=0.5, omega0_s=0.5)
    pump = PumpSpec(sigma=PumpSpec.from_fwhm(0.9).sigma, omega0=0.5)
    grid = make_grid(0.5, 16.0, 257)
    h = pump_convolution(in_cavity_pump(params, pump, grid), grid)
    assert h.sum_grid.center == pytest.approx(1.0)
    peak = int(np.argmax(np.abs(h.values)))
    assert abs(h.sum_grid.offsets[peak]) <= h.sum_grid.step
    np.testing.assert_allclose(h.values[::-1], np.conj(h.values), rtol=1e-9, atol=1e-12 * np.abs(h.values).max())


@pytest.mark.slow
def test_broad_pump_shows_no_diagonal_elongation(ratio_params):
    params = ratio_params(10.0)
    grid_i = default_mode_grid(params, Channel.IDLER)
    grid_s = default_mode_grid(params, Channel.SIGNAL)
    amplitude = jsa(params, PumpSpec.from_fwhm(0.45 * 10.0), grid_i, grid_s)
    assert abs(jsi_correlation(amplitude)) < 0.05


class TestPumpGridLimit:
    def test_wide_pump_exceeds_sample_limit(self, ratio_params):
        params = ratio_params(6.6)
        with pytest.raises(BadGridSpec, match="limit"):
            pump_grid(params, PumpSpec.from_fwhm(3300.0), 1.0 / 64.0)

    def test_explicit_limit(self, unit_params, narrow_pump):
        assert pump_grid(unit_params, narrow_pump, 0.5, max_points=33).n_points == 33
        with pytest.raises(BadGridSpec):
            pump_grid(unit_params, narrow_pump, 0.5, max_points=31)

    def test_broadband_grid_follows_linewidth(self, ratio_params):
        params = ratio_params(6.6)
        grid = pump_grid(params, None, 0.25)
        assert grid.half_width == pytest.approx(8.0 * 6.6, abs=0.25)


def test_broadband_in_cavity_pump_is_transfer(ratio_params):
    params = ratio_params(2.0)
    grid = make_grid(0.0, 16.0, 129)
    expected = transfer_from_detuning(params.kappa_p, params.g_p, -grid.offsets)
    np.testing.assert_allclose(in_cavity_pump(params, None, grid), expected, rtol=1e-15)


def test_pump_amplitude_scale_drops_out(ratio_params, narrow_pump):
    params = ratio_params(2.0)
    grid_i = default_mode_grid(params, Channel.IDLER, 65)
    grid_s = default_mode_grid(params, Channel.SIGNAL, 65)
    p_grid = jsa_pump_grid(params, narrow_pump, grid_i, grid_s)
    f = in_cavity_pump(params, narrow_pump, p_grid)
    c = 0.3 + 1.1j

    base = jsa(params, narrow_pump, grid_i, grid_s, convolution=pump_convolution(f, p_grid))
    scaled = jsa(params, narrow_pump, grid_i, grid_s, convolution=pump_convolution(c * f, p_grid))
    np.testing.assert_allclose(scaled.values, c * c * base.values,
                               rtol=1e-12, atol=1e-12 * np.abs(base.values).max())
    np.testing.assert_allclose(schmidt_decompose(scaled).coefficients,
                               schmidt_decompose(base).coefficients, rtol=1e-9, atol=1e-15)


def test_normalized_jsi_is_frequency_scale_covariant():
    params = coupled_params(2.0)
    pump = PumpSpec.from_fwhm(1.0)
    factor = 3.5
    scaled_params = params.scaled(factor)
    scaled_pump = PumpSpec(sigma=pump.sigma * factor ** 2)

    def normalized(p, q):
        amplitude = jsa(p, q, default_mode_grid(p, Channel.IDLER, 65), default_mode_grid(p, Channel.SIGNAL, 65))
        return jsi(amplitude)

    np.testing.assert_allclose(normalized(scaled_params, scaled_pump), normalized(params, pump),
                               rtol=0, atol=1e-10)
