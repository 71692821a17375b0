import numpy as np
import pytest

from imdet.spectrum import (
    CarrierConfig,
    ImProduct,
    Nonlinearity,
    enumerate_im_products,
    im_power_scaling,
    products_in_band,
    spectral_support,
)


def make_carrier(center_hz, bandwidth_hz=10e6, direction="uplink"):
    return CarrierConfig(
        center_freq_hz=center_hz,
        bandwidth_hz=bandwidth_hz,
        subcarrier_spacing_hz=15e3,
        n_prb=50,
        n_sc_per_prb=12,
        n_prb_control=8,
        direction=direction,
    )


TX1 = make_carrier(1930e6, direction="downlink")
TX2 = make_carrier(1990e6, direction="downlink")
UPLINK = make_carrier(1880e6, bandwidth_hz=60e6)  # 1850..1910 MHz


def _fft_convolve(a, b, du):
    """Independent convolution route for cross-checking np.convolve."""
    n = len(a) + len(b) - 1
    nfft = 1 << (n - 1).bit_length()
    out = np.fft.irfft(np.fft.rfft(a, nfft) * np.fft.rfft(b, nfft), nfft)[:n]
    return out * du


def centers_by_order(products, order):
    return {round(p.center_freq_hz / 1e6, 6) for p in products if p.order == order}


class TestEnumerate:
    def test_third_order_subtractive_products(self):
        products = enumerate_im_products([TX1, TX2], 3)
        assert {1870.0, 2050.0} <= centers_by_order(products, 3)

    def test_fifth_order_subtractive_products(self):
        products = enumerate_im_products([TX1, TX2], 5)
        assert {1810.0, 2110.0} <= centers_by_order(products, 5)

    def test_harmonics_are_products_too(self):
        products = enumerate_im_products([TX1, TX2], 3)
        assert (2, 0) in {p.coeffs for p in products}  # 2*f1 at 3860 MHz
        assert 3860.0 in centers_by_order(products, 2)

    def test_single_carrier_rejected(self):
        with pytest.raises(ValueError):
            enumerate_im_products([TX1], 3)

    @pytest.mark.parametrize("max_order", [0, 1, 10])
    def test_max_order_bounds(self, max_order):
        with pytest.raises(ValueError):
            enumerate_im_products([TX1, TX2], max_order)

    def test_deduplicated_up_to_global_sign(self):
        products = enumerate_im_products([TX1, TX2], 5)
        seen = set()
        for p in products:
            neg = tuple(-k for k in p.coeffs)
            assert neg not in seen, f"{p.coeffs} and its mirror both present"
            seen.add(p.coeffs)
            assert p.center_freq_hz > 0

    def test_order_is_l1_norm_and_bandwidth_scales_with_order(self):
        products = enumerate_im_products([TX1, TX2], 7)
        for p in products:
            assert p.order == sum(abs(k) for k in p.coeffs)
            assert p.bandwidth_hz == p.order * 10e6

    def test_rel_power_strictly_decreasing_with_order(self):
        products = enumerate_im_products([TX1, TX2], 6)
        by_order = {}
        for p in products:
            by_order.setdefault(p.order, set()).add(p.rel_power)
        for order, powers in by_order.items():
            assert len(powers) == 1  # one scaling per order for one carrier set
        orders = sorted(by_order)
        values = [by_order[o].pop() for o in orders]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_enumeration_is_deterministic(self):
        a = enumerate_im_products([TX1, TX2], 5)
        b = enumerate_im_products([TX1, TX2], 5)
        assert a == b

    def test_three_carriers_supported(self):
        tx3 = make_carrier(2110e6, direction="downlink")
        products = enumerate_im_products([TX1, TX2, tx3], 3)
        # f1 + f2 - f3 = 1810 MHz, a genuinely three-carrier product
        assert any(
            p.coeffs == (1, 1, -1) and p.center_freq_hz == pytest.approx(1810e6)
            for p in products
        )


class TestProductsInBand:
    def test_fully_contained_product(self):
        im3 = ImProduct((2, -1), 3, 1870e6, 30e6, 0.25)
        kept = products_in_band([im3], UPLINK)
        assert len(kept) == 1
        assert kept[0].overlap_fraction == pytest.approx(1.0)

    def test_out_of_band_product_excluded(self):
        im3 = ImProduct((-1, 2), 3, 2050e6, 30e6, 0.25)
        assert products_in_band([im3], UPLINK) == []

    def test_band_edge_straddler_has_fractional_overlap(self):
        # Band [1850, 1910]; product [1900, 1930] overlaps 10 of 30 MHz.
        prod = ImProduct((2, -1), 3, 1915e6, 30e6, 0.25)
        kept = products_in_band([prod], UPLINK)
        assert len(kept) == 1
        assert 0.0 < kept[0].overlap_fraction < 1.0
        assert kept[0].overlap_fraction == pytest.approx(10 / 30)

    def test_pipeline_is_deterministic_and_sorted(self):
        products = enumerate_im_products([TX1, TX2], 5)
        kept = products_in_band(products, UPLINK)
        assert kept == products_in_band(products, UPLINK)
        keys = [(p.order, p.center_freq_hz) for p in kept]
        assert keys == sorted(keys)


class TestSpectralSupport:
    def test_single_pulse_support_is_the_bandwidth(self):
        support, peak = spectral_support(1, 10e6, 2**14)
        bin_hz = 2 * 10e6 / (2**14 // 2)  # span/(grid bins per span)
        assert support == pytest.approx(10e6, abs=2 * bin_hz)
        assert peak == pytest.approx(1.0)

    def test_two_pulse_convolution_is_a_triangle_of_double_support(self):
        support, peak = spectral_support(2, 10e6, 2**14)
        bin_hz = 3 * 10e6 / (2**14 // 3)
        assert support == pytest.approx(20e6, abs=2 * bin_hz)
        # Triangle: peak at center, linear flanks. Reconstruct via the
        # independent FFT route and compare shape.
        n = 2**14 // 3
        du = 1.0 / n
        pulse = np.full(n + 1, 0.5)
        tri = _fft_convolve(pulse, pulse, du)
        assert np.argmax(tri) * 2 == pytest.approx(len(tri) - 1, abs=2)
        assert peak == pytest.approx(tri.max() * 2.0, rel=1e-9)

    def test_third_order_support_matches_fft_oracle(self):
        support, _ = spectral_support(3, 10e6, 2**14)
        n = 2**14 // 4
        du = 1.0 / n
        pulse = np.full(n + 1, 0.5)
        acc = _fft_convolve(_fft_convolve(pulse, pulse, du), pulse, du)
        above = np.flatnonzero(np.abs(acc) > 1e-12 * acc.max())
        oracle_support = (above[-1] - above[0]) * du * 10e6
        bin_hz = du * 10e6
        assert support == pytest.approx(3 * 10e6, abs=2 * bin_hz)
        assert support == pytest.approx(oracle_support, abs=2 * bin_hz)

    def test_peaks_match_central_limit_values_and_decrease(self):
        # p-fold self-convolution of a unit-width rect peaks at the
        # Irwin-Hall density maximum; with amplitude 1/2 per pulse the
        # ratio to the single pulse is c_p / 2**(p-1).
        central = {1: 1.0, 2: 1.0, 3: 0.75, 4: 2 / 3, 5: 115 / 192}
        peaks = []
        for p in range(1, 6):
            _, peak = spectral_support(p, 10e6, 2**14)
            assert peak == pytest.approx(central[p] / 2 ** (p - 1), rel=5e-3)
            peaks.append(peak)
        assert all(a > b for a, b in zip(peaks, peaks[1:]))

    def test_convolution_grouping_does_not_move_the_support(self):
        # (((g*g)*g)*g) vs (g*g)*(g*g): same support within tolerance.
        n = 2**13 // 5
        du = 1.0 / n
        pulse = np.full(n + 1, 0.5)
        left = pulse
        for _ in range(3):
            left = _fft_convolve(left, pulse, du)
        pair = _fft_convolve(pulse, pulse, du)
        balanced = _fft_convolve(pair, pair, du)

        def measured(arr):
            above = np.flatnonzero(np.abs(arr) > 1e-9 * arr.max())
            return (above[-1] - above[0]) * du

        assert measured(left) == pytest.approx(measured(balanced), abs=2 * du)

    def test_raising_threshold_trims_the_edge_tails(self):
        full, _ = spectral_support(4, 10e6, 2**14)
        trimmed, _ = spectral_support(4, 10e6, 2**14, rel_threshold=1e-6)
        tighter, _ = spectral_support(4, 10e6, 2**14, rel_threshold=1e-3)
        assert tighter < trimmed < full

    def test_explicit_span_must_cover_the_result(self):
        with pytest.raises(ValueError):
            spectral_support(3, 10e6, 2**14, span_hz=35e6)
        support, _ = spectral_support(3, 10e6, 2**14, span_hz=45e6)
        bin_hz = 45e6 / 2**14
        assert support == pytest.approx(30e6, abs=3 * bin_hz)

    def test_grid_and_amplitude_validation(self):
        with pytest.raises(ValueError):
            spectral_support(0, 10e6, 2**14)
        with pytest.raises(ValueError):
            spectral_support(2, 10e6, 512)
        with pytest.raises(ValueError):
            spectral_support(2, 10e6, 2**14, b_tilde=1.0)


class TestPowerScaling:
    def test_fundamental_power(self):
        assert im_power_scaling(1, 1.0, 2.0) == pytest.approx(0.25)

    def test_second_order_power(self):
        assert im_power_scaling(2, 1.0, 2.0) == pytest.approx(0.125)

    def test_unit_coefficient_rejected(self):
        with pytest.raises(ValueError):
            im_power_scaling(3, 1.0, 1.0)

    @pytest.mark.parametrize("b_tilde", [1.1, 2.0, 5.0])
    def test_monotone_decreasing_in_order(self, b_tilde):
        values = [im_power_scaling(p, 0.5, b_tilde) for p in range(1, 8)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestTypes:
    def test_carrier_validation(self):
        with pytest.raises(ValueError):
            make_carrier(1930e6, bandwidth_hz=0.5)
        with pytest.raises(ValueError):
            CarrierConfig(1930e6, 10e6, 15e3, n_prb=50, n_sc_per_prb=12, n_prb_control=7)
        with pytest.raises(ValueError):
            CarrierConfig(1930e6, 10e6, 15e3, n_prb=8, n_sc_per_prb=12, n_prb_control=8)
        with pytest.raises(ValueError):
            CarrierConfig(1930e6, 10e6, 15e3, n_prb=50, n_sc_per_prb=12,
                          n_prb_control=8, direction="sideways")

    def test_nonlinearity_validation(self):
        Nonlinearity((1.0, -0.2, 0.05))
        with pytest.raises(ValueError):
            Nonlinearity((1.0,))
        with pytest.raises(ValueError):
            Nonlinearity((1.0, 0.0, 0.05))

    def test_product_order_consistency_enforced(self):
        with pytest.raises(ValueError):
            ImProduct((2, -1), 2, 1870e6, 30e6, 0.25)
