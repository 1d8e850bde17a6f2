"""Coefficient expansions, autocovariances, and the infinite predictor."""

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.special import gamma as Gamma

import predictorlab as pl
from predictorlab import DegeneracyError

from conftest import (any_model, farima_a_oracle, farima_c_oracle,
                      farima_gamma_oracle, series_by_cauchy)


class TestExpansions:
    @pytest.mark.parametrize("d", [0.1, 0.3, 0.45])
    def test_farima_ma_recurrence(self, d):
        c = pl.expand_ma(pl.Farima(d), 200).values
        np.testing.assert_allclose(c, farima_c_oracle(d, 200), rtol=1e-14)

    @pytest.mark.parametrize("d", [0.1, 0.3, 0.45])
    def test_farima_ar_recurrence(self, d):
        a = pl.expand_ar(pl.Farima(d), 200).values
        np.testing.assert_allclose(a, farima_a_oracle(d, 200), rtol=1e-14)

    def test_farima_with_arma_factor_cauchy_oracle(self):
        m = pl.Farima(0.3, ar_poly=(1.0, -0.5), ma_poly=(1.0, 0.4))

        def h(z):
            return (1.0 - z) ** -0.3 * (1.0 + 0.4 * z) / (1.0 - 0.5 * z)
        c = pl.expand_ma(m, 40).values
        np.testing.assert_allclose(c, series_by_cauchy(h, 40), atol=1e-11)
        a = pl.expand_ar(m, 40).values
        np.testing.assert_allclose(a, series_by_cauchy(lambda z: -1.0 / h(z), 40),
                                   atol=1e-11)

    def test_ar1_closed_forms(self):
        c = pl.expand_ma(pl.Ar1(0.5), 10).values
        np.testing.assert_array_equal(c, 0.5 ** np.arange(11))
        a = pl.expand_ar(pl.Ar1(0.5), 10).values
        expected = np.zeros(11)
        expected[0], expected[1] = -1.0, 0.5
        np.testing.assert_array_equal(a, expected)

    def test_explicit_model_padding(self):
        m = pl.ExplicitModel(c=(2.0, 1.0), a=(-0.5, 0.25, -0.125))
        c = pl.expand_ma(m, 5).values
        np.testing.assert_array_equal(c, [2.0, 1.0, 0.0, 0.0, 0.0, 0.0])

    def test_ma_head_positive_enforced(self):
        seq = pl.expand_ma(pl.Farima(0.3), 5)
        assert seq.kind is pl.CoeffKind.MA
        assert seq[0] == 1.0
        assert seq.truncation_length == 5

    def test_negative_length_rejected(self):
        with pytest.raises(ValueError):
            pl.expand_ma(pl.Farima(0.3), -1)

    def test_decay_normalization_pair(self):
        # c_n n^{1-d} -> ell and a_n n^{1+d} pi/(d sin(pi d)) -> 1/ell
        d = 0.3
        m = pl.Farima(d)
        n = 1 << 16
        c = pl.expand_ma(m, n).values
        a = pl.expand_ar(m, n).values
        ell = pl.ell_estimate(m)
        c_side = c[n] * n ** (1.0 - d)
        a_side = a[n] * n ** (1.0 + d) * np.pi / (d * np.sin(np.pi * d))
        assert abs(c_side - ell) / ell < 1e-3
        assert abs(a_side - 1.0 / ell) * ell < 1e-3
        assert abs(c_side * a_side - 1.0) < 1e-3

    def test_ell_analytic_value(self):
        # for the plain fractional model, ell = 1/Gamma(d)
        d = 0.3
        assert abs(pl.ell_estimate(pl.Farima(d)) - 1.0 / Gamma(d)) < 1e-4


class TestAutocov:
    @pytest.mark.parametrize("d", [0.1, 0.25, 0.4])
    def test_farima_gamma_ratio_oracle(self, d):
        got = pl.autocov(pl.Farima(d), 128)
        np.testing.assert_allclose(got.values, farima_gamma_oracle(d, 128),
                                   atol=5e-9)
        # the reported bound is deliberately conservative; the 5e-9 check
        # above pins the actual accuracy
        assert got.tail_estimate < 1e-5

    def test_ar1_closed_form(self):
        r = 0.5
        got = pl.autocov(pl.Ar1(r), 10).values
        expected = r ** np.arange(11) / (1.0 - r * r)
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_white_noise(self):
        got = pl.autocov(pl.Farima(0.0), 4).values
        np.testing.assert_allclose(got, [1.0, 0.0, 0.0, 0.0, 0.0], atol=1e-15)

    def test_tolerance_gate(self):
        with pytest.raises(pl.TruncationError) as err:
            pl.autocov(pl.Farima(0.4), 16, M=4096, tol=1e-12)
        assert err.value.achieved > 1e-12

    def test_degenerate_sequences_rejected(self):
        with pytest.raises(DegeneracyError):
            pl.AutocovSeq(np.array([0.0, 0.0]))
        with pytest.raises(DegeneracyError):
            pl.AutocovSeq(np.array([1.0, 2.0]))
        with pytest.raises(DegeneracyError):
            pl.AutocovSeq(np.array([1.0, 1.0, 1.0]))


class TestInfinitePredictor:
    def test_phi_is_scaled_ar(self):
        m = pl.Farima(0.3)
        c = pl.expand_ma(m, 0)
        a = pl.expand_ar(m, 50)
        phi = pl.infinite_predictor(c, a, 50)
        np.testing.assert_array_equal(phi, c[0] * a.values[1:])

    def test_ar1_phi(self):
        phi = pl.phi_for_model(pl.Ar1(0.5), 5)
        np.testing.assert_array_equal(phi, [0.5, 0.0, 0.0, 0.0, 0.0])

    def test_short_ar_sequence_rejected(self):
        m = pl.Farima(0.3)
        with pytest.raises(ValueError):
            pl.infinite_predictor(pl.expand_ma(m, 0), pl.expand_ar(m, 5), 10)

    def test_tail_sum_against_direct_summation(self):
        d = 0.3
        N = 1 << 20
        phi = pl.phi_for_model(pl.Farima(d), N)
        # restore the analytic remainder beyond N onto the direct sum as well
        direct = np.sum(np.abs(phi[100:])) + abs(phi[-1]) * (N / d - 0.5)
        got = pl.tail_sum_phi(phi[:1 << 17], 100, d)
        assert abs(got - direct) / direct < 5e-3

    def test_tail_sum_decay_shape(self):
        # tail(n) ~ C n^{-d}: check the log-log slope over a decade
        d = 0.3
        phi = pl.phi_for_model(pl.Farima(d), 1 << 17)
        t100 = pl.tail_sum_phi(phi, 100, d)
        t1000 = pl.tail_sum_phi(phi, 1000, d)
        slope = np.log(t1000 / t100) / np.log(10.0)
        assert abs(slope + d) < 0.02

    def test_tail_sum_short_memory_exact(self):
        phi = np.array([0.5, 0.25, 0.125])
        assert pl.tail_sum_phi(phi, 1) == pytest.approx(0.375)


@settings(deadline=None, max_examples=40)
@given(any_model())
def test_convolution_identity(model):
    # c * a must reproduce the defining inverse-series identity -delta_0;
    # an explicitly given finite pair carries it only on its common range
    c = pl.expand_ma(model, 64).values
    a = pl.expand_ar(model, 64).values
    conv = np.convolve(c, a)[:65]
    if isinstance(model, pl.ExplicitModel):
        n_check = min(len(model.c), len(model.a))
    else:
        n_check = 65
    expected = np.zeros(n_check)
    expected[0] = -1.0
    np.testing.assert_allclose(conv[:n_check], expected, atol=1e-10)
