import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from ser.audio_io import AudioSignal
from ser.dsp import PreprocessConfig
from ser.errors import LagTooLarge, NonFiniteFeature, NumericalBreakdown
from ser.lpc import (
    LpcConfig,
    autocorrelate,
    concat_features,
    extract_features,
    levinson_durbin,
    lpc_features,
    lpc_frames,
)
from ser.mfcc import MfccConfig


def random_pd_autocorr(rng, order):
    """Autocorrelation of a random finite sequence is positive definite."""
    x = rng.normal(size=order * 4 + 10)
    return np.array([x[k:] @ x[: len(x) - k] for k in range(order + 1)])


def dense_solve(r, order):
    R = scipy.linalg.toeplitz(r[:order])
    return scipy.linalg.solve(R, r[1: order + 1], assume_a="pos")


class TestAutocorrelate:
    def test_examples(self):
        np.testing.assert_array_equal(autocorrelate([1, 1, 1], 2), [3, 2, 1])
        np.testing.assert_array_equal(autocorrelate(np.zeros(5), 3), 0)

    def test_lag_too_large(self):
        with pytest.raises(LagTooLarge):
            autocorrelate([1, 2, 3], 3)

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=25)
    def test_matches_numpy_correlate(self, seed):
        x = np.random.default_rng(seed).normal(size=50)
        full = np.correlate(x, x, mode="full")[49:]
        np.testing.assert_allclose(autocorrelate(x, 10), full[:11], atol=1e-10)
        assert np.all(np.abs(autocorrelate(x, 10)) <= autocorrelate(x, 0)[0] + 1e-12)


class TestLevinson:
    def test_order_one_closed_form(self):
        res = levinson_durbin([1.0, 0.5], 1)
        assert res.coeffs[0] == pytest.approx(0.5)
        assert res.error_power == pytest.approx(0.75)

    @pytest.mark.parametrize("order", range(1, 21))
    def test_matches_dense_toeplitz(self, order):
        rng = np.random.default_rng(order)
        for _ in range(5):
            r = random_pd_autocorr(rng, order)
            np.testing.assert_allclose(levinson_durbin(r, order).coeffs, dense_solve(r, order), atol=1e-8)

    def test_error_power_identity_and_monotone(self):
        r = random_pd_autocorr(np.random.default_rng(9), 12)
        errs = [levinson_durbin(r, m).error_power for m in range(1, 13)]
        assert np.all(np.diff(errs) <= 1e-12)
        res = levinson_durbin(r, 12)
        assert res.error_power == pytest.approx(r[0] - res.coeffs @ r[1:13])
        assert np.all(np.abs(res.reflection) < 1)

    def test_ar1_recovery(self):
        rng = np.random.default_rng(0)
        e = rng.normal(size=16000)
        x = np.zeros(16000)
        for n in range(1, 16000):
            x[n] = 0.9 * x[n - 1] + e[n]
        r = autocorrelate(x, 1)
        a1 = levinson_durbin(r, 1).coeffs[0]
        assert a1 == pytest.approx(0.9, abs=0.02)
        assert a1 == pytest.approx(dense_solve(r, 1)[0], abs=1e-12)

    def test_white_noise_small_coefficients(self):
        rng = np.random.default_rng(1)
        worst = [np.abs(levinson_durbin(autocorrelate(rng.normal(size=800), 4), 4).coeffs).max()
                 for _ in range(100)]
        assert np.mean(np.array(worst) < 0.1) >= 0.95

    def test_zero_energy(self):
        res = levinson_durbin(np.zeros(5), 4)
        np.testing.assert_array_equal(res.coeffs, 0)

    def test_breakdown(self):
        with pytest.raises(NumericalBreakdown):
            levinson_durbin([1.0, 1.0], 1)

    def test_insufficient_lags(self):
        with pytest.raises(LagTooLarge):
            levinson_durbin([1.0, 0.2], 3)


class TestFeatureVector:
    pre = PreprocessConfig()

    def _sig(self, n=16000, seed=0):
        return AudioSignal(np.random.default_rng(seed).normal(size=n) * 0.1, 16000)

    def test_default_length(self):
        assert LpcConfig().dim == 743
        assert lpc_features(self._sig(), self.pre, LpcConfig()).shape == (743,)

    def test_header_is_error_stats(self):
        cfg = LpcConfig()
        coeffs, errs = lpc_frames(self._sig(), self.pre, cfg)
        v = lpc_features(self._sig(), self.pre, cfg)
        assert v[0] == pytest.approx(errs.mean()) and v[1] == pytest.approx(errs.std())
        assert coeffs.shape[1] == 13

    def test_gain_and_no_header(self):
        cfg = LpcConfig(include_gain=True, error_header=False)
        assert lpc_features(self._sig(), self.pre, cfg).shape == (14 * 57,)

    def test_silent_signal(self):
        v = lpc_features(AudioSignal(np.zeros(8000), 16000), self.pre, LpcConfig())
        np.testing.assert_array_equal(v, 0)

    def test_concat_and_disabled_stage(self):
        m, l = np.ones(216), np.zeros(743)
        assert concat_features(m, l).values.shape == (959,)
        np.testing.assert_array_equal(concat_features(m, np.empty(0)).values, m)

    def test_nan_rejected(self):
        with pytest.raises(NonFiniteFeature):
            concat_features([1.0, np.nan], [0.0])

    def test_extract_full_width(self):
        fv = extract_features(self._sig(), self.pre, MfccConfig(), LpcConfig())
        assert fv.values.shape == (959,)
        only_mfcc = extract_features(self._sig(), self.pre, MfccConfig(), None)
        assert only_mfcc.values.shape == (216,)
