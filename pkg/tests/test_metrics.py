"""NRMSE, DFT and spectral error."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from koopman.errors import AllZeroTruth, ShapeMismatch
from koopman.identification import FieldCoefficients, field_coefficients, identify
from koopman.metrics import SweepRow, dft, nrmse, rmse, spectral_error
from koopman.observables import build_dictionary


class TestNrmse:
    def test_hand_example(self):
        assert rmse([[2.0, 1.0]], [[2.0, 0.0]]) == pytest.approx(math.sqrt(0.5))
        assert nrmse([[2.0, 1.0]], [[2.0, 0.0]]) == pytest.approx(math.sqrt(0.5) / 2, abs=1e-4)
        assert nrmse([[2.0, 1.0]], [[2.0, 0.0]]) == pytest.approx(0.3536, abs=1e-4)

    def test_identical(self, rng):
        w = rng.normal(size=(2, 5))
        assert nrmse(w, w) == 0.0

    def test_scale_covariance(self, rng):
        w = rng.normal(size=(3, 6))
        w_hat = w + 0.1 * rng.normal(size=w.shape)
        base = nrmse(w_hat, w)
        for c in (0.01, 3.0, 1e4):
            assert nrmse(c * w_hat, c * w) == pytest.approx(base, rel=1e-12)

    def test_all_zero_truth(self):
        with pytest.raises(AllZeroTruth):
            nrmse([[1.0, 0.0]], [[0.0, 1e-13]])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            nrmse([[1.0, 2.0, 3.0]], [[1.0, 2.0]])

    def test_accepts_field_coefficients(self, linear_dictionary):
        truth = FieldCoefficients(np.array([[0.1, 3.0], [-3.0, 0.1]]), linear_dictionary)
        assert nrmse(truth, truth) == 0.0


class TestDft:
    def test_constant(self):
        assert_allclose(dft([2.5, 2.5, 2.5, 2.5]), [10.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_impulse(self):
        assert_allclose(dft([1.0] + [0.0] * 7), np.ones(8), atol=1e-12)

    def test_cosine_bins(self):
        t = np.arange(500) / 100.0
        spectrum = np.abs(dft(np.cos(2 * math.pi * 5 * t)))
        peaks = sorted(np.argsort(spectrum)[-2:])
        assert peaks == [25, 475]

    def test_parseval_and_inverse(self, rng):
        x = rng.normal(size=257)
        P = dft(x)
        assert np.sum(x ** 2) == pytest.approx(np.sum(np.abs(P) ** 2) / x.size, abs=1e-10)
        assert_allclose(np.fft.ifft(P).real, x, atol=1e-10)

    def test_empty(self):
        with pytest.raises(ShapeMismatch):
            dft([])


class TestSpectralError:
    def test_true_coefficients(self, sys1, linear_dictionary):
        error = spectral_error(sys1, field_coefficients(sys1, linear_dictionary))
        assert error.shape == (2,)
        assert np.all(error < 1e-12)

    def test_step_across_critical_period(self, sys1, sys1_snapshots, linear_dictionary):
        below = spectral_error(sys1, identify(sys1_snapshots[0.5], linear_dictionary).field)
        above = spectral_error(sys1, identify(sys1_snapshots[1.1], linear_dictionary).field)
        assert np.all(below < 1e-6)
        assert np.all(above > 1e3 * below)

    def test_divergent_field_scores_infinity(self, sys1):
        # x1' = x1^2 leaves any ball in finite time from x0 = (0.5, 0.5)
        d = build_dictionary(2, 2)
        w = np.zeros((2, len(d)))
        w[0, d.labels.index("x1^2")] = 50.0
        error = spectral_error(sys1, FieldCoefficients(w, d))
        assert np.all(np.isinf(error))


class TestSweepRow:
    def test_failed_row(self):
        row = SweepRow.failed(1.2, "m=1", "BranchCut", beyond_critical=True)
        assert not row.ok
        assert math.isnan(row.nrmse)
        assert row.to_dict()["status"] == "BranchCut"
