"""Identification pipeline: regression, principal log, field recovery and ground truth."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from koopman.dynamics import builtin_system, eval_field, sample_snapshots
from koopman.errors import MissingStateObservable, NotInvariant, ShapeMismatch
from koopman.identification import (
    GeneratorEstimate,
    eigenvalue_lattice,
    estimate_koopman,
    field_coefficients,
    identify,
    predict,
    recover_field,
    spectrum_contains_sums,
    true_generator_matrix,
)
from koopman.linalg import mat_exp, spectrum_of
from koopman.metrics import nrmse
from koopman.observables import Dictionary, Monomial, build_dictionary, custom_dictionary, lift

SEED = 11
UNIT_BOX = ((-1.0, 1.0), (-1.0, 1.0))
SYS1_FIELD = np.array([[0.1, 3.0], [-3.0, 0.1]])


class TestBelowCriticalPeriod:
    def test_exact_recovery(self, sys1, sys1_snapshots, linear_dictionary):
        result = identify(sys1_snapshots[0.5], linear_dictionary)
        assert_allclose(result.field.w, SYS1_FIELD, atol=1e-6)
        assert np.linalg.norm(result.generator.L_hat - sys1.known_generator.matrix) < 1e-6
        assert nrmse(result.field, field_coefficients(sys1, linear_dictionary)) < 1e-6

    def test_regression_is_exact(self, sys1_snapshots, linear_dictionary):
        result = identify(sys1_snapshots[0.5], linear_dictionary)
        assert result.koopman.residual < 1e-10
        assert result.koopman.numerically_invariant
        assert_allclose(result.koopman.U_hat, mat_exp(SYS1_FIELD, 0.5).T, atol=1e-9)


class TestAboveCriticalPeriod:
    def test_spectrum_wraps(self, sys1_snapshots, linear_dictionary):
        result = identify(sys1_snapshots[1.1], linear_dictionary)
        wrapped = 3.0 - 2 * math.pi / 1.1
        spectrum = result.generator.spectrum.as_array()
        assert_allclose(np.sort_complex(spectrum), np.sort_complex([0.1 + wrapped * 1j, 0.1 - wrapped * 1j]), atol=1e-6)
        assert result.generator.max_abs_imag == pytest.approx(2.7120, abs=1e-4)

    def test_field_is_wrong_but_flow_is_right(self, sys1, sys1_snapshots, linear_dictionary):
        result = identify(sys1_snapshots[1.1], linear_dictionary)
        assert nrmse(result.field, field_coefficients(sys1, linear_dictionary)) > 0.1
        # the alias reproduces the sampled map exactly
        assert_allclose(mat_exp(result.generator.L_hat, 1.1), mat_exp(sys1.known_generator.matrix, 1.1), atol=1e-9)


class TestRealSpectrum:
    @pytest.mark.parametrize("T_s", [0.5, 1.1, 2.8])
    def test_invariant_dictionary_is_immune(self, sys4, triangular_dictionary, T_s):
        snaps = sample_snapshots(sys4, 200, 10, T_s, UNIT_BOX, SEED)
        result = identify(snaps, triangular_dictionary)
        assert result.koopman.residual < 1e-8
        assert nrmse(result.field, field_coefficients(sys4, triangular_dictionary)) < 1e-6


class TestEigenfunctionProducts:
    def test_quadratic_dictionary_contains_sums(self, sys1):
        snaps = sample_snapshots(sys1, 200, 10, 0.1, UNIT_BOX, SEED)
        result = identify(snaps, build_dictionary(2, 2))
        spectrum = result.generator.spectrum.as_array()
        for target in (0.2, 0.2 + 6j, 0.2 - 6j):
            assert np.min(np.abs(spectrum - target)) < 1e-5
        assert spectrum_contains_sums(result.generator, [0.1 + 3j, 0.1 - 3j], m=2)

    def test_lattice(self):
        assert -2.0 in eigenvalue_lattice([-1.0], 2)
        lattice = eigenvalue_lattice([0.1 + 3j, 0.1 - 3j], 2)
        assert len(lattice) == 5
        assert np.min(np.abs(lattice - 0.2)) < 1e-12

    def test_lattice_empty(self):
        assert eigenvalue_lattice([], 3).size == 0


class TestKoopmanLinearity:
    @pytest.mark.parametrize("T_s", [0.5, 1.1])
    def test_sys1_lifted_pairs_are_linear(self, sys1_snapshots, linear_dictionary, T_s):
        data = lift(sys1_snapshots[T_s], linear_dictionary)
        U = estimate_koopman(data).U_hat
        gap = np.linalg.norm(data.Y_lift - data.X_lift @ U) / np.linalg.norm(data.Y_lift)
        assert gap < 1e-9

    def test_sys4_lifted_pairs_are_linear(self, sys4, triangular_dictionary):
        snapshots = sample_snapshots(sys4, 100, 5, 0.7, UNIT_BOX, SEED)
        data = lift(snapshots, triangular_dictionary)
        U = estimate_koopman(data).U_hat
        gap = np.linalg.norm(data.Y_lift - data.X_lift @ U) / np.linalg.norm(data.Y_lift)
        assert gap < 1e-9
        assert_allclose(U, mat_exp(sys4.known_generator.matrix, 0.7), atol=1e-8)


class TestGroundTruth:
    def test_sys4_generator(self, sys4, triangular_dictionary):
        truth = true_generator_matrix(sys4, triangular_dictionary)
        assert_allclose(truth.L_hat, sys4.known_generator.matrix)
        assert_allclose(np.sort(truth.spectrum.as_array().real), [-2.0, -1.0, -1.0])
        assert truth.provenance == "true"

    def test_sys4_field_coefficients(self, sys4, triangular_dictionary):
        w = field_coefficients(sys4, triangular_dictionary).w
        assert_allclose(w, [[-1.0, 0.0, 0.0], [0.0, -1.0, 1.0]])

    def test_recovered_field_matches_coefficients(self, sys4, triangular_dictionary):
        field = recover_field(true_generator_matrix(sys4, triangular_dictionary))
        assert_allclose(field.w, field_coefficients(sys4, triangular_dictionary).w)

    @pytest.mark.parametrize("name, basis", [
        ("sys1", ["x1", "x2"]),
        ("sys4", ["x1", "x2", "x1^2"]),
        ("rod", ["x1", "x2"]),
    ])
    def test_reconstruction_reproduces_field(self, rng, name, basis):
        sys = builtin_system(name)
        dictionary = custom_dictionary(basis, 2)
        field = recover_field(true_generator_matrix(sys, dictionary))
        X = rng.uniform(-1.0, 1.0, size=(100, 2))
        expected = np.stack([eval_field(sys, x) for x in X])
        assert_allclose(field.evaluate(X), expected, atol=1e-9)

    def test_rational_generator_checked_numerically(self):
        # x1^2 in f2 has no exact representation over monomials of degree 1 and rationals
        sys = builtin_system("sys4")
        with pytest.raises(NotInvariant):
            true_generator_matrix(sys, build_dictionary(2, 1, rational_cap=2))

    def test_linear_dictionary_not_invariant_for_sys4(self, sys4, linear_dictionary):
        with pytest.raises(NotInvariant) as excinfo:
            true_generator_matrix(sys4, linear_dictionary)
        assert excinfo.value.context["basis"] == "x2"

    def test_missing_term(self, sys4, linear_dictionary):
        with pytest.raises(NotInvariant):
            field_coefficients(sys4, linear_dictionary)

    def test_dimension_mismatch(self, sys1):
        with pytest.raises(ShapeMismatch):
            field_coefficients(sys1, build_dictionary(3, 1))

    def test_sys5_field_in_rational_dictionary(self):
        sys5 = builtin_system("sys5")
        d = build_dictionary(2, 1, rational_cap=2)
        field = field_coefficients(sys5, d)
        X = np.array([[0.3, -0.4], [0.9, 0.2]])
        assert_allclose(field.evaluate(X), sys5.evaluate(X))


class TestRecoverField:
    def test_reads_state_columns(self, rng):
        d = build_dictionary(2, 2)
        L = rng.normal(size=(5, 5))
        generator = GeneratorEstimate(L, spectrum_of(L), 0.5, d, "identified")
        w = recover_field(generator).w
        for k, col in enumerate(d.state_indices):
            assert_allclose(w[k], L[:, col])

    def test_missing_coordinate(self):
        d = Dictionary(2, (Monomial((1, 0)), Monomial((2, 0))), (0, -1), 2)
        generator = GeneratorEstimate(np.eye(2), spectrum_of(np.eye(2)), 0.5, d, "identified")
        with pytest.raises(MissingStateObservable):
            recover_field(generator)


class TestRegression:
    def test_underdetermined_warns(self, sys1, caplog):
        snaps = sample_snapshots(sys1, 2, 1, 0.5, UNIT_BOX, SEED)
        estimate_koopman(lift(snaps, build_dictionary(2, 2)))
        assert "fewer snapshots" in caplog.text


class TestPredict:
    def test_identified_field_reproduces_trajectory(self, sys1, sys1_snapshots, linear_dictionary):
        result = identify(sys1_snapshots[0.5], linear_dictionary)
        times, states = predict(result.field, [0.5, 0.5], 2.0, 10.0)
        assert times.shape == (21,)
        exact = np.stack([mat_exp(SYS1_FIELD, t) @ np.array([0.5, 0.5]) for t in times])
        assert_allclose(states, exact, atol=1e-6)
