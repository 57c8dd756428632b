"""Dictionary construction, labels and lifting."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from koopman.dynamics import SnapshotSet
from koopman.errors import ConfigError, DuplicateBasis, MissingStateObservable, PoleHit, ShapeMismatch
from koopman.observables import (
    Monomial,
    Rational,
    build_dictionary,
    custom_dictionary,
    evaluate_dictionary,
    gradient_matrix,
    lift,
    parse_basis,
)


def _snapshots(x_pre, x_post, T_s=0.5):
    x_pre = np.asarray(x_pre, dtype=float)
    box = tuple((-1.0, 1.0) for _ in range(x_pre.shape[1]))
    return SnapshotSet(x_pre, np.asarray(x_post, dtype=float), T_s, 0, box, len(x_pre), 1)


class TestBuild:
    def test_graded_lex_order(self):
        assert build_dictionary(2, 2).labels == ["x1", "x2", "x1^2", "x1*x2", "x2^2"]

    def test_constant_comes_first(self):
        d = build_dictionary(2, 1, include_constant=True)
        assert d.labels == ["1", "x1", "x2"]
        assert d.state_indices == (1, 2)

    def test_cubic_count(self):
        assert len(build_dictionary(2, 3)) == 9
        assert len(build_dictionary(3, 2)) == 9

    def test_rational_block(self):
        d = build_dictionary(2, 1, rational_cap=2)
        assert len(d) == 10
        assert d.labels[2:6] == ["x1/(1+x1)", "x2/(1+x1)", "x1/(1+x2)", "x2/(1+x2)"]
        assert d.labels[-1] == "x2/(1+x2^2)"
        assert d.label == "m=1,P=2"

    def test_labels(self):
        assert build_dictionary(2, 3).label == "m=3"
        assert custom_dictionary(["x1", "x2", "x1^2"], 2).label == "{x1,x2,x1^2}"

    @pytest.mark.parametrize("n, m, P", [(0, 1, None), (2, 0, None), (2, 1, 0)])
    def test_invalid(self, n, m, P):
        with pytest.raises(ConfigError):
            build_dictionary(n, m, rational_cap=P)


class TestLabels:
    def test_round_trip(self):
        d = build_dictionary(3, 3, include_constant=True, rational_cap=2)
        assert [parse_basis(label, 3) for label in d.labels] == list(d.basis)

    def test_parse_forms(self):
        assert parse_basis("x1^2*x2", 2) == Monomial((2, 1))
        assert parse_basis("x2 / (1 + x1^3)", 2) == Rational(2, 1, 0, 3)
        assert parse_basis("1", 3) == Monomial((0, 0, 0))

    @pytest.mark.parametrize("label", ["y1", "x3", "x1/(1+x3)", "x1^"])
    def test_parse_errors(self, label):
        with pytest.raises(ConfigError):
            parse_basis(label, 2)


class TestCustom:
    def test_state_indices_follow_order(self):
        d = custom_dictionary(["x1^2", "x2", "x1"], 2)
        assert d.state_indices == (2, 1)
        assert d.degree == 2

    def test_duplicate(self):
        with pytest.raises(DuplicateBasis):
            custom_dictionary(["x1", "x2", "x1"], 2)

    def test_missing_coordinate(self):
        with pytest.raises(MissingStateObservable):
            custom_dictionary(["x1", "x1^2"], 2)

    def test_dimension_from_monomials(self):
        d = custom_dictionary([Monomial((1, 0)), Monomial((0, 1)), Rational(2, 0, 1, 2)])
        assert d.n == 2
        assert d.rational_cap == 2


class TestEvaluate:
    def test_rational_value(self):
        d = custom_dictionary(["x1", "x2", "x2/(1+x2^2)"], 2)
        assert_allclose(evaluate_dictionary(d, [0.0, 1.0]), [0.0, 1.0, 0.5])

    def test_monomial_values(self):
        d = build_dictionary(2, 2, include_constant=True)
        assert_allclose(evaluate_dictionary(d, [2.0, 3.0]), [1.0, 2.0, 3.0, 4.0, 6.0, 9.0])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            build_dictionary(2, 1).evaluate(np.zeros((4, 3)))

    def test_monomial_gradient(self):
        grad = Monomial((2, 1)).gradient(np.array([[2.0, 3.0]]))
        assert_allclose(grad, [[12.0, 4.0]])

    def test_rational_gradient_matches_finite_differences(self, rng):
        fn = Rational(2, 0, 1, 2)
        h = 1e-6
        X = rng.uniform(-1, 1, size=(8, 2))
        grad = fn.gradient(X)
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            fd = (fn.evaluate(X + e) - fn.evaluate(X - e)) / (2 * h)
            assert_allclose(grad[:, j], fd, atol=1e-6)

    def test_gradient_matrix_combines_rows(self):
        d = build_dictionary(2, 2)
        X = np.array([[1.0, 2.0], [0.5, -1.0]])
        # phi = x1 + x1*x2
        coeffs = [[1.0, 0.0, 0.0, 1.0, 0.0]]
        G = gradient_matrix(d, X, coeffs)
        assert G.shape == (2, 1, 2)
        assert_allclose(G[:, 0, :], [[3.0, 1.0], [0.0, 0.5]])

    def test_gradient_matrix_shape_check(self):
        with pytest.raises(ShapeMismatch):
            gradient_matrix(build_dictionary(2, 1), np.zeros((1, 2)), [[1.0, 0.0, 0.0]])


class TestLift:
    def test_rows_are_dictionary_values(self):
        d = build_dictionary(2, 2)
        snaps = _snapshots([[1.0, 2.0], [0.0, -1.0]], [[2.0, 1.0], [1.0, 1.0]])
        lifted = lift(snaps, d)
        assert lifted.X_lift.shape == (2, 5)
        assert_allclose(lifted.X_lift[0], [1.0, 2.0, 1.0, 2.0, 4.0])
        assert_allclose(lifted.Y_lift[1], [1.0, 1.0, 1.0, 1.0, 1.0])
        assert lifted.T_s == 0.5

    def test_pole_reports_pair(self):
        d = build_dictionary(1, 1, rational_cap=1)
        snaps = _snapshots([[0.2], [-1.0]], [[0.1], [0.3]])
        with pytest.raises(PoleHit) as excinfo:
            lift(snaps, d)
        assert excinfo.value.context["pair"] == 1
