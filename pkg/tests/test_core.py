import itertools
import json
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from jsrholder import (BudgetExceededError, InvalidInputError, MatrixSet, balanced_hull,
                       enumerate_products, hausdorff_distance, operator_norm, scale,
                       spectral_radius)
from jsrholder.core import (Ball, InflatedSet, dumps, loads, matrixset_from_dict,
                            product_budget, word_product)

from conftest import JORDAN_HALF, NILPOTENT, LOWER_UNIT


def rho_oracle(A):
    """Spectral radius from the roots of the characteristic polynomial."""
    return max(abs(np.roots(np.poly(A))))


def norm2_oracle(A):
    return np.sqrt(np.linalg.eigvalsh(A.conj().T @ A).max())


small = arrays(np.float64, (3, 3), elements=st.floats(-5, 5, allow_nan=False, width=64))


class TestSpectralRadius:
    def test_examples(self):
        assert spectral_radius(np.eye(2)) == 1.0
        assert spectral_radius(JORDAN_HALF) == pytest.approx(0.5, rel=1e-12)
        assert spectral_radius([[0, 1], [0.25, 0]]) == pytest.approx(0.5, rel=1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            spectral_radius([[np.nan, 0], [0, 1]])
        with pytest.raises(InvalidInputError):
            spectral_radius(np.ones((2, 3)))

    @pytest.mark.parametrize("d", range(1, 9))
    def test_against_characteristic_polynomial(self, d):
        rng = np.random.default_rng(d)
        for _ in range(10):
            A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            assert spectral_radius(A) == pytest.approx(rho_oracle(A), rel=1e-8)

    @given(small)
    def test_bounded_by_norm(self, A):
        assert spectral_radius(A) <= operator_norm(A) * (1 + 1e-9) + 1e-300


class TestOperatorNorm:
    def test_examples(self):
        assert operator_norm(np.eye(2)) == 1.0
        assert operator_norm(NILPOTENT, "frobenius") == 1.0
        assert operator_norm(JORDAN_HALF) == pytest.approx(1.2071067811865475, rel=1e-12)

    def test_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            A = rng.normal(size=(4, 4))
            assert operator_norm(A) == pytest.approx(norm2_oracle(A), rel=1e-10)
            assert operator_norm(A, "frobenius") == pytest.approx(np.sqrt((A**2).sum()))

    def test_unknown(self):
        with pytest.raises(InvalidInputError):
            operator_norm(np.eye(2), "nuclear")


class TestMatrixSet:
    def test_deduplicates_exact(self):
        M = MatrixSet([np.eye(2), np.eye(2), np.eye(2) * (1 + 1e-16)])
        assert len(M) == 1
        M = MatrixSet([np.eye(2), np.eye(2) + 1e-15])
        assert len(M) == 2

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            MatrixSet([])
        with pytest.raises(InvalidInputError):
            MatrixSet([np.eye(2), np.eye(3)])

    def test_immutable(self):
        M = MatrixSet([np.eye(2)])
        with pytest.raises(ValueError):
            M.members[0][0, 0] = 5

    def test_json_roundtrip(self):
        M = MatrixSet([JORDAN_HALF, np.array([[1j, 0], [0, 2]])], label="demo")
        N = loads(dumps(M))
        assert N == M and N.label == "demo"
        assert matrixset_from_dict({"d": 2, "matrices": [[[1, 0], [0, 1]]]}) == MatrixSet([np.eye(2)])

    @pytest.mark.parametrize("text", ["{bad", '{"d": 2}', '{"d": 2, "matrices": [[[1, 2]]]}',
                                      '{"d": 0, "matrices": []}'])
    def test_json_errors(self, text):
        with pytest.raises(InvalidInputError):
            loads(text)


class TestHausdorff:
    def test_examples(self):
        A = JORDAN_HALF
        assert hausdorff_distance(MatrixSet([A]), MatrixSet([A])) == 0
        assert hausdorff_distance(MatrixSet([np.zeros((2, 2))]), MatrixSet([A])) == pytest.approx(
            norm2_oracle(A))
        E = np.array([[0.3, 0], [0, 0]])
        assert hausdorff_distance(MatrixSet([A]), MatrixSet([A, A + E])) == pytest.approx(0.3)

    def test_metric_properties(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            X, Y, Z = (MatrixSet(list(rng.normal(size=(rng.integers(1, 4), 2, 2)))) for _ in range(3))
            assert hausdorff_distance(X, Y) == hausdorff_distance(Y, X)
            assert hausdorff_distance(X, Z) <= hausdorff_distance(X, Y) + hausdorff_distance(Y, Z) + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            hausdorff_distance(MatrixSet([np.eye(2)]), MatrixSet([np.eye(3)]))


class TestEnumeration:
    def test_cardinality_and_order(self, rank_one_pair):
        items = list(enumerate_products(rank_one_pair, 3))
        assert len(items) == 8
        words = [w for w, _ in enumerate_products(rank_one_pair, 2)]
        assert words == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_nilpotent_square(self, nilpotent):
        [(w, P)] = list(enumerate_products(nilpotent, 2))
        assert w == (0, 0) and not np.any(P)

    def test_right_to_left_products(self):
        rng = np.random.default_rng(2)
        M = MatrixSet(list(rng.normal(size=(3, 3, 3))))
        for word, P in enumerate_products(M, 3):
            expected = reduce(lambda acc, i: M.members[i] @ acc, word, np.eye(3))
            np.testing.assert_allclose(P, expected, rtol=1e-12, atol=1e-12)
            assert np.allclose(P, word_product(M, word), rtol=1e-12)

    def test_extension_reassociation(self):
        rng = np.random.default_rng(3)
        M = MatrixSet(list(rng.normal(size=(2, 2, 2))))
        prev = dict(enumerate_products(M, 2))
        for word, P in enumerate_products(M, 3):
            np.testing.assert_allclose(P, M.members[word[-1]] @ prev[word[:-1]], rtol=1e-12)

    def test_budget(self, rank_one_pair, monkeypatch):
        with pytest.raises(BudgetExceededError, match=r"\|M\|\^k"):
            list(enumerate_products(rank_one_pair, 5, budget=10))
        monkeypatch.setenv("JSR_BUDGET", "7")
        assert product_budget() == 7


class TestSetOperations:
    def test_balanced_hull(self):
        I = np.eye(2)
        assert balanced_hull(MatrixSet([I])) == MatrixSet([I, -I])
        A = JORDAN_HALF
        assert balanced_hull(MatrixSet([A, -A])) == MatrixSet([A, -A])
        rng = np.random.default_rng(4)
        M = MatrixSet(list(rng.normal(size=(2, 3, 3))))
        assert balanced_hull(balanced_hull(M)) == balanced_hull(M)

    def test_scale(self):
        assert scale(MatrixSet([np.eye(2)]), 2) == MatrixSet([2 * np.eye(2)])
        M = MatrixSet([JORDAN_HALF, NILPOTENT])
        assert scale(M, 1) == M
        with pytest.raises(InvalidInputError):
            scale(M, 0)

    def test_ball_and_inflated_set(self):
        ball = Ball(2, basis=(NILPOTENT, LOWER_UNIT))
        B = ball.normalize(np.ones((2, 2)))
        np.testing.assert_allclose(B, [[0, 1], [1, 0]])
        with pytest.raises(InvalidInputError):
            Ball(2, basis=(NILPOTENT, 2 * NILPOTENT))
        with pytest.raises(InvalidInputError):
            InflatedSet(MatrixSet([np.eye(2)]), -1.0, Ball(2))
        rng = np.random.default_rng(0)
        for S in Ball(3, norm="frobenius").sample(rng, 5):
            assert np.linalg.norm(S) == pytest.approx(1.0)


def test_two_by_two_norms_match_svd():
    from jsrholder.core import stack_norms
    rng = np.random.default_rng(11)
    S = rng.normal(size=(5000, 2, 2)) * 10.0 ** rng.uniform(-8, 8, size=(5000, 1, 1))
    S[:100, 1] = S[:100, 0] * rng.normal(size=(100, 1))  # rank one
    S[100:200] = np.eye(2) * rng.normal(size=(100, 1, 1))  # equal singular values
    ref = np.linalg.svd(S, compute_uv=False)[:, 0]
    np.testing.assert_allclose(stack_norms(S), ref, rtol=1e-14)
