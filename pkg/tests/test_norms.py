import numpy as np
import pytest

from jsrholder import (BlockNorm, MatrixSet, WeightedEuclidean, WeightedMax,
                       block_decompose, block_operator_bound, bracket, coordinate_flag,
                       diagonal_rescale, eccentricity, extremal_norm_approx, maximal_flag,
                       q_matrix, refined_bracket, upper_bound)
from jsrholder.errors import InvalidInputError
from jsrholder.norms import QuadraticNorm, sphere_samples

from conftest import JORDAN_HALF, random_pair


class TestBlockOperatorBound:
    def test_single_block_is_spectral_norm(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(3, 3))
        v = BlockNorm.euclidean(3)
        assert block_operator_bound(v, A) == pytest.approx(np.linalg.norm(A, 2))

    def test_scalar_blocks(self):
        v = BlockNorm.from_flag(coordinate_flag(2), [WeightedMax([1.0]), WeightedMax([1.0])])
        assert block_operator_bound(v, JORDAN_HALF) == pytest.approx(1.2071067811865475)
        assert block_operator_bound(v, np.zeros((2, 2))) == 0

    @pytest.mark.parametrize("seed", range(3))
    def test_dominance(self, seed):
        rng = np.random.default_rng(seed)
        d = 4
        U = np.linalg.qr(rng.normal(size=(d, d)))[0]
        comps = [WeightedEuclidean(rng.normal(size=(2, 2)) + 3 * np.eye(2)), WeightedMax([1.0, 2.5])]
        v = BlockNorm([U[:, :2], U[:, 2:]], comps)
        A = rng.normal(size=(d, d))
        bound = block_operator_bound(v, A)
        X = rng.normal(size=(d, 1000)) + 1j * rng.normal(size=(d, 1000))
        X = X / v(X)
        assert np.all(v(A @ X) <= bound + 1e-9)

    def test_norm_axioms(self):
        rng = np.random.default_rng(3)
        U = np.linalg.qr(rng.normal(size=(3, 3)))[0]
        v = BlockNorm([U[:, :1], U[:, 1:]], [WeightedMax([2.0]), WeightedEuclidean(np.diag([1.0, 3.0]))])
        for _ in range(200):
            x, y = rng.normal(size=3), rng.normal(size=3)
            c = rng.normal()
            assert v(x) > 0
            assert v(c * x) == pytest.approx(abs(c) * v(x))
            assert v(x + y) <= v(x) + v(y) + 1e-10


class TestEccentricity:
    def test_euclidean_blocks(self):
        est = eccentricity(BlockNorm([np.eye(3)[:, :1], np.eye(3)[:, 1:]]))
        lo, hi = est.ecc_bracket
        assert lo <= 1.0 <= hi and hi - lo <= 1e-9

    def test_scaled_single_block(self):
        est = eccentricity(BlockNorm([np.eye(2)], [WeightedEuclidean(2 * np.eye(2))]))
        assert est.c_minus_lower == pytest.approx(2) and est.c_plus_upper == pytest.approx(2)
        assert est.ecc_bracket == pytest.approx((1.0, 1.0))

    def test_blocks_with_ecc_one_and_three(self):
        v = BlockNorm([np.eye(3)[:, :1], np.eye(3)[:, 1:]],
                      [WeightedEuclidean.identity(1), WeightedEuclidean(np.diag([1.0, 3.0]))])
        lo, hi = eccentricity(v).ecc_bracket
        assert lo <= 3.0 <= hi and hi - lo <= 1e-9

    def test_weighted_max_bracket(self):
        # c^- of max(|x|, 3|y|) on the circle: equalize |x| = 3|y|
        est = eccentricity(BlockNorm([np.eye(2)], [WeightedMax([1.0, 3.0])]))
        cm = 1 / np.sqrt(1 + 1 / 9)
        assert est.c_minus_lower == pytest.approx(cm) and est.c_plus_upper == pytest.approx(3)
        lo, hi = est.ecc_bracket
        assert lo <= 3 / cm <= hi

    def test_sphere_samples(self):
        X = sphere_samples(3, 100, seed=1)
        np.testing.assert_allclose(np.linalg.norm(X, axis=0), 1.0)


class TestExtremalNorm:
    def test_normal_matrix_gives_euclidean(self):
        rng = np.random.default_rng(4)
        Q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
        A = Q @ np.diag([0.9, -0.5, 0.3]) @ Q.T
        v = extremal_norm_approx(MatrixSet([A]), 0.9, 5)
        X = rng.normal(size=(3, 50))
        np.testing.assert_allclose(v(X), np.linalg.norm(X, axis=0), rtol=1e-12)

    def test_rank_one_pair_upper(self, rank_one_pair):
        v = extremal_norm_approx(rank_one_pair, 1.0, 4)
        assert upper_bound(rank_one_pair, 4, v) == pytest.approx(1.0, abs=1e-9)

    def test_depth_zero_and_monotone(self):
        rng = np.random.default_rng(5)
        M = random_pair(rng)
        X = rng.normal(size=(2, 100))
        np.testing.assert_allclose(extremal_norm_approx(M, 1.0, 0)(X), np.linalg.norm(X, axis=0))
        for K in range(4):
            assert np.all(extremal_norm_approx(M, 1.3, K + 1)(X) >= extremal_norm_approx(M, 1.3, K)(X))

    def test_sound_member_bound(self):
        rng = np.random.default_rng(6)
        M = random_pair(rng, 3)
        b = bracket(M, 6)
        v = extremal_norm_approx(M, b.lower, 6)
        X = rng.normal(size=(3, 500))
        for A in M.members:
            assert np.all(v(A @ X) <= v.member_bound(A) * v(X) * (1 + 1e-12))
        assert upper_bound(M, 3, v) >= b.lower

    def test_invalid(self, rank_one_pair):
        with pytest.raises(InvalidInputError):
            extremal_norm_approx(rank_one_pair, 0.0)


class TestQuadraticNorm:
    def test_refined_bracket_is_sound_and_tight(self):
        rng = np.random.default_rng(7)
        widths = []
        for _ in range(30):
            M = random_pair(rng)
            b = refined_bracket(M, 10)
            plain = bracket(M, 10)
            assert b.lower == plain.lower and b.upper <= plain.upper
            assert b.upper >= b.lower
            widths.append(b.relative_width)
        assert max(widths) < 0.05

    def test_induced_norm(self):
        rng = np.random.default_rng(8)
        L = rng.normal(size=(3, 3)) + 3 * np.eye(3)
        q = QuadraticNorm(L.T @ L)
        A = rng.normal(size=(3, 3))
        X = rng.normal(size=(3, 2000))
        assert np.max(q(A @ X) / q(X)) <= q.stack_norms(A[None])[0] * (1 + 1e-12)


class TestRescaleAndQ:
    def test_rescale_example(self, jordan_half):
        R = diagonal_rescale(jordan_half, coordinate_flag(2), 0.01)
        np.testing.assert_allclose(R.members[0], [[0.5, 0.1], [0, 0.5]])
        assert diagonal_rescale(jordan_half, coordinate_flag(2), 1.0) == jordan_half
        with pytest.raises(InvalidInputError):
            diagonal_rescale(jordan_half, coordinate_flag(2), 0.0)

    def test_rescale_preserves_lower_bound(self):
        rng = np.random.default_rng(9)
        A = np.triu(rng.normal(size=(3, 3)))
        B = np.triu(rng.normal(size=(3, 3)))
        M = MatrixSet([A, B])
        f = maximal_flag(M)
        for eps in (0.5, 0.01):
            assert bracket(diagonal_rescale(M, f, eps), 6).lower == pytest.approx(
                bracket(M, 6).lower, rel=1e-9)

    def test_q_matrix(self, jordan_half):
        f = coordinate_flag(2)
        blocks = block_decompose(jordan_half, f)
        q0 = q_matrix(blocks, f, 0.0, [0.5, 0.5])
        np.testing.assert_allclose(q0.Q, np.diag([0.5, 0.5]))
        assert q0.norm == pytest.approx(0.5)
        q = q_matrix(blocks, f, 0.01, [0.5, 0.5])
        assert q.norm <= 0.5 + 0.01 + 2 * 0.01**0.5
        off = q.Q[~np.eye(2, dtype=bool)]
        assert np.all(off <= 2 * 0.01**0.5)

    def test_q_matrix_dominates_inflation(self, nilpotent):
        from jsrholder.inflation import inflation_curve
        f = coordinate_flag(2)
        blocks = block_decompose(nilpotent, f)
        curve = inflation_curve(nilpotent, grid=[1e-3, 1e-2, 1e-1], n=4)
        for eps, b in zip(curve.grid, curve.values):
            q = q_matrix(blocks, f, eps, [0.0, 0.0])
            assert b.lower - 0.0 <= q.norm - q_matrix(blocks, f, 0.0, [0.0, 0.0]).norm
