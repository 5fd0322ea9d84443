import itertools
from functools import reduce

import numpy as np
import pytest

from jsrholder import (InconclusiveError, MatrixSet, bracket, lambda_empirical, lower_bound,
                       scale, upper_bound)
from jsrholder.bounds import check_bracket

from conftest import JORDAN_HALF, random_pair


def brute_force(M, n):
    """Lower and plain spectral upper bound by explicit itertools enumeration."""
    lo, up = 0.0, np.inf
    for k in range(1, n + 1):
        rhos, norms = [], []
        for word in itertools.product(range(len(M)), repeat=k):
            P = reduce(lambda acc, i: M.members[i] @ acc, word, np.eye(M.d))
            rhos.append(max(abs(np.roots(np.poly(P)))) if M.d > 1 else abs(P[0, 0]))
            norms.append(np.sqrt(np.linalg.eigvalsh(P.conj().T @ P).max().clip(0)))
        lo = max(lo, max(rhos) ** (1 / k))
        up = min(up, max(norms) ** (1 / k))
    return lo, up


class TestExamples:
    def test_jordan_singleton(self, jordan_half):
        assert lower_bound(jordan_half, 1)[0] == pytest.approx(0.5, rel=1e-12)
        b = bracket(jordan_half, 20)
        assert b.lower == pytest.approx(0.5, rel=1e-12) and b.upper <= 0.62
        assert upper_bound(jordan_half, 1) == pytest.approx(1.2071067811865475)
        direct = min(np.linalg.norm(np.linalg.matrix_power(JORDAN_HALF, k), 2) ** (1 / k)
                     for k in range(1, 21))
        assert upper_bound(jordan_half, 20) == pytest.approx(direct, rel=1e-12)

    def test_rank_one_pair(self, rank_one_pair):
        value, witness = lower_bound(rank_one_pair, 2)
        assert value == pytest.approx(1.0) and witness == (0, 1)
        assert upper_bound(rank_one_pair, 2) == pytest.approx(1.0)
        b = bracket(rank_one_pair, 2)
        assert (b.lower, b.upper) == pytest.approx((1.0, 1.0))

    def test_identity(self):
        I = MatrixSet([np.eye(2)])
        for n in (1, 3, 5):
            b = bracket(I, n)
            assert (b.lower, b.upper) == (1.0, 1.0)
            assert upper_bound(I, n) == 1.0

    def test_lambda_empirical(self, rank_one_pair):
        assert lambda_empirical(MatrixSet([np.eye(2)]), 5) == 0
        assert lambda_empirical(MatrixSet([np.diag([1.0, 0.5])]), 6) == 0
        # lower bound is 0 at m = 1 and 1 from m = 2 on
        assert lambda_empirical(rank_one_pair, 4, 1) == pytest.approx(1.0)

    def test_lambda_inconclusive(self):
        rng = np.random.default_rng(5)
        M = MatrixSet(list(rng.normal(size=(3, 4, 4))))
        with pytest.raises(InconclusiveError) as info:
            lambda_empirical(M, 1)
        assert info.value.context.depth_n == 1


class TestProperties:
    def test_against_brute_force(self):
        rng = np.random.default_rng(6)
        for d in (2, 3):
            for _ in range(10):
                M = random_pair(rng, d)
                lo, up = brute_force(M, 5)
                b = bracket(M, 5)
                assert b.lower == pytest.approx(lo, rel=1e-9)
                assert b.upper <= up * (1 + 1e-12)
                assert upper_bound(M, 5) == pytest.approx(up, rel=1e-12)

    def test_sandwich_and_monotonicity(self):
        rng = np.random.default_rng(7)
        for trial in range(500):
            M = random_pair(rng, 2 + trial % 2)
            prev = None
            for n in (1, 2, 4, 8):
                b = bracket(M, n)
                assert b.lower <= b.upper + 1e-12
                check_bracket(M, b)
                if prev is not None:
                    assert b.lower >= prev.lower and b.upper <= prev.upper + 1e-15
                prev = b

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            M = random_pair(rng, 3)
            c = rng.uniform(0.1, 10)
            b, bc = bracket(M, 6), bracket(scale(M, c), 6)
            assert bc.lower == pytest.approx(c * b.lower, rel=1e-10)
            assert bc.upper == pytest.approx(c * b.upper, rel=1e-10)

    def test_pruning_is_exact(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            M = MatrixSet(list(rng.normal(size=(3, 3, 3))))
            a, b = bracket(M, 7, prune=True), bracket(M, 7, prune=False)
            assert (a.lower, a.upper, a.witness) == (b.lower, b.upper, b.witness)

    def test_witness_is_lexicographic(self):
        # both members have spectral radius 1; the smaller index wins
        M = MatrixSet([np.diag([1.0, 0.2]), np.diag([0.3, 1.0])])
        assert bracket(M, 3).witness == (0,)


def test_balanced_hull_agrees():
    from jsrholder import balanced_hull
    rng = np.random.default_rng(10)
    for _ in range(10):
        M = random_pair(rng)
        b, h = bracket(M, 6), bracket(balanced_hull(M), 6)
        assert abs(b.lower - h.lower) <= max(b.width, h.width) + 1e-12
