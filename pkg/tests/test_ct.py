import numpy as np
import pytest

from jsrholder import InvalidInputError, MatrixSet, lift_continuous, matrix_exponential, max_lyapunov_estimate
from jsrholder.core import spectral_radius

from conftest import NILPOTENT


def test_exponential_oracle():
    # diagonalizable case: V exp(D) V^-1
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = rng.normal(size=(3, 3))
        w, V = np.linalg.eig(A)
        ref = (V @ np.diag(np.exp(w)) @ np.linalg.inv(V)).real
        np.testing.assert_allclose(matrix_exponential(A), ref, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(matrix_exponential(NILPOTENT), [[1, 1], [0, 1]])
    with pytest.raises(InvalidInputError):
        matrix_exponential(np.diag([1e4, 0.0]))


def test_singletons():
    est = max_lyapunov_estimate(lift_continuous(MatrixSet([np.diag([-1.0, -2.0])])))
    assert est.lower == pytest.approx(-1.0, abs=1e-8)
    assert max_lyapunov_estimate(lift_continuous(MatrixSet([NILPOTENT]))).lower == 0.0
    assert max_lyapunov_estimate(lift_continuous(MatrixSet([np.zeros((2, 2))]))).lower == 0.0


def test_normal_singletons_match_spectral_abscissa():
    rng = np.random.default_rng(1)
    for _ in range(50):
        Q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
        D = rng.normal(size=3)
        A = Q @ np.diag(D) @ Q.T
        est = max_lyapunov_estimate(lift_continuous(MatrixSet([A])), depth=2)
        assert est.lower == pytest.approx(D.max(), abs=1e-8)


def test_lift_members_invertible_and_monotone():
    rng = np.random.default_rng(2)
    M = MatrixSet([rng.normal(size=(2, 2)) for _ in range(2)])
    small = lift_continuous(M, samples=4, seed=3)
    big = lift_continuous(M, samples=32, seed=3)
    for P in big.lifted.members:
        assert abs(np.linalg.det(P)) > 0
    assert small.words == big.words[:len(small.words)]
    assert max_lyapunov_estimate(big, 3).lower >= max_lyapunov_estimate(small, 3).lower - 1e-12


def test_lower_bound_below_each_constant_mode():
    rng = np.random.default_rng(4)
    M = MatrixSet([rng.normal(size=(2, 2)) for _ in range(3)])
    est = max_lyapunov_estimate(lift_continuous(M), 3)
    best_mode = max(np.linalg.eigvals(A).real.max() for A in M.members)
    assert est.lower >= best_mode - 1e-9


def test_invalid():
    with pytest.raises(InvalidInputError):
        lift_continuous(MatrixSet([np.eye(2)]), steps=0)
