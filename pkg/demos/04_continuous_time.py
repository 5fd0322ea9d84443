"""Maximal Lyapunov exponent of a switched linear system x' = A(t) x.

Unit-time evolution operators under piecewise-constant switching give an
inner approximation of the lifted set, so the log of its JSR lower bound is
a certified lower bound on the exponent.

Run:  python demos/04_continuous_time.py
"""
import numpy as np

from jsrholder import MatrixSet, lift_continuous, max_lyapunov_estimate

stable = MatrixSet([np.diag([-1.0, -2.0])])
print("diag(-1,-2):", max_lyapunov_estimate(lift_continuous(stable)).lower)

# Two individually stable modes whose switching can destabilize.
A1 = np.array([[-0.1, 1.0], [-10.0, -0.1]])
A2 = np.array([[-0.1, 10.0], [-1.0, -0.1]])
M = MatrixSet([A1, A2])
for samples in (16, 128):
    L = lift_continuous(M, steps=8, samples=samples, seed=0)
    est = max_lyapunov_estimate(L, depth=3)
    print(f"switched pair, {samples:3d} sampled words: exponent >= {est.lower:.4f}")
