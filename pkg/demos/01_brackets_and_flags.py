"""Bracketing the joint spectral radius and finding invariant flags.

Run:  python demos/01_brackets_and_flags.py
"""
import numpy as np

from jsrholder import MatrixSet, block_decompose, bracket, maximal_flag, refined_bracket

# Two rank-one matrices: every product has spectral radius <= 1 and the
# alternating product (0, 1) attains 1.
pair = MatrixSet([[[0, 1], [0, 0]], [[0, 0], [1, 0]]])
print("rank-one pair     ", bracket(pair, 6))

# A random pair: the plain bracket is loose at small depth; an orbit-adapted
# quadratic norm tightens the upper side without touching the lower side.
rng = np.random.default_rng(0)
M = MatrixSet([rng.normal(size=(3, 3)) for _ in range(2)])
plain, refined = bracket(M, 8), refined_bracket(M, 8)
print(f"random 3x3 pair    plain width {plain.relative_width:.2%}, "
      f"refined width {refined.relative_width:.2%}")

# Reducibility: a Jordan block leaves span{e1} invariant, so the flag has
# two levels and the block decomposition is upper triangular.
J = MatrixSet([[[0.5, 1.0], [0.0, 0.5]]])
flag = maximal_flag(J)
print("Jordan block flag  dims", flag.dims, "residual", flag.residual)
blocks = block_decompose(J, flag)
print("  upper block", blocks[(0, 1)][0].ravel(), "lower block", blocks[(1, 0)][0].ravel())
print("rank-one pair flag index", maximal_flag(pair).index_m, "(irreducible)")
