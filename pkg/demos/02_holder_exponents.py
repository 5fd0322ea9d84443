"""How fast can the joint spectral radius move under perturbation?

For the nilpotent Jordan block the JSR of the inflated set grows like
sqrt(eps); for the irreducible rank-one pair it grows linearly.  We bracket
rho(M + eps * ball) on a grid and fit the exponent on the smallest
resolvable decade.

Run:  python demos/02_holder_exponents.py
"""
from jsrholder import MatrixSet, fit_holder_at_zero, inflation_curve

cases = {
    "nilpotent block": MatrixSet([[[0, 1], [0, 0]]]),
    "rank-one pair": MatrixSet([[[0, 1], [0, 0]], [[0, 0], [1, 0]]]),
}
for name, M in cases.items():
    curve = inflation_curve(M, n=6)
    fit = fit_holder_at_zero(curve)
    print(f"{name:16s} alpha_hat = {fit.alpha_hat:.4f}  (C_hat = {fit.C_hat:.3f}, "
          f"{fit.points} points in {fit.fit_window[0]:.1e}..{fit.fit_window[1]:.1e})")
    for e, lo, hi in list(zip(curve.grid, curve.lower, curve.upper))[::9]:
        print(f"    eps={e:.2e}  rho in [{lo:.6f}, {hi:.6f}]")
