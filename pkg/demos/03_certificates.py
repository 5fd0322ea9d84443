"""Local lower-bound certificates and their randomized verification.

A certificate says: for n >= n0, any set within Hausdorff distance
radius(n) of M has JSR at least guarantee(n).  We build one for the
rank-one pair with unit constants and then probe it with random sets at
exactly that radius.

Run:  python demos/03_certificates.py
"""
import numpy as np

from jsrholder import (MatrixSet, build_certificate, resolvent_cert, theta_estimate,
                       verify_certificate)

pair = MatrixSet([[[0, 1], [0, 0]], [[0, 0], [1, 0]]])
cert = build_certificate(pair, lam=1.0, r=1, theta=1.0)
print(f"Delta={cert.delta_c} Psi={cert.psi:.6f} tau={cert.tau:.6f} Omega={cert.omega} n0={cert.n0}")
for n in (cert.n0, 10, 100):
    print(f"  n={n:4d}: radius {cert.radius(n):.3e}  guarantee {cert.guarantee(n):.4f}")

report = verify_certificate(pair, cert, trials=100, seed=1)
print("verification:", {v: report.count(v) for v in ("PASS", "INCONCLUSIVE", "FAIL")})

# The growth constant behind the certificate is estimated from products.
rng = np.random.default_rng(2)
M = MatrixSet([rng.normal(size=(2, 2)) for _ in range(2)])
est = theta_estimate(M, kmax=12)
print(f"random pair: theta ~ {est.theta:.3f} over k <= {est.kmax} (rho >= {est.rho_used:.4f})")

# Single-matrix version: a resolvent certificate for a simple dominant eigenvalue.
c = resolvent_cert(np.diag([1.0, 0.0]), delta=0.25)
print(f"resolvent: rho(A + eps B) >= 1 - {c.gamma:.4f} eps for eps < {c.eps0:.4f}")
