"""Perturbation certificates for single matrices and finite products.

* :func:`elsner_gap` compares ``|rho(A) - rho(B)|`` with the order-``1/d``
  bound ``(||A|| + ||B||)^{(d-1)/d} ||A - B||^{1/d}``.
* :func:`resolvent_cert` certifies ``rho(A + eps B) >= rho(A) - Gamma eps``
  for ``||B||_2 <= 1`` and ``eps < eps0`` from the smallest singular value of
  ``A - xi I`` on a circle around the dominant eigenvalue.
* :func:`perturbed_product_gap` checks the deviation
  ``||prod (A_i + eps B_i) - prod A_i|| <= 2 theta^2 eps k^{2d-1}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .core import MatrixSet, as_matrix, spectral_radius, word_product
from .errors import InvalidInputError, PreconditionError

DEFAULT_CIRCLE_SAMPLES = 720
DELTA_CAP = 0.9
VIOLATION_TOL = 1e-9


class ElsnerGap(NamedTuple):
    lhs: float
    rhs: float
    violated: bool


def elsner_gap(A, B) -> ElsnerGap:
    """``|rho(A) - rho(B)|`` against ``(||A||_2 + ||B||_2)^{(d-1)/d} ||A - B||_2^{1/d}``."""
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise InvalidInputError("matrices must have the same dimension")
    d = A.shape[0]
    lhs = abs(spectral_radius(A) - spectral_radius(B))
    s = np.linalg.norm(A, 2) + np.linalg.norm(B, 2)
    rhs = float(s ** ((d - 1) / d) * np.linalg.norm(A - B, 2) ** (1.0 / d))
    return ElsnerGap(float(lhs), rhs, lhs > rhs + VIOLATION_TOL)


# ---------------------------------------------------------------------------
# resolvent certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResolventCertificate:
    """``rho(A + eps B) >= rho(A) - gamma * eps`` for ``||B||_2 <= 1``, ``0 <= eps < eps0``."""

    lambda_star: complex
    delta: float
    r0: float
    gamma: float
    eps0: float
    samples: int
    multiplicity: int = 1
    delta_source: str = "user"
    r0_sampled: float = 0.0
    low_confidence: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda_star"] = [self.lambda_star.real, self.lambda_star.imag]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict) -> "ResolventCertificate":
        obj = dict(obj)
        re, im = obj.pop("lambda_star")
        return cls(complex(re, im), **obj)


def dominant_eigenvalue(A) -> tuple[complex, np.ndarray]:
    """Deterministic max-modulus eigenvalue (ties: larger real, then imaginary part)."""
    lam = np.linalg.eigvals(as_matrix(A)).astype(complex)
    mod = np.abs(lam)
    top = mod.max()
    tied = [z for z in lam if abs(z) >= top * (1 - 1e-9) - 1e-300]
    star = max(tied, key=lambda z: (round(z.real, 12), round(z.imag, 12)))
    return complex(star), lam


def _sigma_min_on_circle(A, center, delta, N):
    d = A.shape[0]
    xi = center + delta * np.exp(2j * np.pi * np.arange(N) / N)
    stack = A[None] - xi[:, None, None] * np.eye(d)[None]
    return np.linalg.svd(stack, compute_uv=False)[:, -1]


def resolvent_cert(A, delta: float | None = None,
                   circle_samples: int = DEFAULT_CIRCLE_SAMPLES) -> ResolventCertificate:
    """Certificate ``(r0, Gamma, eps0)`` for the dominant eigenvalue of ``A``.

    ``r0`` is the sampled minimum of ``sigma_min(A - xi I)`` over the circle
    ``|xi - lambda| = delta`` minus ``pi delta / N``; since ``sigma_min`` is
    1-Lipschitz in ``xi``, this is a lower bound for the true minimum over
    the whole circle. Then ``eps0 = r0 / 2`` and ``Gamma = 2 delta / r0``.

    With ``delta=None`` the radius is half the distance from ``lambda`` to
    the rest of the spectrum, capped at 0.9. Eigenvalues within
    ``1e-9 max(1, |lambda|)`` of ``lambda`` count as the same point.
    """
    A = as_matrix(A)
    if circle_samples < 8:
        raise InvalidInputError("circle_samples must be >= 8")
    lam, spec = dominant_eigenvalue(A)
    same = np.abs(spec - lam) <= 1e-9 * max(1.0, abs(lam))
    rest = spec[~same]
    gap = float(np.min(np.abs(rest - lam))) if rest.size else math.inf
    source = "user"
    if delta is None:
        delta = min(DELTA_CAP, 0.5 * gap)
        source = "auto"
    if not 0 < delta < 1:
        raise InvalidInputError("delta must lie in (0, 1)")
    if gap <= delta + VIOLATION_TOL:
        raise PreconditionError(
            f"another eigenvalue lies within distance {gap:.6g} of the dominant one; "
            f"choose delta < {gap:.6g}")
    scale = max(np.linalg.norm(A, 2), 1.0)

    def certified(N):
        s = _sigma_min_on_circle(A, lam, delta, N)
        return float(s.min()), float(s.min() - math.pi * delta / N)

    sampled, r0 = certified(circle_samples)
    if sampled <= 1e-14 * scale or r0 <= 0:
        raise PreconditionError("the circle touches the spectrum; choose a smaller delta")
    _, r0_fine = certified(2 * circle_samples)
    low = abs(r0_fine - r0) >= 0.01 * r0
    return ResolventCertificate(lam, float(delta), r0, 2.0 * delta / r0, r0 / 2.0,
                                circle_samples, int(same.sum()), source, sampled, bool(low))


def check_resolvent_certificate(A, cert: ResolventCertificate, trials: int = 1000,
                                seed: int = 0) -> int:
    """Count random ``(B, eps)`` with ``rho(A + eps B) < rho(A) - Gamma eps - 1e-9``."""
    A = as_matrix(A)
    rng = np.random.default_rng(seed)
    d = A.shape[0]
    rho = spectral_radius(A)
    real = not np.iscomplexobj(A)
    bad = 0
    for _ in range(trials):
        B = rng.normal(size=(d, d))
        if not real:
            B = B + 1j * rng.normal(size=(d, d))
        B /= np.linalg.norm(B, 2)
        eps = rng.uniform(0, cert.eps0)
        if spectral_radius(A + eps * B) < rho - cert.gamma * eps - VIOLATION_TOL:
            bad += 1
    return bad


# ---------------------------------------------------------------------------
# perturbed products
# ---------------------------------------------------------------------------

class ProductGap(NamedTuple):
    actual: float
    bound: float
    violated: bool


def perturbed_product_gap(M: MatrixSet, word: Sequence[int], perturbations, eps: float,
                          theta: float) -> ProductGap:
    """``||prod (A_i + eps B_i) - prod A_i||_2`` against ``2 theta^2 eps k^{2d-1}``.

    ``perturbations[j]`` perturbs the ``j``-th factor applied (word order).
    ``M`` should be normalized so that its JSR is at most 1.
    """
    word = tuple(int(i) for i in word)
    k, d = len(word), M.d
    if k < 1:
        raise InvalidInputError("word must be nonempty")
    if len(perturbations) != k:
        raise InvalidInputError("one perturbation per factor is required")
    if theta <= 0 or eps <= 0:
        raise InvalidInputError("eps and theta must be positive")
    if eps >= 1.0 / (theta * k**d):
        raise PreconditionError(f"eps must be below 1/(theta k^d) = {1.0 / (theta * k**d):.6g}")
    Bs = [as_matrix(B) for B in perturbations]
    for B in Bs:
        if B.shape != (d, d):
            raise InvalidInputError("perturbation has the wrong dimension")
        if np.linalg.norm(B, 2) > 1 + 1e-12:
            raise InvalidInputError("perturbations must satisfy ||B||_2 <= 1")
    P = np.eye(d)
    for i, B in zip(word, Bs):
        P = (M.members[i] + eps * B) @ P
    actual = float(np.linalg.norm(P - word_product(M, word), 2))
    bound = 2.0 * theta**2 * eps * k ** (2 * d - 1)
    return ProductGap(actual, bound, actual > bound * (1 + 1e-9))


def exp_estimate_violations(x_step: float = 1e-3, kmax: int = 100) -> int:
    """Count grid points with ``(1 + x/k)^k > 1 + 2x`` for ``x in [0, 1]``, ``1 <= k <= kmax``."""
    x = np.arange(0.0, 1.0 + x_step / 2, x_step)
    k = np.arange(1, kmax + 1)[:, None]
    lhs = np.exp(k * np.log1p(x[None] / k))
    return int(np.sum(lhs > 1 + 2 * x[None] + 1e-15))
