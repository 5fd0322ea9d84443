"""Hoelder lower-bound certificates and growth-bound checks.

A :class:`HolderCertificate` bundles the constants

* ``Delta = 2 theta^2``,
* ``Psi = max{(2 theta + Delta)^{(d-1)/d} Delta^{1/d}, theta^{1/d} Lambda}``,
* ``tau = (Lambda / Psi)^d``,
* ``Omega = 2 Lambda``,

and an ``n0``; for ``n >= n0`` every ``N`` with
``d_H(M, N) <= tau n^{-(d^2 + d r)} rho(M)`` satisfies
``rho(N) >= rho(M) (1 - Omega / n^r)``.  ``theta`` bounds the polynomial
growth ``||A_k ... A_1|| <= theta k^{d-1} rho(M)^k`` and ``Lambda`` is the
constant of a rapid lower-bound approximation of order ``r``; both are
either supplied or estimated from products, and the certificate records
which.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import BoundsBracket, lambda_empirical
from .core import MatrixSet, iter_levels, scale, stack_norms
from .errors import InconclusiveError, InvalidInputError, PreconditionError
from .norms import refined_bracket

N0_TOL = 1e-12


# ---------------------------------------------------------------------------
# growth constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaEstimate:
    """Empirical growth constant; unpacks as ``(theta, rho_used)``."""

    theta: float
    rho_used: float
    kmax: int
    normalization: str
    bracket: BoundsBracket = field(repr=False)
    source: str = "empirical"

    def __iter__(self):
        return iter((self.theta, self.rho_used))


def _certified_bracket(M: MatrixSet, max_relative_width: float, n: int | None = None):
    b = refined_bracket(M, n=n or 8, target=max_relative_width, max_n=(n or 8) + 8)
    if b.relative_width > max_relative_width:
        raise InconclusiveError(
            f"bracket [{b.lower:.6g}, {b.upper:.6g}] is wider than {max_relative_width:.0%}", b)
    return b


def theta_estimate(M: MatrixSet, kmax: int = 12, b: BoundsBracket | None = None,
                   normalization: str = "standard", max_relative_width: float = 0.10,
                   budget=None) -> ThetaEstimate:
    """``theta = max_{k <= kmax} max_{S in S_k} ||S||_2 / (k^{d-1} rho^k)``, floored at 1.

    ``rho`` is the bracket *lower* bound, which can only increase ``theta``.
    With ``normalization="subunit"`` the denominator is
    ``k^{d-1} rho^{k-(d-1)}`` instead (an alternative form useful when
    ``rho < 1``).
    """
    if kmax < 1:
        raise InvalidInputError("kmax must be >= 1")
    if normalization not in ("standard", "subunit"):
        raise InvalidInputError("normalization must be 'standard' or 'subunit'")
    if b is None:
        b = _certified_bracket(M, max_relative_width)
    elif b.relative_width > max_relative_width:
        raise InconclusiveError("bracket too wide for a growth estimate", b)
    rho = b.lower
    if not rho > 0:
        raise PreconditionError("the JSR bracket touches 0; growth normalization is undefined")
    d = M.d
    theta = 1.0
    for k, _, stack in iter_levels(M, kmax, budget):
        top = float(stack_norms(stack).max())
        power = k if normalization == "standard" else k - (d - 1)
        theta = max(theta, top / (k ** (d - 1) * rho**power))
    return ThetaEstimate(theta, rho, kmax, normalization, b)


# ---------------------------------------------------------------------------
# n0
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class N0Result:
    n0: int
    horizon: int
    min_nb: float  # min over n in [n0, horizon] of n * b_n^(n-1)
    tail_nb: float = math.nan  # n * b_n^(n-1) at the horizon; the liminf premise wants > 1

    def __int__(self):
        return self.n0


def _n0_holds(lam: float, r: int, n: int) -> bool:
    """``(1 - t)^k - (1 - 2t)^k >= t`` for all ``1 <= k <= n`` with ``t = lam / n^r``."""
    t = lam / float(n) ** r
    a, b = 1.0 - t, 1.0 - 2.0 * t
    k = np.arange(1, n + 1, dtype=float)
    if b > 0:
        # (a^k - b^k) / t = a^{k-1} * (1 - (b/a)^k) / (t/a), with b/a = 1 - t/a
        s = t / a
        ratio = -np.expm1(k * math.log1p(-s)) / s
        S = np.exp((k - 1) * math.log(a)) * ratio
        return bool(np.all(S >= 1.0 - N0_TOL))
    if a <= 0:
        return False
    ki = np.arange(1, n + 1)
    lhs = a**ki - np.sign(b) ** ki * abs(b) ** ki
    return bool(np.all(lhs >= t * (1.0 - N0_TOL)))


def n0_inequality_holds(lam: float, r: int, n: int) -> bool:
    """Whether the ``n0`` inequality holds at ``n`` for every ``1 <= k <= n``."""
    return _n0_holds(lam, r, n)


def n0_search(lam: float, r: int = 1, horizon: int = 1000) -> N0Result:
    """Smallest ``n0`` such that the inequality holds for all ``n`` in ``[n0, horizon]``.

    Raises
    ------
    InconclusiveError
        If it fails at the horizon itself (the largest violating ``n`` is reported).
    """
    if lam <= 0 or r < 1:
        raise InvalidInputError("need lam > 0 and r >= 1")
    if horizon < 10:
        raise InvalidInputError("horizon must be >= 10")
    n0 = None
    for n in range(horizon, 0, -1):
        if not _n0_holds(lam, r, n):
            if n == horizon:
                raise InconclusiveError(f"inequality fails at n={n}; no n0 within the horizon")
            n0 = n + 1
            break
    n0 = 1 if n0 is None else n0
    ns = np.arange(n0, horizon + 1, dtype=float)
    bn = 1.0 - 2.0 * lam / ns**r
    with np.errstate(invalid="ignore"):
        nb = ns * np.sign(bn) ** (ns - 1) * np.abs(bn) ** (ns - 1)
    return N0Result(n0, horizon, float(np.min(nb)), float(nb[-1]))


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

def pipeline_constants(d: int, theta: float, lam: float) -> dict:
    """``Delta, Psi, tau, Omega`` from ``(d, theta, Lambda)``."""
    delta_c = 2.0 * theta**2
    psi = max((2.0 * theta + delta_c) ** ((d - 1) / d) * delta_c ** (1.0 / d),
              theta ** (1.0 / d) * lam)
    tau = (lam / psi) ** d
    return {"delta_c": delta_c, "psi": psi, "tau": tau, "omega": 2.0 * lam}


@dataclass(frozen=True)
class HolderCertificate:
    """Constants of the local lower-bound guarantee (see module docstring)."""

    d: int
    theta: float
    lam: float
    r: int
    delta_c: float
    psi: float
    tau: float
    omega: float
    n0: int
    rho_ref: float = 1.0
    rho_lower: float = 1.0
    rho_upper: float = 1.0
    provenance: dict = field(default_factory=dict)

    @classmethod
    def from_constants(cls, d: int, theta: float, lam: float, r: int = 1, n0: int | None = None,
                       horizon: int = 1000, rho_bracket=(1.0, 1.0), provenance=None):
        if d < 1 or r < 1:
            raise InvalidInputError("need d >= 1 and r >= 1")
        if theta < 1:
            raise InvalidInputError("theta must be >= 1")
        if lam <= 0:
            raise InvalidInputError("Lambda must be positive")
        c = pipeline_constants(d, theta, lam)
        if n0 is None:
            n0 = n0_search(lam, r, horizon).n0
        lo, hi = rho_bracket
        prov = {"theta": "supplied", "lambda": "supplied"}
        prov.update(provenance or {})
        return cls(d, float(theta), float(lam), int(r), c["delta_c"], c["psi"], c["tau"],
                   c["omega"], int(n0), 0.5 * (lo + hi), float(lo), float(hi), prov)

    @property
    def radius_exponent(self) -> int:
        return self.d * self.d + self.d * self.r

    def radius(self, n: int) -> float:
        """Admissible Hausdorff radius at ``n`` (uses the sound bracket side)."""
        return self.tau * float(n) ** (-self.radius_exponent) * self.rho_lower

    def guarantee(self, n: int) -> float:
        """Guaranteed lower bound for ``rho(N)`` inside the radius."""
        return self.rho_lower * (1.0 - self.omega / float(n) ** self.r)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict) -> "HolderCertificate":
        return cls(**obj)


def build_certificate(M: MatrixSet, lam: float | None = None, r: int = 1, kmax: int = 12,
                      horizon: int = 1000, theta: float | None = None, n: int = 8,
                      budget=None) -> HolderCertificate:
    """Assemble a certificate for ``M``.

    ``theta`` defaults to :func:`theta_estimate` over ``k <= kmax``; ``lam``
    defaults to :func:`jsrholder.bounds.lambda_empirical` at depth ``n``.
    Either way the provenance is recorded.
    """
    b = _certified_bracket(M, 0.10, n)
    if b.lower <= 0:
        raise PreconditionError("the JSR bracket touches 0")
    prov = {}
    if theta is None:
        theta = theta_estimate(M, kmax, b, budget=budget).theta
        prov["theta"] = f"empirical-theta (k <= {kmax})"
    else:
        prov["theta"] = "supplied"
    if lam is None:
        lam = lambda_empirical(M, b.depth_n, r, b)
        prov["lambda"] = f"empirical (n <= {b.depth_n})"
        if lam <= 0:
            raise PreconditionError("empirical Lambda is 0; supply a positive Lambda")
    else:
        prov["lambda"] = "supplied"
    return HolderCertificate.from_constants(M.d, theta, lam, r, None, horizon,
                                            (b.lower, b.upper), prov)


def holder_constant_from_integers(p: int, q: int, tau: float, omega: float) -> tuple[float, float]:
    """``(2^p Omega tau^{-p/q}, p/q)``: Hoelder constant and exponent."""
    if p < 1 or q < 1:
        raise InvalidInputError("p and q must be >= 1")
    if tau <= 0 or omega <= 0:
        raise InvalidInputError("tau and omega must be positive")
    return 2.0**p * omega * tau ** (-p / q), p / q


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialResult:
    eps: float
    lower: float
    upper: float
    guarantee: float
    verdict: str


@dataclass(frozen=True)
class VerificationReport:
    n_probe: int
    radius: float
    guarantee: float
    trials: tuple

    def count(self, verdict: str) -> int:
        return sum(t.verdict == verdict for t in self.trials)

    @property
    def failures(self) -> int:
        return self.count("FAIL")

    def to_dict(self) -> dict:
        return {"n_probe": self.n_probe, "radius": self.radius, "guarantee": self.guarantee,
                "counts": {v: self.count(v) for v in ("PASS", "INCONCLUSIVE", "FAIL")},
                "trials": [asdict(t) for t in self.trials]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "eps", "lower", "upper", "guarantee", "verdict"])
        for i, t in enumerate(self.trials):
            w.writerow([i, repr(t.eps), repr(t.lower), repr(t.upper), repr(t.guarantee), t.verdict])
        return buf.getvalue()


def verify_certificate(M: MatrixSet, cert: HolderCertificate, trials: int = 100,
                       n_probe: int | None = None, depth: int = 8, seed: int = 0,
                       zero: bool = False) -> VerificationReport:
    """Probe the guarantee with random sets at the admissible radius.

    Each trial forms ``N = {A_i + eps B_i}`` with ``||B_i||_2 = 1`` (so
    ``d_H(M, N) <= eps``) at ``eps = radius(n_probe)`` and brackets
    ``rho(N)``: PASS if the lower bound meets the guarantee, FAIL if the
    upper bound is below it, INCONCLUSIVE otherwise. ``zero=True`` uses
    ``B_i = 0``.
    """
    from .bounds import bracket

    if M.d != cert.d:
        raise InvalidInputError("certificate dimension does not match the set")
    n_probe = cert.n0 if n_probe is None else int(n_probe)
    if n_probe < cert.n0:
        raise PreconditionError(f"n_probe must be >= n0 = {cert.n0}")
    eps = cert.radius(n_probe)
    g = cert.guarantee(n_probe)
    rng = np.random.default_rng(seed)
    real = not np.iscomplexobj(M.stack)
    out = []
    d = M.d
    for _ in range(trials):
        mats = []
        for A in M.members:
            if zero:
                mats.append(A)
                continue
            B = rng.normal(size=(d, d))
            if not real:
                B = B + 1j * rng.normal(size=(d, d))
            mats.append(A + eps * B / np.linalg.norm(B, 2))
        b = bracket(MatrixSet(mats), depth)
        verdict = "PASS" if b.lower >= g else ("FAIL" if b.upper < g else "INCONCLUSIVE")
        out.append(TrialResult(eps, b.lower, b.upper, g, verdict))
    return VerificationReport(n_probe, eps, g, tuple(out))


# ---------------------------------------------------------------------------
# dimension two
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthReport:
    L: float
    normalizer: float
    ratios: tuple  # max ||S||_2 / (6 L k) per k
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def dim2_growth_check(M: MatrixSet, kmax: int = 20, b: BoundsBracket | None = None,
                      max_relative_width: float = 0.05, budget=None) -> GrowthReport:
    """Check ``max_{S in S_k} ||S||_2 <= 6 L k`` for ``k <= kmax`` on the normalized set.

    The set is divided by the bracket *upper* bound (normalized JSR ``<= 1``)
    and ``L = max(1, max ||A||_F)`` over the normalized members.
    """
    if M.d != 2:
        raise InvalidInputError("the plane growth check needs d = 2")
    if b is None:
        b = _certified_bracket(M, max_relative_width, 10)
    elif b.relative_width > max_relative_width:
        raise InconclusiveError("bracket too wide for the growth check", b)
    c = b.upper if b.upper > 0 else 1.0
    N = scale(M, 1.0 / c)
    L = max(1.0, max(float(np.linalg.norm(A, "fro")) for A in N.members))
    ratios, bad = [], []
    for k, _, stack in iter_levels(N, kmax, budget):
        top = float(stack_norms(stack).max())
        ratios.append(top / (6 * L * k))
        if top > 6 * L * k:
            bad.append(k)
    return GrowthReport(L, c, tuple(ratios), tuple(bad))


def distance_subspace(r1: float, r2: float, eta: complex, zeta: complex) -> float:
    """Distance from the origin to the affine line through ``(r1, r2)`` and ``(eta, zeta)``.

    Closed form ``sqrt(r1^2 r2^2 / (|r1 - eta|^2 + r2^2))``, which is at least
    ``r2 / sqrt(5)`` under the preconditions.
    """
    tol = 1e-9
    if not (r2 > 0 and r1 >= r2):
        raise InvalidInputError("need r1 >= r2 > 0")
    if abs(eta) > r1 + tol:
        raise InvalidInputError("need |eta| <= r1")
    if abs(abs(zeta) - r2) > tol:
        raise InvalidInputError("need |zeta| = r2")
    dist = math.sqrt(r1**2 * r2**2 / (abs(r1 - eta) ** 2 + r2**2))
    if dist < r2 / math.sqrt(5) - 1e-12:
        raise AssertionError("distance below r2/sqrt(5)")  # unreachable under the preconditions
    return dist
