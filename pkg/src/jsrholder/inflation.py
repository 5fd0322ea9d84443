"""epsilon-inflation curves ``r(eps) = rho(M + eps B_V)`` and Hoelder fits at 0.

The inflated set is infinite, so it is handled two-sidedly:

* **lower bounds** come from finitely many elements of ``M_eps``: structured
  perturbations (scaled identity, member directions, rank-one units,
  eigen-adjoint directions, a few random ball elements) enumerated to a
  budget-limited depth, plus products whose factors are pushed along the
  first-order ascent direction of the leading eigenvalue;
* **upper bounds** come from expanding ``prod (A_i + eps B_i)`` around its
  unperturbed factors,
  ``p_k <= a_k + eps * b * sum_{j<k} a_j p_{k-1-j}``,
  with ``a_j = max_{S in S_j(M)} ||S||`` (``a_0 = 1``, extended beyond the
  enumeration depth by submultiplicativity) and ``b >= sup ||B||`` over the
  ball; then ``r(eps) <= min_k p_k^{1/k}``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import BoundsBracket, bracket
from .core import Ball, MatrixSet, balanced_hull, iter_levels, spectral_radii, stack_norms
from .errors import InconclusiveError, InvalidInputError, PreconditionError

DP_HORIZON = 2000
LOWER_BUDGET = 200_000
RESOLVE_FRACTION = 0.2


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def geometric_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """``count`` log-uniform points from ``lo`` to ``hi`` inclusive."""
    if not (0 < lo < hi) or count < 2:
        raise InvalidInputError("need 0 < lo < hi and count >= 2")
    return np.geomspace(lo, hi, count)


def default_grid(hi: float = 0.1, decades: int = 3, per_decade: int = 12) -> np.ndarray:
    """Log-uniform grid with ``per_decade`` points per decade ending at ``hi``."""
    return geometric_grid(hi * 10.0**-decades, hi, decades * per_decade)


def parse_grid(spec: str) -> np.ndarray:
    """Parse ``"geo:<min>:<max>:<count>"``."""
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] != "geo":
        raise InvalidInputError(f"grid must look like geo:<min>:<max>:<count>, got {spec!r}")
    try:
        lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError as exc:
        raise InvalidInputError(f"bad grid {spec!r}") from exc
    return geometric_grid(lo, hi, count)


# ---------------------------------------------------------------------------
# upper bound
# ---------------------------------------------------------------------------

def level_norm_maxima(M: MatrixSet, n: int, budget=None, norm=None) -> np.ndarray:
    """``a_0..a_n`` with ``a_j = max_{S in S_j} ||S||`` (``a_0 = 1``)."""
    a = [1.0]
    for _, _, stack in iter_levels(M, n, budget):
        if norm is None:
            a.append(float(stack_norms(stack).max()))
        else:
            a.append(float(np.max(norm.stack_norms(stack))))
    return np.array(a)


def extend_submultiplicative(a: np.ndarray, horizon: int, log: bool = False) -> np.ndarray:
    """Extend ``a_0..a_n`` to ``horizon`` by ``a_j <= min_i a_i a_{j-i}``.

    With ``log=True`` the logarithms are returned (avoids overflow).
    """
    n = len(a) - 1
    with np.errstate(divide="ignore"):
        la = np.log(np.asarray(a, dtype=float))
    out = np.empty(max(horizon, n) + 1)
    out[: n + 1] = la
    i = np.arange(1, n + 1)
    for j in range(n + 1, horizon + 1):
        out[j] = np.min(out[i] + out[j - i])
    out = out[: horizon + 1]
    return out if log else np.exp(out)


def perturbed_growth_upper(a: np.ndarray, eps: float, b: float = 1.0,
                           horizon: int = DP_HORIZON) -> float:
    """``min_k p_k^{1/k}`` for the perturbed-product recursion (sound upper bound).

    The recursion is run on ``p_k / R^k`` with ``R = a_1 + eps b`` (so every
    term stays in ``[0, 1]``); it stops before values approach underflow.
    """
    la = extend_submultiplicative(np.asarray(a, dtype=float), horizon, log=True)
    R = math.exp(la[1]) + eps * b
    if R <= 0:
        return 0.0
    ah = np.exp(la - np.arange(horizon + 1) * math.log(R))
    c = eps * b / R
    p = np.zeros(horizon + 1)
    p[0] = 1.0
    best = 0.0  # log of the best p_k^{1/k} / R
    for k in range(1, horizon + 1):
        p[k] = ah[k] + c * float(np.dot(ah[:k], p[k - 1::-1]))
        if p[k] < 1e-280:
            if p[k] == 0.0 and ah[k] == 0.0 and c == 0.0:
                return 0.0  # exactly nilpotent products
            break
        best = min(best, math.log(p[k]) / k)
    return R * math.exp(best)


# ---------------------------------------------------------------------------
# lower bound
# ---------------------------------------------------------------------------

def _leading_pair(P):
    lam, V = np.linalg.eig(P)
    i = int(np.argmax(np.abs(lam)))
    lamH, W = np.linalg.eig(P.conj().T)
    j = int(np.argmin(np.abs(lamH - np.conj(lam[i]))))
    return lam[i], V[:, i], W[:, j]


def _ascent_direction(ball: Ball, left, right, lam, x, y, real):
    """Unit ball element ``E`` maximizing the first-order growth of ``|lam|``."""
    u = left.conj().T @ y
    w = right @ x
    yx = np.vdot(y, x)
    if np.linalg.norm(u) == 0 or np.linalg.norm(w) == 0 or abs(yx) == 0 or lam == 0:
        return None
    phase = (lam / abs(lam)) * (yx / abs(yx))
    E = phase * np.outer(u, w.conj()) / (np.linalg.norm(u) * np.linalg.norm(w))
    if real:
        E = E.real
    return ball.normalize(E)


def _word_ascent(mats, ball, eps, word, init, sweeps, real):
    """Coordinate ascent of ``rho(prod (A_i + eps B_i))`` over the factors of a word."""
    d = mats[0].shape[0]
    Bs = list(init)
    best = 0.0
    best_factors = None
    for _ in range(sweeps):
        improved = False
        for pos in range(len(word)):
            factors = [mats[i] + eps * B for i, B in zip(word, Bs)]
            P = np.eye(d)
            for F in factors:
                P = F @ P
            lam, x, y = _leading_pair(P)
            val = abs(lam) ** (1.0 / len(word))
            if val > best * (1 + 1e-14):
                best, best_factors, improved = val, factors, True
            left = np.eye(d)
            for F in factors[pos + 1:]:
                left = F @ left
            right = np.eye(d)
            for F in factors[:pos]:
                right = F @ right
            E = _ascent_direction(ball, left, right, lam, x, y, real)
            if E is not None:
                Bs[pos] = E
        if not improved:
            break
    factors = [mats[i] + eps * B for i, B in zip(word, Bs)]
    P = np.eye(d)
    for F in factors:
        P = F @ P
    val = float(np.max(np.abs(np.linalg.eigvals(P)))) ** (1.0 / len(word))
    if val > best:
        best, best_factors = val, factors
    return best, best_factors


def structured_candidates(M: MatrixSet, ball: Ball, rng, n_random: int = 4) -> list:
    """Unit elements of ``V`` used as perturbation directions."""
    d = M.d
    real = not np.iscomplexobj(M.stack)
    raw = [np.eye(d)]
    raw += [A for A in M.members]
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d))
            E[i, j] = 1.0
            raw.append(E)
    for A in M.members:
        lam, V = np.linalg.eig(A)
        k = int(np.argmax(np.abs(lam)))
        lamH, W = np.linalg.eig(A.conj().T)
        kk = int(np.argmin(np.abs(lamH - np.conj(lam[k]))))
        x, y = V[:, k], W[:, kk]
        yx = np.vdot(y, x)
        if abs(yx) > 1e-12 and abs(lam[k]) > 0:
            phase = (lam[k] / abs(lam[k])) * (yx / abs(yx))
            E = phase * np.outer(y, x.conj())
            raw.append(E.real if real else E)
    raw += ball.sample(rng, n_random, complex_=not real)
    out, seen = [], set()
    for E in raw:
        B = ball.normalize(np.asarray(E, dtype=complex).real if real else np.asarray(E, dtype=complex))
        if B is None:
            continue
        key = np.round(B, 12).tobytes()
        if key not in seen:
            seen.add(key)
            out.append(B)
    return out


def inflated_lower(M: MatrixSet, ball: Ball, eps: float, candidates: list,
                   base_lower: float = 0.0, ascent_words: Sequence = (), sweeps: int = 6,
                   budget: int = LOWER_BUDGET, seed: int = 0):
    """Lower bound for ``rho(M_eps)`` with the factor list of a witness product.

    Returns ``(value, factors)`` where ``factors`` (right-to-left) are
    elements of ``M_eps`` whose product attains ``value`` as its normalized
    spectral radius (``factors`` is ``None`` when ``base_lower`` wins).
    """
    real = not np.iscomplexobj(M.stack)
    mats = list(M.members)
    pool = list(mats) + [A + eps * B for A in mats for B in candidates]
    C = MatrixSet(pool)
    q = len(C)
    depth, total = 0, 0
    while total + q ** (depth + 1) <= budget:
        depth += 1
        total += q**depth
    depth = max(depth, 1)
    best, factors = base_lower, None
    for k, codes, stack in iter_levels(C, depth, budget=max(budget, q)):
        r = spectral_radii(stack) ** (1.0 / k)
        i = int(np.argmax(r))
        if r[i] > best:
            best = float(r[i])
            word = []
            code = int(codes[i])
            for _ in range(k):
                word.append(code % q)
                code //= q
            factors = [C.members[j] for j in reversed(word)]
    rng = np.random.default_rng(seed)
    d = M.d
    for word in ascent_words:
        starts = [[np.zeros((d, d))] * len(word)]
        starts.append(ball.sample(rng, len(word), complex_=not real))
        for init in starts:
            val, fac = _word_ascent(mats, ball, eps, word, init, sweeps, real)
            if val > best:
                best, factors = val, fac
    return best, factors


def _ascent_words(M: MatrixSet, base: BoundsBracket, max_len: int = 4, max_words: int = 48):
    q = len(M)
    words = []
    for k in range(1, max_len + 1):
        if q**k > max_words:
            break
        words += [tuple(int(c) for c in np.unravel_index(i, (q,) * k)) for i in range(q**k)]
    if base.witness and tuple(base.witness) not in words:
        words.append(tuple(base.witness))
    return words[:max_words + 1]


# ---------------------------------------------------------------------------
# curves and fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InflationCurve:
    """Per-``eps`` brackets for ``r(eps) = rho(M + eps B_V)``."""

    base: MatrixSet
    ball: Ball
    grid: tuple
    values: tuple
    depth_n: int
    base_bracket: BoundsBracket
    witnesses: tuple = field(default=(), repr=False)

    @property
    def lower(self) -> np.ndarray:
        return np.array([b.lower for b in self.values])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b.upper for b in self.values])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "lower", "upper", "depth_n"])
        for e, b in zip(self.grid, self.values):
            w.writerow([repr(float(e)), repr(float(b.lower)), repr(float(b.upper)), self.depth_n])
        return buf.getvalue()


def inflation_curve(M: MatrixSet, ball: Ball | None = None, grid=None, n: int = 6,
                    seed: int = 0, budget=None, lower_budget: int = LOWER_BUDGET,
                    horizon: int = DP_HORIZON) -> InflationCurve:
    """Bracket ``rho(M_eps)`` along a grid of ``eps >= 0``.

    Parameters
    ----------
    M : MatrixSet
    ball : Ball, optional
        Unit ball of the perturbation subspace (full spectral ball by default).
    grid : sequence of float, optional
        Increasing nonnegative ``eps`` values (``default_grid()`` if omitted).
    n : int
        Enumeration depth for the unperturbed set.
    """
    ball = Ball(M.d) if ball is None else ball
    if ball.d != M.d:
        raise InvalidInputError("ball dimension does not match the set")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0 or np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise InvalidInputError("grid must be strictly increasing and nonnegative")
    base = bracket(M, n, budget=budget)
    a = level_norm_maxima(M, n, budget)
    rng = np.random.default_rng(seed)
    cands = structured_candidates(M, ball, rng)
    words = _ascent_words(M, base)
    b = ball.spectral_sup
    values, witnesses = [], []
    for eps in grid:
        if eps == 0:
            values.append(base)
            witnesses.append(None)
            continue
        lo, fac = inflated_lower(M, ball, float(eps), cands, base.lower, words,
                                 budget=lower_budget, seed=seed)
        up = perturbed_growth_upper(a, float(eps), b, horizon)
        up = float(max(up, lo))
        values.append(BoundsBracket(float(lo), up, n, (), "inflation-spectral"))
        witnesses.append(None if fac is None else tuple(fac))
    return InflationCurve(M, ball, tuple(float(e) for e in grid), tuple(values), n, base,
                          tuple(witnesses))


@dataclass(frozen=True)
class HolderFit:
    """Least-squares fit ``r(eps) - r(0) ~ C eps^alpha`` on a window of ``eps``."""

    alpha_hat: float
    C_hat: float
    fit_window: tuple
    residual: float
    points: int


def resolvable_points(curve: InflationCurve, fraction: float = RESOLVE_FRACTION) -> np.ndarray:
    """Indices of grid points whose increment over ``r(0)`` is resolved by the brackets."""
    b0 = curve.base_bracket
    out = []
    for i, (e, b) in enumerate(zip(curve.grid, curve.values)):
        if e <= 0:
            continue
        inc = b.midpoint - b0.midpoint
        if inc > 0 and b.width + b0.width <= fraction * inc:
            out.append(i)
    return np.array(out, dtype=int)


def fit_holder_at_zero(curve: InflationCurve, min_points: int = 4) -> HolderFit:
    """Fit the Hoelder exponent at ``eps = 0`` on the smallest resolvable decade.

    Raises
    ------
    InconclusiveError
        Fewer than ``min_points`` resolvable points in the window, or a
        fitted exponent outside ``(0, 1.5]``.
    """
    idx = resolvable_points(curve)
    if len(idx) < min_points:
        raise InconclusiveError(
            f"only {len(idx)} resolvable grid points (need {min_points}); "
            "increase the depth or move the grid", curve)
    eps = np.array(curve.grid)[idx]
    lo = eps[0]
    win = idx[eps <= lo * 10 * (1 + 1e-12)]
    if len(win) < min_points:
        win = idx[:min_points]
    e = np.array(curve.grid)[win]
    inc = np.array([curve.values[i].midpoint for i in win]) - curve.base_bracket.midpoint
    X = np.log(e)
    Y = np.log(inc)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = float(np.sqrt(np.mean((Y - (slope * X + intercept)) ** 2)))
    fit = HolderFit(float(slope), float(math.exp(intercept)), (float(e[0]), float(e[-1])),
                    resid, len(win))
    if not 0 < fit.alpha_hat <= 1.5:
        raise InconclusiveError(f"fitted exponent {fit.alpha_hat:.3g} outside (0, 1.5]", fit)
    return fit


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of the increment inequality scan over grid pairs."""

    pairs_checked: int
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def check_inflation_inequality(curve: InflationCurve, eta: float,
                               slack: float = 1e-12) -> InequalityReport:
    """Check ``0 <= r(eps + delta) - r(eps) <= (delta / eps) r(eta)`` on the grid.

    Sound sides are used: the increment is over-estimated by
    ``lower(eps + delta) - upper(eps)`` and ``r(eta)`` by ``upper(eta)``;
    monotonicity is checked as ``upper(eps + delta) >= lower(eps)``.
    The base must be balanced (``M = -M``); pass ``balanced_hull(M)``.
    """
    if not curve.base.same_as(balanced_hull(curve.base)):
        raise PreconditionError("the inequality needs a balanced base; use balanced_hull(M)")
    g = np.array(curve.grid)
    inside = [i for i in range(len(g)) if g[i] <= eta * (1 + 1e-12)]
    if not inside:
        raise InvalidInputError("no grid point at or below eta")
    j_eta = max(inside)
    u_eta = curve.values[j_eta].upper
    violations, count = [], 0
    for a in inside:
        for c in inside:
            if g[c] <= g[a] or g[a] <= 0:
                continue
            count += 1
            ba, bc = curve.values[a], curve.values[c]
            delta = g[c] - g[a]
            rhs = delta / g[a] * u_eta
            inc = bc.lower - ba.upper
            if inc > rhs + slack or bc.upper < ba.lower - slack:
                violations.append({"eps": float(g[a]), "delta": float(delta),
                                   "increment_lower": float(inc), "rhs": float(rhs),
                                   "bracket_eps": (ba.lower, ba.upper),
                                   "bracket_eps_delta": (bc.lower, bc.upper)})
    return InequalityReport(count, tuple(violations))
