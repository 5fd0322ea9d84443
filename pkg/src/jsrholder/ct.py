"""Continuous-time lift of a matrix set.

For the inclusion ``x' = A(t) x`` with ``A(t)`` in ``M`` the evolution
operators over unit time form a set ``M_hat`` with
``rho(M, R) = rho(M_hat, N)``.  Here ``M_hat`` is approximated from inside by
piecewise-constant switching on a uniform grid of ``steps`` intervals,
which yields certified *lower* bounds for the maximal Lyapunov exponent
``log rho(M, R)`` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .bounds import bracket
from .core import MatrixSet, as_matrix, product_budget
from .errors import BudgetExceededError, InvalidInputError


def matrix_exponential(A) -> np.ndarray:
    """``exp(A)`` by scaling and squaring with Pade approximation."""
    A = as_matrix(A)
    with np.errstate(over="raise", invalid="raise"):
        try:
            E = scipy.linalg.expm(A)
        except FloatingPointError as exc:
            raise InvalidInputError("matrix exponential overflows") from exc
    if not np.all(np.isfinite(E)):
        raise InvalidInputError("matrix exponential overflows")
    return E


@dataclass(frozen=True)
class LiftedSet:
    """Sampled unit-time evolution operators of the switched system."""

    base: MatrixSet
    steps: int
    sampled_words: int
    lifted: MatrixSet
    words: tuple = field(repr=False, default=())


def lift_continuous(M: MatrixSet, steps: int = 8, samples: int = 16, seed: int = 0,
                    budget: int | None = None) -> LiftedSet:
    """Products ``exp(A_{w_N}/N) ... exp(A_{w_1}/N)`` over switching words of length ``N = steps``.

    All constant words are included (as ``exp(A_i)``) followed by ``samples``
    random words; increasing ``samples`` only adds members, so lower bounds
    never decrease.
    """
    if steps < 1:
        raise InvalidInputError("steps must be >= 1")
    if samples < 0:
        raise InvalidInputError("samples must be >= 0")
    q = len(M)
    if q > 1 and samples * steps > product_budget(budget):
        raise BudgetExceededError(samples * steps, product_budget(budget))
    words = [(i,) * steps for i in range(q)]
    mats = [matrix_exponential(A) for A in M.members]
    if q > 1:
        small = [matrix_exponential(A / steps) for A in M.members]
        rng = np.random.default_rng(seed)
        seen = set(words)
        for _ in range(samples):
            w = tuple(int(i) for i in rng.integers(0, q, size=steps))
            if w in seen:
                continue
            seen.add(w)
            P = np.eye(M.d)
            for i in w:
                P = small[i] @ P
            words.append(w)
            mats.append(P)
    return LiftedSet(M, steps, len(words) - q, MatrixSet(mats), tuple(words))


@dataclass(frozen=True)
class LyapunovEstimate:
    lower: float
    heuristic_upper: float
    depth: int
    note: str


def max_lyapunov_estimate(L: LiftedSet, depth: int = 4, budget: int | None = None) -> LyapunovEstimate:
    """``log`` of the lifted bracket's lower bound (certified for the sampled inner set).

    The upper value is reported for orientation only: the lift is an inner
    approximation, so it cannot certify an upper bound on the exponent.
    """
    b = bracket(L.lifted, depth, budget=budget)
    lo = math.log(b.lower) if b.lower > 0 else -math.inf
    hi = math.log(b.upper) if b.upper > 0 else -math.inf
    return LyapunovEstimate(lo, hi, depth,
                            "lower bound certified for the inner (sampled) lift; "
                            "upper value is heuristic only")
