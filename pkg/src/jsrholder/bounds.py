"""Two-sided joint spectral radius bounds from finite products.

Lower bounds come from ``max_{k <= n} max_{S in S_k} rho(S)^{1/k}``; upper
bounds from any submultiplicative norm, either in the plain form
``min_k (max_{S in S_k} ||S||)^{1/k}`` or in Gripenberg's form
``min_k max_{|w| = k} min_{i <= k} ||prefix_i(w)||^{1/i}``.  Both are
collected in a single level-by-level pass in :func:`bracket`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (MatrixSet, Word, decode_word, iter_levels, spectral_radii,
                   stack_norms, word_product, spectral_radius)
from .errors import InconclusiveError, InvalidInputError

_TIE_RTOL = 1e-12
_PRUNE_MARGIN = 1e-9


@dataclass(frozen=True)
class BoundsBracket:
    """Certified enclosure ``lower <= rho(M) <= upper`` at enumeration depth ``depth_n``."""

    lower: float
    upper: float
    depth_n: int
    witness: Word
    norm_tag: str
    lower_by_level: tuple = field(default=(), repr=False)
    upper_candidates: dict = field(default_factory=dict, repr=False)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def relative_width(self) -> float:
        """``(upper - lower) / upper``; zero for a closed bracket at 0."""
        return 0.0 if self.upper <= 0 else (self.upper - self.lower) / self.upper

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def scaled(self, c: float) -> "BoundsBracket":
        return BoundsBracket(c * self.lower, c * self.upper, self.depth_n, self.witness,
                             self.norm_tag, tuple(c * v for v in self.lower_by_level),
                             {k: c * v for k, v in self.upper_candidates.items()})

    def as_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "depth_n": self.depth_n,
                "witness": list(self.witness), "norm_tag": self.norm_tag}


class _NamedNorm:
    def __init__(self, tag):
        self.tag = tag

    def stack_norms(self, stack):
        return stack_norms(stack, self.tag)


def resolve_norm(norm):
    """Accept ``"spectral"``, ``"frobenius"`` or an object with ``tag`` and ``stack_norms``."""
    if isinstance(norm, str):
        if norm not in ("spectral", "frobenius"):
            raise InvalidInputError(f"unknown norm tag {norm!r}")
        return _NamedNorm(norm)
    if not hasattr(norm, "stack_norms") and not hasattr(norm, "set_bound"):
        raise InvalidInputError("norm objects need a stack_norms(stack) or set_bound(M) method")
    return norm


@dataclass
class _Scan:
    level_rho: list
    level_code: list
    level_norm_max: dict
    level_grip: dict


def _scan(M: MatrixSet, n: int, norms: Sequence, prune: bool, budget) -> _Scan:
    """One pass over all (unpruned) words of length <= n."""
    stack_norm_objs = [nm for nm in norms if hasattr(nm, "stack_norms")]
    tags = [nm.tag for nm in stack_norm_objs]
    if len(set(tags)) != len(tags):
        raise InvalidInputError(f"duplicate norm tags {tags}")
    member_norm = {t: float(nm.stack_norms(M.stack).max()) for t, nm in zip(tags, stack_norm_objs)}
    scan = _Scan([], [], {t: [] for t in tags}, {t: [] for t in tags})
    runmin = {t: None for t in tags}
    best = 0.0
    state = {}

    def pruner(k, codes, stack):
        nonlocal runmin
        keep = np.zeros(len(stack), dtype=bool)
        if best <= 0:
            keep[:] = True
        else:
            log_lo = math.log(best)
            thresh = math.log1p(-_PRUNE_MARGIN)
            for t in tags:
                with np.errstate(divide="ignore"):
                    ln = np.log(state[t])
                    lL = math.log(member_norm[t]) if member_norm[t] > 0 else -math.inf
                # linear in the target length, so the endpoints decide
                ends = [k + 1, n]
                ok = np.zeros(len(stack), dtype=bool)
                for kk in ends:
                    with np.errstate(invalid="ignore"):
                        val = ln + (kk - k) * lL - kk * log_lo
                    ok |= np.nan_to_num(val, nan=-np.inf) >= thresh
                keep |= ok
            if not tags:
                keep[:] = True
        for t in tags:
            runmin[t] = runmin[t][keep]
        return keep

    for k, codes, stack in iter_levels(M, n, budget, prune=pruner if prune else None):
        rho = spectral_radii(stack) ** (1.0 / k)
        lev = float(rho.max())
        near = np.flatnonzero(rho >= lev * (1 - _TIE_RTOL))
        scan.level_rho.append(lev)
        scan.level_code.append(int(codes[near[0]]))
        best = max(best, lev)
        q = len(M)
        for t, nm in zip(tags, stack_norm_objs):
            nrm = np.asarray(nm.stack_norms(stack), dtype=float)
            state[t] = nrm
            root = nrm ** (1.0 / k)
            scan.level_norm_max[t].append(float(root.max()))
            if runmin[t] is None:
                runmin[t] = root
            else:
                runmin[t] = np.minimum(np.repeat(runmin[t], q), root)
            scan.level_grip[t].append(float(runmin[t].max()))
    return scan


def _lower_from_scan(M: MatrixSet, scan: _Scan) -> tuple[float, Word, tuple]:
    G = max(scan.level_rho)
    cands = [decode_word(c, k + 1, len(M)) for k, (v, c) in
             enumerate(zip(scan.level_rho, scan.level_code)) if v >= G * (1 - _TIE_RTOL)]
    witness = min(cands)
    cum = tuple(np.maximum.accumulate(scan.level_rho).tolist())
    return G, witness, cum


def lower_bound(M: MatrixSet, n: int, budget: int | None = None) -> tuple[float, Word]:
    """``max_{1<=k<=n} max_{S in S_k(M)} rho(S)^{1/k}`` and a witness word.

    Ties are broken towards the lexicographically smallest word.
    """
    b = bracket(M, n, budget=budget)
    return b.lower, b.witness


def upper_bound(M: MatrixSet, n: int, norm="spectral", budget: int | None = None) -> float:
    """``min_{1<=k<=n} (max_{S in S_k(M)} ||S||)^{1/k}`` for a submultiplicative norm.

    ``norm`` may also be an object exposing ``set_bound(M)`` (an upper bound
    for the induced norm of every member), used as the ``k = 1`` term.
    """
    nm = resolve_norm(norm)
    vals = []
    if hasattr(nm, "set_bound"):
        vals.append(float(nm.set_bound(M)))
    if hasattr(nm, "stack_norms"):
        for k, _, stack in iter_levels(M, n, budget):
            vals.append(float(np.max(nm.stack_norms(stack))) ** (1.0 / k))
    return min(vals)


def bracket(M: MatrixSet, n: int, norms: Sequence = (), prune: bool = True,
            budget: int | None = None) -> BoundsBracket:
    """Lower and upper JSR bounds at depth ``n``.

    The spectral norm is always used; ``norms`` adds further submultiplicative
    norms (e.g. :class:`jsrholder.norms.QuadraticNorm`) or approximate
    extremal norms. For each norm both the plain and the Gripenberg bound are
    evaluated. Prefixes are pruned only when, under every norm, no extension
    of length ``<= n`` can reach the current lower bound, so pruning never
    changes the result.
    """
    if n < 1:
        raise InvalidInputError("depth must be >= 1")
    objs = [resolve_norm("spectral")] + [resolve_norm(x) for x in norms]
    scan = _scan(M, n, objs, prune, budget)
    lower, witness, cum = _lower_from_scan(M, scan)
    cands = {}
    for t in scan.level_norm_max:
        cands[t] = min(scan.level_norm_max[t])
        cands[f"gripenberg-{t}"] = min(scan.level_grip[t])
    for nm in objs:
        if hasattr(nm, "set_bound"):
            cands[nm.tag] = min(cands.get(nm.tag, math.inf), float(nm.set_bound(M)))
    if len(M) == 1:
        # rho({A}) = rho(A) exactly
        cands["singleton"] = lower
    tag = min(cands, key=lambda t: (cands[t], t))
    upper = max(cands[tag], lower)
    return BoundsBracket(lower, upper, n, witness, tag, cum, cands)


def check_bracket(M: MatrixSet, b: BoundsBracket) -> None:
    """Assert the documented bracket invariants (used by tests and reports)."""
    assert b.lower <= b.upper + 1e-12
    w = spectral_radius(word_product(M, b.witness)) ** (1.0 / len(b.witness))
    assert abs(w - b.lower) <= 1e-10 * max(1.0, b.lower)


def lambda_empirical(M: MatrixSet, n: int, r: int = 1, b: BoundsBracket | None = None,
                     max_relative_width: float = 0.10) -> float:
    """Smallest ``L`` with ``lower(m) >= upper * (1 - L / m**r)`` for ``m = 1..n``.

    An observed stand-in for the constant in rapid-approximation lower bounds;
    it is *not* a proven constant. Raises :class:`InconclusiveError` when the
    bracket is wider than ``max_relative_width``.
    """
    if r < 1:
        raise InvalidInputError("r must be >= 1")
    if b is None:
        b = bracket(M, n)
    if b.depth_n < n:
        raise InvalidInputError("bracket depth is smaller than n")
    if b.relative_width > max_relative_width:
        raise InconclusiveError(
            f"bracket [{b.lower:.6g}, {b.upper:.6g}] is wider than "
            f"{max_relative_width:.0%}; increase the depth", b)
    if b.upper <= 0:
        return 0.0
    lam = 0.0
    for m in range(1, n + 1):
        gap = 1.0 - b.lower_by_level[m - 1] / b.upper
        lam = max(lam, gap * m**r)
    return lam
