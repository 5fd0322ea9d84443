"""Flag-adapted block norms, their operator bounds and eccentricities.

A :class:`BlockNorm` combines norms ``v_i`` on the pieces ``X_i`` of a flag as
``v(x) = ||(v_1(pi_1 x), ..., v_m(pi_m x))||_2``.  For any matrix ``A`` the
induced norm satisfies ``v(A) <= ||(r_ij)||_2`` where ``r_ij`` bounds the
norm of the block ``pi_i A iota_j`` from ``(X_j, v_j)`` to ``(X_i, v_i)``.

Also here: approximate extremal norms from truncated orbits, quadratic
(ellipsoidal) norms used to tighten JSR upper bounds, the flag rescaling
``T_eps`` and the comparison matrix ``Q(eps)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc, norm as _normal

from .core import MatrixSet, as_matrix, iter_levels
from .errors import InvalidInputError, PreconditionError
from .reducibility import Flag, block_decompose

DEFAULT_SAMPLES = 10_000


# ---------------------------------------------------------------------------
# per-block norms
# ---------------------------------------------------------------------------

class WeightedEuclidean:
    """``v(x) = ||W x||_2`` for an invertible ``W``.

    ``c^-`` and ``c^+`` are the extreme singular values of ``W`` and induced
    norms between weighted Euclidean norms are computed exactly.
    """

    exact = True

    def __init__(self, W):
        W = np.atleast_2d(np.asarray(W))
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise InvalidInputError("weight must be a square matrix")
        s = np.linalg.svd(W, compute_uv=False)
        if s[-1] <= 0:
            raise InvalidInputError("weight matrix must be invertible")
        self.W = W
        self.Winv = np.linalg.inv(W)
        self.dim = W.shape[0]
        self._c = (float(s[-1]), float(s[0]))

    @classmethod
    def identity(cls, dim: int) -> "WeightedEuclidean":
        return cls(np.eye(dim))

    def __call__(self, X):
        """Norm of each column of ``X`` (a vector gives a scalar)."""
        X = np.asarray(X)
        return np.linalg.norm(self.W @ X, axis=0)

    def c_bracket(self):
        """``(c^- lower, c^- upper, c^+ lower, c^+ upper)``."""
        lo, hi = self._c
        return lo, lo, hi, hi

    def corners(self):
        _, _, Vh = np.linalg.svd(self.W)
        return Vh.conj()  # rows: right singular vectors (extremal directions)


class WeightedMax:
    """``v(x) = max_i w_i |x_i|`` with positive weights."""

    exact = True

    def __init__(self, w):
        w = np.asarray(w, dtype=float).ravel()
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise InvalidInputError("weights must be positive and finite")
        self.w = w
        self.dim = len(w)

    def __call__(self, X):
        X = np.asarray(X)
        if X.ndim == 1:
            return float(np.max(self.w * np.abs(X)))
        return np.max(self.w[:, None] * np.abs(X), axis=0)

    def c_bracket(self):
        cp = float(self.w.max())
        # minimum over the sphere: equalize w_i |x_i| = t
        cm = float(1.0 / np.sqrt(np.sum(1.0 / self.w**2)))
        return cm, cm, cp, cp

    def corners(self):
        t = 1.0 / self.w
        return np.vstack([np.eye(self.dim), (t / np.linalg.norm(t))[None]])


def _induced_bound(vi, vj, B) -> float:
    """Upper bound for ``sup v_i(B x) / v_j(x)``."""
    if not np.any(B):
        return 0.0
    if isinstance(vi, WeightedEuclidean) and isinstance(vj, WeightedEuclidean):
        return float(np.linalg.norm(vi.W @ B @ vj.Winv, 2))
    # ||.||_2 comparison through the eccentricity constants
    cp_hi = vi.c_bracket()[3]
    cm_lo = vj.c_bracket()[0]
    return float(cp_hi * np.linalg.norm(B, 2) / cm_lo)


# ---------------------------------------------------------------------------
# combined block norm
# ---------------------------------------------------------------------------

class BlockNorm:
    """Flag-adapted norm ``v(x) = ||(v_i(X_i^H x))_i||_2``.

    Parameters
    ----------
    pieces : sequence of ndarray
        Orthonormal bases ``X_i`` (``d x d_i``) whose columns together form a
        unitary matrix.
    components : sequence, optional
        Norms on each piece; Euclidean by default.
    """

    def __init__(self, pieces, components=None, tag="block"):
        pieces = [np.asarray(X) for X in pieces]
        if not pieces:
            raise InvalidInputError("need at least one block")
        U = np.concatenate(pieces, axis=1)
        d = U.shape[0]
        if U.shape[1] != d or not np.allclose(U.conj().T @ U, np.eye(d), atol=1e-10):
            raise InvalidInputError("pieces must form an orthonormal basis")
        if components is None:
            components = [WeightedEuclidean.identity(X.shape[1]) for X in pieces]
        if len(components) != len(pieces):
            raise InvalidInputError("one component norm per block is required")
        for X, c in zip(pieces, components):
            if c.dim != X.shape[1]:
                raise InvalidInputError("component dimension does not match its block")
        self.pieces = pieces
        self.components = list(components)
        self.d = d
        self.tag = tag

    @classmethod
    def from_flag(cls, flag: Flag, components=None, tag="block") -> "BlockNorm":
        return cls(flag.pieces, components, tag)

    @classmethod
    def euclidean(cls, d: int) -> "BlockNorm":
        return cls([np.eye(d)], tag="euclidean")

    @property
    def m(self) -> int:
        return len(self.pieces)

    def __call__(self, x):
        x = np.asarray(x)
        vals = np.stack([np.atleast_1d(c(X.conj().T @ x))
                         for X, c in zip(self.pieces, self.components)])
        out = np.sqrt(np.sum(np.abs(vals) ** 2, axis=0))
        return float(out[0]) if x.ndim == 1 else out

    def r_matrix(self, A) -> np.ndarray:
        """Block-to-block induced norm bounds ``r_ij``."""
        A = np.asarray(A)
        m = self.m
        r = np.zeros((m, m))
        for i, (Xi, vi) in enumerate(zip(self.pieces, self.components)):
            for j, (Xj, vj) in enumerate(zip(self.pieces, self.components)):
                r[i, j] = _induced_bound(vi, vj, Xi.conj().T @ A @ Xj)
        return r

    def operator_bound(self, A) -> float:
        return block_operator_bound(self, A)

    def stack_norms(self, stack):
        return np.array([block_operator_bound(self, A) for A in stack])


def block_operator_bound(v: BlockNorm, A) -> float:
    """``||(r_ij)||_2``, an upper bound for the ``v``-induced norm of ``A``."""
    A = as_matrix(A)
    if A.shape[0] != v.d:
        raise InvalidInputError("dimension mismatch")
    return float(np.linalg.norm(v.r_matrix(A), 2))


# ---------------------------------------------------------------------------
# eccentricity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EccentricityEstimate:
    """Brackets for ``c^-`` and ``c^+`` and the resulting eccentricity bracket."""

    c_minus_lower: float
    c_minus_upper: float
    c_plus_lower: float
    c_plus_upper: float

    @property
    def ecc_bracket(self) -> tuple:
        return (self.c_plus_lower / self.c_minus_upper,
                self.c_plus_upper / self.c_minus_lower)


def sphere_samples(d: int, count: int, seed: int = 0, complex_: bool = True) -> np.ndarray:
    """Quasi-random points on the unit sphere of ``C^d`` (or ``R^d``) as columns."""
    dim = 2 * d if complex_ else d
    u = qmc.Sobol(dim, scramble=True, seed=seed).random_base2(max(0, int(np.ceil(np.log2(count)))))[:count]
    g = _normal.ppf(np.clip(u, 1e-12, 1 - 1e-12)).T
    X = g[:d] + 1j * g[d:] if complex_ else g
    return X / np.linalg.norm(X, axis=0)


def eccentricity(v: BlockNorm, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> EccentricityEstimate:
    """Bracket ``c^-(v)``, ``c^+(v)`` and ``ecc_2(v) = c^+/c^-``.

    Sampled extrema (quasi-random sphere points plus block corner vectors)
    give the inner sides; the outer sides come from the component brackets,
    using ``min_i c^-(v_i) <= v(x) <= max_i c^+(v_i)`` on the unit sphere
    (both attained inside a single block).
    """
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    X = sphere_samples(v.d, samples, seed)
    corners = []
    for P, c in zip(v.pieces, v.components):
        if hasattr(c, "corners"):
            C = np.atleast_2d(c.corners())
            corners.append(P @ C.T)
        corners.append(P)
    X = np.concatenate([X] + corners, axis=1)
    X = X / np.linalg.norm(X, axis=0)
    vals = v(X)
    s_lo, s_hi = float(vals.min()), float(vals.max())
    comp = [c.c_bracket() for c in v.components]
    cm_lo = min(b[0] for b in comp)
    cp_hi = max(b[3] for b in comp)
    cm_hi = min(s_lo, min(b[1] for b in comp))
    cp_lo = max(s_hi, max(b[2] for b in comp))
    return EccentricityEstimate(cm_lo, max(cm_hi, cm_lo), min(cp_lo, cp_hi), cp_hi)


# ---------------------------------------------------------------------------
# approximate extremal norms
# ---------------------------------------------------------------------------

class ExtremalNormApprox:
    """Truncated orbit norm ``v_K(x) = max_{k <= K, S in S_k} ||S x||_2 / rho_hat^k``.

    Not claimed to be extremal: only its induced-norm upper bounds, which are
    valid for any norm, are used downstream.
    """

    def __init__(self, M: MatrixSet, rho_hat: float, depth: int = 6, budget=None):
        if rho_hat <= 0:
            raise InvalidInputError("rho_hat must be positive")
        if depth < 0:
            raise InvalidInputError("depth must be >= 0")
        self.base = M
        self.rho_hat = float(rho_hat)
        self.depth = int(depth)
        self.tag = f"extremal-K{depth}"
        d = M.d
        mats = [np.eye(d)[None].astype(M.stack.dtype)]
        levels = [0]
        last = None
        if depth > 0:
            for k, _, stack in iter_levels(M, depth, budget):
                mats.append(stack / self.rho_hat**k)
                levels.append(k)
                last = stack
        self._orbit = np.concatenate(mats)
        self._level = np.concatenate([np.full(len(m), k) for m, k in zip(mats, levels)])
        self._top = last  # unscaled S_K

    @property
    def d(self) -> int:
        return self.base.d

    dim = d  # lets the norm serve as the single component of a BlockNorm

    def __call__(self, x):
        x = np.asarray(x)
        X = x[:, None] if x.ndim == 1 else x
        vals = np.linalg.norm(self._orbit @ X, axis=1).max(axis=0)
        return float(vals[0]) if x.ndim == 1 else vals

    def attainment(self, X) -> np.ndarray:
        """Level ``k`` attaining the maximum for each column of ``X``.

        Where it is below ``K`` the extremal inequality ``v(Ax) <= rho_hat v(x)``
        holds exactly for every member ``A``.
        """
        vals = np.linalg.norm(self._orbit @ X, axis=1)
        return self._level[np.argmax(vals, axis=0)]

    def operator_bound(self, B) -> float:
        """``max_{k,S} ||S B||_2 / rho_hat^k``, valid for any matrix ``B`` (``v >= ||.||_2``)."""
        B = np.asarray(B)
        return float(np.linalg.norm(self._orbit @ B, 2, axis=(1, 2)).max())

    def member_bound(self, A) -> float:
        """``max(rho_hat, max_{S in S_K} ||S A||_2 / rho_hat^K)`` for a member ``A``."""
        if self.depth == 0:
            return float(np.linalg.norm(A, 2))
        top = np.linalg.norm(self._top @ np.asarray(A), 2, axis=(1, 2)).max()
        return float(max(self.rho_hat, top / self.rho_hat**self.depth))

    def set_bound(self, M: MatrixSet) -> float:
        """Upper bound for ``max_{A in M} v(A)`` (uses the member form when ``M`` is the base)."""
        if M.same_as(self.base):
            return max(self.member_bound(A) for A in M.members)
        return max(self.operator_bound(A) for A in M.members)

    def c_bracket(self):
        top = float(np.linalg.norm(self._orbit, 2, axis=(1, 2)).max())
        return 1.0, top, top, top

    def as_block_norm(self) -> BlockNorm:
        return BlockNorm([np.eye(self.d)], [self], tag=self.tag)


def extremal_norm_approx(M: MatrixSet, rho_hat: float, depth: int = 6, budget=None) -> ExtremalNormApprox:
    """Approximate extremal norm from the truncated, ``rho_hat``-normalized orbit."""
    return ExtremalNormApprox(M, rho_hat, depth, budget)


class QuadraticNorm:
    """Ellipsoidal norm ``||x||_P = ||L x||_2`` with ``P = L^H L`` positive definite.

    The induced norm of ``A`` is ``||L A L^{-1}||_2``, evaluated in batches,
    so it can be handed to :func:`jsrholder.bounds.bracket`.
    """

    def __init__(self, P, tag="quadratic"):
        P = np.asarray(P)
        P = 0.5 * (P + P.conj().T)
        try:
            C = np.linalg.cholesky(P)
        except np.linalg.LinAlgError as exc:
            raise InvalidInputError("P must be positive definite") from exc
        self.L = C.conj().T
        self.Linv = np.linalg.inv(self.L)
        self.tag = tag

    @classmethod
    def from_orbit(cls, M: MatrixSet, rho_hat: float, depth: int = 8, budget=None) -> "QuadraticNorm":
        """``P = I + sum_{k<=K} sum_{S in S_k} S^H S / rho_hat^{2k}``."""
        P = np.eye(M.d, dtype=M.stack.dtype)
        for k, _, stack in iter_levels(M, depth, budget):
            P = P + np.einsum("nji,njk->ik", stack.conj(), stack) / rho_hat ** (2 * k)
        P = P / np.linalg.norm(P, 2)
        return cls(P, tag=f"quadratic-K{depth}")

    def __call__(self, x):
        return np.linalg.norm(self.L @ np.asarray(x), axis=0)

    def stack_norms(self, stack):
        return np.linalg.norm(self.L @ stack @ self.Linv, 2, axis=(1, 2))


def refined_bracket(M: MatrixSet, n: int = 10, orbit_depth: int = 8, target: float | None = None,
                    max_n: int | None = None, budget=None):
    """Bracket with an added orbit-adapted quadratic norm.

    Starts at depth ``n``; when ``target`` is given, the depth is increased
    (up to ``max_n``) until the relative width is at most ``target``.
    """
    from .bounds import bracket
    from .errors import BudgetExceededError

    pilot = bracket(M, min(n, 6), budget=budget)
    norms = []
    if pilot.lower > 0:
        try:
            norms = [QuadraticNorm.from_orbit(M, pilot.lower, orbit_depth, budget)]
        except (InvalidInputError, FloatingPointError):
            norms = []
    b = bracket(M, n, norms=norms, budget=budget)
    if target is None:
        return b
    max_n = max_n or n + 8
    k = n
    while b.relative_width > target and k < max_n:
        k += 2
        try:
            b = bracket(M, k, norms=norms, budget=budget)
        except BudgetExceededError:
            break
    return b


# ---------------------------------------------------------------------------
# flag rescaling and the comparison matrix
# ---------------------------------------------------------------------------

def diagonal_rescale(M: MatrixSet, flag: Flag, eps: float) -> MatrixSet:
    """``T^{-1} A T`` in flag coordinates with ``T = diag(I, delta I, ..., delta^{m-1} I)``.

    ``delta = eps**(1/m)``, so block ``(i, j)`` is multiplied by ``delta**(j-i)``.
    """
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    if not flag.certified_for(M):
        raise PreconditionError("flag is not invariant for this set")
    m = flag.index_m
    delta = eps ** (1.0 / m)
    scale = np.concatenate([np.full(X.shape[1], delta**i) for i, X in enumerate(flag.pieces)])
    mats = [flag.to_coordinates(A) * (scale[None, :] / scale[:, None]) for A in M.members]
    return MatrixSet(mats, label=M.label)


@dataclass(frozen=True)
class QMatrix:
    """Comparison matrix ``Q(eps)`` together with the normalizing scaling used."""

    Q: np.ndarray
    eps: float
    scaling: tuple
    block_bounds: np.ndarray = field(repr=False)
    distortion: float = 1.0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.Q, 2))


def q_matrix(blocks: dict, flag: Flag, eps: float, rho_blocks) -> QMatrix:
    """Entrywise bound matrix for ``T_eps``-rescaled, ``eps``-inflated blocks.

    The blocks are first normalized by a block-diagonal positive similarity
    ``diag(s_1 I, ..., s_m I)`` with ``s_1 = 1`` and
    ``s_j = min(1, min_{i<j} s_i / c_ij)`` where ``c_ij`` is the largest
    spectral norm of block ``(i, j)`` over the members; afterwards every
    upper block has norm at most 1, and a unit perturbation block ``(i, j)``
    has norm at most ``s_j / s_i``.  Entries:

    * diagonal: ``rho_blocks[i] + eps``;
    * ``i < j``: ``(c'_ij + eps s_j/s_i) eps^{(j-i)/m}`` with ``c'_ij <= 1``;
    * ``i > j``: ``(s_j/s_i) eps^{(m-(i-j))/m}``.

    Diagonal entries assume norms on the pieces in which ``M_ii`` has norm at
    most ``rho_blocks[i]``; off-diagonal bounds are Euclidean.
    """
    if eps < 0:
        raise InvalidInputError("eps must be nonnegative")
    m = flag.index_m
    rho_blocks = np.asarray(rho_blocks, dtype=float)
    if rho_blocks.shape != (m,) or np.any(rho_blocks < 0):
        raise InvalidInputError("need one nonnegative block bound per flag piece")
    if set(blocks) != {(i, j) for i in range(m) for j in range(m)}:
        raise PreconditionError("blocks do not match the flag")
    c = np.zeros((m, m))
    for (i, j), mats in blocks.items():
        c[i, j] = max(np.linalg.norm(B, 2) for B in mats) if mats else 0.0
    s = np.ones(m)
    for j in range(1, m):
        cands = [s[i] / c[i, j] for i in range(j) if c[i, j] > 0]
        s[j] = min([1.0] + cands)
    Q = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            ratio = s[j] / s[i]
            if i == j:
                Q[i, j] = rho_blocks[i] + eps
            elif i < j:
                Q[i, j] = (c[i, j] * ratio + eps * ratio) * eps ** ((j - i) / m)
            else:
                Q[i, j] = ratio * eps ** ((m - (i - j)) / m)
    return QMatrix(Q, float(eps), tuple(s.tolist()), c, float(s.max() / s.min()))
