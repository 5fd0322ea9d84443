"""Common invariant subspaces, maximal flags and block-triangular forms.

A flag is stored as one unitary matrix ``Q`` together with the increasing
dimensions ``dims``; ``F_j`` is spanned by the first ``dims[j]`` columns.
In the coordinates ``Q^H A Q`` every member is block upper triangular, and
the diagonal blocks are the restrictions to the orthogonal pieces
``X_i = F_{i-1}^perp cap F_i``.

Detection is numerical: the reported index is the *detected* index, a lower
bound for the true reducibility index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MatrixSet, as_matrix
from .errors import InvalidInputError, PreconditionError

DEFAULT_TOL = 1e-8


def _phase_normalize(Q: np.ndarray) -> np.ndarray:
    Q = Q.copy()
    for j in range(Q.shape[1]):
        i = np.argmax(np.abs(Q[:, j]))
        z = Q[i, j]
        if z != 0:
            Q[:, j] *= np.conj(z) / abs(z)
    if np.iscomplexobj(Q) and np.allclose(Q.imag, 0, atol=0):
        Q = Q.real
    return Q


def _orthogonalize(w, Q):
    for _ in range(2):
        if Q:
            B = np.stack(Q, axis=1)
            w = w - B @ (B.conj().T @ w)
    return w


def _closure(mats, norms, v, tol):
    v = np.asarray(v)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise InvalidInputError("seed vector must be nonzero")
    dtype = np.result_type(v.dtype, *[A.dtype for A in mats])
    basis = [(v / nv).astype(dtype)]
    d = len(v)
    j = 0
    while j < len(basis) and len(basis) < d:
        q = basis[j]
        for A, nA in zip(mats, norms):
            if nA == 0:
                continue
            w = _orthogonalize(A @ q, basis)
            nw = np.linalg.norm(w)
            if nw > tol * nA:
                basis.append(w / nw)
                if len(basis) == d:
                    break
        j += 1
    return np.stack(basis, axis=1)


def _residual(mats, norms, W) -> float:
    """max_A ||(I - W W^H) A W||_2 / ||A||_2."""
    worst = 0.0
    for A, nA in zip(mats, norms):
        if nA == 0:
            continue
        R = A @ W
        R = R - W @ (W.conj().T @ R)
        worst = max(worst, np.linalg.norm(R, 2) / nA)
    return worst


def minimal_invariant_subspace(M, v, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the smallest common invariant subspace containing ``v``.

    Built by closing ``span{v}`` under all members; a new direction is kept
    when its residual after orthogonalization exceeds ``tol * ||A||_2``.
    """
    mats = list(M.members) if isinstance(M, MatrixSet) else [as_matrix(A) for A in M]
    norms = [np.linalg.norm(A, 2) for A in mats]
    v = np.asarray(v)
    if v.shape != (mats[0].shape[0],):
        raise InvalidInputError("seed vector has the wrong length")
    return _closure(mats, norms, v, tol / np.sqrt(len(v)))


def _eigen_seeds(C: np.ndarray) -> list:
    """Eigenvector seeds of ``C``; clusters of close eigenvalues are resolved by an SVD
    of ``C - mean * I``, which stays accurate for defective eigenvalues."""
    d = C.shape[0]
    scale = max(np.linalg.norm(C, 2), 1e-300)
    lam = np.linalg.eigvals(C)
    ctol = 1e-6 * scale
    used = np.zeros(d, dtype=bool)
    seeds = []
    for i in range(d):
        if used[i]:
            continue
        group = [i]
        used[i] = True
        changed = True
        while changed:
            changed = False
            for j in range(d):
                if not used[j] and np.min(np.abs(lam[j] - lam[group])) <= ctol:
                    group.append(j)
                    used[j] = True
                    changed = True
        mu = lam[group].mean()
        _, s, Vh = np.linalg.svd(C - mu * np.eye(d))
        nullity = max(1, int(np.sum(s <= 1e-7 * scale)))
        nullity = min(nullity, len(group))
        for k in range(nullity):
            seeds.append(Vh[d - 1 - k].conj())
    return seeds


def _candidate_seeds(mats, rng, n_combos):
    d = mats[0].shape[0]
    seeds = [np.eye(d)[i] for i in range(d)]
    for A in mats:
        seeds += _eigen_seeds(A)
    q = len(mats)
    for _ in range(n_combos):
        w = rng.dirichlet(np.ones(q))
        seeds += _eigen_seeds(sum(wi * A for wi, A in zip(w, mats)))
    if q > 1 or n_combos:
        # a generic element of the generated algebra separates eigenvalue clusters
        coef = rng.normal(size=(q, q)) + 1j * rng.normal(size=(q, q))
        C = sum(coef[i, i] * mats[i] for i in range(q))
        C = C + 0.5 * sum(coef[i, j] * mats[i] @ mats[j] for i in range(q) for j in range(q) if i != j)
        seeds += _eigen_seeds(C)
    return seeds


def _find_invariant(mats, rng, tol, n_combos):
    """Smallest certified proper common invariant subspace, or ``None``."""
    d = mats[0].shape[0]
    norms = [np.linalg.norm(A, 2) for A in mats]
    ctol = tol / np.sqrt(d)
    best = None
    for adjoint in (False, True):
        use = [A.conj().T for A in mats] if adjoint else mats
        for v in _candidate_seeds(use, rng, n_combos):
            if np.linalg.norm(v) == 0:
                continue
            W = _closure(use, norms, v, ctol)
            r = W.shape[1]
            if r >= d:
                continue
            if adjoint:
                # the orthogonal complement of an adjoint-invariant subspace is invariant
                Qf, _ = np.linalg.qr(W, mode="complete")
                W = Qf[:, r:]
                r = d - r
            if best is not None and r >= best.shape[1]:
                continue
            if _residual(mats, norms, W) <= tol:
                best = W
                if r == 1:
                    return best
    return best


def _complement(W: np.ndarray) -> np.ndarray:
    Qf, _ = np.linalg.qr(W, mode="complete")
    return _phase_normalize(Qf[:, W.shape[1]:])


def _split(mats, rng, tol, n_combos):
    dd = mats[0].shape[0]
    dtype = np.result_type(*[A.dtype for A in mats])
    if dd == 1:
        return np.eye(1, dtype=dtype), [1]
    W = _find_invariant(mats, rng, tol, n_combos)
    if W is None:
        return np.eye(dd, dtype=dtype), [dd]
    W = _phase_normalize(np.linalg.qr(W)[0])
    C = _complement(W)
    Q1, dims1 = _split([W.conj().T @ A @ W for A in mats], rng, tol, n_combos)
    Q2, dims2 = _split([C.conj().T @ A @ C for A in mats], rng, tol, n_combos)
    r = W.shape[1]
    Q = np.concatenate([W @ Q1, C @ Q2], axis=1)
    return Q, dims1 + [r + x for x in dims2]


@dataclass(frozen=True, eq=False)
class Flag:
    """Nested common invariant subspaces ``F_1 < ... < F_m = K^d``."""

    d: int
    basis: np.ndarray
    dims: tuple
    tol: float
    residual: float

    @property
    def index_m(self) -> int:
        return len(self.dims)

    @property
    def bases(self) -> tuple:
        """Orthonormal bases ``U_j`` of ``F_j`` (``d x dim F_j``)."""
        return tuple(self.basis[:, :k] for k in self.dims)

    @property
    def pieces(self) -> tuple:
        """Orthonormal bases of the pieces ``X_i`` with ``F_{i-1} + X_i = F_i``."""
        starts = (0,) + self.dims[:-1]
        return tuple(self.basis[:, a:b] for a, b in zip(starts, self.dims))

    def residual_for(self, M: MatrixSet) -> float:
        """Largest relative invariance residual over members and flag levels."""
        norms = [np.linalg.norm(A, 2) for A in M.members]
        return max(_residual(M.members, norms, U) for U in self.bases)

    def certified_for(self, M: MatrixSet) -> bool:
        return M.d == self.d and self.residual_for(M) <= self.tol

    def to_coordinates(self, A: np.ndarray) -> np.ndarray:
        return self.basis.conj().T @ A @ self.basis


def coordinate_flag(d: int, dims=None, tol: float = DEFAULT_TOL) -> Flag:
    """Flag spanned by leading coordinate vectors (``dims`` defaults to ``1..d``)."""
    dims = tuple(range(1, d + 1)) if dims is None else tuple(dims)
    return Flag(d, np.eye(d), dims, tol, 0.0)


def maximal_flag(M: MatrixSet, tol: float = DEFAULT_TOL, seed: int = 0,
                 n_combos: int = 10) -> Flag:
    """Detect a maximal common invariant flag by recursive splitting.

    At each stage the smallest certified proper invariant subspace found from
    the seeds (coordinate vectors, eigenvectors of members and of random
    combinations, and the same for the adjoint set) is split off; the
    restriction and the quotient are then treated recursively.
    """
    rng = np.random.default_rng(seed)
    mats = list(M.members)
    Q, dims = _split(mats, rng, tol, n_combos)
    Q = _phase_normalize(Q) if Q.shape[1] == 1 else Q
    flag = Flag(M.d, Q, tuple(dims), tol, 0.0)
    res = flag.residual_for(M)
    return Flag(M.d, Q, tuple(dims), tol, res)


def block_decompose(M: MatrixSet, flag: Flag) -> dict:
    """All blocks ``X_i^H A X_j`` as ``{(i, j): [block for each member]}`` (0-based).

    Blocks below the diagonal are numerically zero (bounded by ``tol * ||A||_2``).
    """
    if not flag.certified_for(M):
        raise PreconditionError(
            f"flag is not invariant for this set at tol={flag.tol:g} "
            f"(residual {flag.residual_for(M):.3g})")
    X = flag.pieces
    out = {}
    for i, Xi in enumerate(X):
        for j, Xj in enumerate(X):
            out[(i, j)] = [Xi.conj().T @ A @ Xj for A in M.members]
    return out


def diagonal_blocks(M: MatrixSet, flag: Flag) -> list:
    """The diagonal block sets ``M_ii`` as matrix sets; ``rho(M) = max_i rho(M_ii)``."""
    blocks = block_decompose(M, flag)
    return [MatrixSet(blocks[(i, i)]) for i in range(flag.index_m)]
