"""Matrix sets, norms, metrics and product enumeration.

Everything else in the package is built on the objects defined here:

* :class:`MatrixSet` -- a finite, nonempty set of ``d x d`` matrices.
* :func:`iter_levels` -- level-by-level enumeration of all products
  ``A_{i_k} ... A_{i_1}`` with prefix products cached, in lexicographic word
  order, optionally pruned.
* :class:`Ball` / :class:`InflatedSet` -- the symbolic set ``M + eps * B_V``.

Words are tuples ``(i_1, ..., i_k)`` of member indices; the associated product
applies ``A_{i_1}`` first, i.e. ``word_product(M, (i_1, ..., i_k)) ==
A_{i_k} @ ... @ A_{i_1}``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceededError, InvalidInputError

DEFAULT_BUDGET = 10**7
_CHUNK = 1 << 17

Word = tuple  # tuple[int, ...]


def product_budget(budget: int | None = None) -> int:
    """Resolve an enumeration budget: explicit value, then ``JSR_BUDGET``, then default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get("JSR_BUDGET")
    if env:
        try:
            return int(float(env))
        except ValueError:
            raise InvalidInputError(f"JSR_BUDGET={env!r} is not a number") from None
    return DEFAULT_BUDGET


def as_matrix(A) -> np.ndarray:
    """Validate ``A`` as a finite square matrix and return a read-only copy."""
    arr = np.array(A)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InvalidInputError(f"expected a nonempty square matrix, got shape {arr.shape}")
    if not (np.issubdtype(arr.dtype, np.floating) or np.issubdtype(arr.dtype, np.complexfloating)
            or np.issubdtype(arr.dtype, np.integer)):
        raise InvalidInputError(f"unsupported dtype {arr.dtype}")
    arr = arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("matrix has non-finite entries")
    arr.setflags(write=False)
    return arr


def _chunked(fn, stack: np.ndarray) -> np.ndarray:
    if len(stack) <= _CHUNK:
        return fn(stack)
    return np.concatenate([fn(stack[i:i + _CHUNK]) for i in range(0, len(stack), _CHUNK)])


def spectral_radii(stack: np.ndarray) -> np.ndarray:
    """Spectral radius of every matrix in a ``(N, d, d)`` stack (LAPACK ``geev``)."""
    stack = np.asarray(stack)
    if stack.shape[-1] == 1:
        return np.abs(stack[:, 0, 0])
    return _chunked(lambda s: np.abs(np.linalg.eigvals(s)).max(axis=1), stack)


def stack_norms(stack: np.ndarray, which: str = "spectral") -> np.ndarray:
    """Spectral or Frobenius norm of every matrix in a ``(N, d, d)`` stack."""
    stack = np.asarray(stack)
    if which == "frobenius":
        return np.sqrt(np.sum(np.abs(stack) ** 2, axis=(1, 2)))
    if which != "spectral":
        raise InvalidInputError(f"unknown norm {which!r}; use 'spectral' or 'frobenius'")
    if stack.shape[-1] == 1:
        return np.abs(stack[:, 0, 0])
    if stack.shape[-1] == 2 and not np.iscomplexobj(stack):
        return _norms_2x2(stack)
    return _chunked(lambda s: np.linalg.svd(s, compute_uv=False)[:, 0], stack)


def _norms_2x2(stack: np.ndarray) -> np.ndarray:
    # sigma_max of [[a, b], [c, d]] as half the sum of two hypotenuses (no cancellation)
    a, b, c, d = stack[:, 0, 0], stack[:, 0, 1], stack[:, 1, 0], stack[:, 1, 1]
    return 0.5 * (np.hypot(a + d, b - c) + np.hypot(a - d, b + c))


def spectral_radius(A) -> float:
    """Largest eigenvalue modulus of ``A``.

    >>> spectral_radius([[0.0, 1.0], [0.25, 0.0]])
    0.5
    """
    A = as_matrix(A)
    return float(spectral_radii(A[None])[0])


def operator_norm(A, which: str = "spectral") -> float:
    """Spectral (largest singular value) or Frobenius norm of ``A``."""
    A = as_matrix(A)
    return float(stack_norms(A[None], which)[0])


class MatrixSet:
    """A nonempty finite set of ``d x d`` matrices.

    Exact (bitwise) duplicates are dropped at construction; near-duplicates are
    kept on purpose. Members keep their input order, which defines the member
    indices used in words.
    """

    def __init__(self, members, label: str | None = None):
        mats = [as_matrix(A) for A in members]
        if not mats:
            raise InvalidInputError("a matrix set needs at least one member")
        d = mats[0].shape[0]
        if any(A.shape[0] != d for A in mats):
            raise InvalidInputError("all members must have the same dimension")
        complex_ = any(np.iscomplexobj(A) for A in mats)
        seen, unique = set(), []
        for A in mats:
            if complex_ and not np.iscomplexobj(A):
                A = as_matrix(A.astype(np.complex128))
            key = A.tobytes()
            if key not in seen:
                seen.add(key)
                unique.append(A)
        self.members = tuple(unique)
        self.label = label

    @property
    def d(self) -> int:
        return self.members[0].shape[0]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    @cached_property
    def stack(self) -> np.ndarray:
        s = np.stack(self.members)
        s.setflags(write=False)
        return s

    def same_as(self, other: "MatrixSet") -> bool:
        """Set equality (order-insensitive, exact)."""
        if self.d != other.d:
            return False
        return {A.tobytes() for A in _common_dtype(self)} == {
            A.tobytes() for A in _common_dtype(other)}

    def __eq__(self, other):
        if not isinstance(other, MatrixSet):
            return NotImplemented
        return self.same_as(other)

    def __hash__(self):
        return hash(frozenset(A.tobytes() for A in _common_dtype(self)))

    def __repr__(self):
        name = f" {self.label!r}" if self.label else ""
        return f"<MatrixSet{name} d={self.d} |M|={len(self)}>"


def _common_dtype(M: MatrixSet):
    return [A.astype(np.complex128) for A in M.members]


def word_product(M: MatrixSet, word: Sequence[int]) -> np.ndarray:
    """Product ``A_{i_k} ... A_{i_1}`` for ``word = (i_1, ..., i_k)``."""
    if len(word) == 0:
        raise InvalidInputError("words have length >= 1")
    P = np.eye(M.d, dtype=M.stack.dtype)
    for i in word:
        if not 0 <= i < len(M):
            raise InvalidInputError(f"member index {i} out of range")
        P = M.members[i] @ P
    return P


def decode_word(code: int, k: int, base: int) -> Word:
    """Invert the lexicographic level code ``sum_j i_j * base**(k-j)``."""
    out = []
    for _ in range(k):
        code, r = divmod(int(code), base)
        out.append(r)
    return tuple(reversed(out))


def iter_levels(M: MatrixSet, n: int, budget: int | None = None, prune=None,
                check_full: bool = False) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Enumerate products level by level.

    Yields ``(k, codes, stack)`` for ``k = 1..n`` where ``stack[i]`` is the
    product of the word with lexicographic code ``codes[i]`` (see
    :func:`decode_word`). Codes are increasing, so the stream is in
    lexicographic word order.

    ``prune(k, codes, stack)`` may return a boolean mask; only prefixes with
    ``True`` are extended to level ``k + 1``. The budget applies to the number
    of products materialized at one level (``|M|^k`` if ``check_full`` or no
    pruning).
    """
    budget = product_budget(budget)
    if n < 1:
        raise InvalidInputError("depth must be >= 1")
    q = len(M)
    members = M.stack
    codes = np.arange(q, dtype=np.int64)
    stack = members
    for k in range(1, n + 1):
        count = q**k if (check_full or prune is None) else len(stack)
        if count > budget:
            raise BudgetExceededError(count, budget)
        yield k, codes, stack
        if k == n:
            return
        if prune is not None:
            keep = np.asarray(prune(k, codes, stack), dtype=bool)
            codes, stack = codes[keep], stack[keep]
        if q**(k + 1) >= 2**62:
            raise BudgetExceededError(q**(k + 1), budget)
        nxt = len(stack) * q
        if nxt > budget:
            raise BudgetExceededError(nxt if prune is not None else q**(k + 1), budget)
        stack = np.matmul(members[None, :], stack[:, None]).reshape(nxt, M.d, M.d)
        codes = (codes[:, None] * q + np.arange(q, dtype=np.int64)[None, :]).reshape(-1)


def enumerate_products(M: MatrixSet, k: int, budget: int | None = None
                       ) -> Iterator[tuple[Word, np.ndarray]]:
    """Yield every ``(word, product)`` of length ``k`` in lexicographic order."""
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    budget = product_budget(budget)
    if len(M)**k > budget:
        raise BudgetExceededError(len(M)**k, budget)
    for level, codes, stack in iter_levels(M, k, budget):
        if level == k:
            for c, P in zip(codes, stack):
                yield decode_word(c, k, len(M)), P


def hausdorff_distance(M: MatrixSet, N: MatrixSet) -> float:
    """Hausdorff distance between two finite sets under the spectral norm."""
    if M.d != N.d:
        raise InvalidInputError(f"dimension mismatch: {M.d} vs {N.d}")
    diff = M.stack[:, None] - N.stack[None, :]
    D = stack_norms(diff.reshape(-1, M.d, M.d)).reshape(len(M), len(N))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def balanced_hull(M: MatrixSet) -> MatrixSet:
    """Vertex representation ``M u -M`` of the balanced convex hull (same JSR)."""
    return MatrixSet(list(M.members) + [-A for A in M.members], label=M.label)


def scale(M: MatrixSet, c: float) -> MatrixSet:
    """Multiply every member by ``c > 0``."""
    if not c > 0:
        raise InvalidInputError("scale factor must be positive")
    return MatrixSet([c * A for A in M.members], label=M.label)


def random_unitary(d: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    """Haar-distributed orthogonal/unitary matrix."""
    Z = rng.normal(size=(d, d))
    if not real:
        Z = Z + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph[None, :]


def conjugate(M: MatrixSet, U: np.ndarray) -> MatrixSet:
    """``{U^H A U}`` for unitary ``U``."""
    return MatrixSet([U.conj().T @ A @ U for A in M.members], label=M.label)


# ---------------------------------------------------------------------------
# Inflated sets M + eps * B_V


@dataclass(frozen=True, eq=False)
class Ball:
    """Unit ball ``{B in V : ||B|| <= 1}`` of a subspace ``V`` of matrix space.

    ``basis=None`` means ``V`` is all of ``K^{d x d}``. ``norm`` is
    ``"spectral"`` or ``"frobenius"``.
    """

    d: int
    basis: tuple | None = None
    norm: str = "spectral"
    _onb: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.norm not in ("spectral", "frobenius"):
            raise InvalidInputError(f"unknown ball norm {self.norm!r}")
        if self.basis is None:
            onb = np.eye(self.d * self.d)
        else:
            mats = [np.asarray(B, dtype=np.complex128) for B in self.basis]
            if not mats or any(B.shape != (self.d, self.d) for B in mats):
                raise InvalidInputError("ball basis must be a nonempty list of d x d matrices")
            V = np.stack([B.reshape(-1) for B in mats], axis=1)
            q, r = np.linalg.qr(V)
            diag = np.abs(np.diag(r))
            if diag.min() <= 1e-12 * max(diag.max(), 1.0):
                raise InvalidInputError("ball basis is linearly dependent")
            onb = q
            if all(not np.iscomplexobj(np.asarray(B)) for B in self.basis) and np.allclose(q.imag, 0):
                onb = q.real
        object.__setattr__(self, "_onb", onb)

    @property
    def full(self) -> bool:
        return self.basis is None

    def project(self, B: np.ndarray) -> np.ndarray:
        """Frobenius-orthogonal projection of ``B`` onto ``V``."""
        if self.full:
            return np.asarray(B)
        v = np.asarray(B).reshape(-1)
        return (self._onb @ (self._onb.conj().T @ v)).reshape(self.d, self.d)

    def normalize(self, B: np.ndarray) -> np.ndarray | None:
        """Project onto ``V`` and scale to unit ball-norm; ``None`` if it vanishes."""
        P = self.project(B)
        nrm = operator_norm(P, self.norm) if np.any(P) else 0.0
        if nrm <= 1e-14:
            return None
        return P / nrm

    def sample(self, rng: np.random.Generator, count: int, complex_: bool = False) -> list:
        """Random unit-norm elements of ``V``."""
        out = []
        dim = self._onb.shape[1]
        while len(out) < count:
            c = rng.normal(size=dim)
            if complex_:
                c = c + 1j * rng.normal(size=dim)
            B = self.normalize((self._onb @ c).reshape(self.d, self.d))
            if B is not None:
                out.append(B)
        return out

    @property
    def spectral_sup(self) -> float:
        """Upper bound on ``sup ||B||_2`` over the ball (1 for both norms)."""
        return 1.0


@dataclass(frozen=True)
class InflatedSet:
    """Symbolic ``base + epsilon * ball``."""

    base: MatrixSet
    epsilon: float
    ball: Ball

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise InvalidInputError("epsilon must be nonnegative")
        if self.ball.d != self.base.d:
            raise InvalidInputError("ball dimension does not match the base set")


# ---------------------------------------------------------------------------
# JSON schema: {"d": int, "matrices": [d x d arrays of [re, im]], "label": str?}


def matrixset_to_dict(M: MatrixSet) -> dict:
    mats = []
    for A in M.members:
        Ac = A.astype(np.complex128)
        mats.append([[[float(z.real), float(z.imag)] for z in row] for row in Ac])
    out = {"d": M.d, "matrices": mats}
    if M.label is not None:
        out["label"] = M.label
    return out


def matrixset_from_dict(obj) -> MatrixSet:
    if not isinstance(obj, dict) or "matrices" not in obj or "d" not in obj:
        raise InvalidInputError("matrix-set JSON needs keys 'd' and 'matrices'")
    d = obj["d"]
    if not isinstance(d, int) or d < 1:
        raise InvalidInputError("'d' must be a positive integer")
    mats = []
    for idx, m in enumerate(obj["matrices"]):
        try:
            arr = np.asarray(m, dtype=float)
        except (TypeError, ValueError):
            raise InvalidInputError(f"matrix {idx}: entries must be numbers or [re, im] pairs") from None
        if arr.shape == (d, d):
            A = arr
        elif arr.shape == (d, d, 2):
            A = arr[..., 0] + 1j * arr[..., 1]
            if not np.any(arr[..., 1]):
                A = arr[..., 0]
        else:
            raise InvalidInputError(f"matrix {idx}: expected shape ({d},{d},2), got {arr.shape}")
        mats.append(A)
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise InvalidInputError("'label' must be a string")
    return MatrixSet(mats, label=label)


def dumps(M: MatrixSet) -> str:
    return json.dumps(matrixset_to_dict(M))


def loads(text: str) -> MatrixSet:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON: {exc}") from None
    return matrixset_from_dict(obj)
