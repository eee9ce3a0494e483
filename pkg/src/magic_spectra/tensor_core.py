"""Dense tensor helpers and a top-k eigensolver for non-Hermitian operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigs

from .errors import ConvergenceError, DecompositionError, DimensionError, ValidationError

DENSE_THRESHOLD = 4096


def as_tensor(x, ndim: int | None = None) -> np.ndarray:
    """Return ``x`` as a finite complex array, optionally checking its rank."""
    arr = np.asarray(x, dtype=complex)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionError(f"expected rank-{ndim} tensor, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("tensor contains NaN or Inf")
    return arr


def contract(a, b, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Contract ``a`` and ``b`` over index pairs ``(axis_a, axis_b)``.

    Free indices of ``a`` come first, then those of ``b``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    ia = [p[0] for p in pairs]
    ib = [p[1] for p in pairs]
    for i, j in zip(ia, ib):
        if a.shape[i] != b.shape[j]:
            raise DimensionError(
                f"extent mismatch: axis {i} of a has {a.shape[i]}, axis {j} of b has {b.shape[j]}"
            )
    return np.tensordot(a, b, axes=(ia, ib))


def svd_truncate(m, max_rank: int, cutoff: float = 0.0):
    """Truncated SVD ``m ~ U diag(S) V``.

    Singular values below ``cutoff * S_max`` and beyond ``max_rank`` are dropped.
    Returns ``(U, S, V, discarded_weight)`` where the weight is the sum of the
    squared dropped singular values.
    """
    if max_rank < 1:
        raise ValidationError("max_rank must be >= 1")
    if cutoff < 0:
        raise ValidationError("cutoff must be non-negative")
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionError("svd_truncate expects a matrix")
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(str(exc)) from exc
    keep = min(max_rank, s.size)
    if s.size and cutoff > 0:
        keep = min(keep, int(np.count_nonzero(s >= cutoff * s[0])))
    keep = max(keep, 1)
    discarded = float(np.sum(s[keep:] ** 2))
    return u[:, :keep], s[:keep], vh[:keep], discarded


class LinearOperatorHandle:
    """Square linear map given by its action on vectors.

    ``rmatvec`` applies the plain transpose (no conjugation); it is used for
    left eigenvectors under the bilinear pairing ``(l|r) = l @ r``.
    """

    def __init__(
        self,
        dim: int,
        matvec: Callable[[np.ndarray], np.ndarray],
        rmatvec: Callable[[np.ndarray], np.ndarray] | None = None,
        dense: np.ndarray | None = None,
        dense_threshold: int = DENSE_THRESHOLD,
    ):
        self.dim = int(dim)
        self._matvec = matvec
        self._rmatvec = rmatvec
        self._dense = dense
        self.dense_threshold = dense_threshold

    @classmethod
    def from_matrix(cls, m) -> "LinearOperatorHandle":
        m = np.asarray(m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("operator matrix must be square")
        return cls(m.shape[0], lambda v: m @ v, lambda v: m.T @ v, dense=m)

    @property
    def is_dense_materializable(self) -> bool:
        return self._dense is not None or self.dim <= self.dense_threshold

    def apply(self, v) -> np.ndarray:
        return self._matvec(np.asarray(v, dtype=complex))

    def apply_transpose(self, v) -> np.ndarray:
        if self._rmatvec is None:
            return self.to_dense().T @ np.asarray(v, dtype=complex)
        return self._rmatvec(np.asarray(v, dtype=complex))

    def to_dense(self) -> np.ndarray:
        if self._dense is None:
            cols = [self._matvec(c) for c in np.eye(self.dim, dtype=complex)]
            self._dense = np.array(cols).T
        return self._dense

    def as_scipy(self, transpose: bool = False) -> LinearOperator:
        f = self.apply_transpose if transpose else self.apply
        return LinearOperator((self.dim, self.dim), matvec=f, dtype=complex)


@dataclass
class EigenPairs:
    values: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    residuals: np.ndarray
    groups: list = field(default_factory=list)

    def __len__(self):
        return len(self.values)


def eigen_order(values, rtol: float = 1e-12) -> np.ndarray:
    """Indices sorting by modulus (desc), then real part (desc), then imag (desc)."""
    values = np.asarray(values)
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    q = rtol * scale
    mod = np.round(np.abs(values) / q) * q
    return np.lexsort((-values.imag, -values.real, -mod))


def group_eigenvalues(values, rtol: float = 1e-8) -> list[list[int]]:
    """Partition sorted eigenvalues into degeneracy groups.

    Two values join a group when ``|a - b| <= rtol * max(1, |a|)``.
    """
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        for grp in groups:
            ref = values[grp[0]]
            if abs(v - ref) <= rtol * max(1.0, abs(ref)):
                grp.append(i)
                break
        else:
            groups.append([i])
    return groups


def biorthonormalize(right: np.ndarray, left: np.ndarray, groups) -> np.ndarray:
    """Rescale left vectors so that ``left[:, g].T @ right[:, g] = I`` per group.

    Groups whose Gram matrix is singular (defective blocks) are left untouched.
    """
    left = left.copy()
    for grp in groups:
        gram = left[:, grp].T @ right[:, grp]
        if np.linalg.cond(gram) > 1e12:
            continue
        left[:, grp] = left[:, grp] @ np.linalg.inv(gram).T
    return left


def _residuals(op: LinearOperatorHandle, values, right) -> np.ndarray:
    res = []
    for k, mu in enumerate(values):
        r = right[:, k]
        nr = np.linalg.norm(r)
        res.append(np.linalg.norm(op.apply(r) - mu * r) / nr if nr > 0 else np.inf)
    return np.array(res)


def _match_left(values, lvals, lvecs, rtol):
    """Pick, for every right eigenvalue, a distinct left vector with the same eigenvalue."""
    used = np.zeros(len(lvals), dtype=bool)
    out = np.zeros((lvecs.shape[0], len(values)), dtype=complex)
    for k, mu in enumerate(values):
        d = np.abs(lvals - mu)
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        out[:, k] = lvecs[:, j]
    return out


def _arnoldi(lin, k, tol, v0, ncv, maxiter, retries: int = 3):
    # ARPACK can stall on highly degenerate spectra ("no shifts could be
    # applied"); a larger Krylov space usually fixes it
    for attempt in range(retries):
        try:
            return eigs(lin, k=k, which="LM", tol=tol, v0=v0, ncv=ncv, maxiter=maxiter)
        except ArpackNoConvergence as exc:
            last = exc
        except ArpackError as exc:
            last = exc
        ncv = min(lin.shape[0], 2 * ncv + 1)
    raise ConvergenceError(f"Arnoldi failed for k={k} after {retries} attempts: {last}", residuals=getattr(last, "eigenvalues", None)) from last


def top_k_eigen(
    op: LinearOperatorHandle,
    k: int,
    tol: float = 1e-12,
    seed: int = 0,
    dense_threshold: int | None = None,
    maxiter: int | None = None,
    group_rtol: float = 1e-8,
) -> EigenPairs:
    """Largest-modulus eigenpairs with biorthonormal left vectors.

    Uses a dense decomposition when ``op.dim`` is at most ``dense_threshold``
    (default 4096) and implicitly restarted Arnoldi otherwise.
    """
    if k < 1 or k > op.dim:
        raise ValidationError(f"k must be in [1, {op.dim}]")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    threshold = op.dense_threshold if dense_threshold is None else dense_threshold
    if op.dim <= threshold or op.dim <= k + 2:
        m = op.to_dense()
        w, v = np.linalg.eig(m)
        wl, vl = np.linalg.eig(m.T)
        order = eigen_order(w)[:k]
        values, right = w[order], v[:, order]
        left = _match_left(values, wl, vl, group_rtol)
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        # a wide Krylov space rescues rank-1-plus-nilpotent spectra; past ~1e5
        # the Lanczos vectors dominate the cost, and the retry widens anyway
        ncv = min(op.dim, max(4 * k + 1, 40 if op.dim <= 1 << 17 else 20))
        w, v = _arnoldi(op.as_scipy(), k, tol, v0, ncv, maxiter)
        wl, vl = _arnoldi(op.as_scipy(True), k, tol, v0, ncv, maxiter)
        order = eigen_order(w)
        values, right = w[order], v[:, order]
        left = _match_left(values, wl, vl, group_rtol)
    groups = group_eigenvalues(values, group_rtol)
    left = biorthonormalize(right, left, groups)
    return EigenPairs(values, right, left, _residuals(op, values, right), groups)
