"""Pauli-basis transfer tensors and the matrix-free replica SRE operator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ResourceError, ValidationError
from .imps import ImpsState, balancing_gauge, transfer_dense
from .tensor_core import LinearOperatorHandle, top_k_eigen

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
PAULI_LABELS = "IXYZ"

DENSE_LIMIT = 4096
MAX_DIM = 1 << 22


@dataclass
class PauliTransferTensor:
    """e[a] for a in I, X, Y, Z plus the state's boundary vectors.

    ``weight`` is the per-site factor 1/2 that makes N contracted sites carry
    the 1/2**N of the Pauli sum.
    """

    data: np.ndarray
    left: np.ndarray
    right: np.ndarray
    weight: float = 0.5
    tensor: np.ndarray | None = None  # MPS tensor in the gauge used for data

    @property
    def bond(self) -> int:
        return self.data.shape[1]


@dataclass
class PauliMps(PauliTransferTensor):
    chi_t: int = 0
    truncation_log: list = field(default_factory=list)


def symmetric_gauge(state: ImpsState, rtol: float = 1e-12):
    """Tensor and environments in the gauge where both environments are diagonal.

    Returns ``(A', left, right)`` (bilinear convention, as on ImpsState) or None when the state is not injective or an
    environment is (numerically) rank deficient.
    """
    if not state.injective:
        return None
    g = balancing_gauge(state.left_env.T, state.right_env, rtol)
    if g is None:
        return None
    p, q, _ = g
    a = np.einsum("ij,sjk,kl->sil", p, state.tensor, q)
    # transform the environments rather than trusting diag(s): both are then
    # as accurate as the original fixed points
    right = p @ state.right_env @ p.conj().T
    left = q.T @ state.left_env @ q.conj()
    return a, left, right


def pauli_tensor(state: ImpsState) -> PauliTransferTensor:
    """Pauli transfer tensor of a qubit iMPS; e[I] is the transfer matrix.

    Injective states are first moved to the symmetric gauge: the replica
    eigenproblem inherits cond(X)**(4n) from an arbitrary gauge X, which
    ruins the spectrum for badly conditioned input tensors.
    """
    if state.d != 2:
        raise DimensionError(f"Pauli basis needs d=2, got d={state.d}")
    sym = symmetric_gauge(state)
    if sym is None:
        a, left, right = state.tensor, state.vec_left().copy(), state.vec_right().copy()
    else:
        a, left, right = sym
        left, right = left.ravel(), right.ravel()
    data = np.array([transfer_dense(a, p) for p in PAULI])
    return PauliTransferTensor(data, left, right, tensor=a)


def pauli_transfer_matrix(u) -> np.ndarray:
    """Real 4x4 matrix O with U^dag sigma_a U = sum_b O[a, b] sigma_b."""
    u = np.asarray(u, dtype=complex)
    o = np.einsum("ji,ajk,kl,blm->abim", u.conj(), PAULI, u, PAULI)
    o = np.einsum("abii->ab", o) / 2
    return o.real


def _double_fixed_points(e: np.ndarray):
    D = e.shape[1]

    def right(v):
        m = v.reshape(D, D)
        return np.einsum("aij,jk,alk->il", e, m, e.conj()).ravel()

    def left(v):
        m = v.reshape(D, D)
        return np.einsum("aji,jk,akl->il", e, m, e.conj()).ravel()

    op = LinearOperatorHandle(D * D, right, left)
    pairs = top_k_eigen(op, k=1 if D * D > DENSE_LIMIT else min(D * D, 2))
    r = pairs.right_vectors[:, 0].reshape(D, D)
    l = pairs.left_vectors[:, 0].reshape(D, D).T  # standard left fixed point
    return _psd(l), _psd(r)


def _psd(m: np.ndarray) -> np.ndarray:
    tr = np.trace(m)
    if abs(tr) > 0:
        m = m * (abs(tr) / tr)
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    if w.sum() < 0:
        w = -w
    w = np.clip(w, 0, None)
    return (v * w) @ v.conj().T


def truncate_pauli_mps(pt: PauliTransferTensor, chi_t: int, cutoff: float = 0.0) -> PauliMps:
    """Compress the bond of the Pauli tensor to ``chi_t`` with one symmetric SVD."""
    if chi_t < 1:
        raise ValidationError("chi_t must be >= 1")
    D = pt.bond
    if chi_t >= D and cutoff == 0:
        return PauliMps(pt.data.copy(), pt.left.copy(), pt.right.copy(), pt.weight, chi_t=D, truncation_log=[0.0])
    lfix, rfix = _double_fixed_points(pt.data)
    wl, vl = np.linalg.eigh(lfix)
    wr, vr = np.linalg.eigh(rfix)
    x = (vl * np.sqrt(np.clip(wl, 0, None))).conj().T  # l = X^dag X
    y = vr * np.sqrt(np.clip(wr, 0, None))  # r = Y Y^dag
    u, s, vh = np.linalg.svd(x @ y)
    keep = int(np.count_nonzero(s > 1e-14 * s[0]))
    if cutoff > 0:
        keep = min(keep, int(np.count_nonzero(s >= cutoff * s[0])))
    keep = max(1, min(keep, chi_t))
    discarded = float(np.sum(s[keep:] ** 2) / np.sum(s**2))
    sinv = 1.0 / np.sqrt(s[:keep])
    p_left = (sinv[:, None] * u[:, :keep].conj().T) @ x
    p_right = y @ (vh[:keep].conj().T * sinv[None, :])
    data = np.einsum("ij,ajk,kl->ail", p_left, pt.data, p_right)
    return PauliMps(data, pt.left @ p_right, p_left @ pt.right, pt.weight, chi_t=keep, truncation_log=[discarded])


class ReplicaOperator:
    """Matrix-free 2n-replica SRE transfer operator.

    Acts on vectors of dimension bond**(2n); the first n replica axes carry
    e[a] and the last n its elementwise conjugate.
    """

    def __init__(self, site: PauliTransferTensor, n: int, max_dim: int = MAX_DIM, unitary=None):
        if n < 2:
            raise ValidationError("replica order n must be >= 2")
        self.n = int(n)
        self.site = site
        self.bond = site.bond
        self.dim = self.bond ** (2 * self.n)
        if self.dim > max_dim:
            raise ResourceError(f"replica dimension {self.dim} exceeds budget {max_dim}")
        self.unitary = None if unitary is None else np.asarray(unitary, dtype=complex)
        e = site.data
        if self.unitary is not None:
            e = np.einsum("ab,bij->aij", pauli_transfer_matrix(self.unitary), e)
        self.e = e
        self._dense = None

    def _apply(self, v: np.ndarray, e: np.ndarray) -> np.ndarray:
        D, n = self.bond, self.n
        # axes are contracted two at a time with kron'd matrices: half the
        # passes over a memory-bound array (2n is always even)
        v = v.reshape((D * D,) * n)
        out = np.zeros_like(v)
        for a in range(4):  # fixed order keeps the reduction deterministic
            out += _cycle(v, _pair_mats(e[a], n))
        return (self.site.weight * out).ravel()

    def matvec(self, v) -> np.ndarray:
        return self._apply(np.asarray(v, dtype=complex), self.e)

    def rmatvec(self, v) -> np.ndarray:
        return self._apply(np.asarray(v, dtype=complex), np.transpose(self.e, (0, 2, 1)))

    def handle(self) -> LinearOperatorHandle:
        return LinearOperatorHandle(self.dim, self.matvec, self.rmatvec, dense=self._dense, dense_threshold=DENSE_LIMIT)

    def to_dense(self) -> np.ndarray:
        if self.dim > DENSE_LIMIT:
            raise ResourceError(f"dense materialization limited to dim <= {DENSE_LIMIT}")
        if self._dense is None:
            self._dense = self.handle().to_dense()
        return self._dense

    def boundary(self):
        """Replicated environments (L^(x)n (x) conj(L)^(x)n, same for R)."""
        return replicate(self.site.left, self.n), replicate(self.site.right, self.n)

    def identity_apply(self, v) -> np.ndarray:
        """Apply E^(x)2n (identity Pauli only, no weight)."""
        D, n = self.bond, self.n
        v = np.asarray(v, dtype=complex).reshape((D * D,) * n)
        return _cycle(v, _pair_mats(self.site.data[0], n)).ravel()


def _pair_mats(m: np.ndarray, n: int) -> list:
    """Matrices acting on replica axes (2j, 2j+1); the last n axes get conj(m)."""
    mc = m.conj()
    pick = [m if k < n else mc for k in range(2 * n)]
    return [np.kron(pick[2 * j], pick[2 * j + 1]) for j in range(n)]


def _cycle(w: np.ndarray, mats: list) -> np.ndarray:
    # contracting the leading axis appends the new one at the end, so after a
    # full cycle the axes are back in order without moveaxis copies
    for m in mats:
        w = np.tensordot(w, m, axes=([0], [1]))
    return w


def replicate(vec: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for k in range(2 * n):
        out = np.kron(out, vec if k < n else vec.conj())
    return out


def replica_operator(pm: PauliTransferTensor, n: int, max_dim: int = MAX_DIM) -> ReplicaOperator:
    return ReplicaOperator(pm, n, max_dim=max_dim)


def perturbed_operator(pm: PauliTransferTensor, n: int, u, max_dim: int = MAX_DIM) -> ReplicaOperator:
    """Replica operator of one site carrying the unitary ``u``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12):
        raise ValidationError("u must be a 2x2 unitary")
    return ReplicaOperator(pm, n, max_dim=max_dim, unitary=u)
