"""Translation-invariant infinite MPS, the transfer matrix and block entropies."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, DimensionError, ValidationError
from .tensor_core import EigenPairs, LinearOperatorHandle, as_tensor, top_k_eigen

GAP_TOL = 1e-10


def _apply_axis(v: np.ndarray, m: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(m, v, axes=([1], [axis])), 0, axis)


def block_unit_cell(tensors) -> np.ndarray:
    """Merge a k-site unit cell into one site of physical dimension d**k."""
    tensors = [as_tensor(t, 3) for t in tensors]
    out = tensors[0]
    for t in tensors[1:]:
        if t.shape[1] != out.shape[2]:
            raise DimensionError("bond dimensions of the unit cell do not chain")
        merged = np.einsum("aij,bjk->abik", out, t)
        out = merged.reshape(out.shape[0] * t.shape[0], out.shape[1], t.shape[2])
    return out


def transfer_dense(a: np.ndarray, op: np.ndarray | None = None) -> np.ndarray:
    """E_O = sum_{s,s'} O[s', s] A^s (x) conj(A^s'); plain E when ``op`` is None."""
    d, chi, _ = a.shape
    if op is None:
        return np.einsum("sij,skl->ikjl", a, a.conj()).reshape(chi * chi, chi * chi)
    return np.einsum("ts,sij,tkl->ikjl", op, a, a.conj()).reshape(chi * chi, chi * chi)


@dataclass(frozen=True)
class ImpsState:
    """Normalized one-site iMPS with cached dominant environments.

    ``left_env`` and ``right_env`` are chi x chi matrices with
    ``sum(left_env * right_env) == 1`` (bilinear pairing).
    """

    tensor: np.ndarray
    norm_eigenvalue: float
    left_env: np.ndarray
    right_env: np.ndarray
    injective: bool
    transfer_values: np.ndarray
    unit_cell: int = 1

    @property
    def d(self) -> int:
        return self.tensor.shape[0]

    @property
    def chi(self) -> int:
        return self.tensor.shape[1]

    @classmethod
    def from_tensor(cls, a, unit_cell: int = 1) -> "ImpsState":
        a = as_tensor(a, 3)
        if a.shape[1] != a.shape[2]:
            raise DimensionError(f"site tensor must be (d, chi, chi), got {a.shape}")
        return _normalized(a, unit_cell)

    @classmethod
    def from_unit_cell(cls, tensors) -> "ImpsState":
        tensors = list(tensors)
        return _normalized(block_unit_cell(tensors), len(tensors))

    def vec_left(self) -> np.ndarray:
        return self.left_env.ravel()

    def vec_right(self) -> np.ndarray:
        return self.right_env.ravel()


def _normalized(a: np.ndarray, unit_cell: int) -> ImpsState:
    if not np.any(np.abs(a) > 0):
        raise DegenerateStateError("zero site tensor")
    chi = a.shape[1]
    op = LinearOperatorHandle.from_matrix(transfer_dense(a))
    pairs = top_k_eigen(op, k=min(op.dim, 4))
    lam = pairs.values[0]
    if abs(lam) == 0:
        raise DegenerateStateError("transfer matrix is nilpotent")
    r = pairs.right_vectors[:, 0]
    l = pairs.left_vectors[:, 0]
    if chi * chi <= 4096:
        # eig on a non-normal E loses digits (the gauge condition number
        # squared); inverse iteration plus a two-sided Rayleigh quotient
        # recovers both the vectors and lambda
        e = transfer_dense(a)
        r = _refine(e, r, lam)
        l = _refine(e.T, l, lam)
        # lambda itself is only as good as its condition number |l||r|/|l.r|;
        # read it off E in the balanced gauge, where that number is ~1
        g = balancing_gauge(l.reshape(chi, chi).T, r.reshape(chi, chi))
        if g is not None:
            p, q, _ = g
            w = np.linalg.eigvals(transfer_dense(np.einsum("ij,sjk,kl->sil", p, a, q)))
            lam = w[np.argmin(np.abs(w - lam))]
    a = a / np.sqrt(abs(lam))
    values = pairs.values / abs(lam)
    r, l = r.reshape(chi, chi), l.reshape(chi, chi)
    tr = np.trace(r)
    phase = tr / abs(tr) if abs(tr) > 1e-14 else r.flat[np.argmax(np.abs(r))] / np.max(np.abs(r))
    r = r / phase
    l = l / np.sum(l * r)
    injective = bool(len(values) < 2 or abs(values[1]) < abs(values[0]) - GAP_TOL)
    full = np.linalg.eigvals(transfer_dense(a)) if chi * chi <= 4096 else values
    full = full[np.lexsort((-full.imag, -full.real, -np.round(np.abs(full), 12)))]
    return ImpsState(a, float(abs(lam)), l, r, injective, full, unit_cell)


def balancing_gauge(lstd: np.ndarray, r: np.ndarray, rtol: float = 1e-12):
    """Gauge p (with q = p^-1) taking both fixed points to the same diag(s).

    ``lstd`` is the standard left fixed point (l^dag x), ``r`` the right one.
    Returns ``(p, q, s)``, or None when either is numerically rank deficient.
    """
    envs = []
    for m in (lstd, r):
        tr = np.trace(m)
        m = m * (abs(tr) / tr) if abs(tr) > 0 else m
        envs.append((m + m.conj().T) / 2)
    wl, vl = np.linalg.eigh(envs[0])
    wr, vr = np.linalg.eigh(envs[1])
    if wr.min() <= rtol * wr.max() or wl.min() <= rtol * wl.max():
        return None
    x = np.sqrt(wl)[:, None] * vl.conj().T  # lstd = x^dag x
    y = vr * np.sqrt(wr)[None, :]  # r = y y^dag
    u, s, _ = np.linalg.svd(x @ y)
    if s.min() <= rtol * s.max():
        return None
    p = (u.conj().T * s[:, None] ** -0.5) @ x
    return p, np.linalg.inv(p), s


def _refine(e: np.ndarray, v: np.ndarray, lam, steps: int = 2) -> np.ndarray:
    shifted = e - lam * (1 + 1e-13) * np.eye(e.shape[0])
    for _ in range(steps):
        try:
            w = np.linalg.solve(shifted, v)
        except np.linalg.LinAlgError:
            return v
        if not np.all(np.isfinite(w)):
            return v
        v = w / np.linalg.norm(w)
    return v


def normalize(state: ImpsState) -> ImpsState:
    """Rescale so that lambda_1 = 1 and recompute binormalized environments."""
    return _normalized(state.tensor, state.unit_cell)


def gauge_transform(state: ImpsState, x) -> ImpsState:
    """Apply A -> X^{-1} A X; the physical state is unchanged."""
    x = np.asarray(x, dtype=complex)
    xi = np.linalg.inv(x)
    return ImpsState.from_tensor(np.einsum("ij,sjk,kl->sil", xi, state.tensor, x), state.unit_cell)


def transfer_matrix(state: ImpsState, op=None) -> LinearOperatorHandle:
    """Transfer matrix E (or E_O with a one-site operator inserted)."""
    return LinearOperatorHandle.from_matrix(transfer_dense(state.tensor, None if op is None else np.asarray(op)))


@dataclass
class TransferSpectrum:
    eigenpairs: EigenPairs
    xi: float


def transfer_spectrum(state: ImpsState, k: int | None = None) -> TransferSpectrum:
    op = transfer_matrix(state)
    pairs = top_k_eigen(op, k=min(op.dim, k or op.dim))
    return TransferSpectrum(pairs, _xi_from(state.transfer_values))


def _xi_from(values, tol: float = GAP_TOL) -> float:
    if len(values) < 2:
        return 0.0
    lam2 = abs(values[1]) / abs(values[0])
    if lam2 >= 1 - tol:
        return float("inf")
    if lam2 == 0:
        return 0.0
    return -1.0 / np.log(lam2)


def correlation_length(state: ImpsState, strict: bool = False) -> float:
    """xi = -1/log|lambda_2/lambda_1|; +inf at a degenerate dominant eigenvalue."""
    if strict and not state.injective:
        raise DegenerateStateError("state is not injective; correlation length undefined")
    return _xi_from(state.transfer_values)


def expectation(state: ImpsState, op) -> complex:
    """One-site expectation value (L|E_O|R)."""
    return complex(state.vec_left() @ transfer_dense(state.tensor, np.asarray(op)) @ state.vec_right())


def connected_correlator(state: ImpsState, op_a, op_b, m: int) -> complex:
    """<O_a(0) O_b(m)> - <O_a><O_b> using m-1 transfer-matrix steps."""
    if m < 1:
        raise ValidationError("distance m must be >= 1")
    e = transfer_dense(state.tensor)
    v = transfer_dense(state.tensor, np.asarray(op_b)) @ state.vec_right()
    for _ in range(m - 1):
        v = e @ v
    two = state.vec_left() @ transfer_dense(state.tensor, np.asarray(op_a)) @ v
    return complex(two - expectation(state, op_a) * expectation(state, op_b))


def schmidt_weights(state: ImpsState) -> np.ndarray:
    """Squared Schmidt coefficients of a single cut, from eig(L^T R)."""
    p = np.linalg.eigvals(state.left_env.T @ state.right_env).real
    p = np.clip(p, 0.0, None)
    return np.sort(p[p > 1e-15])[::-1] / p.sum()


def renyi_half_infinite(state: ImpsState, n: int = 2) -> float:
    """Renyi-n entropy of one cut of the infinite chain."""
    p = schmidt_weights(state)
    if n == 1:
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(p**n)) / (1 - n))


def renyi2_half_infinite(state: ImpsState) -> float:
    return renyi_half_infinite(state, 2)


def _swap_apply(a: np.ndarray, n: int, v: np.ndarray) -> np.ndarray:
    # axes of v: (ket_1, bra_1, ..., ket_n, bra_n); bra_k pairs with ket_{k+1}
    d, chi, _ = a.shape
    v = v.reshape((chi,) * (2 * n))
    out = np.zeros_like(v)
    ac = a.conj()
    for conf in itertools.product(range(d), repeat=n):
        w = v
        for k in range(n):
            w = _apply_axis(w, a[conf[k]], 2 * k)
            w = _apply_axis(w, ac[conf[(k + 1) % n]], 2 * k + 1)
        out = out + w
    return out.ravel()


def renyi_block(state: ImpsState, N: int, n: int = 2) -> float:
    """Renyi-n entropy of an N-site block via the n-copy swap contraction."""
    if N < 1:
        raise ValidationError("block size N must be >= 1")
    if n < 2:
        raise ValidationError("swap contraction needs n >= 2")
    l, r = state.vec_left(), state.vec_right()
    lv, rv = l, r
    for _ in range(n - 1):
        lv = np.kron(lv, l)
        rv = np.kron(rv, r)
    for _ in range(N):
        rv = _swap_apply(state.tensor, n, rv)
    purity = (lv @ rv).real
    return float(np.log(purity) / (1 - n))


def renyi2_block(state: ImpsState, N: int) -> float:
    return renyi_block(state, N, 2)


def renyi_block_limit(state: ImpsState, n: int = 2) -> float:
    """N -> infinity limit of the block entropy: two independent cuts."""
    return 2.0 * renyi_half_infinite(state, n)


def ring_amplitudes(state: ImpsState, L: int) -> np.ndarray:
    """Normalized periodic-ring wavefunction tr(A^{s_1} ... A^{s_L}).

    Site 0 is the most significant bit of the basis index.
    """
    a = state.tensor
    d, chi, _ = a.shape
    # contract left to right keeping the open bond pair
    psi = a.transpose(1, 0, 2)  # (i, s, j)
    for _ in range(L - 1):
        psi = np.einsum("iaj,sjk->iask", psi.reshape(chi, -1, chi), a).reshape(chi, -1, chi)
    amps = np.einsum("iai->a", psi)
    nrm = np.linalg.norm(amps)
    if nrm == 0:
        raise DegenerateStateError("ring wavefunction vanishes")
    return amps / nrm
