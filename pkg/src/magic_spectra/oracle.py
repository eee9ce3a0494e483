"""Exact finite-ring ground truth.

Statevectors, brute-force Pauli-string SRE, exact diagonalization of Pauli
Hamiltonians on periodic rings and the log-chord scaling fit of W(l).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import ResourceError, ValidationError

MAX_ED_SITES = 14
MAX_ENUM_SITES = 12
_PHASE = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def _masks(string: str):
    """(x_mask, z_mask, number of Y) with site 0 on the most significant bit."""
    L = len(string)
    x = z = ny = 0
    for i, ch in enumerate(string):
        try:
            bx, bz = _PHASE[ch]
        except KeyError:
            raise ValidationError(f"bad Pauli label {ch!r}") from None
        bit = 1 << (L - 1 - i)
        x |= bit * bx
        z |= bit * bz
        ny += bx & bz
    return x, z, ny


def _popcount_parity(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    p = np.zeros_like(a)
    while np.any(a):
        p ^= a & 1
        a >>= 1
    return p


@dataclass
class PauliHamiltonian:
    """H = sum_k c_k P_k with real c_k and Pauli strings over I, X, Y, Z."""

    L: int
    terms: list = field(default_factory=list)

    def __post_init__(self):
        for c, s in self.terms:
            if len(s) != self.L:
                raise ValidationError(f"string {s!r} has length {len(s)}, ring has {self.L}")
            if np.iscomplexobj(c) and np.imag(c) != 0:
                raise ValidationError("coefficients must be real")

    def add(self, coeff: float, string: str) -> None:
        if len(string) != self.L:
            raise ValidationError("string length does not match the ring")
        self.terms.append((float(coeff), string))

    def commutes_with_flip(self, axis: str = "X") -> bool:
        """True if every term commutes with the global flip prod sigma^axis."""
        odd = set("ZY") if axis == "X" else set("XY")
        return all(sum(ch in odd for ch in s) % 2 == 0 for _, s in self.terms)

    def to_sparse(self) -> sp.csr_matrix:
        if self.L > MAX_ED_SITES:
            raise ResourceError(f"L={self.L} exceeds the ED guard of {MAX_ED_SITES} sites")
        dim = 1 << self.L
        idx = np.arange(dim)
        rows, cols, vals = [], [], []
        for c, s in self.terms:
            x, z, ny = _masks(s)
            # P|s> = i^ny (-1)^{|s & z|} |s ^ x>
            sign = 1 - 2 * _popcount_parity(idx & z)
            rows.append(idx ^ x)
            cols.append(idx)
            vals.append(c * (1j**ny) * sign)
        m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
        m = m.tocsr()
        m.sum_duplicates()
        if np.allclose(m.data.imag, 0):
            m = m.real.tocsr()
        return m

    def to_dense(self) -> np.ndarray:
        if self.L > MAX_ENUM_SITES:
            raise ResourceError("dense Hamiltonian limited to 12 sites")
        return self.to_sparse().toarray()


def cluster_ising_hamiltonian(L: int, gzxz: float, gzz: float, gx: float) -> PauliHamiltonian:
    """gzxz sum Z X Z - gzz sum Z Z - gx sum X on a periodic ring."""
    h = PauliHamiltonian(L)
    for i in range(L):
        s = ["I"] * L
        s[(i - 1) % L], s[i], s[(i + 1) % L] = "Z", "X", "Z"
        if gzxz:
            h.add(gzxz, "".join(s))
        s = ["I"] * L
        s[i] = s[(i + 1) % L] = "Z"
        if gzz:
            h.add(-gzz, "".join(s))
        s = ["I"] * L
        s[i] = "X"
        if gx:
            h.add(-gx, "".join(s))
    return h


def critical_line_hamiltonian(L: int, g_c: float) -> PauliHamiltonian:
    """Critical-line point g_zxz = g_c, g_x = 2 - g_c, g_zz = 2.

    g_c = 0 is the Ising point and g_c = 1 the GHZ multicritical point.
    """
    return cluster_ising_hamiltonian(L, g_c, 2.0, 2.0 - g_c)


def skeleton_hamiltonian(L: int, g: float) -> PauliHamiltonian:
    """Parent Hamiltonian of the chi=2 skeleton:
    (g-1)^2 ZXZ + 2(g^2-1) ZZ - (1+g)^2 X."""
    return cluster_ising_hamiltonian(L, (g - 1) ** 2, -2 * (g * g - 1), (1 + g) ** 2)


@dataclass
class Statevector:
    L: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        if self.amplitudes.size != 1 << self.L:
            raise ValidationError("amplitude vector has the wrong length")
        nrm = np.linalg.norm(self.amplitudes)
        if abs(nrm - 1) > 1e-12:
            raise ValidationError(f"statevector norm {nrm} != 1")

    @classmethod
    def normalized(cls, amps) -> "Statevector":
        amps = np.asarray(amps, dtype=complex).ravel()
        L = int(round(np.log2(amps.size)))
        return cls(L, amps / np.linalg.norm(amps))

    def kron(self, other: "Statevector") -> "Statevector":
        return Statevector(self.L + other.L, np.kron(self.amplitudes, other.amplitudes))


def _sector_basis(L: int, sector: str, axis: str) -> sp.csr_matrix:
    dim = 1 << L
    idx = np.arange(dim)
    sgn = 1.0 if sector == "even" else -1.0
    if axis == "X":
        full = dim - 1
        reps = idx[idx < (idx ^ full)]
        k = np.arange(reps.size)
        rows = np.concatenate([reps, reps ^ full])
        cols = np.concatenate([k, k])
        vals = np.concatenate([np.full(reps.size, 1 / np.sqrt(2)), np.full(reps.size, sgn / np.sqrt(2))])
        return sp.csr_matrix((vals, (rows, cols)), shape=(dim, reps.size))
    par = _popcount_parity(idx)
    keep = idx[par == (0 if sector == "even" else 1)]
    return sp.csr_matrix((np.ones(keep.size), (keep, np.arange(keep.size))), shape=(dim, keep.size))


def ground_state(h: PauliHamiltonian, sector: str = "even", max_sites: int = MAX_ED_SITES):
    """Lowest eigenpair, by default inside the even sector of the global flip.

    The flip axis is X when every term commutes with prod X, else Z; with
    ``sector="full"`` no symmetry is used. Returns (energy, Statevector).
    """
    if h.L > max_sites:
        raise ResourceError(f"L={h.L} exceeds the ED guard of {max_sites} sites")
    m = h.to_sparse()
    if sector == "full":
        basis = None
    elif sector in ("even", "odd"):
        if h.commutes_with_flip("X"):
            basis = _sector_basis(h.L, sector, "X")
        elif h.commutes_with_flip("Z"):
            basis = _sector_basis(h.L, sector, "Z")
        else:
            basis = None
    else:
        raise ValidationError("sector must be even, odd or full")
    hs = m if basis is None else (basis.T @ m @ basis)
    if hs.shape[0] <= 4096:
        w, v = np.linalg.eigh(hs.toarray())
        e0, vec = w[0], v[:, 0]
    else:
        w, v = eigsh(hs, k=1, which="SA", tol=1e-12)
        e0, vec = w[0], v[:, 0]
    psi = vec if basis is None else basis @ vec
    psi = np.asarray(psi, dtype=complex)
    k = int(np.argmax(np.abs(psi)))
    psi = psi * (abs(psi[k]) / psi[k])
    return float(e0), Statevector.normalized(psi)


def ground_space(h: PauliHamiltonian, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (columns) of the full ground manifold, dense ED."""
    w, v = np.linalg.eigh(h.to_dense())
    return v[:, np.abs(w - w[0]) <= tol * max(1.0, abs(w[0]))]


def free_fermion_energy(L: int, J: float = 1.0, h: float = 1.0) -> float:
    """Even-sector ground energy of -J sum ZZ - h sum X at J = h on a ring."""
    if J != h:
        raise ValidationError("closed form implemented at the critical point J = h")
    m = np.arange(L)
    return float(-2 * J * np.sum(np.abs(np.sin(np.pi * (2 * m + 1) / (2 * L)))))


def _fwht_rows(a: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform along the last axis (length 2^L)."""
    a = np.array(a, copy=True)
    n = a.shape[-1]
    h = 1
    lead = a.shape[:-1]
    while h < n:
        a = a.reshape(lead + (n // (2 * h), 2, h))
        x = a[..., 0, :] + a[..., 1, :]
        y = a[..., 0, :] - a[..., 1, :]
        a = np.stack([x, y], axis=-2).reshape(lead + (n,))
        h *= 2
    return a


def pauli_expectations(rho_or_psi, chunk: int = 256) -> np.ndarray:
    """|Tr(rho X^x Z^z)| for every (x, z) mask pair.

    Accepts a Statevector, an amplitude vector or a density matrix. Site 0
    sits on the most significant bit of both masks.
    """
    if isinstance(rho_or_psi, Statevector):
        rho_or_psi = rho_or_psi.amplitudes
    a = np.asarray(rho_or_psi, dtype=complex)
    dim = a.shape[0]
    L = int(round(np.log2(dim)))
    if L > MAX_ENUM_SITES:
        raise ResourceError(f"Pauli enumeration limited to {MAX_ENUM_SITES} sites")
    idx = np.arange(dim)
    out = np.empty((dim, dim))
    for start in range(0, dim, chunk):
        xs = np.arange(start, min(dim, start + chunk))
        src = idx[None, :] ^ xs[:, None]
        if a.ndim == 1:
            rows = a[src] * a.conj()[None, :]
        else:
            rows = a[src, idx[None, :]]
        out[xs] = np.abs(_fwht_rows(rows))
    return out


def _z2_mask(dim: int) -> np.ndarray:
    # strings commuting with prod X have an even number of Z/Y, i.e. even |z|
    return _popcount_parity(np.arange(dim)) == 0


def _sre_from_table(table: np.ndarray, n: int, support: int | None = None, symmetric: bool = False) -> float:
    dim = table.shape[0]
    L = int(round(np.log2(dim)))
    idx = np.arange(dim)
    if support is None:
        support = dim - 1
    ok = (idx & ~support & (dim - 1)) == 0
    sub = table[np.ix_(ok, ok)]
    if symmetric:
        sub = sub[:, _z2_mask(dim)[ok]]
    k = bin(support).count("1")
    return float(np.log(np.sum(sub ** (2 * n)) / 2**k) / (1 - n))


def sre_pure(psi, n: int = 2, symmetric: bool = False) -> float:
    """M^(n) = log(sum_P <P>^(2n) / 2^L) / (1-n) by full enumeration.

    ``symmetric`` keeps only the Z2-preserving strings (exact for
    flip-symmetric states).
    """
    if n < 2:
        raise ValidationError("n must be >= 2")
    return _sre_from_table(pauli_expectations(psi), n, symmetric=symmetric)


def reduced_density_matrix(psi, sites) -> np.ndarray:
    if isinstance(psi, Statevector):
        psi = psi.amplitudes
    psi = np.asarray(psi, dtype=complex)
    L = int(round(np.log2(psi.size)))
    sites = list(sites)
    rest = [i for i in range(L) if i not in sites]
    m = psi.reshape((2,) * L).transpose(sites + rest).reshape(1 << len(sites), -1)
    return m @ m.conj().T


def sre_mixed(rho, n: int = 2):
    """(M, S_n, M~, W) of a density matrix by Pauli enumeration."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError("rho must be square")
    if rho.shape[0] > 1 << 8:
        raise ResourceError("mixed-state enumeration limited to 8 sites")
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if w.min() < -1e-10:
        raise ValidationError(f"rho is not PSD (min eigenvalue {w.min()})")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise ValidationError("rho must have unit trace")
    m = _sre_from_table(pauli_expectations(rho), n)
    w = np.clip(w, 0, None)
    s = float(np.log(np.sum(w**n)) / (1 - n))
    mt = m - s
    return m, s, mt, mt - 2 * s


def block_mask(L: int, start: int, size: int) -> int:
    mask = 0
    for i in range(start, start + size):
        mask |= 1 << (L - 1 - (i % L))
    return mask


def mutual_sre_curve(psi, n: int = 2, with_entropy: bool = False):
    """W(l) = M(A) + M(B) - M(psi) for the ring cut into l and L-l sites.

    Returns a list of (l, W) for l = 1..L-1; with ``with_entropy`` each row
    is (l, W, I, L) with I = S_n(A) + S_n(B) and L = W - I.
    """
    if isinstance(psi, Statevector):
        psi = psi.amplitudes
    table = pauli_expectations(psi)
    L = int(round(np.log2(table.shape[0])))
    full = (1 << L) - 1
    m_all = _sre_from_table(table, n)
    rows = []
    for ell in range(1, L):
        a = block_mask(L, 0, ell)
        w = _sre_from_table(table, n, a) + _sre_from_table(table, n, full ^ a) - m_all
        if with_entropy:
            rho = reduced_density_matrix(psi, range(ell) if ell <= L - ell else range(ell, L))
            ev = np.clip(np.linalg.eigvalsh(rho), 0, None)
            i = 2 * float(np.log(np.sum(ev**n)) / (1 - n))
            rows.append((ell, w, i, w - i))
        else:
            rows.append((ell, w))
    return rows


def mutual_sre_ring(psi, ell: int, n: int = 2) -> float:
    """Pure-state mutual SRE W(l) of an l-site block and its complement."""
    if isinstance(psi, Statevector):
        L = psi.L
    else:
        L = int(round(np.log2(np.asarray(psi).size)))
    if not 1 <= ell < L:
        raise ValidationError("need 1 <= ell < L")
    return float(mutual_sre_curve(psi, n)[ell - 1][1])


def chord_length(ell, L):
    return L / np.pi * np.sin(np.pi * np.asarray(ell, dtype=float) / L)


@dataclass
class Delta4Fit:
    per_L: dict
    extrapolated: float
    pooled: float
    window: tuple


def fit_delta4(ring_data: dict, ell_min: int = 2, edge: int = 2) -> Delta4Fit:
    """Slope of W(l) against log of the chord length.

    ``ring_data`` maps L to a list of (l, W). Points with
    ell_min <= l <= L - edge enter. Reports the per-L slopes, their linear
    extrapolation in 1/L, and one pooled fit over all sizes (the headline).
    """
    per_L = {}
    xs, ys = [], []
    for L in sorted(ring_data):
        pts = [(np.log(chord_length(l, L)), w) for l, w, *_ in ring_data[L] if ell_min <= l <= L - edge]
        if len(pts) < 3:
            raise ValidationError(f"L={L} contributes fewer than 3 points")
        x, y = np.array(pts).T
        per_L[L] = float(np.polyfit(x, y, 1)[0])
        xs.extend(x)
        ys.extend(y)
    Ls = np.array(sorted(per_L), dtype=float)
    if len(Ls) >= 2:
        extrap = float(np.polyfit(1 / Ls, [per_L[int(L)] for L in Ls], 1)[1])
    else:
        extrap = float("nan")
    pooled = float(np.polyfit(xs, ys, 1)[0])
    return Delta4Fit(per_L, extrap, pooled, (ell_min, edge))
