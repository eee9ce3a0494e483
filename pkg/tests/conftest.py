"""Shared fixtures and independent reference implementations.

The helpers here deliberately avoid the package's own contraction code: the
reduced density matrix of a window is built site by site from the raw tensor,
and Pauli sums are done by explicit Kronecker products.
"""

import itertools

import numpy as np
import pytest

from magic_spectra import ImpsState

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
PAULIS = (I2, X, Y, Z)


def random_tensor(seed, chi=None, d=2):
    rng = np.random.default_rng(seed)
    if chi is None:
        chi = int(rng.integers(1, 4))
    return rng.normal(size=(d, chi, chi)) + 1j * rng.normal(size=(d, chi, chi))


def random_imps(seed, chi=None):
    return ImpsState.from_tensor(random_tensor(seed, chi))


def _environments(a):
    """Dominant left/right fixed points of sum_s kron(A^s, conj A^s), via numpy.eig."""
    chi = a.shape[1]
    e = sum(np.kron(a[s], a[s].conj()) for s in range(a.shape[0]))
    w, v = np.linalg.eig(e)
    i = int(np.argmax(np.abs(w)))
    wl, vl = np.linalg.eig(e.T)
    j = int(np.argmin(np.abs(wl - w[i])))
    return vl[:, j].reshape(chi, chi), v[:, i].reshape(chi, chi), w[i]


def window_rho(a, pattern):
    """Reduced density matrix on the kept sites of a window.

    ``pattern`` is a sequence of booleans; False sites are traced out.
    """
    a = np.asarray(a, dtype=complex)
    lenv, renv, _ = _environments(a)
    t = lenv[:, :, None, None]  # (ket bond, bra bond, ket phys, bra phys)
    for keep in pattern:
        if keep:
            t = np.einsum("ikab,sij,tkl->jlasbt", t, a, a.conj())
            c = t.shape
            t = t.reshape(c[0], c[1], c[2] * c[3], c[4] * c[5])
        else:
            t = np.einsum("ikab,sij,skl->jlab", t, a, a.conj())
    rho = np.einsum("jlab,jl->ab", t, renv)
    return rho / np.trace(rho)


def block_rho(a, N):
    return window_rho(a, [True] * N)


def separated_rho(a, N, r):
    return window_rho(a, [True] * N + [False] * (r - 1) + [True] * N)


def pauli_string(labels):
    out = np.ones((1, 1), dtype=complex)
    for k in labels:
        out = np.kron(out, PAULIS[k])
    return out


def naive_sre(rho, n=2):
    """(1/(1-n)) log sum_P |tr(rho P)|^{2n} / 2^N, one Kronecker product per string."""
    rho = np.asarray(rho, dtype=complex)
    N = int(round(np.log2(rho.shape[0])))
    total = 0.0
    for labels in itertools.product(range(4), repeat=N):
        total += abs(np.sum(rho.T * pauli_string(labels))) ** (2 * n)
    return float(np.log(total / 2**N) / (1 - n))


def renyi_entropy(rho, n=2):
    w = np.clip(np.linalg.eigvalsh((rho + rho.conj().T) / 2), 0, None)
    return float(np.log(np.sum(w**n)) / (1 - n))


def dense_replica(state, n):
    """Replica operator built from explicit Kronecker products (small sizes only).

    Accepts an ImpsState or a bare site tensor.
    """
    a = getattr(state, "tensor", state)
    e = []
    for p in PAULIS:
        e.append(sum(p[t, s] * np.kron(a[s], a[t].conj()) for s in range(2) for t in range(2)))
    total = 0
    for ea in e:
        m = np.ones((1, 1), dtype=complex)
        for k in range(2 * n):
            m = np.kron(m, ea if k < n else ea.conj())
        total = total + m
    return total / 2


def apply_site_unitary(a, u):
    """A'^s = sum_t u[s, t] A^t, i.e. u applied on every site."""
    return np.einsum("st,tij->sij", u, a)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
