"""SRE response to local single-qubit unitaries and magic-injection optimization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ValidationError
from .pauli_replica import ReplicaOperator, pauli_transfer_matrix
from .spectra import ReplicaSpectrum


def rz(t: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def ry(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


CLIFFORDS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]).astype(complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]),
}
T_GATE = np.diag([1, np.exp(0.25j * np.pi)])


@dataclass(frozen=True)
class SingleQubitUnitary:
    """U = R_z(phi) R_y(theta) R_z(lam)."""

    theta: float
    phi: float = 0.0
    lam: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        return rz(self.phi) @ ry(self.theta) @ rz(self.lam)

    @classmethod
    def rz(cls, t: float) -> "SingleQubitUnitary":
        return cls(0.0, t, 0.0)

    @classmethod
    def ry(cls, t: float) -> "SingleQubitUnitary":
        return cls(t, 0.0, 0.0)

    @classmethod
    def rx(cls, t: float) -> "SingleQubitUnitary":
        # R_x(t) = R_z(-pi/2) R_y(t) R_z(pi/2)
        return cls(t, -np.pi / 2, np.pi / 2)


def _matrix(u) -> np.ndarray:
    m = u.matrix if isinstance(u, SingleQubitUnitary) else np.asarray(u, dtype=complex)
    if m.shape != (2, 2) or not np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12):
        raise ValidationError("expected a 2x2 unitary")
    return m


def _dominant(spec: ReplicaSpectrum):
    l, r = spec.dominant_vectors()
    return spec.group_values[0], l, r


def _apply_with(op: ReplicaOperator, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    e = np.einsum("ab,bij->aij", pauli_transfer_matrix(u), op.e)
    return op._apply(v, e)


def delta_m_single(op: ReplicaOperator, spec: ReplicaSpectrum, u) -> float:
    """SRE change from one unitary on one site of the infinite chain."""
    mu1, l, r = _dominant(spec)
    val = l @ _apply_with(op, _matrix(u), r) / mu1
    return float(np.log(val.real) / (1 - op.n))


def delta_m_double(op: ReplicaOperator, spec: ReplicaSpectrum, u, r: int):
    """SRE change from the same unitary on two sites a distance r apart.

    Exact contraction (no two-term approximation). Returns (total, connected)
    with connected = total - 2 * delta_m_single.
    """
    if r < 1:
        raise ValidationError("distance r must be >= 1")
    m = _matrix(u)
    mu1, l, rv = _dominant(spec)
    v = _apply_with(op, m, rv) / mu1
    acc = 0.0
    for _ in range(r - 1):
        v = op.matvec(v) / mu1
        s = np.max(np.abs(v))
        acc += np.log(s)
        v = v / s
    v = _apply_with(op, m, v) / mu1
    total = (acc + np.log((l @ v).real)) / (1 - op.n)
    return float(total), float(total - 2 * delta_m_single(op, spec, m))


def connected_response(op: ReplicaOperator, spec: ReplicaSpectrum, u, rs) -> np.ndarray:
    """Connected part of delta_m_double for every distance in ``rs`` in one sweep."""
    rs = sorted(int(x) for x in rs)
    if not rs or rs[0] < 1:
        raise ValidationError("distances must be >= 1")
    m = _matrix(u)
    mu1, l, rv = _dominant(spec)
    single = delta_m_single(op, spec, m)
    v = _apply_with(op, m, rv) / mu1
    acc, out, cur = 0.0, {}, 1
    for target in rs:
        while cur < target:
            v = op.matvec(v) / mu1
            s = np.max(np.abs(v))
            acc += np.log(s)
            v = v / s
            cur += 1
        w = _apply_with(op, m, v) / mu1
        out[target] = (acc + np.log((l @ w).real)) / (1 - op.n) - 2 * single
    return np.array([out[x] for x in rs])


def fit_decay_length(rs, values) -> float:
    """Decay length of |values| ~ A exp(-r/xi) by least squares on the log."""
    rs = np.asarray(rs, dtype=float)
    y = np.log(np.abs(np.asarray(values, dtype=float)))
    if rs.size < 2:
        raise ValidationError("need at least two points")
    slope = np.polyfit(rs, y, 1)[0]
    return float(-1.0 / slope) if slope < 0 else float("inf")


def response_tensor(op: ReplicaOperator, spec: ReplicaSpectrum) -> np.ndarray:
    """Rt[b_1..b_2n] = (l| e_b1 (x) ... (x) conj(e_b2n) |r) * weight / mu_1."""
    mu1, l, r = _dominant(spec)
    D, n = op.bond, op.n
    e = op.e
    rt = np.zeros((4,) * (2 * n), dtype=complex)
    base = r.reshape((D,) * (2 * n))
    for b in itertools.product(range(4), repeat=2 * n):
        v = base
        for k, bk in enumerate(b):
            m = e[bk] if k < n else e[bk].conj()
            v = np.moveaxis(np.tensordot(m, v, axes=([1], [k])), 0, k)
        rt[b] = l @ v.ravel()
    return (rt * op.site.weight / mu1).real


def _objective(rt: np.ndarray, n: int, mats) -> np.ndarray:
    """delta M for a stack of unitaries using the precomputed response tensor."""
    o = np.array([pauli_transfer_matrix(m) for m in mats])  # (K, 4, 4)
    val = rt
    # contract each replica index with O[:, a, b_k], keeping the shared index a
    cur = np.einsum("kab,b...->ka...", o, val)
    for _ in range(2 * n - 1):
        cur = np.einsum("kab,kab...->ka...", o, cur)
    val = cur.sum(axis=1)
    return np.log(val) / (1 - n)


FAMILIES = ("Rx", "Ry", "Rz", "full")


def _family_unitary(family: str, x) -> np.ndarray:
    if family == "Rx":
        return rx(x[0])
    if family == "Ry":
        return ry(x[0])
    if family == "Rz":
        return rz(x[0])
    return SingleQubitUnitary(*x).matrix


def maximize_injection(op: ReplicaOperator, spec: ReplicaSpectrum, family: str = "full", grid: int = 24, tol: float = 1e-6):
    """Maximize delta M over a unitary family.

    Deterministic: a uniform grid (``grid`` points per angle, lexicographic
    order breaks ties) followed by coordinate descent with bounded 1-D searches.
    Returns (angles, delta_m_max); angles are (theta,) or (theta, phi, lam).
    """
    if family not in FAMILIES:
        raise ValidationError(f"family must be one of {FAMILIES}")
    rt = response_tensor(op, spec)
    n = op.n
    dims = 1 if family != "full" else 3
    spans = [2 * np.pi] * dims if family != "full" else [np.pi, 2 * np.pi, 2 * np.pi]
    axes = [np.linspace(0, s, grid, endpoint=False) for s in spans]
    points = np.array(list(itertools.product(*axes)))
    vals = np.concatenate(
        [_objective(rt, n, [_family_unitary(family, p) for p in chunk]) for chunk in np.array_split(points, max(1, len(points) // 2048))]
    )
    best = int(np.argmax(np.round(vals, 12)))  # first maximal in lexicographic order
    x = points[best].astype(float)
    fx = float(vals[best])
    step = [s / grid for s in spans]

    def f1(i, t):
        y = x.copy()
        y[i] = t
        return -float(_objective(rt, n, [_family_unitary(family, y)])[0])

    for _ in range(200):
        improved = 0.0
        for i in range(dims):
            res = minimize_scalar(lambda t: f1(i, t), bounds=(x[i] - step[i], x[i] + step[i]), method="bounded", options={"xatol": tol * 1e-2})
            if -res.fun > fx:
                improved = max(improved, abs(res.x - x[i]))
                x[i] = res.x
                fx = -res.fun
        step = [max(s / 2, tol) for s in step]
        if improved < tol and max(step) <= tol:
            break
    return tuple(float(v) for v in x), fx
