"""Spectral analysis of the replica operator.

SRE densities, finite-block SRE and its expansion in eigenvalues of the
replica operator, the SRE correlation length and the mutual SRE family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionError, ValidationError
from .imps import ImpsState, correlation_length, renyi_block_limit
from .pauli_replica import DENSE_LIMIT, ReplicaOperator, pauli_tensor, replica_operator, truncate_pauli_mps
from .tensor_core import EigenPairs, top_k_eigen

GROUP_RTOL = 1e-8


@dataclass
class ReplicaSpectrum:
    """Top of the replica spectrum with degeneracy groups and overlaps c_i.

    ``group_values[i]`` is the eigenvalue of group i and ``coefficients[i]`` the
    projector overlap (boundary_L | P_i | boundary_R).
    """

    n: int
    pairs: EigenPairs
    groups: list
    group_values: np.ndarray
    coefficients: np.ndarray
    degenerate: bool = False
    complete: bool = True

    @property
    def mu1(self) -> float:
        return float(self.group_values[0].real)

    @property
    def multiplicities(self) -> list[int]:
        return [len(g) for g in self.groups]

    @property
    def c1(self) -> float:
        return float(self.coefficients[0].real)

    def dominant_vectors(self):
        """Left/right dominant vectors normalized so that (l|r) = 1."""
        l = self.pairs.left_vectors[:, 0]
        r = self.pairs.right_vectors[:, 0]
        return l / (l @ r), r


DENSE_DECOMPOSE = 1024
DEFAULT_K = 12


def _void_unpaired(values, coeffs):
    # a complex group whose conjugate partner has no coefficient cannot
    # contribute a real term, so it is voided as well
    for i, v in enumerate(values):
        if abs(v.imag) <= 1e-12 * max(1.0, abs(v)) or not np.isfinite(coeffs[i]):
            continue
        tol = GROUP_RTOL * max(1.0, abs(v))
        partner = [j for j, w in enumerate(values) if abs(w - np.conj(v)) <= tol]
        if not partner or not all(np.isfinite(coeffs[j]) for j in partner):
            coeffs[i] = np.nan
    return coeffs


def decompose(op: ReplicaOperator, k: int | None = None, boundary=None, tol: float = 1e-12, seed: int = 0) -> ReplicaSpectrum:
    """Eigen-decomposition of the replica operator with group projector overlaps.

    Operators up to dimension 1024 are diagonalized densely (full spectrum).
    Larger ones use the iterative solver with ``k`` eigenvectors (default 12);
    the trailing group may then be cut, so its eigenvalue is kept but its
    coefficient is NaN.
    """
    lb, rb = op.boundary() if boundary is None else boundary
    if op.dim <= DENSE_DECOMPOSE:
        pairs = top_k_eigen(op.handle(), k=op.dim, tol=tol, seed=seed, dense_threshold=DENSE_DECOMPOSE, group_rtol=GROUP_RTOL)
        complete = True
    else:
        kk = min(op.dim - 2, k or DEFAULT_K)
        if kk < 2:
            raise ValidationError("decompose needs k >= 2")
        pairs = top_k_eigen(op.handle(), k=kk, tol=tol, seed=seed, dense_threshold=DENSE_DECOMPOSE, group_rtol=GROUP_RTOL)
        complete = False
    groups = pairs.groups
    values = np.array([pairs.values[g[0]] for g in groups])
    coeffs = []
    for gi, g in enumerate(groups):
        rg = pairs.right_vectors[:, g]
        lg = pairs.left_vectors[:, g]
        gram = lg.T @ rg
        if not complete and gi == len(groups) - 1 and len(groups) > 1:
            coeffs.append(np.nan)
            continue
        if abs(values[gi]) <= 1e-12 * abs(values[0]):
            coeffs.append(0.0)
            continue
        if np.linalg.cond(gram) > 1e10:
            coeffs.append(np.nan)
            continue
        coeffs.append((lb @ rg) @ np.linalg.solve(gram, lg.T @ rb))
    coeffs = _void_unpaired(values, np.array(coeffs, dtype=complex))
    return ReplicaSpectrum(op.n, pairs, groups, values, coeffs, degenerate=len(groups[0]) > 1, complete=complete)


def dominant_eigenvalue(op: ReplicaOperator, tol: float = 1e-12, seed: int = 0) -> float:
    if op.dim <= DENSE_LIMIT:
        w = np.linalg.eigvals(op.to_dense())
        return float(w[np.argmax(np.abs(w))].real)
    pairs = top_k_eigen(op.handle(), k=min(op.dim - 2, 4), tol=tol, seed=seed)
    return float(pairs.values[0].real)


def sre_density(op: ReplicaOperator, **kw) -> float:
    """m^(n) = log(mu_1)/(1-n)."""
    mu1 = dominant_eigenvalue(op, **kw)
    return float(np.log(mu1) / (1 - op.n))


def _log_chain(vectors_left, start, steps):
    """Yield log(l . A_k ... A_1 r) for a sequence of linear maps with rescaling."""
    v = start
    acc = 0.0
    out = []
    for f in steps:
        v = f(v)
        s = np.max(np.abs(v))
        if s == 0:
            out.append(-np.inf)
            continue
        acc += np.log(s)
        v = v / s
        if vectors_left is not None:
            out.append(acc + _safe_log(vectors_left @ v))
    return out, v, acc


def _safe_log(z: complex) -> float:
    if z.real <= 0:
        raise DecompositionError(f"non-positive replica contraction {z}")
    return float(np.log(z.real))


def subsystem_sre_curve(op: ReplicaOperator, N_max: int, boundary=None) -> np.ndarray:
    """M^(n)(rho_N) for N = 1..N_max by repeated application."""
    if N_max < 1:
        raise ValidationError("N must be >= 1")
    lb, rb = op.boundary() if boundary is None else boundary
    logs, _, _ = _log_chain(lb, rb, [op.matvec] * N_max)
    return np.array(logs) / (1 - op.n)


def subsystem_sre(op: ReplicaOperator, N: int, boundary=None) -> float:
    """Pure-formula SRE of an embedded N-site block, log(L|E^N|R)/(1-n)."""
    return float(subsystem_sre_curve(op, N, boundary)[-1])


def sre_expansion(spec: ReplicaSpectrum, N: int):
    """Return (N log mu_1/(1-n), log c_1/(1-n), f(N))."""
    c1 = spec.coefficients[0]
    if not np.isfinite(c1) or c1.real <= 0:
        raise DecompositionError(f"c_1 = {c1} is not positive")
    mu1 = spec.group_values[0]
    f = 0.0 + 0.0j
    for mu, c in zip(spec.group_values[1:], spec.coefficients[1:]):
        if abs(mu) == 0 or not np.isfinite(c):
            continue
        f += (mu / mu1) ** N * c
    if abs(f.imag) > 1e-9 * max(1.0, abs(f)):
        raise DecompositionError(f"f(N) has imaginary part {f.imag}")
    n = spec.n
    return float(N * np.log(mu1.real) / (1 - n)), float(np.log(c1.real) / (1 - n)), float(f.real)


def sre_correlation_length(spec: ReplicaSpectrum) -> float:
    """xi_SRE = -1/log|mu_2/mu_1| from the first two groups."""
    if len(spec.group_values) < 2:
        return 0.0
    ratio = abs(spec.group_values[1]) / abs(spec.group_values[0])
    if ratio >= 1 - 1e-10:
        return float("inf")
    if ratio == 0:
        return 0.0
    return float(-1.0 / np.log(ratio))


def mixed_sre(op: ReplicaOperator, N: int, s_block: float, boundary=None) -> float:
    """M~ = M - S_n for an N-site block; ``s_block`` is its Renyi-n entropy."""
    return subsystem_sre(op, N, boundary) - s_block


def witness(op: ReplicaOperator, N: int, s_block: float, boundary=None) -> float:
    """Mixed-state magic witness W = M~ - 2 S_n."""
    return mixed_sre(op, N, s_block, boundary) - 2.0 * s_block


def mutual_sre_adjacent(op: ReplicaOperator, ell: int, entropies, boundary=None):
    """Mutual SRE of two adjacent ell-site blocks.

    ``entropies`` is ``(S_n(ell), S_n(2 ell))``. Returns ``(L, W, I)``.
    """
    if ell < 1:
        raise ValidationError("ell must be >= 1")
    curve = subsystem_sre_curve(op, 2 * ell, boundary)
    w = 2 * curve[ell - 1] - curve[2 * ell - 1]
    s1, s2 = entropies
    i = 2 * s1 - s2
    return float(w - i), float(w), float(i)


def mutual_sre_infinite(spec: ReplicaSpectrum, s_block: float):
    """(L_inf, W_inf) with W_inf = log(c_1)/(1-n) and L_inf = W_inf - S_block.

    ``s_block`` is the saturated entropy of a long block (two cuts).
    """
    c1 = spec.coefficients[0]
    if not np.isfinite(c1) or c1.real <= 0:
        raise DecompositionError(f"c_1 = {c1} is not positive")
    w = float(np.log(c1.real) / (1 - spec.n))
    return w - s_block, w


def separated_subsystem_sre(op: ReplicaOperator, N: int, r: int, boundary=None) -> float:
    """M^(n) of two N-site blocks separated by r-1 unmeasured sites.

    r = 1 means the blocks touch.
    """
    if N < 1 or r < 1:
        raise ValidationError("N and r must be >= 1")
    lb, rb = op.boundary() if boundary is None else boundary
    steps = [op.matvec] * N + [op.identity_apply] * (r - 1) + [op.matvec] * N
    _, v, acc = _log_chain(None, rb, steps)
    return float((acc + _safe_log(lb @ v)) / (1 - op.n))


def fit_w_scaling(points):
    """Least squares W = slope * x + intercept; returns (slope, intercept, rss)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValidationError("scaling fit needs at least 3 points")
    x, y = pts[:, 0], pts[:, 1]
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    rss = float(np.sum((design @ coef - y) ** 2))
    return float(coef[0]), float(coef[1]), rss


@dataclass
class SreReport:
    n: int
    m_n: float
    mu1: float
    xi_sre: float
    xi: float
    L_inf: float
    W_inf: float
    I_inf: float
    c: list
    multiplicities: list
    meta: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        return {
            "n": self.n,
            "m_n": self.m_n,
            "mu1": self.mu1,
            "xi": self.xi,
            "xi_sre": self.xi_sre,
            "W_inf": self.W_inf,
            "L_inf": self.L_inf,
            "I_inf": self.I_inf,
            "c1": self.c[0] if self.c else float("nan"),
        }


def build_operator(state: ImpsState, n: int = 2, chi_t: int | None = None, cutoff: float = 0.0) -> ReplicaOperator:
    pt = pauli_tensor(state)
    if chi_t is not None:
        pt = truncate_pauli_mps(pt, chi_t, cutoff)
    return replica_operator(pt, n)


def sre_report(state: ImpsState, n: int = 2, chi_t: int | None = None, k: int | None = None, cutoff: float = 0.0) -> SreReport:
    """Bundle m^(n), xi_SRE, c_i, W_inf and L_inf for one state."""
    op = build_operator(state, n, chi_t, cutoff)
    spec = decompose(op, k=k)
    mu1 = spec.mu1
    s_block = renyi_block_limit(state, n)
    flagged = spec.degenerate or not state.injective
    if flagged or not np.isfinite(spec.coefficients[0]) or spec.coefficients[0].real <= 0:
        l_inf = w_inf = float("nan")
    else:
        l_inf, w_inf = mutual_sre_infinite(spec, s_block)
    return SreReport(
        n=n,
        m_n=float(np.log(mu1) / (1 - n)),
        mu1=mu1,
        xi_sre=sre_correlation_length(spec),
        xi=correlation_length(state),
        L_inf=l_inf,
        W_inf=w_inf,
        I_inf=s_block,
        c=[complex(c).real for c in spec.coefficients],
        multiplicities=spec.multiplicities,
        meta={"chi": state.chi, "chi_t": op.bond, "degenerate": flagged, "group_rtol": GROUP_RTOL},
    )
