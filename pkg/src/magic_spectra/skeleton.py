"""Exact MPS skeletons, their closed forms, and the Laurent-polynomial encoding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ValidationError
from .imps import ImpsState

GOLDEN = (1 + np.sqrt(5)) / 2
G_STAR = 3 - 2 * np.sqrt(2)


def chi2_site_tensor(g: float) -> np.ndarray:
    a = np.zeros((2, 2, 2), dtype=complex)
    a[0] = [[0, 0], [1, 1]]
    a[1] = [[1, g], [0, 0]]
    return a


def chi2_tensors(g: float) -> ImpsState:
    """chi=2 skeleton; g=1 paramagnet, g=-1 cluster state, g=0 GHZ."""
    if not np.isfinite(g):
        raise ParameterError("g must be finite")
    return ImpsState.from_tensor(chi2_site_tensor(float(g)))


def chi4_coefficients(mu: float, printed: bool = False):
    """(b1, b2) of the chi=4 skeleton.

    ``printed=True`` returns the b1 form with (mu+1) in the numerator, kept only
    for comparison; it does not reproduce the skeleton's special points.
    """
    b1 = -mu * ((mu + 1) if printed else (mu + 2)) / (mu**2 + mu + 1)
    b2 = np.inf if mu == 0 else (mu + 1) / mu**2
    return b1, b2


def _a_of(b: float) -> complex:
    if np.isinf(b):
        return -1j
    return b / (1 + np.sqrt(complex(1 - b * b)))


def chi4_site_tensor(mu: float, strict: bool = False) -> np.ndarray:
    b1, b2 = chi4_coefficients(mu)
    if strict and (abs(b1) > 1 or abs(b2) > 1):
        raise ParameterError(f"mu={mu} gives |b_k| > 1 (complex a_k)")
    a1, a2 = _a_of(b1), _a_of(b2)
    up = [[0, a1, 1, 0], [a2, 0, 0, -a1 * a2], [a1, 0, 0, 1], [0, -a2, a1 * a2, 0]]
    dn = [[a2, 0, 0, -a1 * a2], [0, a1, 1, 0], [0, -a2, a1 * a2, 0], [a1, 0, 0, 1]]
    return np.array([up, dn], dtype=complex)


def chi4_tensors(mu: float, strict: bool = False) -> ImpsState:
    """chi=4 skeleton along the d=2, p=0 path.

    Where |b_k| > 1 the a_k continue onto the unit circle; ``strict`` rejects
    those points instead.
    """
    if not np.isfinite(mu):
        raise ParameterError("mu must be finite")
    return ImpsState.from_tensor(chi4_site_tensor(float(mu), strict))


def _c1(g: float) -> float:
    if g >= 0:
        p = 1 + g * (4 + g * (22 + g * (4 + g)))
        return p**2 / (4 * (1 + g) ** 4 * (1 + 14 * g**2 + g**4))
    return (g - 1) ** 4 / (4 * (1 + 14 * g**2 + g**4))


def _c1_printed(g: float) -> float:
    if g >= 0:
        p = 1 + g * (4 + g * (22 + g * (4 + g)))
        return p**4 / (4 * (1 + g) ** 4 * (1 + 14 * g**2 + g**4))
    return (g - 1) ** 4 / (1 + 14 * g**2 + g**4)


def _delta_rx(g: float, theta: float) -> float:
    a = 7 + 212 * g**2 + 64 * g**3 + 1482 * g**4 + 64 * g**5 + 212 * g**6 + 7 * g**8
    b = 1 + 12 * g**2 - 64 * g**3 + 102 * g**4 - 64 * g**5 + 12 * g**6 + g**8
    return float(np.log(8) + 2 * np.log(1 + 14 * g**2 + g**4) - np.log(a + b * np.cos(4 * theta)))


def closed_forms_chi2(g: float, quantity: str, theta: float | None = None):
    """Closed-form reference values on the chi=2 skeleton (no linear algebra).

    quantity: m2, xi, xi_sre, s2_block, c1, c1_printed, eigs_E, eigs_EE,
    delta_ry, delta_rz, delta_rx (the last three need ``theta``).
    """
    g = float(g)
    ag = abs(g)
    den = (1 + ag) ** 4
    mu1 = (1 + 14 * g**2 + g**4) / den
    if quantity == "m2":
        return float(-np.log(mu1))
    if quantity == "eigs_EE":
        vals = [mu1] + [(1 - g**4) / den] * 8 + [(g**2 - 1) ** 2 / den] * 7 + [0.0] * 240
        return np.array(vals)
    if quantity == "eigs_E":
        return np.array([1.0, (1 - ag) / (1 + ag), 0.0, 0.0])
    if quantity == "xi":
        r = abs(1 - ag) / (1 + ag)
        return float("inf") if r == 1 else (0.0 if r == 0 else float(-1 / np.log(r)))
    if quantity == "xi_sre":
        r = abs((1 - g**4) / (1 + 14 * g**2 + g**4))
        return float("inf") if r == 1 else (0.0 if r == 0 else float(-1 / np.log(r)))
    if quantity == "s2_block":
        if g < 0:
            return float(np.log(4))
        return float(2 * np.log(2 * (1 + g) ** 2 / (1 + 6 * g + g**2)))
    if quantity == "c1":
        return float(_c1(g))
    if quantity == "c1_printed":
        return float(_c1_printed(g))
    if quantity in ("delta_ry", "delta_rz", "delta_rx"):
        if theta is None:
            raise ValidationError(f"{quantity} needs theta")
        if quantity == "delta_rx":
            return _delta_rx(g, theta)
        return float(np.log(8 / (7 + np.cos(4 * theta))))
    raise ValidationError(f"unknown quantity {quantity!r}")


def circuit_angles(g: float):
    """(theta_v, theta_w) of the two-layer circuit preparing the chi=2 skeleton."""
    x = np.sqrt(abs(g)) / np.sqrt(1 + abs(g))
    return float(np.arcsin(x)), float(np.arccos(np.sign(g) * x))


@dataclass
class SkeletonPolynomial:
    """f(z) = z**p (sum_k s_k z**k)**2; ``t[j]`` is the coefficient of z**(p+j)."""

    p: int
    s: list
    t: np.ndarray = field(init=False)

    def __post_init__(self):
        s = np.asarray(self.s)
        if s.ndim != 1 or s.size == 0:
            raise ValidationError("s must be a non-empty coefficient list")
        self.t = np.convolve(s, s)

    @property
    def powers(self) -> range:
        return range(self.p, self.p + len(self.t))

    def terms(self):
        return list(zip(self.powers, self.t))


def chi2_polynomial(g: float) -> SkeletonPolynomial:
    return SkeletonPolynomial(0, [1 + g, 1 - g])


def chi4_polynomial(mu: float) -> SkeletonPolynomial:
    """(z - mu)^2 (z - mu/(mu+1))^2 written as a squared quadratic."""
    a, b = mu, mu / (mu + 1)
    return SkeletonPolynomial(0, [a * b, -(a + b), 1.0])


def laurent_to_pauli_hamiltonian(poly: SkeletonPolynomial, L: int):
    """Jordan-Wigner image H = 1/2 sum_{n, alpha} t_alpha * string_alpha(n) on a ring.

    alpha = 0 -> Z_n, alpha > 0 -> -X Z..Z X, alpha < 0 -> -Y Z..Z Y.
    """
    from .oracle import PauliHamiltonian

    reach = max(abs(a) for a in poly.powers)
    if L <= reach:
        raise ValidationError(f"ring of {L} sites too small for strings of reach {reach}")
    terms = []
    for alpha, ta in poly.terms():
        if ta == 0:
            continue
        for n in range(L):
            s = ["I"] * L
            if alpha == 0:
                s[n] = "Z"
                coeff = 0.5 * ta
            else:
                end = "X" if alpha > 0 else "Y"
                k = abs(alpha)
                s[n] = end
                s[(n + k) % L] = end
                for j in range(1, k):
                    s[(n + j) % L] = "Z"
                coeff = -0.5 * ta
            terms.append((float(np.real(coeff)), "".join(s)))
    return PauliHamiltonian(L, terms)


def special_points_chi4():
    return [
        (-1.0, "omega0<->omega2 transition, GHZ"),
        (-0.5, "omega2<->omega4 transition, m2=-log(13/16)"),
        (0.0, "stabilizer code ground state"),
        (1.0, "omega2<->omega4 transition, m2=-log(13/16)"),
        (1 - GOLDEN, "cluster state"),
        (GOLDEN, "cluster state"),
    ]
