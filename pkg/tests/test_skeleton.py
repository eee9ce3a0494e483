import numpy as np
import pytest

from magic_spectra import (
    ParameterError,
    build_operator,
    chi2_tensors,
    chi4_tensors,
    circuit_angles,
    closed_forms_chi2,
    decompose,
    laurent_to_pauli_hamiltonian,
    sre_report,
    special_points_chi4,
)
from magic_spectra.imps import renyi_block
from magic_spectra.oracle import ground_space, skeleton_hamiltonian
from magic_spectra.skeleton import G_STAR, GOLDEN, chi2_polynomial, chi4_coefficients, chi4_polynomial

from conftest import Z, apply_site_unitary


def _ring(a, L):
    psi = np.array([np.trace(np.linalg.multi_dot([a[(s >> (L - 1 - i)) & 1] for i in range(L)])) for s in range(2**L)])
    return psi / np.linalg.norm(psi)


def _overlap(space, psi):
    return float(np.linalg.norm(space.conj().T @ psi) ** 2)


@pytest.mark.parametrize("g", [-0.7, -0.2, 0.25, 0.6, 1.5])
def test_chi2_pipeline_matches_closed_forms(g):
    rep = sre_report(chi2_tensors(g))
    assert rep.m_n == pytest.approx(closed_forms_chi2(g, "m2"), abs=1e-10)
    assert rep.c[0] == pytest.approx(closed_forms_chi2(g, "c1"), abs=1e-10)
    assert rep.xi_sre == pytest.approx(closed_forms_chi2(g, "xi_sre"), rel=1e-9)
    assert rep.I_inf == pytest.approx(closed_forms_chi2(g, "s2_block"), abs=1e-10)


def test_printed_c1_differs_from_extracted():
    assert closed_forms_chi2(1.0, "c1_printed") == pytest.approx(1024)
    assert closed_forms_chi2(1.0, "c1") == pytest.approx(1.0)
    assert closed_forms_chi2(-0.5, "c1_printed") == pytest.approx(4 * closed_forms_chi2(-0.5, "c1"))


def test_peak_and_zeros():
    assert closed_forms_chi2(G_STAR, "m2") == pytest.approx(np.log(4 / 3), abs=1e-12)
    for g in (-1.0, 0.0, 1.0):
        assert closed_forms_chi2(g, "m2") == pytest.approx(0.0, abs=1e-15)


def test_block_entropy_closed_form():
    st = chi2_tensors(0.5)
    assert renyi_block(st, 60) == pytest.approx(closed_forms_chi2(0.5, "s2_block"), abs=1e-10)


def test_eigs_ee_multiplicities():
    spec = decompose(build_operator(chi2_tensors(0.37)))
    assert spec.multiplicities == [1, 8, 7, 240]
    ref = closed_forms_chi2(0.37, "eigs_EE")
    np.testing.assert_allclose(spec.group_values.real, ref[[0, 1, 9, 16]], atol=1e-10)


def test_unknown_quantity():
    with pytest.raises(Exception):
        closed_forms_chi2(0.1, "nope")
    with pytest.raises(Exception):
        closed_forms_chi2(0.1, "delta_rx")


def test_chi2_ring_is_skeleton_ground_state():
    L = 8
    for g in (0.3, -0.5):
        space = ground_space(skeleton_hamiltonian(L, g))
        assert _overlap(space, _ring(chi2_tensors(g).tensor, L)) == pytest.approx(1.0, abs=1e-10)


def test_laurent_chi2_is_clifford_frame_of_skeleton():
    # X -> -Z, Z -> X on every site maps the skeleton onto the Laurent Hamiltonian
    L = 8
    v = np.array([[1, 1], [1, -1]]) / np.sqrt(2) @ Z
    for g in (0.5, -0.5):
        space = ground_space(laurent_to_pauli_hamiltonian(chi2_polynomial(g), L))
        psi = _ring(apply_site_unitary(chi2_tensors(g).tensor, v), L)
        assert _overlap(space, psi) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("mu", [-3.0, 0.5, 1.7])
def test_chi4_ring_is_laurent_ground_state(mu):
    L = 8
    space = ground_space(laurent_to_pauli_hamiltonian(chi4_polynomial(mu), L))
    assert _overlap(space, _ring(chi4_tensors(mu).tensor, L)) == pytest.approx(1.0, abs=1e-9)


def test_laurent_term_coefficients():
    h = laurent_to_pauli_hamiltonian(chi4_polynomial(0.0), 6)
    terms = dict((s, c) for c, s in h.terms)
    assert 2 * terms["XZZZXI"] == pytest.approx(-1.0)
    with pytest.raises(Exception):
        laurent_to_pauli_hamiltonian(chi4_polynomial(0.5), 4)


def test_chi4_b1_reading():
    for mu in (-1.0, -0.5, 1.0):
        b1, _ = chi4_coefficients(mu)
        assert abs(b1) == pytest.approx(1.0)
    b1p, _ = chi4_coefficients(1.0, printed=True)
    assert abs(b1p) == pytest.approx(2 / 3)


def test_chi4_domain():
    with pytest.raises(ParameterError):
        chi4_tensors(0.5, strict=True)
    with pytest.raises(ParameterError):
        chi4_tensors(np.inf)
    st = chi4_tensors(0.0)
    assert abs(st.transfer_values[0]) == pytest.approx(1.0)


def test_special_points_listed():
    pts = dict(special_points_chi4())
    assert set(np.round(list(pts), 12)) == set(np.round([-1.0, -0.5, 0.0, 1.0, GOLDEN, 1 - GOLDEN], 12))


def test_circuit_angles():
    tv, tw = circuit_angles(0.5)
    assert np.sin(tv) ** 2 == pytest.approx(0.5 / 1.5)
    assert np.cos(tw) ** 2 == pytest.approx(0.5 / 1.5)
    assert circuit_angles(-0.5)[1] == pytest.approx(np.pi - tw)
