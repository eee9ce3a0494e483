import numpy as np
import pytest

from magic_spectra import (
    ImpsState,
    SingleQubitUnitary,
    ValidationError,
    build_operator,
    chi2_tensors,
    closed_forms_chi2,
    connected_response,
    decompose,
    delta_m_double,
    delta_m_single,
    maximize_injection,
)
from magic_spectra.oracle import sre_pure
from magic_spectra.perturb import CLIFFORDS, T_GATE, fit_decay_length, rx, ry, rz

from conftest import random_imps


def _setup(state):
    op = build_operator(state)
    return op, decompose(op)


@pytest.mark.parametrize("seed", range(3))
def test_cliffords_do_not_change_sre(seed):
    op, spec = _setup(random_imps(seed, chi=2))
    for name, u in CLIFFORDS.items():
        assert delta_m_single(op, spec, u) == pytest.approx(0.0, abs=1e-12), name
        assert delta_m_double(op, spec, u, 3)[0] == pytest.approx(0.0, abs=1e-12), name


def test_single_site_response_on_product_state():
    # for a product state the single-site change is the difference of one-qubit SREs
    psi = np.array([np.cos(0.3), np.exp(0.7j) * np.sin(0.3)])
    op, spec = _setup(ImpsState.from_tensor(psi.reshape(2, 1, 1)))
    for u in (T_GATE, ry(0.4), SingleQubitUnitary(0.3, 1.1, -0.4).matrix):
        ref = sre_pure(u @ psi) - sre_pure(psi)
        assert delta_m_single(op, spec, u) == pytest.approx(ref, abs=1e-12)
        # no correlations, so the connected part vanishes
        assert delta_m_double(op, spec, u, 2)[1] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("g", [-0.8, -0.3, 0.2, 0.7])
@pytest.mark.parametrize("theta", [0.1, 0.5, 1.2])
def test_rotation_formulas(g, theta):
    op, spec = _setup(chi2_tensors(g))
    assert delta_m_single(op, spec, ry(theta)) == pytest.approx(closed_forms_chi2(g, "delta_ry", theta), abs=1e-10)
    assert delta_m_single(op, spec, rz(theta)) == pytest.approx(closed_forms_chi2(g, "delta_rz", theta), abs=1e-10)
    assert delta_m_single(op, spec, rx(theta)) == pytest.approx(closed_forms_chi2(g, "delta_rx", theta), abs=1e-10)


def test_rx_vanishes_at_product_point():
    assert closed_forms_chi2(1.0, "delta_rx", np.pi / 4) == pytest.approx(0.0, abs=1e-12)


def test_connected_response_consistent_with_double():
    op, spec = _setup(chi2_tensors(0.3))
    rs = [1, 2, 5]
    vals = connected_response(op, spec, T_GATE, rs)
    for r, v in zip(rs, vals):
        assert v == pytest.approx(delta_m_double(op, spec, T_GATE, r)[1], abs=1e-12)
    assert abs(connected_response(op, spec, T_GATE, [60])[0]) < 1e-10


def test_fit_decay_length():
    rs = np.arange(5, 20)
    assert fit_decay_length(rs, 3 * np.exp(-rs / 4.0)) == pytest.approx(4.0)
    assert fit_decay_length(rs, np.exp(rs / 4.0)) == np.inf
    with pytest.raises(ValidationError):
        fit_decay_length([1], [1.0])


def test_rz_family_optimum():
    op, spec = _setup(chi2_tensors(0.4))
    (theta,), best = maximize_injection(op, spec, "Rz")
    assert best == pytest.approx(np.log(4 / 3), abs=1e-9)
    assert np.cos(4 * theta) == pytest.approx(-1.0, abs=1e-6)


def test_optimizer_is_deterministic():
    op, spec = _setup(chi2_tensors(-0.5))
    a = maximize_injection(op, spec, "full", grid=8)
    b = maximize_injection(op, spec, "full", grid=8)
    assert a == b
    with pytest.raises(ValidationError):
        maximize_injection(op, spec, "Rw")


def test_unitary_parametrization():
    t = 0.7
    m = SingleQubitUnitary.rx(t).matrix
    # equal up to a global phase
    ov = abs(np.trace(m.conj().T @ rx(t))) / 2
    assert ov == pytest.approx(1.0)
    assert abs(np.trace(SingleQubitUnitary.ry(t).matrix.conj().T @ ry(t))) / 2 == pytest.approx(1.0)
    op, spec = _setup(chi2_tensors(0.2))
    with pytest.raises(ValidationError):
        delta_m_single(op, spec, np.diag([1.0, 2.0]))
    with pytest.raises(ValidationError):
        delta_m_double(op, spec, T_GATE, 0)
