import numpy as np
import pytest

from magic_spectra import (
    DegenerateStateError,
    DimensionError,
    ImpsState,
    chi2_tensors,
    connected_correlator,
    correlation_length,
    expectation,
    gauge_transform,
    renyi_block,
    renyi_block_limit,
    renyi_half_infinite,
    ring_amplitudes,
    schmidt_weights,
    transfer_spectrum,
)
from magic_spectra.skeleton import closed_forms_chi2

from conftest import X, Z, block_rho, random_imps, random_tensor, renyi_entropy, window_rho


@pytest.mark.parametrize("seed", range(5))
def test_normalization_and_environments(seed):
    st = random_imps(seed)
    assert abs(st.transfer_values[0]) == pytest.approx(1.0, abs=1e-12)
    assert np.sum(st.left_env * st.right_env) == pytest.approx(1.0, abs=1e-12)
    assert np.trace(st.right_env).real > 0


@pytest.mark.parametrize("seed", range(5))
def test_expectation_matches_window_oracle(seed):
    st = random_imps(seed)
    rho = block_rho(random_tensor(seed), 1)
    for op in (X, Z):
        assert expectation(st, op) == pytest.approx(np.trace(rho @ op), abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_connected_correlator_matches_window_oracle(seed):
    st = random_imps(seed)
    a = random_tensor(seed)
    for m in (1, 2, 3):
        rho = window_rho(a, [True] + [False] * (m - 1) + [True])
        two = np.trace(rho @ np.kron(Z, Z))
        one = np.trace(block_rho(a, 1) @ Z)
        assert connected_correlator(st, Z, Z, m) == pytest.approx(two - one * one, abs=1e-11)


def test_gauge_invariance(rng):
    st = random_imps(11, chi=3)
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    gt = gauge_transform(st, x)
    assert expectation(gt, X) == pytest.approx(expectation(st, X), abs=1e-10)
    assert correlation_length(gt) == pytest.approx(correlation_length(st), rel=1e-9)
    assert renyi_block(gt, 3) == pytest.approx(renyi_block(st, 3), abs=1e-10)


@pytest.mark.parametrize("g", [-1.5, -0.4, 0.3, 0.8, 1.9])
def test_skeleton_transfer_spectrum(g):
    st = chi2_tensors(g)
    vals = np.sort(np.abs(st.transfer_values))[::-1]
    np.testing.assert_allclose(vals, np.abs(closed_forms_chi2(g, "eigs_E")), atol=1e-12)
    assert correlation_length(st) == pytest.approx(closed_forms_chi2(g, "xi"), rel=1e-9)
    assert transfer_spectrum(st).xi == pytest.approx(closed_forms_chi2(g, "xi"), rel=1e-9)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("N", [1, 2, 4])
def test_block_entropy_matches_density_matrix(seed, N):
    st = random_imps(seed)
    rho = block_rho(random_tensor(seed), N)
    assert renyi_block(st, N, 2) == pytest.approx(renyi_entropy(rho, 2), abs=1e-10)
    assert renyi_block(st, N, 3) == pytest.approx(renyi_entropy(rho, 3), abs=1e-10)


def test_block_limit_is_two_cuts():
    st = chi2_tensors(0.5)
    assert renyi_half_infinite(st) == pytest.approx(np.log(4.5 / 4.25), abs=1e-12)
    assert renyi_block(st, 40) == pytest.approx(renyi_block_limit(st), abs=1e-10)
    assert renyi_block_limit(chi2_tensors(-0.5)) == pytest.approx(np.log(4), abs=1e-12)


def test_schmidt_weights_sum_to_one():
    p = schmidt_weights(random_imps(3, chi=3))
    assert p.sum() == pytest.approx(1.0)
    assert np.all(np.diff(p) <= 0)


def test_ring_amplitudes_match_trace_formula():
    a = random_tensor(5, chi=2)
    st = ImpsState.from_tensor(a)
    L = 5
    psi = np.array([np.trace(np.linalg.multi_dot([a[(s >> (L - 1 - i)) & 1] for i in range(L)])) for s in range(2**L)])
    psi /= np.linalg.norm(psi)
    amps = ring_amplitudes(st, L)
    assert abs(np.vdot(psi, amps)) == pytest.approx(1.0, abs=1e-12)


def test_noninjective_flag_and_strict_xi():
    ghz = np.zeros((2, 2, 2))
    ghz[0, 0, 0] = ghz[1, 1, 1] = 1
    st = ImpsState.from_tensor(ghz)
    assert not st.injective
    assert correlation_length(st) == np.inf
    with pytest.raises(DegenerateStateError):
        correlation_length(st, strict=True)


def test_bad_inputs():
    with pytest.raises(DimensionError):
        ImpsState.from_tensor(np.ones((2, 2, 3)))
    with pytest.raises(DegenerateStateError):
        ImpsState.from_tensor(np.zeros((2, 2, 2)))
    with pytest.raises(Exception):
        ImpsState.from_tensor(np.full((2, 2, 2), np.nan))
