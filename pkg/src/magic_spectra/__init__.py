"""Stabilizer Renyi entropy spectra of infinite matrix product states."""

from .errors import (
    ConvergenceError,
    DecompositionError,
    DegenerateStateError,
    DimensionError,
    MagicSpectraError,
    ParameterError,
    ResourceError,
    ValidationError,
)
from .estimators import SreSpectrumEstimator
from .imps import (
    ImpsState,
    connected_correlator,
    correlation_length,
    expectation,
    gauge_transform,
    normalize,
    renyi2_block,
    renyi2_half_infinite,
    renyi_block,
    renyi_block_limit,
    renyi_half_infinite,
    ring_amplitudes,
    schmidt_weights,
    transfer_matrix,
    transfer_spectrum,
)
from .pauli_replica import (
    PauliMps,
    PauliTransferTensor,
    ReplicaOperator,
    pauli_tensor,
    pauli_transfer_matrix,
    perturbed_operator,
    replica_operator,
    truncate_pauli_mps,
)
from .perturb import (
    SingleQubitUnitary,
    connected_response,
    delta_m_double,
    delta_m_single,
    maximize_injection,
)
from .skeleton import (
    SkeletonPolynomial,
    chi2_tensors,
    chi4_tensors,
    circuit_angles,
    closed_forms_chi2,
    laurent_to_pauli_hamiltonian,
    special_points_chi4,
)
from .spectra import (
    ReplicaSpectrum,
    SreReport,
    build_operator,
    decompose,
    fit_w_scaling,
    mixed_sre,
    mutual_sre_adjacent,
    mutual_sre_infinite,
    separated_subsystem_sre,
    sre_correlation_length,
    sre_density,
    sre_expansion,
    sre_report,
    subsystem_sre,
    witness,
)
from .tensor_core import EigenPairs, LinearOperatorHandle, contract, svd_truncate, top_k_eigen

__version__ = "0.1.0"
