"""Noise deconvolution for quantum channels with partially known noise.

Build the family of observables whose expectation values are exactly
recoverable by measuring a modified observable on the noisy state plus
classical post-processing, and verify recovery by brute-force simulation.
"""

from .channels import (
    DEFAULT_SV_CUTOFF,
    DEFAULT_TOL,
    PAULIS,
    ChoiMatrix,
    CptpReport,
    KrausChannel,
    TransferMatrix,
    adjoint_transfer,
    apply_channel,
    choi_from_channel,
    choi_from_transfer,
    compose,
    devectorize,
    haar_random_unitary,
    hs_inner,
    inverse_transfer,
    is_cptp,
    is_density_matrix,
    is_hermitian,
    is_positive_semidefinite,
    is_unitary,
    random_cptp_channel,
    random_density_matrix,
    random_unitary_channel,
    reshuffle,
    transfer_from_kraus,
    unitary_channel,
    validate_probabilities,
    vectorize,
)
from .deconvolution import (
    DEFAULT_KERNEL_RTOL,
    DeconvReport,
    GuessPair,
    ObservableFamily,
    common_correctable_family,
    correctable_family,
    deviation_operator,
    evaluate,
    expectation,
    guess_sweep,
    hermitian_section,
    intersect_spans,
    joint_kernel,
    kernel,
    membership_residual,
    modified_observable,
    span_residual,
    spans_coincide,
    verify_family,
)
from .errors import (
    CptpViolationError,
    FamilyVerificationError,
    InvalidProbabilityError,
    NonUnitaryError,
    QdeconvError,
    SingularChannelError,
    SpecParseError,
    UnknownScenarioError,
)
from .quorum import (
    QuorumBasis,
    ShotEstimate,
    chi_matrix,
    decompose,
    deconvolved_estimate,
    pauli_product_quorum,
    quorum_basis,
    sample_expectation,
    tensor_product_quorum,
)
from .random_unitary import (
    EigGrouping,
    UnitaryErrorSet,
    commutant_family,
    eig_grouping,
    gamma_i,
    invariant_subspace,
    ru_correctable_family,
    two_unitary_family,
)

__version__ = "0.1.0"

__all__ = [
    "ChoiMatrix",
    "CptpReport",
    "CptpViolationError",
    "DeconvReport",
    "DEFAULT_KERNEL_RTOL",
    "DEFAULT_SV_CUTOFF",
    "DEFAULT_TOL",
    "EigGrouping",
    "FamilyVerificationError",
    "GuessPair",
    "InvalidProbabilityError",
    "KrausChannel",
    "NonUnitaryError",
    "ObservableFamily",
    "PAULIS",
    "QdeconvError",
    "QuorumBasis",
    "ShotEstimate",
    "SingularChannelError",
    "SpecParseError",
    "TransferMatrix",
    "UnitaryErrorSet",
    "UnknownScenarioError",
    "adjoint_transfer",
    "apply_channel",
    "chi_matrix",
    "choi_from_channel",
    "choi_from_transfer",
    "common_correctable_family",
    "commutant_family",
    "compose",
    "correctable_family",
    "decompose",
    "deconvolved_estimate",
    "deviation_operator",
    "devectorize",
    "eig_grouping",
    "evaluate",
    "expectation",
    "gamma_i",
    "guess_sweep",
    "haar_random_unitary",
    "hermitian_section",
    "hs_inner",
    "intersect_spans",
    "invariant_subspace",
    "inverse_transfer",
    "is_cptp",
    "is_density_matrix",
    "is_hermitian",
    "is_positive_semidefinite",
    "is_unitary",
    "joint_kernel",
    "kernel",
    "membership_residual",
    "modified_observable",
    "pauli_product_quorum",
    "quorum_basis",
    "random_cptp_channel",
    "random_density_matrix",
    "random_unitary_channel",
    "reshuffle",
    "ru_correctable_family",
    "sample_expectation",
    "span_residual",
    "spans_coincide",
    "tensor_product_quorum",
    "transfer_from_kraus",
    "two_unitary_family",
    "unitary_channel",
    "validate_probabilities",
    "vectorize",
    "verify_family",
]
