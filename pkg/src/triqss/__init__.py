"""Three-party d-level quantum secret sharing: simulator and verification library.

A dealer splits a secret digit string between two players using
three-qudit entangled states; either player alone learns nothing, and
channel tampering shows up in randomized correlation tests.  The
package provides the underlying operator algebra (generalized Pauli
operators, the pair of unbiased bases, the shared states and their
uniqueness certificate), a seeded protocol state machine with an
auditable broadcast log, pluggable channel adversaries with detection
estimators, and a CLI over all of it.
"""

from ._kernels import BACKEND, NUMBA_AVAILABLE, active_backend
from .adversary import (
    AdversaryInstance,
    AdversaryStrategy,
    DetectionEstimate,
    bob_entangle_attack,
    bob_intercept_resend,
    detection_analytic,
    estimate_detection,
    eve_intercept_resend,
    maximally_entangled,
)
from .core import (
    ATOL,
    MAX_TENSOR_DIM,
    Operator,
    PureState,
    basis_state,
    identity,
    inner,
    ket,
    omega,
    omega_pow,
    require_dim,
    rng_stream,
    states_equal_up_to_phase,
    tensor,
)
from .errors import ContractError, DegenerateStateError, ResourceLimitError
from .ghz import (
    FORMS,
    GhzSpec,
    check_u_relation,
    common_eigenspace,
    form_equivalence,
    ghz_closed_form,
    ghz_sum_form,
    realize,
)
from .measurement import (
    ALICE_RULE,
    MeasOutcome,
    alice_basis_for,
    correlation_holds,
    joint_distribution,
    measure_subsystem,
    outcome_probabilities,
)
from .mub import (
    BASIS_LABELS,
    DIRECTIONS,
    MeasBasis,
    basis_for_label,
    check_mub,
    pauli_x,
    pauli_y,
    pauli_z,
    random_direction,
    unitary_u,
    uxu_basis,
    x_basis,
    y_basis,
    y_eigenvalue,
    z_basis,
)
from .protocol import (
    ORDER_TEMPLATES,
    ChannelTap,
    Message,
    ProtocolConfig,
    QuantumRound,
    RoundRecord,
    RunReport,
    StoredWire,
    announcement_order,
    draw_sift_mask,
    parse_transcript_line,
    reconstruct_key,
    report_to_dict,
    report_to_json,
    run_protocol,
    transcript_audit,
    transcript_lines,
)

__version__ = "0.1.0"

__all__ = [
    "ALICE_RULE",
    "ATOL",
    "BACKEND",
    "BASIS_LABELS",
    "DIRECTIONS",
    "FORMS",
    "MAX_TENSOR_DIM",
    "NUMBA_AVAILABLE",
    "ORDER_TEMPLATES",
    "AdversaryInstance",
    "AdversaryStrategy",
    "ChannelTap",
    "ContractError",
    "DegenerateStateError",
    "DetectionEstimate",
    "GhzSpec",
    "MeasBasis",
    "MeasOutcome",
    "Message",
    "Operator",
    "ProtocolConfig",
    "PureState",
    "QuantumRound",
    "ResourceLimitError",
    "RoundRecord",
    "RunReport",
    "StoredWire",
    "active_backend",
    "alice_basis_for",
    "announcement_order",
    "basis_for_label",
    "basis_state",
    "bob_entangle_attack",
    "bob_intercept_resend",
    "check_mub",
    "check_u_relation",
    "common_eigenspace",
    "correlation_holds",
    "detection_analytic",
    "draw_sift_mask",
    "estimate_detection",
    "eve_intercept_resend",
    "form_equivalence",
    "ghz_closed_form",
    "ghz_sum_form",
    "identity",
    "inner",
    "joint_distribution",
    "ket",
    "maximally_entangled",
    "measure_subsystem",
    "omega",
    "omega_pow",
    "outcome_probabilities",
    "parse_transcript_line",
    "pauli_x",
    "pauli_y",
    "pauli_z",
    "random_direction",
    "realize",
    "reconstruct_key",
    "report_to_dict",
    "report_to_json",
    "require_dim",
    "rng_stream",
    "run_protocol",
    "states_equal_up_to_phase",
    "tensor",
    "transcript_audit",
    "transcript_lines",
    "unitary_u",
    "uxu_basis",
    "x_basis",
    "y_basis",
    "y_eigenvalue",
    "z_basis",
    "__version__",
]
