"""
Numerical building blocks shared by the engine and the bench CLI.

Organization:
- tensor_utils: dense operators, partial traces, SWAP/CYCSWAP, matrix exponential
- channel_utils: superoperators, Choi states, the exact Lindblad oracle, distances
- program_utils: encoding operators into program states, omega sampling, perturbations
- random_utils: seeded random operators and states
- errors: exception hierarchy and exit codes
"""

from .channel_utils import (
    ChoiState,
    CptpDiagnostic,
    DensityMatrix,
    JumpEvolution,
    LindbladSpec,
    SuperOperator,
    apply_lindblad_action,
    apply_superop,
    choi_of,
    choi_trace_distance,
    devectorize,
    exact_channel,
    is_cptp,
    liouvillian,
    superop_from_action,
    vectorize,
)
from .errors import WMLError
from .program_utils import (
    OmegaSample,
    ProgramState,
    decode_operator,
    encode_operator,
    perturb_unit_operator,
    psi_distance,
    sample_omega,
)
from .tensor_utils import (
    SystemDims,
    configure,
    cycswap_operator,
    gamma_vector,
    hs_inner,
    invariant_tol,
    kron,
    mat_exp,
    partial_trace,
    permute_subsystems,
    schatten_norm,
    swap_operator,
)

__all__ = [
    # channel_utils
    "ChoiState",
    "CptpDiagnostic",
    "DensityMatrix",
    "JumpEvolution",
    "LindbladSpec",
    # program_utils
    "OmegaSample",
    "ProgramState",
    "SuperOperator",
    # tensor_utils
    "SystemDims",
    # errors
    "WMLError",
    "apply_lindblad_action",
    "apply_superop",
    "choi_of",
    "choi_trace_distance",
    "configure",
    "cycswap_operator",
    "decode_operator",
    "devectorize",
    "encode_operator",
    "exact_channel",
    "gamma_vector",
    "hs_inner",
    "invariant_tol",
    "is_cptp",
    "kron",
    "liouvillian",
    "mat_exp",
    "partial_trace",
    "perturb_unit_operator",
    "permute_subsystems",
    "psi_distance",
    "sample_omega",
    "schatten_norm",
    "superop_from_action",
    "swap_operator",
    "vectorize",
]
