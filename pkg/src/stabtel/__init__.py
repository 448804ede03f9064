"""Teleportation through qudit stabilizer states: capacity search, protocol
synthesis and dense-matrix verification."""
from .errors import (
    BudgetError,
    GroupValidationError,
    NoDecompositionError,
    ParseError,
    PartitionError,
    SimulationInconsistencyError,
    StabtelError,
)
from .pauli import PauliOperator, commutation_exponent, format_pauli, multiply, parse_pauli, power, restrict
from .stabilizer import (
    CanonicalPattern,
    Decomposition,
    StabilizerGroup,
    build_group,
    certify_decomposition,
    certify_pattern,
    find_bipartite_decomposition,
    find_multipartite_decomposition,
    is_member,
    projector_rank,
    restrict_group,
    search_decomposition,
    verify_decomposition,
)
from .protocol import ProtocolSpec, correction_unitary, synthesize_protocol, synthesize_receiver_unitary
from .dense import run_protocol, random_density_matrix, trace_distance

__version__ = "0.1.0"
