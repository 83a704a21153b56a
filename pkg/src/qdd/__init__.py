"""Decision diagrams for quantum computing."""

__version__ = "0.1.0"

from .circuit import Barrier, GateOp, MeasureOp, QuantumCircuit
from .core import TOLERANCE, Edge, Manager, default_manager, node_count, set_default_manager
from .equivalence import (
    EquivalenceResult,
    Strategy,
    Verdict,
    check_alternating,
    check_construction,
    check_simulation,
    difference_matrix,
    invert_gate,
    phase_equivalent,
    system_matrix,
)
from .matrix import OperatorDD, identity, kron, mat_mat_mul, mat_vec_mul
from .noise import (
    KrausChannel,
    NoiseModel,
    amplitude_damping,
    depolarizing,
    deterministic_simulate,
    diagonal_probabilities,
    phase_flip,
    stochastic_simulate,
)
from .qasm import ParseError, invert_circuit, parse, serialize
from .simulator import measure_all, measure_qubit, qubit_probabilities, sample, simulate
from .vector import StateDD, basis_state, from_amplitudes, get_amplitude, inner_product, to_amplitudes
