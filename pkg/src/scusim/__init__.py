"""scusim: sampled convex-unitary simulation of channels and Hamiltonians."""

__version__ = "0.1.0"

from .paulis import (  # noqa: F401
    PauliString,
    PauliSum,
    commutator,
    l1_norm,
    pauli_mul,
    sum_mul,
    taylor_even_odd,
)
from .channels import (  # noqa: F401
    ConvexUnitaryDecomposition,
    KrausChannel,
    SampledTerm,
    amplitude_damping,
    convex_decompose,
    sample_term,
    sampling_norm_bound,
)
from .circuits import (  # noqa: F401
    EstimatorResult,
    GateSequence,
    StateVector,
    apply,
    cross_term_expectation,
    exact_channel_apply,
    scu_estimate,
)
