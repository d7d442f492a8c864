"""Time-domain Kron reduction of generalized electrical networks."""

from .graph import (
    DirectedGraph,
    GraphError,
    SelfLoopError,
    VertexPartition,
    build_incidence,
    is_connected,
    split_rows,
    weighted_laplacian,
)
from .network import (
    GeneralizedNetwork,
    HomogeneousForm,
    InvalidNetwork,
    NotReducible,
    element,
    homogeneous_form,
    is_homogeneous,
    rank1_check,
    validate,
)
from .reduction import (
    NotALaplacian,
    ReducedNetwork,
    SingularInternalBlock,
    injection_map,
    kron_reduce,
    laplacian_to_graph,
    schur_complement,
)
from .signals import Constant, Exponential, Polynomial, Product, Scale, Signal, Sinusoid, Sum
from .simulation import (
    EquivalenceReport,
    Grid,
    PoleError,
    Trace,
    check_equivalence,
    compare_traces,
    frequency_response,
    simulate_original,
    simulate_reduced,
    simulate_with_injection,
    solve_lcc_ode,
)

__all__ = [
    "build_incidence",
    "check_equivalence",
    "compare_traces",
    "Constant",
    "DirectedGraph",
    "element",
    "EquivalenceReport",
    "Exponential",
    "frequency_response",
    "GeneralizedNetwork",
    "GraphError",
    "Grid",
    "homogeneous_form",
    "HomogeneousForm",
    "injection_map",
    "InvalidNetwork",
    "is_connected",
    "is_homogeneous",
    "kron_reduce",
    "laplacian_to_graph",
    "NotALaplacian",
    "NotReducible",
    "PoleError",
    "Polynomial",
    "Product",
    "rank1_check",
    "ReducedNetwork",
    "Scale",
    "schur_complement",
    "SelfLoopError",
    "Signal",
    "simulate_original",
    "simulate_reduced",
    "simulate_with_injection",
    "SingularInternalBlock",
    "Sinusoid",
    "solve_lcc_ode",
    "split_rows",
    "Sum",
    "Trace",
    "validate",
    "VertexPartition",
    "weighted_laplacian",
]

__version__ = "0.1.0"
