"""Global identifiability of linear Gaussian structural equation models.

Decide whether the covariance parametrization of an acyclic mixed graph is
injective, invert it stepwise when it is, construct explicit witness pairs
when it is not, and compute exact fibers for directed cycles.
"""

from .census import (
    CensusReport,
    CensusRow,
    OracleVerdict,
    canonical_form,
    census_report,
    enumerate_graphs,
    injectivity_oracle,
)
from .criterion import (
    IdentVerdict,
    check_global_identifiability,
    find_violating_set,
    find_violating_set_exhaustive,
)
from .cycles import (
    CycleFiber,
    CycleParams,
    cycle_fiber,
    cycle_graph,
    det_K_minus_i,
    kappa_of,
    lift_to_phi_fiber,
)
from .errors import SemidentError
from .graphs import (
    MixedGraph,
    graph_to_json,
    graph_to_text,
    load_graph,
    parse_graph,
    parse_graph_json,
)
from .inversion import (
    FiberDescription,
    FiberFamily,
    StepRecord,
    fiber_trace,
    invert,
    rank_condition,
)
from .params import (
    kappa,
    matrix_from_json,
    matrix_to_json,
    path_inverse,
    phi,
    sample_parameters,
)
from .witness import WitnessPair, construct_witness

__version__ = "0.1.0"

__all__ = [
    "CensusReport",
    "CensusRow",
    "CycleFiber",
    "CycleParams",
    "FiberDescription",
    "FiberFamily",
    "IdentVerdict",
    "MixedGraph",
    "OracleVerdict",
    "SemidentError",
    "StepRecord",
    "WitnessPair",
    "canonical_form",
    "census_report",
    "check_global_identifiability",
    "construct_witness",
    "cycle_fiber",
    "cycle_graph",
    "det_K_minus_i",
    "enumerate_graphs",
    "fiber_trace",
    "find_violating_set",
    "find_violating_set_exhaustive",
    "graph_to_json",
    "graph_to_text",
    "injectivity_oracle",
    "invert",
    "kappa",
    "kappa_of",
    "lift_to_phi_fiber",
    "load_graph",
    "matrix_from_json",
    "matrix_to_json",
    "parse_graph",
    "parse_graph_json",
    "path_inverse",
    "phi",
    "rank_condition",
    "sample_parameters",
    "__version__",
]
