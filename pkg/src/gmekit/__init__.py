"""Unified and genuine multipartite entanglement measures.

Partition coarsening calculus, dense qudit states, pure-state measure
families with their biseparability-gated variants, convex-roof extension
to mixed states, and monogamy audits.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .convex_roof import (
    Certificate,
    Evaluation,
    RoofConfig,
    RoofResult,
    biseparability_certificate,
    evaluate,
    roof_minimize,
    roof_minimize_genuine,
)
from .entropies import (
    fidelity_affinity,
    fidelity_sqrt,
    fidelity_uhlmann,
    matrix_sqrt,
    purity,
    renyi,
    trace_norm,
    tsallis,
    von_neumann,
)
from .errors import (
    GmekitError,
    InvalidArgumentError,
    PartitionRelationError,
    PartitionSizeError,
    StateFormatError,
    StateInvariantError,
)
from .fixtures import FIXTURES, fixture
from .genuine import (
    DeltaVerdict,
    delta_pure,
    evaluate_genuine_pure,
    gmc_pure,
    gmc_with_cut,
    sum_1234_2,
    sum_1234_3,
)
from .io import RunManifest, load_state, loads_state, save_state, state_from_dict, state_to_dict
from .measures import (
    Family,
    MeasureSpec,
    bipartite_value,
    evaluate_pure,
    negativity_mixed,
    parse_family,
    unification_check,
)
from .monogamy import (
    MonogamyReport,
    audit_complete,
    audit_disentangling,
    audit_tight,
    campaign,
    default_alpha_grid,
)
from .partitions import (
    Coarsen,
    Partition,
    all_bipartitions,
    all_partitions,
    coarsenings,
    is_coarser,
    xi_set,
)
from .states import (
    DensityOperator,
    Ensemble,
    PureState,
    SystemShape,
    ghz,
    mixture,
    partial_trace,
    partial_transpose,
    product,
    random_density,
    random_pure,
    regroup,
    w_state,
)

__all__ = [
    "__version__",
    "all_bipartitions",
    "all_partitions",
    "audit_complete",
    "audit_disentangling",
    "audit_tight",
    "bipartite_value",
    "biseparability_certificate",
    "campaign",
    "Certificate",
    "Coarsen",
    "coarsenings",
    "default_alpha_grid",
    "delta_pure",
    "DeltaVerdict",
    "DensityOperator",
    "Ensemble",
    "evaluate",
    "evaluate_genuine_pure",
    "evaluate_pure",
    "Evaluation",
    "Family",
    "fidelity_affinity",
    "fidelity_sqrt",
    "fidelity_uhlmann",
    "fixture",
    "FIXTURES",
    "ghz",
    "gmc_pure",
    "gmc_with_cut",
    "GmekitError",
    "InvalidArgumentError",
    "is_coarser",
    "load_state",
    "loads_state",
    "matrix_sqrt",
    "MeasureSpec",
    "mixture",
    "MonogamyReport",
    "negativity_mixed",
    "parse_family",
    "partial_trace",
    "partial_transpose",
    "Partition",
    "PartitionRelationError",
    "PartitionSizeError",
    "product",
    "PureState",
    "purity",
    "random_density",
    "random_pure",
    "regroup",
    "renyi",
    "roof_minimize",
    "roof_minimize_genuine",
    "RoofConfig",
    "RoofResult",
    "RunManifest",
    "save_state",
    "state_from_dict",
    "state_to_dict",
    "StateFormatError",
    "StateInvariantError",
    "sum_1234_2",
    "sum_1234_3",
    "SystemShape",
    "trace_norm",
    "tsallis",
    "unification_check",
    "von_neumann",
    "w_state",
    "xi_set",
]
