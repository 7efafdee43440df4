"""Stability analysis of multi-stage interconnection networks."""

from .analysis import (
    ComparisonTable,
    Provenance,
    StabilityReport,
    Status,
    classify_status,
    compare,
    run_pipeline,
    stability_metrics,
)
from .errors import MinStabError
from .matching import (
    BlockingPair,
    Matching,
    PreferenceLists,
    TieRecord,
    brute_force_stable_matchings,
    derive_preference_lists,
    detect_ties,
    find_blocking_pairs,
    gale_shapley_reference,
    resolve_ties,
    select_stable_pairs,
    shortlist_reduce,
)
from .paths import (
    Route,
    RoutingTable,
    enumerate_routes,
    reachable_set,
    route_with_faults,
    shortest_path_length,
)
from .topology import (
    Link,
    MinTopology,
    NetworkKind,
    Port,
    Switch,
    build_3don,
    build_custom,
    build_omega,
    export_dot,
    load_topology,
    perfect_shuffle,
    save_topology,
    validate_topology,
)

__version__ = "0.1.0"

__all__ = [
    "BlockingPair",
    "ComparisonTable",
    "Link",
    "Matching",
    "MinStabError",
    "MinTopology",
    "NetworkKind",
    "Port",
    "PreferenceLists",
    "Provenance",
    "Route",
    "RoutingTable",
    "StabilityReport",
    "Status",
    "Switch",
    "TieRecord",
    "brute_force_stable_matchings",
    "build_3don",
    "build_custom",
    "build_omega",
    "classify_status",
    "compare",
    "derive_preference_lists",
    "detect_ties",
    "enumerate_routes",
    "export_dot",
    "find_blocking_pairs",
    "gale_shapley_reference",
    "load_topology",
    "perfect_shuffle",
    "reachable_set",
    "resolve_ties",
    "route_with_faults",
    "run_pipeline",
    "save_topology",
    "select_stable_pairs",
    "shortest_path_length",
    "shortlist_reduce",
    "stability_metrics",
    "validate_topology",
]
