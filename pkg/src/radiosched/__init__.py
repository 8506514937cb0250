"""Radio-network transmission scheduling and adversarial queuing toolkit."""

from .bounds import (
    active_class_bound,
    coloring_threshold,
    delivery_window_bound,
    latency_bound,
    uss_threshold,
)
from .errors import ConstructionError, FormatError, ParameterError, SizeError
from .graphs import (
    ConflictGraph,
    NetworkGraph,
    build_conflict_graph,
    clique_graph,
    degree_bound_check,
    exact_chromatic,
    from_undirected_edges,
    greedy_coloring,
    path_graph,
    random_network,
    read_graph,
    successful_links,
    write_graph,
)
from .schedules import (
    TransmissionSchedule,
    extend_to_maximal_independent,
    read_schedule,
    schedule_from_coloring,
    schedule_from_selector,
    verify_frequent,
    write_schedule,
)
from .selectors import (
    SelectorMatrix,
    is_selector,
    poly_uss,
    random_uss,
    random_uss_size,
    read_selector,
    uss_min_count,
    uss_sample_check,
    write_selector,
)
from .sim import RunMetrics, failure_accounting, run, stability_verdict
from .traffic import (
    AdversaryConfig,
    InjectionTrace,
    Packet,
    gen_clique_scenario,
    gen_leaky_bucket,
    gen_tree_family,
    random_routes,
    read_trace,
    validate_trace,
    write_trace,
)

__all__ = [
    "AdversaryConfig",
    "ConflictGraph",
    "ConstructionError",
    "FormatError",
    "InjectionTrace",
    "NetworkGraph",
    "Packet",
    "ParameterError",
    "RunMetrics",
    "SelectorMatrix",
    "SizeError",
    "TransmissionSchedule",
    "active_class_bound",
    "build_conflict_graph",
    "clique_graph",
    "coloring_threshold",
    "degree_bound_check",
    "delivery_window_bound",
    "exact_chromatic",
    "extend_to_maximal_independent",
    "failure_accounting",
    "from_undirected_edges",
    "gen_clique_scenario",
    "gen_leaky_bucket",
    "gen_tree_family",
    "greedy_coloring",
    "is_selector",
    "latency_bound",
    "path_graph",
    "poly_uss",
    "random_network",
    "random_routes",
    "random_uss",
    "random_uss_size",
    "read_graph",
    "read_schedule",
    "read_selector",
    "read_trace",
    "run",
    "schedule_from_coloring",
    "schedule_from_selector",
    "stability_verdict",
    "successful_links",
    "uss_min_count",
    "uss_sample_check",
    "uss_threshold",
    "validate_trace",
    "verify_frequent",
    "write_graph",
    "write_schedule",
    "write_selector",
    "write_trace",
]
