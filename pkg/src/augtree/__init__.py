"""Augmented trees of contraction systems.

Builds the level sets of an iterated function system as a graph (vertical
tree edges plus horizontal proximity edges), then analyzes it: hyperbolicity
diagnostics, visual metrics and boundary distortion, separation-condition
evidence, horizontal-component classification, and random walks with their
Martin/Naim kernels.
"""

from .cells import CellApprox, attractor_cell, build_cell, cell_distance
from .config import (
    RunConfig,
    apply_overrides,
    build_from_config,
    load_config,
    parse_config,
)
from .errors import (
    AugtreeError,
    BudgetExceededError,
    ClassificationUnstableError,
    ConfigError,
    InternalError,
    SolverError,
    UnsupportedOperationError,
)
from .exact import Surd, exact_sqrt, parse_scalar, surd
from .graphio import (
    GRAPH_SCHEMA,
    REPORT_SCHEMA,
    csv_text,
    degree_rows,
    format_float,
    graph_from_json,
    graph_to_dot,
    graph_to_json,
    graphs_equal,
    json_text,
    read_graph_json,
    write_classes_json,
    write_csv,
    write_degree_csv,
    write_delta_profile_csv,
    write_dot,
    write_graph_json,
    write_hitting_csv,
    write_holder_csv,
    write_json,
    write_kernels_csv,
    write_l_profile_csv,
    write_report_json,
    write_verdicts_json,
)
from .ifs import (
    ContractionSpec,
    GeneralContraction,
    MapFingerprint,
    SimilitudeMap,
    load_ifs,
    parse_ifs_text,
    parse_word,
    word_str,
)
from .lipschitz import (
    classify_components,
    horizontal_components,
    incidence_matrix,
    lipschitz_report,
    simplicity_report,
)
from .metric import (
    all_pairs_distances,
    bfs_distances,
    canonical_geodesic,
    delta_profile,
    geodesic_divergence,
    graph_distance,
    gromov_matrix,
    gromov_product,
    holder_report,
    horizontal_run_profile,
    hyperbolicity_delta,
    level_matrices,
    visual_metric_report,
)
from .presets import PRESETS, preset
from .randwalk import (
    TruncatedChain,
    aggregate_to_level,
    boundary_martin,
    compare_mc_solver,
    default_growth_rate,
    harmonic_profile,
    harmonic_vs_natural,
    horizon_comparison,
    martin_harmonic_defect,
    martin_kernel,
    martin_regression,
    naim_kernel,
    naim_regression,
)
from .separation import (
    SLOPE_BOUNDED,
    SLOPE_GROWING,
    ball_intersection_profile,
    coincidence_search,
    degree_profile,
    growth_slope,
    separation_verdict,
    truncated_degree_profile,
)
from .trees import (
    CERTIFIED,
    UNCERTAIN,
    AugmentedGraph,
    EdgeSet,
    MoranSpec,
    build_dyadic_tree,
    build_graph,
    build_moran_tree,
    graph_from_parts,
    moran_from_stage_lines,
    quotient_graph,
    verify_diamond,
    verify_pre_augmented,
)

__all__ = [
    "AugmentedGraph",
    "AugtreeError",
    "BudgetExceededError",
    "CERTIFIED",
    "CellApprox",
    "ClassificationUnstableError",
    "ConfigError",
    "ContractionSpec",
    "EdgeSet",
    "GRAPH_SCHEMA",
    "GeneralContraction",
    "InternalError",
    "MapFingerprint",
    "MoranSpec",
    "PRESETS",
    "REPORT_SCHEMA",
    "RunConfig",
    "SLOPE_BOUNDED",
    "SLOPE_GROWING",
    "SimilitudeMap",
    "SolverError",
    "Surd",
    "TruncatedChain",
    "UNCERTAIN",
    "UnsupportedOperationError",
    "aggregate_to_level",
    "all_pairs_distances",
    "apply_overrides",
    "attractor_cell",
    "ball_intersection_profile",
    "bfs_distances",
    "boundary_martin",
    "build_cell",
    "build_dyadic_tree",
    "build_from_config",
    "build_graph",
    "build_moran_tree",
    "canonical_geodesic",
    "cell_distance",
    "classify_components",
    "coincidence_search",
    "compare_mc_solver",
    "csv_text",
    "default_growth_rate",
    "degree_profile",
    "degree_rows",
    "delta_profile",
    "exact_sqrt",
    "format_float",
    "geodesic_divergence",
    "graph_distance",
    "graph_from_json",
    "graph_from_parts",
    "graph_to_dot",
    "graph_to_json",
    "graphs_equal",
    "gromov_matrix",
    "gromov_product",
    "growth_slope",
    "harmonic_profile",
    "harmonic_vs_natural",
    "holder_report",
    "horizon_comparison",
    "horizontal_components",
    "horizontal_run_profile",
    "hyperbolicity_delta",
    "incidence_matrix",
    "json_text",
    "level_matrices",
    "lipschitz_report",
    "load_config",
    "load_ifs",
    "martin_harmonic_defect",
    "martin_kernel",
    "martin_regression",
    "moran_from_stage_lines",
    "naim_kernel",
    "naim_regression",
    "parse_config",
    "parse_ifs_text",
    "parse_scalar",
    "parse_word",
    "preset",
    "quotient_graph",
    "read_graph_json",
    "separation_verdict",
    "simplicity_report",
    "truncated_degree_profile",
    "verify_diamond",
    "verify_pre_augmented",
    "visual_metric_report",
    "word_str",
    "write_classes_json",
    "write_csv",
    "write_degree_csv",
    "write_delta_profile_csv",
    "write_dot",
    "write_graph_json",
    "write_hitting_csv",
    "write_holder_csv",
    "write_json",
    "write_kernels_csv",
    "write_l_profile_csv",
    "write_report_json",
    "write_verdicts_json",
]

__version__ = "0.1.0"
