"""Distributed-memory graph coloring on a simulated message-passing cluster."""
from .coloring import (
    FirstFit,
    LeastUsed,
    Ordering,
    RandomX,
    StaggeredFirstFit,
    check_validity,
    chromatic_oracle,
    greedy_color,
    num_colors,
    order_vertices,
    parse_selection,
    pick_color,
)
from .graph import (
    RMAT_BAD,
    RMAT_ER,
    RMAT_GOOD,
    Graph,
    RmatParams,
    generate_rmat,
    load_edge_list,
    load_matrix_market,
)
from .metrics import RunMetrics
from .partition import Partition, RankView, block_partition, build_rank_views, load_partition_file
from .protocol import Mode, ProtocolConfig, run_protocol

from .recolor import (
    ColorClassPermutation,
    Permutation,
    PermutationSchedule,
    build_class_permutation,
    plan_piggyback,
    recolor_async,
    recolor_iterations,
    recolor_sync,
)
from .pipeline import PRESETS, RunConfig, preset, run_pipeline
from .bench import geo_mean, normalize, sweep

__version__ = "0.1.0"
