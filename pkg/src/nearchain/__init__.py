"""nearchain: near-repeat event chain detection via cohesive subgraphs.

Pipeline: ingest raw event CSVs into cleaned planar events, index them in a
3-D R-tree, link near-repeat pairs into an event graph, decompose it with
k-core / k-truss / k-DBSCAN / maximal-clique detectors, and quantify global
space-time clustering with the Knox contingency test.
"""

from .common import SCHEMA_VERSION
from .events import Event, IngestConfig, RangeWindow, ingest_events
from .spatial import Box3, RTree3, STPoint, build, neighbor_pairs, range_query
from .graph import (
    EventGraph,
    build_graph,
    clustering_coefficient,
    compute_supports,
    connected_components,
    diameter,
    graph_stats,
    induced_subgraph,
)
from .cohesive import (
    CliqueSet,
    DecompositionResult,
    Subgraph,
    core_numbers,
    decompose,
    enumerate_cliques,
    k_core_decompose,
    k_dbscan,
    k_truss_decompose,
    truss_numbers,
    validate,
)
from .knox import (
    KnoxConfig,
    KnoxTable,
    build_table,
    expected_and_residuals,
    monte_carlo,
)
from .projection import project_to_utm, utm_to_latlon, zone_for_lon
from .synth import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "SCHEMA_VERSION",
    "Event",
    "IngestConfig",
    "RangeWindow",
    "ingest_events",
    "Box3",
    "RTree3",
    "STPoint",
    "build",
    "neighbor_pairs",
    "range_query",
    "EventGraph",
    "build_graph",
    "clustering_coefficient",
    "compute_supports",
    "connected_components",
    "diameter",
    "graph_stats",
    "induced_subgraph",
    "CliqueSet",
    "DecompositionResult",
    "Subgraph",
    "core_numbers",
    "decompose",
    "enumerate_cliques",
    "k_core_decompose",
    "k_dbscan",
    "k_truss_decompose",
    "truss_numbers",
    "validate",
    "KnoxConfig",
    "KnoxTable",
    "build_table",
    "expected_and_residuals",
    "monte_carlo",
    "project_to_utm",
    "utm_to_latlon",
    "zone_for_lon",
    "SynthConfig",
    "generate",
    "__version__",
]
