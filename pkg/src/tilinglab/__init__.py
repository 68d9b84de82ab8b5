"""Simulation laboratory for thresholds of randomly perturbed multipartite K_r-tilings."""

from tilinglab.mpgraph import PartiteGraph, VertexRef, build_graph, deserialize, serialize
from tilinglab.tiler import Tiling, exact_perfect_tiling, greedy_partial_tiling, validate_tiling

__version__ = "0.1.0"

__all__ = [
    "PartiteGraph", "VertexRef", "build_graph", "serialize", "deserialize",
    "Tiling", "exact_perfect_tiling", "greedy_partial_tiling", "validate_tiling",
]
