"""embed3: planar rotation systems of 2-complexes and their obstructions."""

from embed3.graphs import (
    Graph,
    TracedSurface,
    canonical_rotation,
    is_k_connected,
    is_planar_rotation,
    kuratowski_witness,
    planar_embedding,
    trace_faces,
    vertex_sum,
)

__all__ = [
    "Graph",
    "TracedSurface",
    "canonical_rotation",
    "is_k_connected",
    "is_planar_rotation",
    "kuratowski_witness",
    "planar_embedding",
    "trace_faces",
    "vertex_sum",
]
