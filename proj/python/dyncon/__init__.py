"""Fully dynamic graph connectivity."""

from ._dyncon import (
    ALGORITHMS,
    Connectivity,
    ParseError,
    QueryError,
    StructuralError,
    gen_stream,
    grid_graph,
    make,
    random_graph,
    random_stream,
    run_stream,
)

__all__ = [
    "ALGORITHMS",
    "Connectivity",
    "ParseError",
    "QueryError",
    "StructuralError",
    "gen_stream",
    "grid_graph",
    "make",
    "random_graph",
    "random_stream",
    "run_stream",
]
