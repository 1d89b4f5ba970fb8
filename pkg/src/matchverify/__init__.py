"""Distributed verification of maximum matchings in the CONGEST model.

The main entry point is :func:`verify`, which decides whether a matching
is maximum by simulating the message-passing protocol round by round.
"""

from .graphcore import Graph, Matching, augment, validate_matching
from .oracle import maximum_matching_size, oracle, shortest_augmenting
from .verifier import DISPROVED, VERIFIED, Verdict, maximal_matching_distributed, verify

__all__ = [
    "Graph", "Matching", "augment", "validate_matching",
    "maximum_matching_size", "oracle", "shortest_augmenting",
    "DISPROVED", "VERIFIED", "Verdict", "maximal_matching_distributed", "verify",
]
