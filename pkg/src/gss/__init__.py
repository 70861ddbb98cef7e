"""Graph stream sketch with square hashing, a TCM baseline and evaluation tools."""

from .analytic import collision_free_rate, insertion_failure
from .hashing import ConfigError, SketchConfig, hash_node, recover_hash
from .oracle import ExactGraph, HashedGraph
from .queries import ReachResult, node_out_weight, reachable
from .sketch import GSS, Placement, PlacementKind
from .stream import StreamItem, SynthSpec, parse_stream, synthesize
from .tcm import TCM

__all__ = [
    "GSS", "TCM", "ConfigError", "ExactGraph", "HashedGraph", "Placement", "PlacementKind",
    "ReachResult", "SketchConfig", "StreamItem", "SynthSpec", "collision_free_rate",
    "hash_node", "insertion_failure", "node_out_weight", "parse_stream", "reachable",
    "recover_hash", "synthesize",
]
