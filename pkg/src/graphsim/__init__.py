"""Session-isolated graph simulation sandbox with replayable decision traces."""

from graphsim.core import EdgeRecord, NodeRecord, Predicate, PropertyGraph, induced_subgraph, state_hash
from graphsim.sandbox import Sandbox

__version__ = "0.1.0"

__all__ = ["EdgeRecord", "NodeRecord", "Predicate", "PropertyGraph", "Sandbox", "induced_subgraph", "state_hash"]
