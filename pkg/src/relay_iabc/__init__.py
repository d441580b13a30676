"""Relay-IABC: signed, relayed, phase-wise trimmed-mean Byzantine approximate consensus.

Simulator for honest nodes running the relay protocol or the single-hop
IABC baseline against configurable Byzantine behaviour, plus the graph and
matrix tools used to check its structural claims.
"""

from .adversary import ByzantineNode, ByzantineStrategy
from .analysis import (PhaseMatrix, RateBounds, check_L1, check_L2, check_T1, compare_rate_bounds,
                       dobrushin_delta, extract_phase_matrix, is_scrambling, lambda_coefficient,
                       state_consistency_check)
from .config import ConfigError, SimConfig, build_scenario
from .engine import SimTrace, check_convergence, check_validity, run
from .graph import (Graph, Partition, ReducedGraph, diameter, enumerate_reduced_graphs,
                    find_source_components, generate_erdos_renyi, honest_subgraph,
                    is_strongly_connected, max_outdegree, sample_reduced_graphs)
from .protocol import BaselineNode, Message, RelayNode, SignedEntry, trimmed_mean
from .signatures import KeyPair, Payload, keygen, sign, verify

__version__ = "0.1.0"
