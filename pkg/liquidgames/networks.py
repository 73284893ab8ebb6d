"""Seeded generators for the four simulation topologies, plus graph statistics."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Union

import networkx as nx
import numpy as np
import pandas as pd

from .errors import GenerationError, InvalidGameError
from .game import Network

logger = logging.getLogger(__name__)

MAX_RETRIES = 1000

# Recorded in experiment metadata next to the numpy stream id.
GRAPH_PRNG = "networkx/random.Random (MT19937), per-attempt seeds from numpy SeedSequence"


@dataclass(frozen=True)
class TopologySpec:
    """Which topology to draw and how.

    Attributes
    ----------
        kind : one of `topologies`
        n : number of agents
        avg_degree : even target mean degree, below n
        rewiring_beta : rewiring probability, small world only
        seed : 64-bit seed; attempt t draws from SeedSequence(seed, spawn_key=(t,))

    """

    kind: str
    n: int
    avg_degree: int
    rewiring_beta: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in topologies:
            raise InvalidGameError(f"unknown topology {self.kind!r}")
        if self.n < 2:
            raise InvalidGameError("topologies need at least two agents")
        if self.avg_degree < 2 or self.avg_degree % 2:
            raise InvalidGameError(f"average degree must be even and >= 2, got {self.avg_degree}")
        if self.avg_degree >= self.n:
            raise InvalidGameError(f"average degree {self.avg_degree} not below n={self.n}")
        if not 0.0 <= self.rewiring_beta <= 1.0:
            raise InvalidGameError(f"rewiring probability {self.rewiring_beta} outside [0, 1]")


def attempt_seed(seed: int, attempt: int) -> int:
    """Seed handed to networkx for the given retry."""
    seq = np.random.SeedSequence(seed, spawn_key=(attempt,))
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def random_graph(spec: TopologySpec, seed: int) -> nx.Graph:
    """G(n, p): each pair is linked with probability avg_degree / (n - 1)."""
    return nx.fast_gnp_random_graph(spec.n, spec.avg_degree / (spec.n - 1), seed=seed)


def regular(spec: TopologySpec, seed: int) -> nx.Graph:
    """Random k-regular graph from the pairing model."""
    return nx.random_regular_graph(spec.avg_degree, spec.n, seed=seed)


def small_world(spec: TopologySpec, seed: int) -> nx.Graph:
    """Ring lattice with k nearest neighbors, each edge rewired with probability beta."""
    return nx.watts_strogatz_graph(spec.n, spec.avg_degree, spec.rewiring_beta, seed=seed)


def scale_free(spec: TopologySpec, seed: int) -> nx.Graph:
    """Preferential attachment with m = avg_degree / 2 edges per new node."""
    return nx.barabasi_albert_graph(spec.n, spec.avg_degree // 2, seed=seed)


topologies: Dict[str, Callable[[TopologySpec, int], nx.Graph]] = {
    "random": random_graph,
    "regular": regular,
    "small_world": small_world,
    "scale_free": scale_free,
}


def generate(spec: TopologySpec, max_retries: int = MAX_RETRIES) -> Network:
    """Draw a connected, symmetric network.

    Disconnected draws are discarded and redrawn from the next sub-seed,
    so the accepted graph keeps the generator's own distribution.

    Args:
    ----
        spec: Topology and seed.
        max_retries: Number of draws before giving up.

    Returns:
    -------
        Network: A symmetric, connected network.

    Raises:
    ------
        GenerationError: If no draw was connected.

    """
    build = topologies[spec.kind]
    for attempt in range(max_retries):
        try:
            graph = build(spec, attempt_seed(spec.seed, attempt))
        except nx.NetworkXError as exc:
            logger.debug("%s attempt %d failed: %s", spec.kind, attempt, exc)
            continue
        if nx.is_connected(graph):
            network = Network.from_networkx(graph)
            network.validate(require_symmetric=True, require_connected=True)
            if attempt:
                logger.debug("%s accepted after %d retries", spec.kind, attempt)
            return network
    raise GenerationError(f"no connected {spec.kind} graph after {max_retries} attempts")


def mean_pairwise_distance(network: Network) -> float:
    """Average shortest-path length over all unordered pairs.

    Raises
    ------
        InvalidGameError: If the network is disconnected.

    """
    if network.n == 1:
        return 0.0
    graph = network.to_networkx().to_undirected()
    if not nx.is_connected(graph):
        raise InvalidGameError("mean distance is undefined on a disconnected network")
    return nx.average_shortest_path_length(graph)


@dataclass(frozen=True)
class DegreeStats:
    min: int
    max: int
    mean: float
    histogram: Dict[int, int]


def degree_stats(network: Network) -> DegreeStats:
    """Min, max, mean and histogram of |R(i)|."""
    degrees = [network.degree(i) for i in range(network.n)]
    histogram: Dict[int, int] = {}
    for k in degrees:
        histogram[k] = histogram.get(k, 0) + 1
    return DegreeStats(min(degrees), max(degrees), sum(degrees) / len(degrees), dict(sorted(histogram.items())))


def write_edge_list(network: Network, path: Union[str, Path]) -> None:
    """Write `u,v` rows (0-indexed, u < v) under a `u,v` header."""
    edges = sorted((min(u, v), max(u, v)) for u, v in network.edges())
    pd.DataFrame(sorted(set(edges)), columns=["u", "v"]).to_csv(path, index=False)


def read_edge_list(path: Union[str, Path], n: Optional[int] = None) -> Network:
    """Read an edge list written by `write_edge_list` as a symmetric network.

    Args:
    ----
        path: CSV file.
        n: Agent count; defaults to one past the largest id.

    """
    frame = pd.read_csv(path)
    edges = list(zip(frame["u"].astype(int), frame["v"].astype(int)))
    if n is None:
        n = 1 + max((max(u, v) for u, v in edges), default=0)
    return Network.from_edges(n, edges, symmetric=True)
