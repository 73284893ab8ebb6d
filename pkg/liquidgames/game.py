"""Delegation games: agents, type models, networks, profiles and payoffs."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from . import operators
from .errors import InvalidGameError, UnsupportedTypeModelError

logger = logging.getLogger(__name__)

AgentId = int

# Tolerance on q - e >= 0.5 and on joint probabilities summing to one.
_PARAM_TOL = 1e-12


@dataclass(frozen=True)
class AgentParams:
    """Accuracy `q` and effort `e` of a single agent."""

    accuracy: float
    effort: float = 0.0

    @property
    def net(self) -> float:
        """Payoff of voting directly, q - e."""
        return self.accuracy - self.effort


class TypeModel:
    """Distribution over binary type profiles.

    Subclasses answer `proximity(i, j)`, the probability that agents i and j
    share the same type.
    """

    kind: str = ""

    @property
    def n(self) -> int:
        """Number of agents the model covers."""
        raise NotImplementedError

    def proximity(self, i: AgentId, j: AgentId) -> float:
        """Probability that agents i and j have the same type."""
        raise NotImplementedError

    def is_homogeneous(self) -> bool:
        """True if all agents surely share one type."""
        raise NotImplementedError


def _check_bits(profile: Sequence[int]) -> None:
    for b in profile:
        if b not in (0, 1):
            raise InvalidGameError(f"type profile entries must be 0 or 1, got {b!r}")


@dataclass(frozen=True)
class Deterministic(TypeModel):
    """A crisp type for every agent."""

    profile: Tuple[int, ...]
    kind = "deterministic"

    def __post_init__(self) -> None:
        object.__setattr__(self, "profile", tuple(int(b) for b in self.profile))
        _check_bits(self.profile)

    @property
    def n(self) -> int:
        return len(self.profile)

    def proximity(self, i: AgentId, j: AgentId) -> float:
        return 1.0 if self.profile[i] == self.profile[j] else 0.0

    def is_homogeneous(self) -> bool:
        return len(set(self.profile)) <= 1

    @classmethod
    def homogeneous(cls, n: int, bit: int = 1) -> Deterministic:
        """Every agent has type `bit`."""
        return cls(tuple([bit] * n))


@dataclass(frozen=True)
class IndependentProbabilistic(TypeModel):
    """Independent types with marginals x_i = P(type_i = 1)."""

    marginals: Tuple[float, ...]
    kind = "independent"

    def __post_init__(self) -> None:
        object.__setattr__(self, "marginals", tuple(float(x) for x in self.marginals))
        for x in self.marginals:
            if not operators.in_unit(x):
                raise InvalidGameError(f"marginal {x} is not a probability")

    @property
    def n(self) -> int:
        return len(self.marginals)

    def proximity(self, i: AgentId, j: AgentId) -> float:
        if i == j:
            return 1.0
        return operators.agreement(self.marginals[i], self.marginals[j])

    def is_homogeneous(self) -> bool:
        xs = set(self.marginals)
        return len(xs) <= 1 and xs <= {0.0, 1.0}


@dataclass(frozen=True)
class ExplicitJoint(TypeModel):
    """An explicit list of (type profile, probability) pairs.

    Meant for small populations; proximities are a scan of the support.
    """

    support: Tuple[Tuple[Tuple[int, ...], float], ...]
    kind = "joint"

    def __post_init__(self) -> None:
        support = tuple((tuple(int(b) for b in prof), float(p)) for prof, p in self.support)
        object.__setattr__(self, "support", support)
        if not support:
            raise InvalidGameError("joint distribution has an empty support")
        n = len(support[0][0])
        total = 0.0
        for prof, p in support:
            if len(prof) != n:
                raise InvalidGameError("joint support profiles differ in length")
            _check_bits(prof)
            if p < 0.0:
                raise InvalidGameError(f"negative probability {p}")
            total += p
        if abs(total - 1.0) > _PARAM_TOL:
            raise InvalidGameError(f"joint probabilities sum to {total}, not 1")

    @property
    def n(self) -> int:
        return len(self.support[0][0])

    def proximity(self, i: AgentId, j: AgentId) -> float:
        if i == j:
            return 1.0
        return sum(p for prof, p in self.support if prof[i] == prof[j])

    def is_homogeneous(self) -> bool:
        return all(len(set(prof)) <= 1 for prof, p in self.support if p > 0.0)


@dataclass(frozen=True)
class Network:
    """Directed interaction structure R over agents 0..n-1.

    `adjacency[i]` is the sorted tuple R(i); self loops are never stored
    since voting directly is always available.
    """

    n: int
    adjacency: Tuple[Tuple[AgentId, ...], ...]
    symmetric: bool = False

    def __post_init__(self) -> None:
        adjacency = tuple(tuple(sorted(set(int(j) for j in row))) for row in self.adjacency)
        object.__setattr__(self, "adjacency", adjacency)
        if self.n < 1:
            raise InvalidGameError("a network needs at least one agent")
        if len(adjacency) != self.n:
            raise InvalidGameError(f"adjacency has {len(adjacency)} rows for n={self.n}")
        for i, row in enumerate(adjacency):
            for j in row:
                if j == i:
                    raise InvalidGameError(f"self loop at agent {i}")
                if not 0 <= j < self.n:
                    raise InvalidGameError(f"neighbor {j} of agent {i} out of range")
        if self.symmetric and not self._is_symmetric():
            raise InvalidGameError("network flagged symmetric has a one-way edge")

    def _is_symmetric(self) -> bool:
        rows = [set(row) for row in self.adjacency]
        return all(i in rows[j] for i, row in enumerate(self.adjacency) for j in row)

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[Tuple[int, int]], symmetric: bool = True
    ) -> Network:
        """Build a network from an edge list.

        Args:
        ----
            n: Number of agents.
            edges: Pairs (u, v) meaning v is in R(u).
            symmetric: If True every pair is added in both directions.

        Returns:
        -------
            Network: The assembled network.

        """
        rows: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidGameError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise InvalidGameError(f"self loop at agent {u}")
            rows[u].add(v)
            if symmetric:
                rows[v].add(u)
        return cls(n, tuple(tuple(r) for r in rows), symmetric)

    @classmethod
    def complete(cls, n: int) -> Network:
        """Everyone can delegate to everyone."""
        return cls(n, tuple(tuple(j for j in range(n) if j != i) for i in range(n)), True)

    @classmethod
    def empty(cls, n: int) -> Network:
        """R is empty: voting directly is the only strategy."""
        return cls(n, tuple(() for _ in range(n)), True)

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> Network:
        """Convert a networkx graph on nodes 0..n-1."""
        n = graph.number_of_nodes()
        if sorted(graph.nodes) != list(range(n)):
            raise InvalidGameError("networkx graph nodes must be 0..n-1")
        if graph.is_directed():
            return cls(n, tuple(tuple(graph.successors(i)) for i in range(n)), False)
        return cls(n, tuple(tuple(graph.neighbors(i)) for i in range(n)), True)

    def to_networkx(self) -> nx.Graph:
        """Return an nx.Graph for symmetric networks, an nx.DiGraph otherwise."""
        graph = nx.Graph() if self.symmetric else nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges())
        return graph

    def neighbors(self, i: AgentId) -> Tuple[AgentId, ...]:
        """R(i)."""
        return self.adjacency[i]

    def strategies(self, i: AgentId) -> Tuple[AgentId, ...]:
        """{i} union R(i), ascending."""
        return tuple(sorted((i,) + self.adjacency[i]))

    def edges(self) -> List[Tuple[AgentId, AgentId]]:
        """Edge list; symmetric networks list each pair once with u < v."""
        if self.symmetric:
            return [(i, j) for i, row in enumerate(self.adjacency) for j in row if i < j]
        return [(i, j) for i, row in enumerate(self.adjacency) for j in row]

    def degree(self, i: AgentId) -> int:
        return len(self.adjacency[i])

    def is_connected(self) -> bool:
        """One weakly connected component."""
        return nx.is_weakly_connected(self.to_networkx().to_directed())

    def validate(self, require_symmetric: bool = False, require_connected: bool = False) -> None:
        """Raise InvalidGameError unless the requested guarantees hold."""
        if require_symmetric and not self._is_symmetric():
            raise InvalidGameError("network is not symmetric")
        if require_connected and not self.is_connected():
            raise InvalidGameError("network is not connected")


@dataclass(frozen=True)
class DelegationProfile:
    """The map d: N -> N; `choices[i] == i` means agent i votes directly."""

    choices: Tuple[AgentId, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "choices", tuple(int(c) for c in self.choices))

    def __len__(self) -> int:
        return len(self.choices)

    def __getitem__(self, i: AgentId) -> AgentId:
        return self.choices[i]

    @classmethod
    def direct(cls, n: int) -> DelegationProfile:
        """Nobody delegates."""
        return cls(tuple(range(n)))

    def with_choice(self, i: AgentId, s: AgentId) -> DelegationProfile:
        """(d_{-i}, s)."""
        choices = list(self.choices)
        choices[i] = s
        return DelegationProfile(tuple(choices))

    def one_indexed(self) -> Tuple[int, ...]:
        """Choices rendered 1-indexed for reports."""
        return tuple(c + 1 for c in self.choices)


@dataclass(frozen=True)
class GuruResolution:
    """Result of following every delegation chain to its end.

    Attributes
    ----------
        guru : d*_i, or None when i's chain runs into a cycle
        in_cycle_path : True when i is not in N*
        chain_length : hops from i to its guru, None outside N*

    """

    guru: Tuple[Optional[AgentId], ...]
    in_cycle_path: Tuple[bool, ...]
    chain_length: Tuple[Optional[int], ...]

    def in_n_star(self, i: AgentId) -> bool:
        return self.guru[i] is not None


@dataclass(frozen=True)
class DelegationGame:
    """G = <N, P, R, Sigma_i, u_i> with strategies restricted to {i} union R(i)."""

    params: Tuple[AgentParams, ...]
    types: TypeModel
    network: Network

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(self.params))
        n = len(self.params)
        if n < 1:
            raise InvalidGameError("a game needs at least one agent")
        if self.types.n != n or self.network.n != n:
            raise InvalidGameError(
                f"size mismatch: {n} agents, {self.types.n} types, network of {self.network.n}"
            )
        for i, p in enumerate(self.params):
            if not 0.5 <= p.accuracy <= 1.0:
                raise InvalidGameError(f"agent {i}: accuracy {p.accuracy} outside [0.5, 1]")
            if p.effort < 0.0:
                raise InvalidGameError(f"agent {i}: negative effort {p.effort}")
            if p.net < 0.5 - _PARAM_TOL:
                raise InvalidGameError(f"agent {i}: q - e = {p.net} below 0.5")

    @classmethod
    def build(
        cls,
        accuracies: Sequence[float],
        efforts: Optional[Sequence[float]],
        types: TypeModel,
        network: Network,
    ) -> DelegationGame:
        """Assemble a game from parallel accuracy/effort vectors (efforts default to 0)."""
        if efforts is None:
            efforts = [0.0] * len(accuracies)
        if len(efforts) != len(accuracies):
            raise InvalidGameError("accuracies and efforts differ in length")
        params = tuple(AgentParams(float(q), float(e)) for q, e in zip(accuracies, efforts))
        return cls(params, types, network)

    @property
    def n(self) -> int:
        return len(self.params)

    def accuracy(self, i: AgentId) -> float:
        return self.params[i].accuracy

    def effort(self, i: AgentId) -> float:
        return self.params[i].effort

    @property
    def accuracies(self) -> Tuple[float, ...]:
        return tuple(p.accuracy for p in self.params)

    def check_profile(self, profile: DelegationProfile) -> None:
        """Raise InvalidGameError unless every d_i is i or a neighbor of i."""
        if len(profile) != self.n:
            raise InvalidGameError(f"profile of length {len(profile)} for {self.n} agents")
        for i, d in enumerate(profile.choices):
            if d != i and d not in self.network.adjacency[i]:
                raise InvalidGameError(f"agent {i} delegates to non-neighbor {d}")


# Traversal colors for resolve_gurus.
_WHITE, _GREY, _BLACK = 0, 1, 2


def resolve_gurus(profile: DelegationProfile) -> GuruResolution:
    """Follow every delegation chain of the functional graph `profile`.

    Single pass, three colors: each agent is visited once; an agent whose
    chain re-enters the current path (or a trapped agent) is outside N*.

    Args:
    ----
        profile: The delegation profile d.

    Returns:
    -------
        GuruResolution: gurus, trapped flags and chain lengths.

    """
    d = profile.choices
    n = len(d)
    color = [_WHITE] * n
    guru: List[Optional[int]] = [None] * n
    length: List[Optional[int]] = [None] * n
    trapped = [False] * n

    for start in range(n):
        if color[start] != _WHITE:
            continue
        path = []
        v = start
        while color[v] == _WHITE:
            color[v] = _GREY
            path.append(v)
            v = d[v]

        if color[v] == _GREY and d[v] == v:
            # fixed point closes the current path
            path.pop()
            guru[v], length[v], color[v] = v, 0, _BLACK
            target: Optional[int] = v
        elif color[v] == _BLACK and not trapped[v]:
            target = v
        else:
            target = None

        if target is None:
            for u in path:
                trapped[u] = True
                color[u] = _BLACK
            continue
        g = guru[target]
        hops = length[target]
        for u in reversed(path):
            hops += 1
            guru[u], length[u], color[u] = g, hops, _BLACK

    return GuruResolution(tuple(guru), tuple(trapped), tuple(length))


def proximity(types: TypeModel, i: AgentId, j: AgentId) -> float:
    """p_{i,j}: probability that i and j have the same type."""
    return types.proximity(i, j)


def proximity_gamma(types: TypeModel, k: AgentId, i: AgentId, s: AgentId) -> float:
    """Gap gamma_{k,s,i} between p_{k,i} and its composition through s.

    Only defined for independent types, where
    p_{k,i} = p_{k,s} p_{s,i} + (1 - p_{k,s})(1 - p_{s,i}) + gamma_{k,s,i}.

    Raises
    ------
        UnsupportedTypeModelError: For deterministic or joint models.

    """
    if not isinstance(types, IndependentProbabilistic):
        raise UnsupportedTypeModelError("proximity_gamma needs independent types")
    x = types.marginals
    return operators.composition_gap(x[k], x[i], x[s])


def _accuracy_through(game: DelegationGame, i: AgentId, g: AgentId) -> float:
    if g == i:
        return game.params[i].accuracy
    return operators.agreement(game.params[g].accuracy, game.types.proximity(i, g))


def effective_accuracy(
    game: DelegationGame,
    profile: DelegationProfile,
    i: AgentId,
    resolution: Optional[GuruResolution] = None,
) -> float:
    """q*_i(d): the guru's accuracy blended through proximity, 0.5 outside N*."""
    if profile[i] == i:
        return game.params[i].accuracy
    if resolution is None:
        resolution = resolve_gurus(profile)
    g = resolution.guru[i]
    if g is None:
        return operators.COIN
    return _accuracy_through(game, i, g)


def effective_accuracies(game: DelegationGame, profile: DelegationProfile) -> List[float]:
    """q*_i(d) for every agent, sharing one guru resolution."""
    resolution = resolve_gurus(profile)
    return [effective_accuracy(game, profile, i, resolution) for i in range(game.n)]


def utility(
    game: DelegationGame,
    profile: DelegationProfile,
    i: AgentId,
    resolution: Optional[GuruResolution] = None,
) -> float:
    """u_i(d): q*_i(d) when delegating, q_i - e_i when voting."""
    if profile[i] == i:
        return game.params[i].net
    return effective_accuracy(game, profile, i, resolution)


def utilities(game: DelegationGame, profile: DelegationProfile) -> List[float]:
    """u_i(d) for every agent."""
    resolution = resolve_gurus(profile)
    return [utility(game, profile, i, resolution) for i in range(game.n)]


def social_welfare(game: DelegationGame, profile: DelegationProfile) -> float:
    """SW(d) = sum of all utilities."""
    return sum(utilities(game, profile))


def is_locally_positive(game: DelegationGame, i: AgentId, j: AgentId) -> bool:
    """True if delegating from i to j beats i's own accuracy, with j voting."""
    q_j = game.params[j].accuracy
    return operators.agreement(q_j, game.types.proximity(i, j)) > game.params[i].accuracy


def is_positive_profile(game: DelegationGame, profile: DelegationProfile) -> bool:
    """Every delegator ends up strictly more accurate than voting itself."""
    resolution = resolve_gurus(profile)
    for j in range(game.n):
        if profile[j] == j:
            continue
        if not effective_accuracy(game, profile, j, resolution) > game.params[j].accuracy:
            return False
    return True


def path_contains(
    profile: DelegationProfile, resolution: GuruResolution, s: AgentId, i: AgentId
) -> bool:
    """Does the delegation path s, d(s), d(d(s)), ... visit agent i?"""
    if s == i:
        return True
    d = profile.choices
    g = resolution.guru[s]
    if g is not None:
        if resolution.guru[i] != g:
            return False
        steps = resolution.chain_length[s] - resolution.chain_length[i]
        if steps <= 0:
            return False
        v = s
        for _ in range(steps):
            v = d[v]
        return v == i
    seen = set()
    v = s
    while v not in seen:
        if v == i:
            return True
        seen.add(v)
        v = d[v]
    return False


def deviation_utilities(
    game: DelegationGame,
    profile: DelegationProfile,
    i: AgentId,
    resolution: Optional[GuruResolution] = None,
) -> Dict[AgentId, float]:
    """u_i((d_{-i}, s)) for every strategy s in {i} union R(i).

    Agent i's guru after switching to s is s's current guru, unless the path
    from s runs through i, in which case the switch closes a cycle.

    Args:
    ----
        game: The delegation game.
        profile: Current profile d.
        i: The deviating agent.
        resolution: Gurus of d, recomputed when omitted.

    Returns:
    -------
        Dict[int, float]: strategy -> utility, keys ascending.

    """
    if resolution is None:
        resolution = resolve_gurus(profile)
    out: Dict[AgentId, float] = {}
    for s in game.network.strategies(i):
        if s == i:
            out[s] = game.params[i].net
        elif path_contains(profile, resolution, s, i):
            out[s] = operators.COIN
        else:
            g = resolution.guru[s]
            out[s] = operators.COIN if g is None else _accuracy_through(game, i, g)
    return out
