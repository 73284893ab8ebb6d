"""Nash equilibria of delegation games: construction, dynamics, verification, enumeration."""

from __future__ import annotations

import itertools
import logging
import multiprocessing
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from . import operators
from .errors import InstanceTooLargeError, UnsupportedTypeModelError
from .game import (
    AgentId,
    DelegationGame,
    DelegationProfile,
    Deterministic,
    GuruResolution,
    deviation_utilities,
    effective_accuracies,
    resolve_gurus,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_PASSES = 1000

# Largest profile space scanned exhaustively.
ENUMERATION_LIMIT = 10**7

Observer = Callable[[DelegationProfile, DelegationProfile, AgentId], None]


@dataclass(frozen=True)
class BestResponseTrace:
    """Outcome of the iterated best response procedure.

    Attributes
    ----------
        updates : individual strategy changes over the whole run
        full_passes : sweeps over all agents, including the final quiet one
        converged : a sweep made no update before the pass limit
        final_profile : profile at termination
        order : agent order used in every sweep

    """

    updates: int
    full_passes: int
    converged: bool
    final_profile: DelegationProfile
    order: Tuple[AgentId, ...]


@dataclass(frozen=True)
class NeReport:
    """Verdict of `is_nash`; `witness` is (agent, strictly better strategy)."""

    profile: DelegationProfile
    is_ne: bool
    witness: Optional[Tuple[AgentId, AgentId]] = None


@dataclass(frozen=True)
class ProfileScan:
    """Everything an exhaustive scan of the profile space finds."""

    best_accuracy: float
    best_profile: DelegationProfile
    equilibria: Tuple[DelegationProfile, ...]
    equilibrium_accuracies: Tuple[float, ...]


# ## Constructive equilibrium for deterministic types


def _route_within(
    same: nx.DiGraph,
    members: Sequence[AgentId],
    roots: Iterable[AgentId],
    choices: List[AgentId],
) -> None:
    """Point every member at its parent in a BFS tree grown backwards from `roots`.

    Roots keep whatever choice they already have.
    """
    tree = same.subgraph(members).reverse()
    # all roots sit one hop below a virtual source
    tree.add_edges_from((-1, r) for r in sorted(roots))
    for u, parent in nx.bfs_predecessors(tree, -1):
        if parent != -1:
            choices[u] = parent


def construct_ne_deterministic(game: DelegationGame) -> DelegationProfile:
    """Build a pure Nash equilibrium for a game with a deterministic type profile.

    Agents are split by type; within each class the strongly connected
    components of the same-type network are handled sinks first. A component
    votes through its member with the best q - e unless a same-type agent it
    can delegate to (outside the component) already enjoys a strictly higher
    accuracy, in which case the whole component is routed to the best such
    agent. Routing uses shortest paths inside the component, so every
    delegation goes to an actual neighbor.

    Args:
    ----
        game: A game whose `types` is `Deterministic`.

    Returns:
    -------
        DelegationProfile: A profile passing `is_nash`.

    Raises:
    ------
        UnsupportedTypeModelError: For probabilistic type models.

    """
    if not isinstance(game.types, Deterministic):
        raise UnsupportedTypeModelError("construct_ne_deterministic needs deterministic types")
    tau = game.types.profile
    adjacency = game.network.adjacency
    choices = list(range(game.n))
    value: List[Optional[float]] = [None] * game.n

    for cls in sorted(set(tau)):
        same = nx.DiGraph()
        same.add_nodes_from(i for i in range(game.n) if tau[i] == cls)
        same.add_edges_from((i, j) for i in same.nodes for j in adjacency[i] if tau[j] == cls)
        dag = nx.condensation(same)

        for node in reversed(list(nx.topological_sort(dag))):
            members = sorted(dag.nodes[node]["members"])
            inside = set(members)
            leader = operators.argmax(members, lambda i: game.params[i].net)
            exits = sorted({j for i in members for j in adjacency[i] if tau[j] == cls} - inside)
            better = [j for j in exits if value[j] > game.params[leader].net]

            if better:
                target = operators.argmax(better, lambda j: value[j])
                roots = [i for i in members if target in adjacency[i]]
                for i in roots:
                    choices[i] = target
                reached = value[target]
            else:
                roots = [leader]
                reached = game.params[leader].accuracy
            _route_within(same, members, roots, choices)
            for i in members:
                value[i] = reached

    return DelegationProfile(tuple(choices))


# ## Best responses and their iteration


def best_response(
    game: DelegationGame,
    profile: DelegationProfile,
    i: AgentId,
    resolution: Optional[GuruResolution] = None,
) -> AgentId:
    """Strategy in {i} union R(i) maximizing u_i((d_{-i}, s)).

    Ties keep the current strategy, otherwise go to the lowest index.
    Cycles a deviation would close are priced at 0.5.
    """
    utils = deviation_utilities(game, profile, i, resolution)
    top = max(utils.values())
    current = profile[i]
    if utils[current] >= top - operators.TIE_TOL:
        return current
    return min(s for s, u in utils.items() if u >= top - operators.TIE_TOL)


def sweep_order(game: DelegationGame, order_seed: int = 0) -> Tuple[AgentId, ...]:
    """Seeded random permutation of the agents."""
    rng = np.random.default_rng(order_seed)
    return tuple(int(i) for i in rng.permutation(game.n))


def iterated_best_response(
    game: DelegationGame,
    order_seed: int = 0,
    order: Optional[Sequence[AgentId]] = None,
    max_passes: int = DEFAULT_MAX_PASSES,
    observer: Optional[Observer] = None,
) -> BestResponseTrace:
    """Run sequential best responses starting from the all-direct profile.

    Every sweep visits the agents in the same order; an agent switches only
    when its best response strictly improves on its current strategy. The run
    converges on the first sweep without updates, which is counted as a pass.

    Args:
    ----
        game: The delegation game.
        order_seed: Seed of the sweep permutation, ignored if `order` is given.
        order: Explicit sweep order.
        max_passes: Safety cap; reaching it reports `converged=False`.
        observer: Called as observer(before, after, agent) on every update.

    Returns:
    -------
        BestResponseTrace: counts and final profile.

    """
    if order is None:
        order = sweep_order(game, order_seed)
    order = tuple(order)
    profile = DelegationProfile.direct(game.n)
    resolution = resolve_gurus(profile)
    updates = 0
    passes = 0
    while passes < max_passes:
        passes += 1
        changed = 0
        for i in order:
            s = best_response(game, profile, i, resolution)
            if s == profile[i]:
                continue
            after = profile.with_choice(i, s)
            if observer is not None:
                observer(profile, after, i)
            profile = after
            resolution = resolve_gurus(profile)
            changed += 1
        updates += changed
        logger.debug("pass %d: %d updates", passes, changed)
        if changed == 0:
            return BestResponseTrace(updates, passes, True, profile, order)
    logger.warning("best response did not converge within %d passes", max_passes)
    return BestResponseTrace(updates, passes, False, profile, order)


# ## One-shot game


def one_shot_profile(game: DelegationGame) -> DelegationProfile:
    """Simultaneous, one-time proxy choice from neighbors' raw accuracies.

    Each agent compares q_i - e_i with q_j p_{i,j} + (1 - q_j)(1 - p_{i,j})
    for every neighbor j, as if j voted directly. Self wins ties with the
    best neighbor; among neighbors the lowest index wins.
    """
    choices = []
    for i in range(game.n):
        own = game.params[i].net
        scores = {
            j: operators.agreement(game.params[j].accuracy, game.types.proximity(i, j))
            for j in game.network.neighbors(i)
        }
        if not scores:
            choices.append(i)
            continue
        top = max(scores.values())
        if own >= top - operators.TIE_TOL:
            choices.append(i)
        else:
            choices.append(min(j for j, v in scores.items() if v >= top - operators.TIE_TOL))
    return DelegationProfile(tuple(choices))


# ## Verification and enumeration


def is_nash(game: DelegationGame, profile: DelegationProfile) -> NeReport:
    """Check every unilateral deviation of every agent.

    The witness is the lowest-index agent with a strictly improving
    deviation, paired with its best such deviation.
    """
    game.check_profile(profile)
    resolution = resolve_gurus(profile)
    for i in range(game.n):
        utils = deviation_utilities(game, profile, i, resolution)
        current = utils[profile[i]]
        best = operators.argmax(utils.keys(), lambda s: utils[s])
        if operators.gt(utils[best], current):
            return NeReport(profile, False, (i, best))
    return NeReport(profile, True, None)


def _profile_space(game: DelegationGame) -> Tuple[List[Tuple[AgentId, ...]], int]:
    spaces = [game.network.strategies(i) for i in range(game.n)]
    total = 1
    for s in spaces:
        total *= len(s)
    return spaces, total


def _scan_range(
    game: DelegationGame, lo: int, hi: int
) -> Tuple[float, Tuple[AgentId, ...], List[Tuple[Tuple[AgentId, ...], float]]]:
    """Best average accuracy and all equilibria among profiles lo..hi-1."""
    spaces, _ = _profile_space(game)
    best_acc = -1.0
    best: Tuple[AgentId, ...] = ()
    found = []
    for choices in itertools.islice(itertools.product(*spaces), lo, hi):
        profile = DelegationProfile(choices)
        acc = operators.mean(effective_accuracies(game, profile))
        if acc > best_acc:
            best_acc, best = acc, choices
        if is_nash(game, profile).is_ne:
            found.append((choices, acc))
    return best_acc, best, found


def _chunks(total: int, jobs: int) -> List[Tuple[int, int]]:
    step = -(-total // jobs)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def scan_profiles(
    game: DelegationGame, jobs: int = 1, limit: int = ENUMERATION_LIMIT
) -> ProfileScan:
    """Exhaustively scan every profile for the best average accuracy and all NE.

    The profile space is split into contiguous index ranges, one per worker;
    results are merged in index order, so the output does not depend on `jobs`.

    Raises
    ------
        InstanceTooLargeError: If the product of strategy counts exceeds `limit`.

    """
    _, total = _profile_space(game)
    if total > limit:
        raise InstanceTooLargeError(f"{total} profiles exceed the limit of {limit}")
    ranges = _chunks(total, max(1, jobs))
    if jobs <= 1 or len(ranges) == 1:
        parts = [_scan_range(game, lo, hi) for lo, hi in ranges]
    else:
        with multiprocessing.Pool(processes=jobs) as pool:
            parts = pool.starmap(_scan_range, [(game, lo, hi) for lo, hi in ranges])

    best_acc, best = -1.0, ()
    equilibria: List[DelegationProfile] = []
    accuracies: List[float] = []
    for part_acc, part_best, found in parts:
        if part_acc > best_acc:
            best_acc, best = part_acc, part_best
        for choices, acc in found:
            equilibria.append(DelegationProfile(choices))
            accuracies.append(acc)
    logger.debug("scanned %d profiles, %d equilibria", total, len(equilibria))
    return ProfileScan(best_acc, DelegationProfile(best), tuple(equilibria), tuple(accuracies))


def enumerate_equilibria(
    game: DelegationGame, jobs: int = 1, limit: int = ENUMERATION_LIMIT
) -> List[DelegationProfile]:
    """All pure Nash equilibria, in lexicographic profile order."""
    return list(scan_profiles(game, jobs, limit).equilibria)
