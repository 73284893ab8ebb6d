"""Quality measures of delegation profiles and games."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from . import operators
from .equilibrium import ENUMERATION_LIMIT, ProfileScan, scan_profiles
from .errors import NoEquilibriumError, UnsupportedTypeModelError
from .game import (
    AgentId,
    DelegationGame,
    DelegationProfile,
    GuruResolution,
    effective_accuracies,
    resolve_gurus,
    social_welfare,
)

logger = logging.getLogger(__name__)

# Above this many gurus P_L is estimated by sampling.
EXACT_GURU_LIMIT = 30
DEFAULT_MC_SAMPLES = 100_000
_MC_CHUNK = 10_000


@dataclass(frozen=True)
class GuruStatistics:
    guru_fraction: float
    mean_chain_length: float
    mean_guru_accuracy: float
    cycle_fraction: float


@dataclass(frozen=True)
class ProfileMetrics:
    """Per-profile summary written to the records table.

    Attributes
    ----------
        avg_accuracy : q-bar*(d)
        social_welfare : SW(d)
        guru_fraction : share of agents voting directly
        mean_guru_chain_length : mean hops to the guru over delegators in N*
        cycle_fraction : share of agents whose chain ends in a cycle
        mean_guru_accuracy : mean accuracy of the agents voting directly

    """

    avg_accuracy: float
    social_welfare: float
    guru_fraction: float
    mean_guru_chain_length: float
    cycle_fraction: float
    mean_guru_accuracy: float


@dataclass(frozen=True)
class LiquidMajority:
    """P_L with its Monte Carlo standard error (0 when computed exactly)."""

    probability: float
    stderr: float
    exact: bool


def average_accuracy(game: DelegationGame, profile: DelegationProfile) -> float:
    """q-bar*(d), the mean effective accuracy."""
    return operators.mean(effective_accuracies(game, profile))


def mean_accuracy(game: DelegationGame) -> float:
    """q-bar, the mean accuracy without delegation."""
    return operators.mean(game.accuracies)


def max_accuracy(game: DelegationGame) -> float:
    return max(game.accuracies)


def _scan(game: DelegationGame, scan: Optional[ProfileScan], jobs: int, limit: int) -> ProfileScan:
    if scan is None:
        scan = scan_profiles(game, jobs=jobs, limit=limit)
    if not scan.equilibria:
        raise NoEquilibriumError("no pure Nash equilibrium in the profile space")
    return scan


def price_of_anarchy(
    game: DelegationGame,
    scan: Optional[ProfileScan] = None,
    jobs: int = 1,
    limit: int = ENUMERATION_LIMIT,
) -> float:
    """Best average accuracy over all profiles divided by the worst NE's.

    Args:
    ----
        game: A game small enough to scan exhaustively.
        scan: Reuse an earlier `scan_profiles` result.
        jobs: Worker processes for the scan.
        limit: Size guard on the profile space.

    Returns:
    -------
        float: The price of anarchy, in [1, 2].

    Raises:
    ------
        NoEquilibriumError: If the game has no pure NE.
        InstanceTooLargeError: If the profile space exceeds `limit`.

    """
    scan = _scan(game, scan, jobs, limit)
    return scan.best_accuracy / min(scan.equilibrium_accuracies)


def gain(
    game: DelegationGame,
    scan: Optional[ProfileScan] = None,
    jobs: int = 1,
    limit: int = ENUMERATION_LIMIT,
) -> float:
    """Worst NE average accuracy minus the all-direct average accuracy."""
    scan = _scan(game, scan, jobs, limit)
    return min(scan.equilibrium_accuracies) - mean_accuracy(game)


def _require_homogeneous(game: DelegationGame, what: str) -> None:
    if not game.types.is_homogeneous():
        raise UnsupportedTypeModelError(f"{what} is only defined for homogeneous games")


def _majority(pmf: np.ndarray, total: int) -> float:
    """P(correct weight > total / 2) plus half the tie mass."""
    weights = np.arange(total + 1)
    win = pmf[2 * weights > total].sum()
    tie = pmf[2 * weights == total].sum()
    return float(win + 0.5 * tie)


def _weighted_pmf(accuracies: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Distribution of the total weight of correct votes."""
    total = int(weights.sum())
    pmf = np.zeros(total + 1)
    pmf[0] = 1.0
    for q, w in zip(accuracies, weights):
        w = int(w)
        shifted = np.zeros_like(pmf)
        shifted[w:] = pmf[: total + 1 - w]
        pmf = pmf * (1.0 - q) + shifted * q
    return pmf


def majority_correct_direct(game: DelegationGame) -> float:
    """P_D: probability that a direct majority vote is correct.

    Exact Poisson-binomial tail over the number of correct voters; a tie
    (even n, exactly n/2 correct) is settled by a fair coin.

    Raises
    ------
        UnsupportedTypeModelError: If agents may differ in type.

    """
    _require_homogeneous(game, "P_D")
    q = np.asarray(game.accuracies, dtype=float)
    return _majority(_weighted_pmf(q, np.ones(game.n, dtype=int)), game.n)


def guru_weights(profile: DelegationProfile, resolution: Optional[GuruResolution] = None) -> Dict[AgentId, int]:
    """Number of agents in N* each guru votes for, itself included."""
    if resolution is None:
        resolution = resolve_gurus(profile)
    weights: Dict[AgentId, int] = {}
    for g in resolution.guru:
        if g is not None:
            weights[g] = weights.get(g, 0) + 1
    return dict(sorted(weights.items()))


def _sample_majority(
    accuracies: np.ndarray, weights: np.ndarray, samples: int, seed: int
) -> LiquidMajority:
    total = int(weights.sum())
    chunks = [_MC_CHUNK] * (samples // _MC_CHUNK)
    if samples % _MC_CHUNK:
        chunks.append(samples % _MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(len(chunks))
    hits = 0.0
    squares = 0.0
    for size, stream in zip(chunks, streams):
        rng = np.random.default_rng(stream)
        correct = rng.random((size, len(accuracies))) < accuracies
        cast = 2 * (correct.astype(np.int64) @ weights)
        score = (cast > total) + 0.5 * (cast == total)
        hits += score.sum()
        squares += (score**2).sum()
    p = hits / samples
    var = max(squares / samples - p * p, 0.0) * samples / max(samples - 1, 1)
    return LiquidMajority(float(p), float(np.sqrt(var / samples)), False)


def majority_correct_liquid(
    game: DelegationGame,
    profile: DelegationProfile,
    exact_limit: int = EXACT_GURU_LIMIT,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
) -> LiquidMajority:
    """P_L: probability that the weighted guru vote is correct.

    Each guru carries the agents of N* that resolve to it. Agents stuck in
    a cycle cast nothing; with no weight cast at all the outcome is a coin
    toss. Up to `exact_limit` gurus the weighted majority is computed
    exactly, beyond that it is sampled in fixed chunks with spawned seeds.

    Args:
    ----
        game: A homogeneous game.
        profile: The delegation profile d.
        exact_limit: Largest guru count handled exactly.
        mc_samples: Monte Carlo sample count.
        seed: Monte Carlo seed.

    Returns:
    -------
        LiquidMajority: probability, standard error and whether it is exact.

    """
    _require_homogeneous(game, "P_L")
    weights = guru_weights(profile)
    if not weights:
        return LiquidMajority(operators.COIN, 0.0, True)
    q = np.array([game.params[g].accuracy for g in weights], dtype=float)
    w = np.array(list(weights.values()), dtype=np.int64)
    if len(weights) <= exact_limit:
        return LiquidMajority(_majority(_weighted_pmf(q, w), int(w.sum())), 0.0, True)
    logger.debug("sampling P_L over %d gurus with %d draws", len(weights), mc_samples)
    return _sample_majority(q, w, mc_samples, seed)


def guru_statistics(
    game: DelegationGame, profile: DelegationProfile, resolution: Optional[GuruResolution] = None
) -> GuruStatistics:
    """Guru share, chain lengths, guru accuracy and cycle share of a profile.

    Chain length counts delegation hops, averaged over delegators in N*;
    it is 0 when nobody in N* delegates.
    """
    if resolution is None:
        resolution = resolve_gurus(profile)
    n = game.n
    gurus = [i for i in range(n) if profile[i] == i]
    chains: List[int] = [
        resolution.chain_length[i] for i in range(n) if profile[i] != i and resolution.in_n_star(i)
    ]
    return GuruStatistics(
        guru_fraction=len(gurus) / n,
        mean_chain_length=operators.mean(chains),
        mean_guru_accuracy=operators.mean(game.params[g].accuracy for g in gurus),
        cycle_fraction=sum(resolution.in_cycle_path) / n,
    )


def profile_metrics(game: DelegationGame, profile: DelegationProfile) -> ProfileMetrics:
    """Every per-profile measure at once."""
    stats = guru_statistics(game, profile)
    return ProfileMetrics(
        avg_accuracy=average_accuracy(game, profile),
        social_welfare=social_welfare(game, profile),
        guru_fraction=stats.guru_fraction,
        mean_guru_chain_length=stats.mean_chain_length,
        cycle_fraction=stats.cycle_fraction,
        mean_guru_accuracy=stats.mean_guru_accuracy,
    )
