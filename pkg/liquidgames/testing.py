"""Small delegation games with known answers, shared by the tests and docs."""

from typing import Callable, List, Tuple

from .game import (
    DelegationGame,
    DelegationProfile,
    Deterministic,
    ExplicitJoint,
    Network,
)


class ExampleGames:
    @staticmethod
    def single() -> DelegationGame:
        "One agent, nothing to delegate to"
        return DelegationGame.build([0.8], None, Deterministic.homogeneous(1), Network.empty(1))

    @staticmethod
    def pair() -> DelegationGame:
        "Two homogeneous agents, q = (0.9, 0.7), e = 0.1 each"
        return DelegationGame.build(
            [0.9, 0.7], [0.1, 0.1], Deterministic.homogeneous(2), Network.complete(2)
        )

    @staticmethod
    def anti_coordination() -> DelegationGame:
        "Two players who each prefer the other's vote to their own costly one"
        return DelegationGame.build(
            [0.8, 0.75], [0.1, 0.1], Deterministic.homogeneous(2), Network.complete(2)
        )

    @staticmethod
    def path() -> DelegationGame:
        "Effortless path 0 - 1 - 2 with q = (0.9, 0.7, 0.8)"
        return DelegationGame.build(
            [0.9, 0.7, 0.8],
            None,
            Deterministic.homogeneous(3),
            Network.from_edges(3, [(0, 1), (1, 2)]),
        )

    @staticmethod
    def correlated() -> DelegationGame:
        "Three agents whose types are correlated, so a positive chain is not positive overall"
        types = ExplicitJoint(
            (
                ((1, 1, 0), 0.45),
                ((0, 1, 1), 0.45),
                ((1, 1, 1), 0.1),
            )
        )
        return DelegationGame.build(
            [0.5001, 0.51, 0.61], None, types, Network.from_edges(3, [(0, 1), (1, 2)])
        )

    @staticmethod
    def sink_trap(n: int = 4, eps: float = 0.01) -> DelegationGame:
        """Equilibria pull everyone to a weak sink while a strong voter could lead.

        Agent 0 cannot delegate and has q = 0.5 + 2 eps with no effort; the
        others have q = 1, e = 0.5 - eps and may delegate to anyone.
        """
        adjacency = [()] + [tuple(j for j in range(n) if j != i) for i in range(1, n)]
        return DelegationGame.build(
            [0.5 + 2 * eps] + [1.0] * (n - 1),
            [0.0] + [0.5 - eps] * (n - 1),
            Deterministic.homogeneous(n),
            Network(n, tuple(adjacency), False),
        )

    @staticmethod
    def star(n: int = 4, eps: float = 0.01) -> DelegationGame:
        """Effortless star: agent 0 has q = 1, the rest q = 0.5 + eps and may only delegate to 0."""
        adjacency = [()] + [(0,)] * (n - 1)
        return DelegationGame.build(
            [1.0] + [0.5 + eps] * (n - 1),
            None,
            Deterministic.homogeneous(n),
            Network(n, tuple(adjacency), False),
        )

    @staticmethod
    def isolated() -> DelegationGame:
        "Three agents and no edges"
        return DelegationGame.build(
            [0.6, 0.7, 0.8], None, Deterministic.homogeneous(3), Network.empty(3)
        )

    @classmethod
    def _games(cls) -> List[Tuple[str, Callable[[], DelegationGame]]]:
        """All example games, by name."""
        out = []
        for k in dir(ExampleGames):
            if callable(getattr(ExampleGames, k)) and not k.startswith("_"):
                out.append((k, getattr(cls, k)))
        return out


def sink_trap_lead(n: int, leader: int = 1) -> DelegationProfile:
    """Profile of `sink_trap` where `leader` votes and everyone else but agent 0 follows."""
    return DelegationProfile(tuple([0] + [leader] * (n - 1)))
