"""JSON encoding of delegation games used by the command line.

Schema::

    {"agents": [{"q": 0.9, "e": 0.1}, ...],
     "types": {"kind": "deterministic", "data": [1, 0, ...]}
            | {"kind": "independent", "data": [0.8, 0.6, ...]}
            | {"kind": "joint", "data": [{"profile": [1, 1, 0], "probability": 0.45}, ...]},
     "network": {"n": 3, "edges": [[0, 1], [1, 2]], "symmetric": true},
     "profile": [0, 0, 1]}

`profile` is optional and 0-indexed.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from .errors import ConfigError, InvalidGameError
from .game import (
    DelegationGame,
    DelegationProfile,
    Deterministic,
    ExplicitJoint,
    IndependentProbabilistic,
    Network,
    TypeModel,
)


def types_to_dict(types: TypeModel) -> Dict[str, Any]:
    """Encode a type model as {kind, data}."""
    if isinstance(types, Deterministic):
        return {"kind": types.kind, "data": list(types.profile)}
    if isinstance(types, IndependentProbabilistic):
        return {"kind": types.kind, "data": list(types.marginals)}
    if isinstance(types, ExplicitJoint):
        return {
            "kind": types.kind,
            "data": [{"profile": list(prof), "probability": p} for prof, p in types.support],
        }
    raise ConfigError(f"cannot encode type model {type(types).__name__}")


def types_from_dict(spec: Dict[str, Any]) -> TypeModel:
    """Decode {kind, data} into a type model."""
    kind = spec.get("kind")
    data = spec.get("data")
    if kind == "deterministic":
        return Deterministic(tuple(data))
    if kind == "independent":
        return IndependentProbabilistic(tuple(data))
    if kind == "joint":
        return ExplicitJoint(tuple((tuple(e["profile"]), e["probability"]) for e in data))
    raise ConfigError(f"unknown type model kind {kind!r}")


def game_to_dict(game: DelegationGame, profile: Optional[DelegationProfile] = None) -> Dict[str, Any]:
    """Encode a game (and optionally a profile) in the documented schema."""
    out: Dict[str, Any] = {
        "agents": [{"q": p.accuracy, "e": p.effort} for p in game.params],
        "types": types_to_dict(game.types),
        "network": {
            "n": game.network.n,
            "edges": [list(e) for e in game.network.edges()],
            "symmetric": game.network.symmetric,
        },
    }
    if profile is not None:
        out["profile"] = list(profile.choices)
    return out


def game_from_dict(spec: Dict[str, Any]) -> Tuple[DelegationGame, Optional[DelegationProfile]]:
    """Decode a game and its optional profile.

    Raises
    ------
        ConfigError: On missing keys or invariant violations.

    """
    try:
        agents = spec["agents"]
        net = spec["network"]
        network = Network.from_edges(
            int(net["n"]), [tuple(e) for e in net["edges"]], bool(net.get("symmetric", True))
        )
        game = DelegationGame.build(
            [a["q"] for a in agents],
            [a.get("e", 0.0) for a in agents],
            types_from_dict(spec["types"]),
            network,
        )
        profile = None
        if spec.get("profile") is not None:
            profile = DelegationProfile(tuple(spec["profile"]))
            game.check_profile(profile)
    except (AttributeError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed game file: {exc}") from exc
    except InvalidGameError as exc:
        raise ConfigError(f"invalid game: {exc}") from exc
    return game, profile


def load_game(path: Union[str, Path]) -> Tuple[DelegationGame, Optional[DelegationProfile]]:
    """Read a game file."""
    with open(path) as f:
        try:
            spec = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return game_from_dict(spec)


def dump_game(
    game: DelegationGame, path: Union[str, Path], profile: Optional[DelegationProfile] = None
) -> None:
    """Write a game file."""
    with open(path, "w") as f:
        json.dump(game_to_dict(game, profile), f, indent=2)
