from pathlib import Path
from typing import List, Tuple

import pytest
from hypothesis import given, settings
from hypothesis.strategies import DrawFn, composite, integers, lists

from liquidgames import (
    AgentParams,
    DelegationGame,
    DelegationProfile,
    Deterministic,
    ExampleGames,
    ExplicitJoint,
    IndependentProbabilistic,
    InvalidGameError,
    Network,
    UnsupportedTypeModelError,
    deviation_utilities,
    effective_accuracies,
    effective_accuracy,
    is_locally_positive,
    is_positive_profile,
    proximity,
    proximity_gamma,
    resolve_gurus,
    social_welfare,
    utilities,
    utility,
)
from liquidgames.errors import ConfigError
from liquidgames.gamefile import dump_game, game_from_dict, game_to_dict, load_game

from .strategies import (
    accuracies,
    assert_close,
    deterministic_games,
    games_with_profiles,
    probabilities,
    profiles,
)


def profile(*one_indexed: int) -> DelegationProfile:
    return DelegationProfile(tuple(c - 1 for c in one_indexed))


# ## Guru resolution


@pytest.mark.game_core
def test_resolve_all_direct() -> None:
    res = resolve_gurus(profile(1, 2, 3))
    assert res.guru == (0, 1, 2)
    assert res.chain_length == (0, 0, 0)
    assert res.in_cycle_path == (False, False, False)


@pytest.mark.game_core
def test_resolve_two_cycle() -> None:
    res = resolve_gurus(profile(2, 1, 3))
    assert res.guru == (None, None, 2)
    assert res.in_cycle_path == (True, True, False)
    assert res.chain_length == (None, None, 0)


@pytest.mark.game_core
def test_resolve_chain() -> None:
    res = resolve_gurus(profile(2, 3, 3))
    assert res.guru == (2, 2, 2)
    assert res.chain_length == (2, 1, 0)


@pytest.mark.game_core
def test_resolve_tail_into_cycle() -> None:
    res = resolve_gurus(profile(2, 3, 2, 1, 5))
    assert res.guru == (None, None, None, None, 4)
    assert res.in_cycle_path == (True, True, True, True, False)


@pytest.mark.game_core
@given(lists(integers(0, 7), min_size=1, max_size=8))
def test_resolve_gurus_properties(raw: List[int]) -> None:
    n = len(raw)
    d = DelegationProfile(tuple(c % n for c in raw))
    res = resolve_gurus(d)
    for i in range(n):
        g = res.guru[i]
        assert (g == i) == (d[i] == i) or g is None
        assert (g is None) == res.in_cycle_path[i]
        if g is not None:
            assert d[g] == g
            assert res.guru[g] == g
            # walking chain_length hops lands on the guru
            v = i
            for _ in range(res.chain_length[i]):
                v = d[v]
            assert v == g
        else:
            # the path never reaches a fixed point
            v, seen = i, set()
            while v not in seen:
                assert d[v] != v
                seen.add(v)
                v = d[v]


# ## Type models and proximity


@pytest.mark.game_core
def test_proximity_deterministic() -> None:
    types = Deterministic((1, 0, 1))
    assert proximity(types, 0, 2) == 1.0
    assert proximity(types, 0, 1) == 0.0
    assert proximity(types, 1, 1) == 1.0


@pytest.mark.game_core
def test_proximity_independent() -> None:
    types = IndependentProbabilistic((1.0, 1.0, 0.8, 0.6))
    assert_close(proximity(types, 0, 1), 1.0)
    assert_close(proximity(types, 2, 3), 0.56)


@pytest.mark.game_core
def test_proximity_joint() -> None:
    types = ExampleGames.correlated().types
    assert_close(proximity(types, 0, 1), 0.55)
    assert_close(proximity(types, 1, 2), 0.55)
    assert_close(proximity(types, 0, 2), 0.1)
    assert not types.is_homogeneous()


@pytest.mark.game_core
@given(lists(probabilities, min_size=2, max_size=6))
def test_proximity_symmetric(marginals: List[float]) -> None:
    types = IndependentProbabilistic(tuple(marginals))
    for i in range(len(marginals)):
        assert proximity(types, i, i) == 1.0
        for j in range(len(marginals)):
            p = proximity(types, i, j)
            assert 0.0 <= p <= 1.0
            assert_close(p, proximity(types, j, i))


@pytest.mark.game_core
def test_joint_must_sum_to_one() -> None:
    with pytest.raises(InvalidGameError):
        ExplicitJoint((((1, 1), 0.5), ((0, 0), 0.4)))
    with pytest.raises(InvalidGameError):
        ExplicitJoint((((1, 1), 1.2), ((0, 0), -0.2)))


@pytest.mark.game_core
def test_gamma_example() -> None:
    types = IndependentProbabilistic((0.9, 0.8, 0.7))
    assert_close(proximity_gamma(types, 0, 1, 2), 0.2016)


def check_gamma_composition(x_k: float, x_i: float, x_s: float) -> None:
    types = IndependentProbabilistic((x_k, x_i, x_s))
    p_ks, p_si = proximity(types, 0, 2), proximity(types, 2, 1)
    composed = p_ks * p_si + (1 - p_ks) * (1 - p_si) + proximity_gamma(types, 0, 1, 2)
    assert abs(proximity(types, 0, 1) - composed) <= 1e-12


@pytest.mark.game_core
@settings(max_examples=500)
@given(probabilities, probabilities, probabilities)
def test_gamma_composition_identity(x_k: float, x_i: float, x_s: float) -> None:
    check_gamma_composition(x_k, x_i, x_s)


@pytest.mark.game_core
@pytest.mark.slow
@settings(max_examples=10_000)
@given(probabilities, probabilities, probabilities)
def test_gamma_composition_identity_at_scale(x_k: float, x_i: float, x_s: float) -> None:
    check_gamma_composition(x_k, x_i, x_s)


@pytest.mark.game_core
def test_gamma_needs_independent_types() -> None:
    with pytest.raises(UnsupportedTypeModelError):
        proximity_gamma(Deterministic((1, 1, 1)), 0, 1, 2)
    with pytest.raises(UnsupportedTypeModelError):
        proximity_gamma(ExampleGames.correlated().types, 0, 1, 2)


# ## Game construction


@pytest.mark.game_core
def test_game_rejects_bad_params() -> None:
    types, net = Deterministic.homogeneous(1), Network.empty(1)
    with pytest.raises(InvalidGameError):
        DelegationGame.build([0.4], None, types, net)
    with pytest.raises(InvalidGameError):
        DelegationGame.build([0.7], [0.3], types, net)
    with pytest.raises(InvalidGameError):
        DelegationGame.build([0.7], [-0.1], types, net)
    with pytest.raises(InvalidGameError):
        DelegationGame.build([0.7, 0.8], None, types, net)


@pytest.mark.game_core
def test_network_invariants() -> None:
    with pytest.raises(InvalidGameError):
        Network(2, ((0,), ()))
    with pytest.raises(InvalidGameError):
        Network(2, ((1,), ()), symmetric=True)
    net = Network.from_edges(3, [(0, 1)])
    assert net.neighbors(1) == (0,)
    assert net.strategies(2) == (2,)
    assert not net.is_connected()
    with pytest.raises(InvalidGameError):
        net.validate(require_connected=True)
    directed = Network(3, ((1,), (0,), (0,)), symmetric=False)
    assert directed.neighbors(2) == (0,)
    assert not directed.symmetric
    assert directed.is_connected()


@pytest.mark.game_core
def test_network_networkx_round_trip() -> None:
    net = Network.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert Network.from_networkx(net.to_networkx()) == net


@pytest.mark.game_core
def test_check_profile() -> None:
    game = ExampleGames.path()
    game.check_profile(profile(2, 1, 2))
    with pytest.raises(InvalidGameError):
        game.check_profile(profile(3, 2, 3))
    with pytest.raises(InvalidGameError):
        game.check_profile(profile(1, 2))


# ## Accuracy and utility


@pytest.mark.game_core
def test_effective_accuracy_homogeneous() -> None:
    game = ExampleGames.path()
    d = profile(1, 1, 2)
    assert effective_accuracies(game, d) == [0.9, 0.9, 0.9]
    assert effective_accuracy(game, profile(1, 2, 3), 1) == 0.7


@pytest.mark.game_core
def test_effective_accuracy_cycle() -> None:
    game = ExampleGames.pair()
    assert effective_accuracy(game, profile(2, 1), 0) == 0.5
    assert utilities(game, profile(2, 1)) == [0.5, 0.5]


@pytest.mark.game_core
def test_two_player_utilities() -> None:
    game = ExampleGames.pair()
    assert_close(utility(game, profile(1, 2), 0), 0.8)
    assert_close(utility(game, profile(1, 2), 1), 0.6)
    assert utilities(game, profile(1, 1)) == [pytest.approx(0.8), 0.9]


@pytest.mark.game_core
def test_direct_vote_utility() -> None:
    game = DelegationGame.build([0.75], [0.02], Deterministic.homogeneous(1), Network.empty(1))
    assert_close(utility(game, DelegationProfile.direct(1), 0), 0.73)


@pytest.mark.game_core
def test_correlated_chain() -> None:
    game = ExampleGames.correlated()
    assert is_locally_positive(game, 0, 1)
    assert is_locally_positive(game, 1, 2)
    assert_close(effective_accuracy(game, profile(2, 3, 3), 0), 0.412)
    assert_close(effective_accuracy(game, profile(1, 3, 3), 1), 0.511)
    assert not is_positive_profile(game, profile(2, 3, 3))


@pytest.mark.game_core
def test_locally_positive_is_strict() -> None:
    game = DelegationGame.build(
        [0.7, 0.7], None, Deterministic.homogeneous(2), Network.complete(2)
    )
    assert not is_locally_positive(game, 0, 1)


@pytest.mark.game_core
def test_positive_profile_examples() -> None:
    game = ExampleGames.path()
    assert is_positive_profile(game, DelegationProfile.direct(3))
    assert is_positive_profile(game, profile(1, 1, 2))
    assert not is_positive_profile(game, profile(2, 1, 3))


@pytest.mark.game_core
@given(games_with_profiles())
def test_direct_vote_collapse(case: Tuple[DelegationGame, DelegationProfile]) -> None:
    game, d = case
    for i in range(game.n):
        if d[i] == i:
            assert effective_accuracy(game, d, i) == game.accuracy(i)
            assert utility(game, d, i) == game.params[i].net


@pytest.mark.game_core
@given(deterministic_games(homogeneous=True).flatmap(lambda g: profiles(g).map(lambda d: (g, d))))
def test_utility_floor(case: Tuple[DelegationGame, DelegationProfile]) -> None:
    game, d = case
    for u in utilities(game, d):
        assert u >= 0.5 - 1e-12


@pytest.mark.game_core
@given(games_with_profiles())
def test_welfare_accuracy_identity(case: Tuple[DelegationGame, DelegationProfile]) -> None:
    game, d = case
    direct_effort = sum(game.effort(i) for i in range(game.n) if d[i] == i)
    avg = sum(effective_accuracies(game, d)) / game.n
    assert abs(avg - (social_welfare(game, d) + direct_effort) / game.n) <= 1e-12


@pytest.mark.game_core
@given(games_with_profiles())
def test_deviation_utilities_match_recomputation(case: Tuple[DelegationGame, DelegationProfile]) -> None:
    game, d = case
    for i in range(game.n):
        shortcut = deviation_utilities(game, d, i)
        assert list(shortcut) == list(game.network.strategies(i))
        for s, u in shortcut.items():
            assert_close(u, utility(game, d.with_choice(i, s), i), 1e-12)


# ## Positive profiles under independent types


@composite
def positive_delegations(draw: DrawFn) -> Tuple[DelegationGame, List[Tuple[int, int]]]:
    n = draw(integers(2, 6))
    marginals = draw(lists(probabilities, min_size=n, max_size=n))
    q = draw(lists(accuracies, min_size=n, max_size=n))
    game = DelegationGame.build(q, None, IndependentProbabilistic(tuple(marginals)), Network.complete(n))
    moves = draw(lists(integers(0, n * n - 1), max_size=3 * n))
    return game, [(m // n, m % n) for m in moves]


@pytest.mark.game_core
@settings(max_examples=1000)
@given(positive_delegations())
def test_locally_positive_delegation_keeps_profile_positive(
    case: Tuple[DelegationGame, List[Tuple[int, int]]],
) -> None:
    game, moves = case
    d = DelegationProfile.direct(game.n)
    for s, t in moves:
        if s == t or d[s] != s:
            continue
        margin = game.types.proximity(s, t) * game.accuracy(t)
        margin += (1 - game.types.proximity(s, t)) * (1 - game.accuracy(t)) - game.accuracy(s)
        if margin <= 1e-9:
            continue
        d = d.with_choice(s, t)
        assert is_positive_profile(game, d)


# ## Game files


@pytest.mark.game_core
def test_game_file_round_trip(tmp_path: Path) -> None:
    for _, make in ExampleGames._games():
        game = make()
        d = DelegationProfile.direct(game.n)
        path = tmp_path / "game.json"
        dump_game(game, path, d)
        loaded, stored = load_game(path)
        assert loaded == game
        assert stored == d


@pytest.mark.game_core
def test_game_file_errors() -> None:
    spec = game_to_dict(ExampleGames.pair())
    del spec["agents"]
    with pytest.raises(ConfigError):
        game_from_dict(spec)
    spec = game_to_dict(ExampleGames.pair())
    spec["agents"][0]["q"] = 0.2
    with pytest.raises(ConfigError):
        game_from_dict(spec)
    spec = game_to_dict(ExampleGames.pair())
    spec["types"]["kind"] = "quantum"
    with pytest.raises(ConfigError):
        game_from_dict(spec)


@pytest.mark.game_core
def test_agent_params_net() -> None:
    assert_close(AgentParams(0.75, 0.02).net, 0.73)
