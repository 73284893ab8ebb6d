import json
from pathlib import Path
from typing import Optional

import pytest

from liquidgames import DelegationProfile, ExampleGames, dump_game, read_edge_list
from liquidgames.cli import build_parser, main


def write_game(tmp_path: Path, name: str, profile: Optional[DelegationProfile] = None) -> Path:
    path = tmp_path / f"{name}.json"
    dump_game(getattr(ExampleGames, name)(), path, profile)
    return path


@pytest.mark.cli
def test_solve_constructs_equilibrium(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    path = write_game(tmp_path, "pair")
    assert main(["solve", "--game", str(path)]) == 0
    out = capsys.readouterr().out
    assert "profile <1, 1>" in out
    assert "NE verified" in out


@pytest.mark.cli
@pytest.mark.parametrize("method", ["construct", "best-response", "one-shot"])
def test_solve_methods(tmp_path: Path, capsys: pytest.CaptureFixture, method: str) -> None:
    path = write_game(tmp_path, "pair")
    assert main(["solve", "--game", str(path), "--method", method]) == 0
    assert "NE verified" in capsys.readouterr().out


@pytest.mark.cli
def test_solve_verify(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    good = write_game(tmp_path, "anti_coordination", DelegationProfile((0, 0)))
    assert main(["solve", "--game", str(good), "--verify"]) == 0
    bad = tmp_path / "bad.json"
    dump_game(ExampleGames.anti_coordination(), bad, DelegationProfile((1, 0)))
    assert main(["solve", "--game", str(bad), "--verify"]) == 1
    out = capsys.readouterr().out
    assert "not an equilibrium: agent 1 gains by switching to 1" in out


@pytest.mark.cli
def test_solve_verify_needs_profile(tmp_path: Path) -> None:
    path = write_game(tmp_path, "pair")
    assert main(["solve", "--game", str(path), "--verify"]) == 1


@pytest.mark.cli
def test_oracle(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    path = write_game(tmp_path, "anti_coordination")
    assert main(["oracle", "--game", str(path)]) == 0
    out = capsys.readouterr().out
    assert "2 pure equilibria" in out
    assert "<1, 1>" in out and "<2, 2>" in out
    assert "price of anarchy" in out


@pytest.mark.cli
def test_oracle_too_large(tmp_path: Path) -> None:
    path = tmp_path / "trap.json"
    dump_game(ExampleGames.sink_trap(10), path)
    assert main(["oracle", "--game", str(path)]) == 1


@pytest.mark.cli
def test_generate(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    args = ["generate", "--topology", "regular", "--n", "30", "--degree", "4", "--out", str(tmp_path)]
    assert main(args) == 0
    path = tmp_path / "regular_n30_k4_s0.csv"
    assert read_edge_list(path).n == 30
    assert "mean degree 4" in capsys.readouterr().out


@pytest.mark.cli
def test_generate_rejects_odd_degree(tmp_path: Path) -> None:
    args = ["generate", "--topology", "random", "--n", "30", "--degree", "3", "--out", str(tmp_path)]
    assert main(args) == 1


@pytest.mark.cli
def test_simulate(tmp_path: Path) -> None:
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "topologies": ["random", "regular"],
                "degrees": [4],
                "n": 30,
                "graphs_per_setting": 1,
                "inits_per_graph": 2,
                "mc_samples": 1000,
            }
        )
    )
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(config), "--out", str(out), "--seed", "4"]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["meta.json", "records.csv", "summary.csv"]
    meta = json.loads((out / "meta.json").read_text())
    assert meta["master_seed"] == 4
    assert meta["replications"] == 4
    assert len((out / "summary.csv").read_text().splitlines()) == 3


@pytest.mark.cli
def test_simulate_bad_config(tmp_path: Path) -> None:
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"topology": "random"}))
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path)]) == 1


@pytest.mark.cli
@pytest.mark.slow
def test_reproduce(tmp_path: Path) -> None:
    assert main(["reproduce", "table4", "--graphs", "1", "--inits", "1", "--out", str(tmp_path)]) == 0
    names = sorted(p.name for p in (tmp_path / "table4").iterdir())
    assert names == ["meta.json", "records.csv", "summary.csv", "table.csv"]


@pytest.mark.cli
def test_usage_errors() -> None:
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 2


@pytest.mark.cli
def test_missing_and_broken_files(tmp_path: Path) -> None:
    assert main(["solve", "--game", str(tmp_path / "missing.json")]) == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert main(["solve", "--game", str(broken)]) == 1
    broken.write_text("[]")
    assert main(["oracle", "--game", str(broken)]) == 1


@pytest.mark.cli
def test_log_level(tmp_path: Path) -> None:
    path = write_game(tmp_path, "pair")
    assert main(["solve", "--game", str(path), "--log-level", "debug"]) == 0
    assert main(["solve", "--game", str(path), "--log-level", "chatty"]) == 1
    assert build_parser().parse_args(["oracle", "--game", "x"]).log_level is None
