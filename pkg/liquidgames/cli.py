"""Command line entry point: `liquidgames <command> ...`."""

import logging
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import List, Optional

from . import config as settings
from .equilibrium import (
    construct_ne_deterministic,
    is_nash,
    iterated_best_response,
    one_shot_profile,
    scan_profiles,
)
from .errors import LiquidGamesError, NoEquilibriumError
from .game import Deterministic
from .gamefile import load_game
from .harness import load_config, replace_seed, reproduce, reproductions, run_experiment, summarize, write_outputs
from .metrics import average_accuracy, gain, price_of_anarchy
from .networks import TopologySpec, degree_stats, generate, mean_pairwise_distance, topologies, write_edge_list

logger = logging.getLogger("liquidgames.cli")


def _common(parser: ArgumentParser) -> None:
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="liquidgames", description="Delegation games for liquid democracy.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="draw a network and write its edge list")
    gen.add_argument("--topology", choices=sorted(topologies), required=True)
    gen.add_argument("--n", type=int, default=250)
    gen.add_argument("--degree", type=int, default=4)
    gen.add_argument("--beta", type=float, default=0.25, help="small-world rewiring probability")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, default=None)

    solve = sub.add_parser("solve", help="find or verify a Nash equilibrium of a game file")
    solve.add_argument("--game", type=Path, required=True)
    solve.add_argument(
        "--method",
        choices=("construct", "best-response", "one-shot"),
        default=None,
        help="default: construct for deterministic types, best-response otherwise",
    )
    solve.add_argument("--verify", action="store_true", help="check the profile stored in the file")
    solve.add_argument("--seed", type=int, default=0, help="best-response sweep order")

    sim = sub.add_parser("simulate", help="run an experiment config")
    sim.add_argument("--config", type=Path, required=True)
    sim.add_argument("--seed", type=int, default=None, help="override master_seed")
    sim.add_argument("--out", type=Path, default=None)
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--group-by", default="topology,degree,regime")

    rep = sub.add_parser("reproduce", help="run a canned experiment")
    rep.add_argument("target", choices=sorted(reproductions))
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--graphs", type=int, default=25)
    rep.add_argument("--inits", type=int, default=100)
    rep.add_argument("--out", type=Path, default=None)
    rep.add_argument("--jobs", type=int, default=1)

    oracle = sub.add_parser("oracle", help="enumerate all pure equilibria of a small game file")
    oracle.add_argument("--game", type=Path, required=True)
    oracle.add_argument("--jobs", type=int, default=1)

    for p in (gen, solve, sim, rep, oracle):
        _common(p)
    return parser


def _render(profile_choices: tuple) -> str:
    return "<" + ", ".join(str(c) for c in profile_choices) + ">"


def cmd_generate(args: Namespace) -> int:
    spec = TopologySpec(args.topology, args.n, args.degree, args.beta, args.seed)
    network = generate(spec)
    out = args.out or settings.default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{args.topology}_n{args.n}_k{args.degree}_s{args.seed}.csv"
    write_edge_list(network, path)
    stats = degree_stats(network)
    print(f"wrote {path}")
    print(f"mean degree {stats.mean:.4g} (min {stats.min}, max {stats.max})")
    print(f"mean distance {mean_pairwise_distance(network):.4g}")
    return 0


def cmd_solve(args: Namespace) -> int:
    game, stored = load_game(args.game)
    if args.verify:
        if stored is None:
            raise LiquidGamesError(f"{args.game} holds no profile to verify")
        profile = stored
    else:
        method = args.method or ("construct" if isinstance(game.types, Deterministic) else "best-response")
        if method == "construct":
            profile = construct_ne_deterministic(game)
        elif method == "one-shot":
            profile = one_shot_profile(game)
        else:
            trace = iterated_best_response(game, order_seed=args.seed)
            if not trace.converged:
                logger.warning("best response stopped after %d passes", trace.full_passes)
            profile = trace.final_profile
    print(f"profile {_render(profile.one_indexed())}")
    print(f"average accuracy {average_accuracy(game, profile):.6g}")
    report = is_nash(game, profile)
    if report.is_ne:
        print("NE verified")
        return 0
    agent, better = report.witness
    print(f"not an equilibrium: agent {agent + 1} gains by switching to {better + 1}")
    return 1


def cmd_simulate(args: Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace_seed(config, args.seed)
    records = run_experiment(config, args.jobs)
    summary = summarize(records, [c for c in args.group_by.split(",") if c])
    out = write_outputs(records, summary, config, args.out or settings.default_output_dir())
    print(f"wrote {len(records)} records to {out}")
    return 0


def cmd_reproduce(args: Namespace) -> int:
    records, summary, table, plan = reproduce(args.target, args.seed, args.graphs, args.inits, args.jobs)
    out = Path(args.out or settings.default_output_dir()) / args.target
    write_outputs(records, summary, plan.configs[0], out, extra={"target": args.target})
    table.to_csv(out / "table.csv", index=False, float_format="%.6g")
    print(table.to_string(index=False))
    return 0


def cmd_oracle(args: Namespace) -> int:
    game, _ = load_game(args.game)
    scan = scan_profiles(game, jobs=args.jobs)
    print(f"{len(scan.equilibria)} pure equilibria")
    for profile, acc in zip(scan.equilibria, scan.equilibrium_accuracies):
        print(f"  {_render(profile.one_indexed())}  average accuracy {acc:.6g}")
    print(f"best profile {_render(scan.best_profile.one_indexed())}  average accuracy {scan.best_accuracy:.6g}")
    try:
        print(f"price of anarchy {price_of_anarchy(game, scan):.6g}")
        print(f"gain {gain(game, scan):.6g}")
    except NoEquilibriumError:
        print("price of anarchy and gain undefined")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "reproduce": cmd_reproduce,
    "oracle": cmd_oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code; usage errors exit with 2."""
    args = build_parser().parse_args(argv)
    try:
        settings.configure_logging(args.log_level)
        return COMMANDS[args.command](args)
    except (LiquidGamesError, OSError) as exc:
        logger.error("%s: %s", args.command, exc)
        return 1
