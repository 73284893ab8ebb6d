"""Seeded simulation experiments on homogeneous delegation games.

A work unit is one generated graph together with all of its parameter
initializations. Every random quantity hangs off the master seed through a
fixed spawn key, so any record can be regenerated on its own.

Config schema (JSON, every key optional)::

    {"topologies": ["random", "regular", "small_world", "scale_free"],
     "degrees": [4, 8, 12, 16, 20, 24],
     "n": 250,
     "graphs_per_setting": 25,
     "inits_per_graph": 100,
     "accuracy": {"mean": 0.75, "std": 0.05},
     "effort": {"mean": 0.025, "std": 0.01},
     "regimes": ["effortless"],
     "scenario": "iterated_br",
     "master_seed": 0,
     "mc_samples": 100000,
     "rewiring_beta": 0.25,
     "max_passes": 1000}
"""

from __future__ import annotations

import dataclasses
import json
import logging
import multiprocessing
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import VERSION
from .equilibrium import DEFAULT_MAX_PASSES, iterated_best_response, one_shot_profile
from .errors import ConfigError, GenerationError
from .game import DelegationGame, Deterministic, Network
from .metrics import (
    DEFAULT_MC_SAMPLES,
    majority_correct_direct,
    majority_correct_liquid,
    max_accuracy,
    mean_accuracy,
    profile_metrics,
)
from .networks import GRAPH_PRNG, TopologySpec, generate, mean_pairwise_distance, topologies

logger = logging.getLogger(__name__)

SCENARIOS = ("iterated_br", "one_shot")
REGIMES = ("effortless", "effort")

# Spawn-key codes; append only.
TOPOLOGY_CODES = {"random": 0, "regular": 1, "small_world": 2, "scale_free": 3}

# Child streams of an initialization's SeedSequence.
_ACCURACY_STREAM, _EFFORT_STREAM, _ORDER_STREAM, _SAMPLING_STREAM = range(4)

_MAX_REJECTIONS = 1_000_000

PARAM_PRNG = "numpy PCG64 seeded by SeedSequence(master_seed, spawn_key)"

METRICS = (
    "updates",
    "full_passes",
    "mean_distance",
    "avg_accuracy",
    "social_welfare",
    "guru_fraction",
    "mean_guru_chain_length",
    "cycle_fraction",
    "mean_guru_accuracy",
    "p_direct",
    "p_liquid",
    "max_accuracy",
    "mean_accuracy",
)


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal distribution, truncated by rejection at draw time."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if not self.std >= 0.0:
            raise ConfigError(f"standard deviation must be non-negative, got {self.std}")


def _draw_accuracies(rng: np.random.Generator, dist: TruncatedNormal, n: int) -> np.ndarray:
    """q_i ~ dist, redrawn until it lands in [0.5, 1]."""
    out = np.empty(n)
    pending = np.arange(n)
    for _ in range(_MAX_REJECTIONS):
        if not len(pending):
            return out
        draws = rng.normal(dist.mean, dist.std, size=len(pending))
        ok = (draws >= 0.5) & (draws <= 1.0)
        out[pending[ok]] = draws[ok]
        pending = pending[~ok]
    raise GenerationError(f"accuracy distribution {dist} rarely lands in [0.5, 1]")


def _draw_efforts(rng: np.random.Generator, dist: TruncatedNormal, q: np.ndarray) -> np.ndarray:
    """e_i ~ dist, redrawn until e_i >= 0 and q_i - e_i >= 0.5."""
    out = np.empty(len(q))
    pending = np.arange(len(q))
    for _ in range(_MAX_REJECTIONS):
        if not len(pending):
            return out
        draws = rng.normal(dist.mean, dist.std, size=len(pending))
        ok = (draws >= 0.0) & (q[pending] - draws >= 0.5)
        out[pending[ok]] = draws[ok]
        pending = pending[~ok]
    raise GenerationError(f"effort distribution {dist} leaves no room above q - e = 0.5")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a simulation run."""

    topologies: Tuple[str, ...] = tuple(TOPOLOGY_CODES)
    degrees: Tuple[int, ...] = (4, 8, 12, 16, 20, 24)
    n: int = 250
    graphs_per_setting: int = 25
    inits_per_graph: int = 100
    accuracy: TruncatedNormal = field(default_factory=lambda: TruncatedNormal(0.75, 0.05))
    effort: TruncatedNormal = field(default_factory=lambda: TruncatedNormal(0.025, 0.01))
    regimes: Tuple[str, ...] = ("effortless",)
    scenario: str = "iterated_br"
    master_seed: int = 0
    mc_samples: int = DEFAULT_MC_SAMPLES
    rewiring_beta: float = 0.25
    max_passes: int = DEFAULT_MAX_PASSES

    def __post_init__(self) -> None:
        object.__setattr__(self, "topologies", tuple(self.topologies))
        object.__setattr__(self, "degrees", tuple(int(k) for k in self.degrees))
        object.__setattr__(self, "regimes", tuple(self.regimes))
        for name in self.topologies:
            if name not in topologies:
                raise ConfigError(f"unknown topology {name!r}")
        for r in self.regimes:
            if r not in REGIMES:
                raise ConfigError(f"unknown regime {r!r}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if not (self.topologies and self.degrees and self.regimes):
            raise ConfigError("topologies, degrees and regimes must be non-empty")
        for count in ("n", "graphs_per_setting", "inits_per_graph", "mc_samples", "max_passes"):
            if getattr(self, count) < 1:
                raise ConfigError(f"{count} must be at least 1")
        for k in self.degrees:
            if k < 2 or k % 2 or k >= self.n:
                raise ConfigError(f"degree {k} must be even, at least 2 and below n={self.n}")
        if not 0.0 <= self.rewiring_beta <= 1.0:
            raise ConfigError(f"rewiring_beta {self.rewiring_beta} outside [0, 1]")
        if self.accuracy.mean - 4 * self.accuracy.std > 1.0 or self.accuracy.mean + 4 * self.accuracy.std < 0.5:
            raise ConfigError(f"accuracy distribution {self.accuracy} misses [0.5, 1]")

    @classmethod
    def from_dict(cls, spec: Dict[str, Any]) -> ExperimentConfig:
        """Decode the JSON form; unknown keys are rejected."""
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(spec) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = dict(spec)
        try:
            for key in ("accuracy", "effort"):
                if key in kwargs:
                    kwargs[key] = TruncatedNormal(float(kwargs[key]["mean"]), float(kwargs[key]["std"]))
            for key in ("topologies", "degrees", "regimes"):
                if key in kwargs:
                    kwargs[key] = tuple(kwargs[key])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config value: {exc}") from exc
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        out = dataclasses.asdict(self)
        for key in ("topologies", "degrees", "regimes"):
            out[key] = list(out[key])
        return out

    @property
    def replications(self) -> int:
        return (
            len(self.topologies)
            * len(self.degrees)
            * self.graphs_per_setting
            * self.inits_per_graph
            * len(self.regimes)
        )


def replace_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    return dataclasses.replace(config, master_seed=seed)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read an experiment config file."""
    with open(path) as f:
        try:
            spec = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return ExperimentConfig.from_dict(spec)


@dataclass(frozen=True)
class ReplicationRecord:
    """One simulated game: seed lineage, dynamics summary and metrics.

    For the one-shot scenario `updates` and `full_passes` are 0 and
    `converged` is True.
    """

    replication: int
    topology: str
    degree: int
    graph_index: int
    init_index: int
    regime: str
    scenario: str
    master_seed: int
    graph_seed: int
    mean_distance: float
    converged: bool
    updates: int
    full_passes: int
    avg_accuracy: float
    social_welfare: float
    guru_fraction: float
    mean_guru_chain_length: float
    cycle_fraction: float
    mean_guru_accuracy: float
    p_direct: float
    p_liquid: float
    p_liquid_stderr: float
    max_accuracy: float
    mean_accuracy: float
    wall_time: float = field(default=0.0, compare=False)


# ## Seed lineage


def graph_key(topology: str, degree: int, graph_index: int) -> Tuple[int, int, int]:
    return (TOPOLOGY_CODES[topology], degree, graph_index)


def graph_seed(master_seed: int, topology: str, degree: int, graph_index: int) -> int:
    """64-bit seed of the graph drawn for (topology, degree, graph_index)."""
    seq = np.random.SeedSequence(master_seed, spawn_key=graph_key(topology, degree, graph_index))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def init_streams(
    master_seed: int, topology: str, degree: int, graph_index: int, init_index: int
) -> List[np.random.SeedSequence]:
    """Accuracy, effort, sweep-order and sampling streams of one initialization.

    The key ignores regime and scenario, so paired runs share accuracies.
    """
    key = graph_key(topology, degree, graph_index) + (init_index,)
    return np.random.SeedSequence(master_seed, spawn_key=key).spawn(4)


def draw_game(
    config: ExperimentConfig,
    network: Network,
    streams: Sequence[np.random.SeedSequence],
    regime: str,
) -> DelegationGame:
    """Homogeneous game on `network` with freshly drawn q (and e under effort)."""
    q = _draw_accuracies(np.random.default_rng(streams[_ACCURACY_STREAM]), config.accuracy, network.n)
    if regime == "effort":
        e = _draw_efforts(np.random.default_rng(streams[_EFFORT_STREAM]), config.effort, q)
    else:
        e = np.zeros(network.n)
    return DelegationGame.build(q.tolist(), e.tolist(), Deterministic.homogeneous(network.n), network)


# ## Running


def _replicate(
    config: ExperimentConfig,
    network: Network,
    distance: float,
    topology: str,
    degree: int,
    graph_index: int,
    init_index: int,
    regime: str,
    replication: int,
    seed: int,
) -> ReplicationRecord:
    started = time.perf_counter()
    streams = init_streams(config.master_seed, topology, degree, graph_index, init_index)
    game = draw_game(config, network, streams, regime)

    if config.scenario == "iterated_br":
        order = np.random.default_rng(streams[_ORDER_STREAM]).permutation(game.n).tolist()
        trace = iterated_best_response(game, order=order, max_passes=config.max_passes)
        profile = trace.final_profile
        converged, updates, passes = trace.converged, trace.updates, trace.full_passes
    else:
        profile = one_shot_profile(game)
        converged, updates, passes = True, 0, 0

    sampling_seed = int(streams[_SAMPLING_STREAM].generate_state(1)[0])
    liquid = majority_correct_liquid(game, profile, mc_samples=config.mc_samples, seed=sampling_seed)
    m = profile_metrics(game, profile)
    return ReplicationRecord(
        replication=replication,
        topology=topology,
        degree=degree,
        graph_index=graph_index,
        init_index=init_index,
        regime=regime,
        scenario=config.scenario,
        master_seed=config.master_seed,
        graph_seed=seed,
        mean_distance=distance,
        converged=converged,
        updates=updates,
        full_passes=passes,
        avg_accuracy=m.avg_accuracy,
        social_welfare=m.social_welfare,
        guru_fraction=m.guru_fraction,
        mean_guru_chain_length=m.mean_guru_chain_length,
        cycle_fraction=m.cycle_fraction,
        mean_guru_accuracy=m.mean_guru_accuracy,
        p_direct=majority_correct_direct(game),
        p_liquid=liquid.probability,
        p_liquid_stderr=liquid.stderr,
        max_accuracy=max_accuracy(game),
        mean_accuracy=mean_accuracy(game),
        wall_time=time.perf_counter() - started,
    )


def _draw_network(config: ExperimentConfig, topology: str, degree: int, graph_index: int) -> Tuple[Network, int]:
    seed = graph_seed(config.master_seed, topology, degree, graph_index)
    spec = TopologySpec(topology, config.n, degree, config.rewiring_beta, seed)
    return generate(spec), seed


def _run_unit(
    config: ExperimentConfig, topology: str, degree: int, graph_index: int, first_id: int
) -> List[ReplicationRecord]:
    network, seed = _draw_network(config, topology, degree, graph_index)
    distance = mean_pairwise_distance(network)
    records = []
    replication = first_id
    for init_index in range(config.inits_per_graph):
        for regime in config.regimes:
            records.append(
                _replicate(
                    config, network, distance, topology, degree, graph_index,
                    init_index, regime, replication, seed,
                )
            )
            replication += 1
    logger.info(
        "%s degree %d graph %d: %d records", topology, degree, graph_index, len(records)
    )
    return records


def work_units(config: ExperimentConfig) -> List[Tuple[ExperimentConfig, str, int, int, int]]:
    """Arguments of every work unit, in replication-id order."""
    per_unit = config.inits_per_graph * len(config.regimes)
    units = []
    for topology in config.topologies:
        for degree in config.degrees:
            for graph_index in range(config.graphs_per_setting):
                units.append((config, topology, degree, graph_index, len(units) * per_unit))
    return units


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> List[ReplicationRecord]:
    """Simulate every replication of `config`.

    Args:
    ----
        config: The experiment.
        jobs: Worker processes; the records do not depend on it.

    Returns:
    -------
        List[ReplicationRecord]: Sorted by replication id.

    """
    units = work_units(config)
    logger.info("running %d replications in %d work units", config.replications, len(units))
    if jobs <= 1:
        parts = [_run_unit(*unit) for unit in units]
    else:
        with multiprocessing.Pool(processes=jobs) as pool:
            parts = pool.starmap(_run_unit, units)
    records = sorted((r for part in parts for r in part), key=lambda r: r.replication)
    stalled = sum(not r.converged for r in records)
    if stalled:
        logger.warning("%d replications hit the pass limit", stalled)
    return records


def replay(config: ExperimentConfig, record: ReplicationRecord) -> ReplicationRecord:
    """Recompute a single record from its seed lineage."""
    if record.master_seed != config.master_seed:
        raise ConfigError("record belongs to another master seed")
    network, seed = _draw_network(config, record.topology, record.degree, record.graph_index)
    if seed != record.graph_seed:
        raise ConfigError("record graph seed does not match its lineage")
    return _replicate(
        config,
        network,
        mean_pairwise_distance(network),
        record.topology,
        record.degree,
        record.graph_index,
        record.init_index,
        record.regime,
        record.replication,
        seed,
    )


# ## Aggregation and output


def records_frame(records: Sequence[ReplicationRecord]) -> pd.DataFrame:
    """Records as a table, without wall times."""
    columns = [f.name for f in dataclasses.fields(ReplicationRecord) if f.name != "wall_time"]
    rows = [{c: getattr(r, c) for c in columns} for r in records]
    return pd.DataFrame(rows, columns=columns)


def summarize(
    records: Sequence[ReplicationRecord],
    group_by: Sequence[str],
    measures: Sequence[str] = METRICS,
) -> pd.DataFrame:
    """Mean and standard deviation of each measure per group.

    Returns a flat table with the group columns followed by
    `<measure>_mean` and `<measure>_std` columns.

    Raises
    ------
        ConfigError: On no records or unknown columns.

    """
    if not records:
        raise ConfigError("nothing to summarize")
    frame = records_frame(records)
    missing = [c for c in list(group_by) + list(measures) if c not in frame.columns]
    if missing:
        raise ConfigError(f"unknown columns: {', '.join(missing)}")
    stats = frame.groupby(list(group_by), sort=True)[list(measures)].agg(["mean", "std"])
    stats.columns = [f"{m}_{s}" for m, s in stats.columns]
    return stats.reset_index()


def write_outputs(
    records: Sequence[ReplicationRecord],
    summary: pd.DataFrame,
    config: ExperimentConfig,
    out_dir: Union[str, Path],
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write records.csv, summary.csv and meta.json into `out_dir`."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records_frame(records).to_csv(out / "records.csv", index=False, float_format="%.6g")
    summary.to_csv(out / "summary.csv", index=False, float_format="%.6g")
    meta = {
        "config": config.to_dict(),
        "master_seed": config.master_seed,
        "prng": {"parameters": PARAM_PRNG, "graphs": GRAPH_PRNG},
        "version": VERSION,
        "replications": len(records),
        "wall_time": sum(r.wall_time for r in records),
    }
    if extra:
        meta.update(extra)
    with open(out / "meta.json", "w") as f:
        json.dump(meta, f, indent=2)
    logger.info("wrote %d records to %s", len(records), out)
    return out


# ## Canned reproductions


@dataclass(frozen=True)
class Reproduction:
    """A canned experiment plus how its summary is laid out.

    `configs` run one after another and are pooled; the summary is grouped
    by `group_by` and pivoted so that `column` values become columns.
    """

    configs: Tuple[ExperimentConfig, ...]
    group_by: Tuple[str, ...]
    measures: Tuple[str, ...]
    column: str


def _configs(
    scenario: str, regimes: Sequence[str], seed: int, graphs: int, inits: int, **kwargs: Any
) -> Tuple[ExperimentConfig, ...]:
    return (
        ExperimentConfig(
            regimes=tuple(regimes),
            scenario=scenario,
            master_seed=seed,
            graphs_per_setting=graphs,
            inits_per_graph=inits,
            **kwargs,
        ),
    )


def table2(seed: int, graphs: int = 25, inits: int = 100) -> Reproduction:
    """Best-response updates and passes by degree, pooled over topologies."""
    return Reproduction(
        _configs("iterated_br", REGIMES, seed, graphs, inits),
        ("regime", "degree"),
        ("updates", "full_passes"),
        "degree",
    )


def table3(seed: int, graphs: int = 25, inits: int = 100) -> Reproduction:
    """Best accuracy against the equilibrium's average accuracy, with effort."""
    return Reproduction(
        _configs("iterated_br", ("effort",), seed, graphs, inits),
        ("degree",),
        ("max_accuracy", "avg_accuracy"),
        "degree",
    )


def table4(seed: int, graphs: int = 25, inits: int = 100) -> Reproduction:
    """Mean distance and updates per topology at degree 4."""
    return Reproduction(
        _configs("iterated_br", ("effortless",), seed, graphs, inits, degrees=(4,)),
        ("topology",),
        ("mean_distance", "updates"),
        "topology",
    )


def fig1(seed: int, graphs: int = 25, inits: int = 100) -> Reproduction:
    """One-shot accuracies and majority correctness."""
    return Reproduction(
        _configs("one_shot", REGIMES, seed, graphs, inits),
        ("regime", "topology", "degree"),
        ("mean_accuracy", "avg_accuracy", "max_accuracy", "p_direct", "p_liquid"),
        "degree",
    )


def fig2(seed: int, graphs: int = 25, inits: int = 100) -> Reproduction:
    """One-shot guru share, chain lengths and cycles."""
    return Reproduction(
        _configs("one_shot", ("effortless",), seed, graphs, inits),
        ("topology", "degree"),
        ("guru_fraction", "mean_guru_chain_length", "cycle_fraction"),
        "degree",
    )


def fig3(seed: int, graphs: int = 25, inits: int = 100) -> Reproduction:
    """Best-response updates and passes per topology and degree."""
    return Reproduction(
        _configs("iterated_br", ("effortless",), seed, graphs, inits),
        ("topology", "degree"),
        ("updates", "full_passes"),
        "degree",
    )


reproductions: Dict[str, Callable[..., Reproduction]] = {
    "table2": table2,
    "table3": table3,
    "table4": table4,
    "fig1": fig1,
    "fig2": fig2,
    "fig3": fig3,
}


def pivot_summary(summary: pd.DataFrame, group_by: Sequence[str], column: str) -> pd.DataFrame:
    """Reshape a flat summary so each value of `column` is one column.

    Rows are the remaining group columns, then measure, then statistic.
    """
    long = summary.melt(id_vars=list(group_by), var_name="measure", value_name="value")
    split = long["measure"].str.rsplit("_", n=1, expand=True)
    long["measure"], long["stat"] = split[0], split[1]
    index = [g for g in group_by if g != column] + ["measure", "stat"]
    table = long.pivot_table(index=index, columns=column, values="value", aggfunc="first", sort=True)
    table.columns = [str(c) for c in table.columns]
    return table.reset_index()


def reproduce(
    name: str, seed: int, graphs: int = 25, inits: int = 100, jobs: int = 1
) -> Tuple[List[ReplicationRecord], pd.DataFrame, pd.DataFrame, Reproduction]:
    """Run a canned reproduction.

    Returns
    -------
        records, flat summary, pivoted table and the reproduction itself.

    """
    if name not in reproductions:
        raise ConfigError(f"unknown reproduction {name!r}")
    plan = reproductions[name](seed, graphs, inits)
    records: List[ReplicationRecord] = []
    for config in plan.configs:
        records.extend(run_experiment(config, jobs))
    summary = summarize(records, plan.group_by, plan.measures)
    return records, summary, pivot_summary(summary, plan.group_by, plan.column), plan
