"""Experiment runner: strategy comparisons over several seeded runs.

Every (strategy, run) pair trains a fresh agent on a fresh environment and
writes ``<strategy>_run<k>.csv``. Runs of different strategies with the same
index share a seed, so comparisons are paired. ``summary.csv``,
``curves.csv`` and ``report.csv`` are derived from the per-run files and can
always be rebuilt from them.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, asdict
from functools import lru_cache
from pathlib import Path

import numpy as np

from .action_space import (ActionSpace, ConceptNetClient, CooccurrenceTable, StrategyKind,
                           StrategyParams, VerbInventory)
from .affordance import DEFAULT_AXIS, CanonicalPairSet, build_affordance_model, make_axis
from .agent import Agent, AgentConfig, EpochRecord, QTable, run_epoch
from .embeddings import Lexicon, load_embeddings
from .synthetic import DATA_DIR, bundled_embeddings_path
from .text_env import ExternalEnv, ScriptedEnv, load_world

logger = logging.getLogger(__name__)

RUN_COLUMNS = ["epoch", "score", "cum_reward", "distinct_states"]


class ExperimentError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    world: str | None = "cottage"
    external: dict | None = None  # {"argv": [...], "prompt": ..., "score_pattern": ..., "timeout": ..., "max_score": ...}
    strategies: list = field(default_factory=lambda: ["baseline", "affordance"])
    epochs: int = 100
    steps: int = 200
    runs: int = 10
    seed: int = 0
    jobs: int = 1
    embeddings: str | None = None
    embeddings_format: str = "word2vec-text"
    verbs: str | None = None
    nouns: str | None = None
    adjectives: str | None = None
    pairs: str | None = None
    axis: list = field(default_factory=lambda: list(DEFAULT_AXIS))
    manipulation_k: int = 1000
    verb_budget: int = 30
    noun_budget: int = 15
    cooc_threshold: int = 3
    freeform_top: int = 15
    cooccurrence: str | None = None
    conceptnet_cache: str | None = None
    conceptnet_offline: bool = True
    gamma: float = 0.9
    epsilon_initial: float = 1.0
    epsilon_decay: float = 0.99
    epsilon_floor: float = 0.05
    intrinsic: bool = False
    intrinsic_bonus: float = 1.0
    out: str = "results"

    @classmethod
    def from_json(cls, path, **overrides) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict({**data, **{k: v for k, v in overrides.items() if v is not None}})

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ExperimentError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        for name in ("epochs", "steps", "runs", "jobs"):
            if getattr(self, name) < 1:
                raise ExperimentError(f"{name} must be >= 1")
        if (self.world is None) == (self.external is None):
            raise ExperimentError("configure exactly one of 'world' or 'external'")
        for s in self.strategies:
            StrategyKind(s)
        for name in ("embeddings", "verbs", "nouns", "adjectives", "pairs", "cooccurrence"):
            p = getattr(self, name)
            if p is not None and not Path(p).exists():
                raise ExperimentError(f"{name} file not found: {p}")
        if self.world is not None:
            load_world(self.world)
        if "cooccurrence" in self.strategies and self.cooccurrence is None:
            raise ExperimentError("the cooccurrence strategy needs a 'cooccurrence' table file")
        if "conceptnet" in self.strategies and not (self.conceptnet_cache
                                                    or os.environ.get("AFFORDANCE_CONCEPTNET_CACHE")):
            raise ExperimentError("the conceptnet strategy needs 'conceptnet_cache'")

    def agent_config(self, strategy: str, seed: int) -> AgentConfig:
        return AgentConfig(strategy=strategy, gamma=self.gamma, epsilon_initial=self.epsilon_initial,
                           epsilon_decay=self.epsilon_decay, epsilon_floor=self.epsilon_floor,
                           verb_budget=self.verb_budget, noun_budget=self.noun_budget,
                           intrinsic=self.intrinsic, intrinsic_bonus=self.intrinsic_bonus, seed=seed)


def run_seed(base: int, run: int) -> int:
    return int(np.random.SeedSequence([base, run]).generate_state(1)[0])


@dataclass
class Resources:
    lexicon: Lexicon
    inventory: VerbInventory
    store: object = None
    model: object = None
    axis: object = None
    cooccurrence: CooccurrenceTable | None = None
    conceptnet: ConceptNetClient | None = None


@lru_cache(maxsize=8)
def _load_resources(key: str) -> Resources:
    cfg = ExperimentConfig.from_dict(json.loads(key))
    lexicon = Lexicon.from_files(cfg.verbs or DATA_DIR / "verbs.txt",
                                 cfg.nouns or DATA_DIR / "nouns.txt",
                                 cfg.adjectives or DATA_DIR / "adjectives.txt")
    res = Resources(lexicon, VerbInventory.from_lexicon(lexicon, cfg.manipulation_k))
    if any(StrategyKind(s).needs_model for s in cfg.strategies):
        res.store = load_embeddings(cfg.embeddings or bundled_embeddings_path(), cfg.embeddings_format)
        pairs = CanonicalPairSet.from_file(cfg.pairs) if cfg.pairs else CanonicalPairSet()
        res.model = build_affordance_model(res.store, pairs)
        res.axis = make_axis(res.store, *cfg.axis)
    if cfg.cooccurrence:
        res.cooccurrence = CooccurrenceTable.load(cfg.cooccurrence)
    if "conceptnet" in cfg.strategies:
        res.conceptnet = ConceptNetClient(cfg.conceptnet_cache, offline=cfg.conceptnet_offline)
    return res


def load_resources(cfg: ExperimentConfig) -> Resources:
    d = cfg.to_dict()
    # only the keys that affect shared resources
    keep = ("verbs", "nouns", "adjectives", "manipulation_k", "embeddings", "embeddings_format",
            "pairs", "axis", "cooccurrence", "conceptnet_cache", "conceptnet_offline", "strategies")
    key = {k: d[k] for k in keep}
    key["strategies"] = sorted(set(key["strategies"]))
    return _load_resources(json.dumps(key, sort_keys=True, default=str))


def make_env(cfg: ExperimentConfig):
    if cfg.external is not None:
        ext = dict(cfg.external)
        argv = ext.pop("argv")
        return ExternalEnv(argv, **ext)
    return ScriptedEnv(load_world(cfg.world))


def max_score_of(cfg: ExperimentConfig) -> int | None:
    if cfg.external is not None:
        return cfg.external.get("max_score")
    return load_world(cfg.world).max_score


def build_agent(cfg: ExperimentConfig, strategy: str, run: int, qtable: QTable | None = None) -> Agent:
    res = load_resources(cfg)
    seed = run_seed(cfg.seed, run)
    params = StrategyParams(cfg.verb_budget, cfg.noun_budget, cfg.cooc_threshold, cfg.freeform_top)
    space = ActionSpace(strategy, res.inventory, res.model, seed=seed, params=params,
                        vocabulary=res.lexicon.verbs, cooccurrence=res.cooccurrence,
                        conceptnet=res.conceptnet)
    return Agent(cfg.agent_config(strategy, seed), space, res.lexicon, store=res.store,
                 axis=res.axis, qtable=qtable)


def train_run(cfg: ExperimentConfig, strategy: str, run: int) -> tuple[list[EpochRecord], Agent]:
    agent = build_agent(cfg, strategy, run)
    env = make_env(cfg)
    records = []
    try:
        for epoch in range(cfg.epochs):
            rec = run_epoch(env, agent, cfg.steps, epoch)
            records.append(rec)
            if rec.truncated:
                logger.warning("%s run %d: epoch %d truncated after %d steps", strategy, run, epoch, rec.steps)
    finally:
        if hasattr(env, "close"):
            env.close()
    return records, agent


def run_filename(strategy: str, run: int) -> str:
    return f"{strategy}_run{run}.csv"


def write_run_csv(path: Path, records: list[EpochRecord]) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUN_COLUMNS)
        for r in records:
            w.writerow([r.epoch + 1, r.score, _num(r.cum_reward), r.distinct_states])
    os.replace(tmp, path)


def read_run_csv(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [{"epoch": int(r["epoch"]), "score": int(r["score"]), "cum_reward": float(r["cum_reward"]),
                 "distinct_states": int(r["distinct_states"])} for r in csv.DictReader(fh)]


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.6f}"


def _job(args):
    cfg_dict, strategy, run, save_qtable = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    out = Path(cfg.out)
    records, agent = train_run(cfg, strategy, run)
    write_run_csv(out / run_filename(strategy, run), records)
    if save_qtable:
        agent.qtable.save(out / f"{strategy}_run{run}_qtable.csv", strategy=strategy, epochs=cfg.epochs)
    return strategy, run


@dataclass
class ExperimentRecord:
    """Per-run score trajectories keyed by (strategy, run)."""

    scores: dict
    max_score: int | None
    epochs: int
    failures: list = field(default_factory=list)

    def peak_performance(self, strategy: str, run: int) -> float:
        if not self.max_score:
            return math.nan
        return max(r["score"] for r in self.scores[strategy, run]) / self.max_score

    def epochs_to_first_reward(self, strategy: str, run: int) -> int:
        """1-based epoch of the first positive score; ``epochs + 1`` if none."""
        for r in self.scores[strategy, run]:
            if r["score"] > 0:
                return r["epoch"]
        return self.epochs + 1

    def runs_of(self, strategy: str) -> list[int]:
        return sorted(run for s, run in self.scores if s == strategy)

    def strategies(self) -> list[str]:
        return list(dict.fromkeys(s for s, _ in self.scores))

    def mean_peak(self, strategy: str) -> float:
        return statistics.fmean(self.peak_performance(strategy, r) for r in self.runs_of(strategy))

    def median_first_reward(self, strategy: str) -> float:
        return statistics.median(self.epochs_to_first_reward(strategy, r) for r in self.runs_of(strategy))

    def mean_curve(self, strategy: str, key: str = "score") -> np.ndarray:
        return np.mean([[r[key] for r in self.scores[strategy, run]] for run in self.runs_of(strategy)], axis=0)


def run_experiment(cfg: ExperimentConfig, *, save_qtables: bool = False) -> ExperimentRecord:
    """Train every strategy x run, skipping runs whose CSV already exists."""
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    todo = []
    for strategy in cfg.strategies:
        for run in range(cfg.runs):
            path = out / run_filename(strategy, run)
            if path.exists() and len(read_run_csv(path)) == cfg.epochs:
                logger.info("resuming: %s already complete", path.name)
                continue
            todo.append((cfg.to_dict(), strategy, run, save_qtables))

    failures = []
    if cfg.jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [(t, pool.submit(_job, t)) for t in todo]
            for t, fut in futures:
                try:
                    fut.result()
                except Exception as exc:
                    logger.warning("%s run %d failed: %s", t[1], t[2], exc)
                    failures.append((t[1], t[2], str(exc)))
    else:
        for t in todo:
            try:
                _job(t)
            except Exception as exc:
                logger.warning("%s run %d failed: %s", t[1], t[2], exc)
                failures.append((t[1], t[2], str(exc)))

    scores = {}
    for strategy in cfg.strategies:
        for run in range(cfg.runs):
            path = out / run_filename(strategy, run)
            if path.exists():
                scores[strategy, run] = read_run_csv(path)
    if not scores:
        raise ExperimentError("all runs failed")
    record = ExperimentRecord(scores, max_score_of(cfg), cfg.epochs, failures)
    write_summaries(record, out)
    return record


def write_summaries(record: ExperimentRecord, out: Path) -> None:
    out = Path(out)
    strategies = record.strategies()
    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strategy", "runs", "mean_final_score", "mean_score", "mean_peak_performance",
                    "median_epochs_to_first_reward", "max_score"])
        for s in strategies:
            runs = record.runs_of(s)
            final = statistics.fmean(record.scores[s, r][-1]["score"] for r in runs)
            mean = float(np.mean(record.mean_curve(s)))
            w.writerow([s, len(runs), f"{final:.6f}", f"{mean:.6f}", f"{record.mean_peak(s):.6f}",
                        f"{record.median_first_reward(s):g}", record.max_score or ""])

    with open(out / "curves.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strategy", "epoch", "mean_score", "mean_cum_reward", "mean_distinct_states"])
        for s in strategies:
            sc, cr, ds = (record.mean_curve(s, k) for k in ("score", "cum_reward", "distinct_states"))
            for e in range(len(sc)):
                w.writerow([s, e + 1, f"{sc[e]:.6f}", f"{cr[e]:.6f}", f"{ds[e]:.6f}"])

    # normalized by the best score any agent reached on this game
    best = max(r["score"] for rows in record.scores.values() for r in rows)
    with open(out / "report.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strategy", "normalized_mean_score", "normalized_peak", "normalizer"])
        for s in strategies:
            curve = record.mean_curve(s)
            peak = statistics.fmean(max(r["score"] for r in record.scores[s, run]) for run in record.runs_of(s))
            if best > 0:
                w.writerow([s, f"{float(np.mean(curve)) / best:.6f}", f"{peak / best:.6f}", best])
            else:
                w.writerow([s, "0.000000", "0.000000", 0])


def load_experiment(out, cfg: ExperimentConfig) -> ExperimentRecord:
    out = Path(out)
    scores = {}
    for s in cfg.strategies:
        for run in range(cfg.runs):
            p = out / run_filename(s, run)
            if p.exists():
                scores[s, run] = read_run_csv(p)
    return ExperimentRecord(scores, max_score_of(cfg), cfg.epochs)


def replay(cfg: ExperimentConfig, qtable_path, steps: int | None = None, seed: int = 0):
    """Play one greedy episode from a saved Q-table; returns (record, commands)."""
    table, meta = QTable.load(qtable_path)
    strategy = meta.get("strategy", cfg.strategies[0])
    cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "strategies": [strategy]})
    agent = build_agent(cfg, strategy, seed, qtable=table)
    env = _Recorder(make_env(cfg))
    rec = run_epoch(env, agent, steps or cfg.steps, 0, epsilon=0.0, learn=False)
    return rec, env.commands


class _Recorder:
    def __init__(self, env):
        self.env = env
        self.commands: list[tuple[str, int]] = []
        self.max_score = getattr(env, "max_score", None)

    def reset(self):
        self.commands.clear()
        return self.env.reset()

    def step(self, command):
        obs = self.env.step(command)
        self.commands.append((command, obs.score))
        return obs
