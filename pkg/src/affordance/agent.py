"""Tabular Q-learner for text games.

The agent alternates between an action and a ``look``; the look response,
with digits removed, is hashed into the state key. Q-values are updated
with learning rate 1 and never decrease, so a behaviour that paid off once
is kept even if it does not pay again within the same episode.
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, asdict

from .action_space import ActionSpace, StrategyKind, tokenize
from .affordance import ProjectionAxis, rank_manipulable
from .embeddings import EmbeddingStore, Lexicon

logger = logging.getLogger(__name__)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

_DIGITS = re.compile(r"\d")
_SPACE = re.compile(r"\s+")


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & _MASK64
    return h


def strip_state_text(text: str) -> str:
    return _SPACE.sub(" ", _DIGITS.sub("", text)).strip()


def hash_state(text: str) -> int:
    """64-bit FNV-1a of the game text with digits removed and whitespace collapsed."""
    return fnv1a_64(strip_state_text(text).encode("utf-8"))


def extract_nouns(text: str, lexicon: Lexicon) -> list[str]:
    """Nouns in order of first appearance, plus ``"adjective noun"`` bigrams."""
    tokens = tokenize(text)
    out: dict[str, None] = {}
    for i, tok in enumerate(tokens):
        if not lexicon.is_noun(tok):
            continue
        out.setdefault(tok)
        if i > 0 and lexicon.is_adjective(tokens[i - 1]):
            out.setdefault(f"{tokens[i - 1]} {tok}")
    return list(out)


@dataclass(frozen=True)
class GameAction:
    verb: str
    noun: str | None = None

    @property
    def command(self) -> str:
        return self.verb if not self.noun else f"{self.verb} {self.noun}"

    def __str__(self) -> str:
        return self.command


class QTable:
    """Sparse (state, command) -> value map; unseen pairs read as 0."""

    def __init__(self, gamma: float = 0.9):
        self.gamma = gamma
        self.values: dict[int, dict[str, float]] = {}

    def get(self, state: int, action: str) -> float:
        return self.values.get(state, {}).get(action, 0.0)

    def actions(self, state: int) -> dict[str, float]:
        return self.values.get(state, {})

    def max_value(self, state: int) -> float:
        row = self.values.get(state)
        return max(row.values()) if row else 0.0

    def set(self, state: int, action: str, value: float) -> None:
        self.values.setdefault(state, {})[action] = value

    def __len__(self) -> int:
        return sum(len(r) for r in self.values.values())

    def items(self):
        for s in sorted(self.values):
            for a in sorted(self.values[s]):
                yield s, a, self.values[s][a]

    def save(self, path, **meta) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fields = " ".join(f"{k}={v}" for k, v in {"gamma": self.gamma, **meta}.items())
            fh.write(f"# {fields}\n")
            fh.write("state_hash,action,value\n")
            for s, a, v in self.items():
                fh.write(f"{s:016x},{a},{v!r}\n")

    @classmethod
    def load(cls, path) -> tuple["QTable", dict]:
        meta: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
            if first.startswith("#"):
                for item in first[1:].split():
                    k, _, v = item.partition("=")
                    meta[k] = v
                header = fh.readline()
            else:
                header = first
            if header.strip() != "state_hash,action,value":
                raise ValueError(f"{path}: unexpected Q-table header {header.strip()!r}")
            table = cls(float(meta.get("gamma", 0.9)))
            for line in fh:
                if not line.strip():
                    continue
                s, rest = line.rstrip("\n").split(",", 1)
                a, v = rest.rsplit(",", 1)
                table.set(int(s, 16), a, float(v))
        return table, meta


def q_update(qtable: QTable, state: int, action: str, reward: float, next_state: int) -> float:
    """One learning-rate-1 update that is never allowed to lower the stored value."""
    q = qtable.get(state, action)
    delta = reward + qtable.gamma * qtable.max_value(next_state) - q
    new = max(q, q + delta)
    qtable.set(state, action, new)
    return new


@dataclass(frozen=True)
class EpsilonSchedule:
    initial: float = 1.0
    decay: float = 0.99
    floor: float = 0.05

    def __post_init__(self):
        if not 0 <= self.floor <= self.initial <= 1:
            raise ValueError("need 0 <= floor <= initial <= 1")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must be in (0, 1]")

    def value(self, epoch: int) -> float:
        return max(self.floor, self.initial * self.decay ** epoch)


def select_noun(nouns: list[str], strategy: StrategyKind | str, rng: random.Random, *,
                store: EmbeddingStore | None = None, axis: ProjectionAxis | None = None,
                budget: int = 15) -> str | None:
    """Pick the noun to act on, or ``None`` when the text names nothing.

    Strategies that prune nouns keep the ``budget`` most manipulable ones
    (by projection on ``axis``) and draw uniformly among them.
    """
    strategy = StrategyKind(strategy)
    pool = nouns
    if strategy.prunes_nouns:
        if store is None or axis is None:
            raise ValueError(f"{strategy.value} noun selection needs a store and an axis")
        pool = rank_manipulable(store, axis, nouns, budget)
    if not pool:
        return None
    return pool[rng.randrange(len(pool))]


def candidate_actions(verbs, noun: str | None, navigation) -> list[GameAction]:
    nav = set(navigation)
    out = []
    for v in verbs:
        if v in nav:
            out.append(GameAction(v))
        elif noun:
            out.append(GameAction(v, noun))
    return out


def choose_action(state: int, candidates: list[GameAction], qtable: QTable, epsilon: float,
                  rng: random.Random) -> GameAction:
    """Epsilon-greedy over recorded values.

    The greedy branch looks at every action recorded for ``state`` (not only
    this step's candidates) and breaks ties uniformly; with nothing recorded
    it falls back to the exploratory draw.
    """
    if rng.random() >= epsilon:
        row = qtable.actions(state)
        if row:
            best = max(row.values())
            top = sorted(a for a, v in row.items() if v == best)
            return parse_command(top[rng.randrange(len(top))])
    if not candidates:
        raise ValueError("no candidate actions")
    return candidates[rng.randrange(len(candidates))]


def parse_command(command: str) -> GameAction:
    verb, _, noun = command.partition(" ")
    return GameAction(verb, noun or None)


@dataclass
class AgentConfig:
    strategy: str = "baseline"
    gamma: float = 0.9
    epsilon_initial: float = 1.0
    epsilon_decay: float = 0.99
    epsilon_floor: float = 0.05
    verb_budget: int = 30
    noun_budget: int = 15
    intrinsic: bool = False
    intrinsic_bonus: float = 1.0
    seed: int = 0

    @property
    def epsilon(self) -> EpsilonSchedule:
        return EpsilonSchedule(self.epsilon_initial, self.epsilon_decay, self.epsilon_floor)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    score: int
    cum_reward: float
    distinct_states: int
    steps: int
    intrinsic: float = 0.0
    truncated: bool = False


class Agent:
    """Owns a Q-table, an action space and an RNG; plays epochs on one environment."""

    def __init__(self, config: AgentConfig, action_space: ActionSpace, lexicon: Lexicon, *,
                 store: EmbeddingStore | None = None, axis: ProjectionAxis | None = None,
                 qtable: QTable | None = None):
        self.config = config
        self.strategy = StrategyKind(config.strategy)
        self.action_space = action_space
        self.lexicon = lexicon
        self.store = store
        self.axis = axis
        self.qtable = qtable if qtable is not None else QTable(config.gamma)
        self.rng = random.Random(config.seed)
        self.seen_states: set[int] = set()
        self._nouns: dict[str, list[str]] = {}
        self._candidates: dict = {}

    def nouns_in(self, text: str) -> list[str]:
        hit = self._nouns.get(text)
        if hit is None:
            hit = extract_nouns(text, self.lexicon)
            if self.strategy.prunes_nouns:
                hit = rank_manipulable(self.store, self.axis, hit, self.config.noun_budget)
            self._nouns[text] = hit
        return hit

    def select_noun(self, text: str) -> str | None:
        # pruning already applied (and cached) in nouns_in
        pool = self.nouns_in(text)
        return pool[self.rng.randrange(len(pool))] if pool else None

    def act(self, state: int, text: str, epoch: int, epsilon: float) -> GameAction:
        noun = self.select_noun(text)
        verbs = self.action_space.verbs(noun, epoch)
        # verb tuples are memoized by the action space, so identity is a stable key
        key = (id(verbs), noun)
        hit = self._candidates.get(key)
        if hit is None or hit[0] is not verbs:
            hit = (verbs, candidate_actions(verbs, noun, self.action_space.inventory.navigation))
            self._candidates[key] = hit
        return choose_action(state, hit[1], self.qtable, epsilon, self.rng)

    def run_epoch(self, env, steps: int, epoch: int = 0, *, epsilon: float | None = None,
                  learn: bool = True, actions=None) -> EpochRecord:
        return run_epoch(env, self, steps, epoch, epsilon=epsilon, learn=learn, actions=actions)


def run_epoch(env, agent: Agent, steps: int, epoch: int = 0, *, epsilon: float | None = None,
              learn: bool = True, actions=None) -> EpochRecord:
    """Play one episode of ``steps`` environment commands (actions and looks both count).

    ``actions`` optionally scripts the commands instead of letting the agent
    choose; learning still happens.
    """
    if epsilon is None:
        epsilon = agent.config.epsilon.value(epoch)
    obs = env.reset()
    text = obs.text
    state = hash_state(text)
    agent.seen_states.add(state)
    visited = {state}
    prev_score = obs.score
    cum_reward = intrinsic_total = 0.0
    used = 0
    scripted = iter(actions) if actions is not None else None
    truncated = False

    while used < steps:
        if scripted is not None:
            try:
                action = parse_command(next(scripted))
            except StopIteration:
                break
        else:
            action = agent.act(state, text, epoch, epsilon)
        try:
            obs = env.step(action.command)
        except Exception:  # backend failure mid-epoch
            logger.exception("environment failed at step %d", used)
            truncated = True
            break
        used += 1
        if obs.error:
            truncated = True
        elif used < steps and not obs.terminal:
            look = env.step("look")
            used += 1
            if look.error:
                truncated = True
            else:
                obs = look

        reward = obs.score - prev_score
        prev_score = obs.score
        next_state = hash_state(obs.text)
        bonus = 0.0
        if next_state not in agent.seen_states:
            agent.seen_states.add(next_state)
            if agent.config.intrinsic:
                bonus = agent.config.intrinsic_bonus
        if learn:
            q_update(agent.qtable, state, action.command, reward + bonus, next_state)
        cum_reward += reward
        intrinsic_total += bonus
        visited.add(next_state)
        state, text = next_state, obs.text
        if truncated or obs.terminal:
            break

    return EpochRecord(epoch, prev_score, cum_reward, len(visited), used, intrinsic_total, truncated)


def train(env, agent: Agent, epochs: int, steps: int, start_epoch: int = 0) -> list[EpochRecord]:
    return [run_epoch(env, agent, steps, e) for e in range(start_epoch, start_epoch + epochs)]
