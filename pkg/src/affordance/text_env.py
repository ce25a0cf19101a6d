"""Text-game environments.

Two backends share the ``reset()`` / ``step(command)`` protocol:

* :class:`ScriptedEnv` runs a small deterministic world described by a JSON
  file (rooms, objects, rules).
* :class:`ExternalEnv` drives an interactive-fiction interpreter as a child
  process over stdin/stdout.

World file layout::

    {
      "name": "cottage",
      "start": "kitchen",
      "max_score": 15,
      "failure": "Nothing happens.",
      "rooms": [
        {"id": "kitchen", "description": "...", "exits": {"north": "garden"},
         "locked": ["north"], "points": 0}
      ],
      "objects": [
        {"id": "lamp", "name": "lamp", "adjectives": ["brass"], "synonyms": ["lantern"],
         "location": "kitchen", "description": "a brass lamp", "scenery": false}
      ],
      "rules": [
        {"verb": "take", "noun": "lamp", "room": null, "points": 5, "consumable": true,
         "response": "Taken.",
         "requires": [{"object": "lamp", "at": "here"}],
         "effects": [{"move": "lamp", "to": "inventory"}]}
      ]
    }

``requires`` entries are ``{"object": id, "at": "here" | "inventory" | room}``
or ``{"unlocked": [room, direction]}``. ``effects`` entries are
``{"move": id, "to": "inventory" | room | null}``, ``{"unlock": [room, direction]}``,
``{"lock": [room, direction]}`` or ``{"end": true}``. A room's ``points`` are
awarded on the first entry of each episode.
"""

from __future__ import annotations

import json
import queue
import re
import subprocess
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Protocol

INVENTORY = "inventory"
DEFAULT_FAILURE = "Nothing happens."
LOOK_COMMANDS = ("look", "l")


@dataclass(frozen=True)
class EnvObservation:
    text: str
    score: int
    terminal: bool = False
    error: bool = False


class Environment(Protocol):
    max_score: int | None

    def reset(self) -> EnvObservation: ...

    def step(self, command: str) -> EnvObservation: ...


class WorldError(ValueError):
    """Raised for an invalid world file."""


class EnvSpawnError(RuntimeError):
    """Raised when an external interpreter cannot be started."""


# --- scripted worlds -------------------------------------------------------------

@dataclass(frozen=True)
class Room:
    id: str
    description: str
    exits: dict
    locked: frozenset = frozenset()
    points: int = 0


@dataclass(frozen=True)
class GameObject:
    id: str
    name: str
    adjectives: tuple = ()
    synonyms: tuple = ()
    location: str | None = None
    description: str = ""
    scenery: bool = False

    def names(self) -> set[str]:
        base = {self.name, *self.synonyms}
        out = set(base)
        for adj in self.adjectives:
            out.update(f"{adj} {b}" for b in base)
        return out


@dataclass(frozen=True)
class Rule:
    verb: str
    noun: str
    room: str | None = None
    points: int = 0
    consumable: bool = True
    response: str = "Done."
    requires: tuple = ()
    effects: tuple = ()


@dataclass
class ScriptedWorld:
    name: str
    start: str
    rooms: dict
    objects: dict
    rules: list
    max_score: int
    failure: str = DEFAULT_FAILURE

    @classmethod
    def from_dict(cls, data: dict) -> "ScriptedWorld":
        try:
            rooms = {}
            for r in data["rooms"]:
                rooms[r["id"]] = Room(r["id"], r["description"], dict(r.get("exits", {})),
                                      frozenset(r.get("locked", ())), int(r.get("points", 0)))
            objects = {}
            for o in data.get("objects", []):
                adjs = tuple(a.lower() for a in o.get("adjectives", ()))
                name = o.get("name", o["id"]).lower()
                desc = o.get("description") or "a " + " ".join((*adjs[:1], name))
                objects[o["id"]] = GameObject(o["id"], name, adjs,
                                              tuple(s.lower() for s in o.get("synonyms", ())),
                                              o.get("location"), desc, bool(o.get("scenery", False)))
            rules = [Rule(r["verb"].lower(), r["noun"], r.get("room"), int(r.get("points", 0)),
                          bool(r.get("consumable", True)), r.get("response", "Done."),
                          tuple(r.get("requires", ())), tuple(r.get("effects", ())))
                     for r in data.get("rules", [])]
            world = cls(data.get("name", "world"), data["start"], rooms, objects, rules,
                        int(data["max_score"]), data.get("failure", DEFAULT_FAILURE))
        except (KeyError, TypeError) as exc:
            raise WorldError(f"malformed world file: missing or bad field {exc}") from None
        world.validate()
        return world

    def validate(self) -> None:
        if self.start not in self.rooms:
            raise WorldError(f"start room {self.start!r} does not exist")
        for room in self.rooms.values():
            for verb, target in room.exits.items():
                if target not in self.rooms:
                    raise WorldError(f"exit {room.id}.{verb} -> unknown room {target!r}")
            for d in room.locked:
                if d not in room.exits:
                    raise WorldError(f"room {room.id!r} locks non-existent exit {d!r}")
            if room.points < 0:
                raise WorldError(f"room {room.id!r} has negative points")
        for obj in self.objects.values():
            if obj.location not in (None, INVENTORY) and obj.location not in self.rooms:
                raise WorldError(f"object {obj.id!r} located in unknown room {obj.location!r}")
        for rule in self.rules:
            if rule.noun not in self.objects:
                raise WorldError(f"rule {rule.verb} {rule.noun}: unknown object")
            if rule.room is not None and rule.room not in self.rooms:
                raise WorldError(f"rule {rule.verb} {rule.noun}: unknown room {rule.room!r}")
            if rule.points < 0:
                raise WorldError(f"rule {rule.verb} {rule.noun}: negative points")
            if rule.points > 0 and not rule.consumable:
                raise WorldError(f"rule {rule.verb} {rule.noun}: repeatable rule cannot award points")
            for cond in rule.requires:
                self._check_ref(cond, rule)
            for eff in rule.effects:
                self._check_ref(eff, rule)
        reachable = reachable_points(self)
        if reachable != self.max_score:
            raise WorldError(f"max_score {self.max_score} != reachable points {reachable}")

    def _check_ref(self, item: dict, rule: Rule) -> None:
        where = f"rule {rule.verb} {rule.noun}"
        for key in ("object", "move"):
            if key in item and item[key] not in self.objects:
                raise WorldError(f"{where}: unknown object {item[key]!r}")
        for key in ("unlocked", "unlock", "lock"):
            if key in item:
                room, d = item[key]
                if room not in self.rooms or d not in self.rooms[room].exits:
                    raise WorldError(f"{where}: unknown exit {room}.{d}")
        loc = item.get("to", item.get("at"))
        if loc not in (None, INVENTORY, "here") and loc not in self.rooms:
            raise WorldError(f"{where}: unknown location {loc!r}")


def load_world(path) -> ScriptedWorld:
    """Load a world JSON file, or a bundled world by name (``"cottage"``)."""
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = bundled_world_path(str(path))
    with open(p, encoding="utf-8") as fh:
        return ScriptedWorld.from_dict(json.load(fh))


def bundled_world_path(name: str) -> Path:
    return Path(str(resources.files("affordance") / "data" / "worlds" / f"{name}.json"))


BUNDLED_WORLDS = ("cottage", "library", "vault")


@dataclass
class _GameState:
    room: str
    locations: dict
    unlocked: set = field(default_factory=set)
    fired: set = field(default_factory=set)
    visited: set = field(default_factory=set)
    score: int = 0
    ended: bool = False

    def key(self):
        return (self.room, tuple(sorted(self.locations.items(), key=lambda kv: kv[0])),
                frozenset(self.unlocked), frozenset(self.fired), frozenset(self.visited), self.ended)

    def copy(self) -> "_GameState":
        return _GameState(self.room, dict(self.locations), set(self.unlocked), set(self.fired),
                          set(self.visited), self.score, self.ended)


def _initial_state(world: ScriptedWorld) -> _GameState:
    st = _GameState(world.start, {o.id: o.location for o in world.objects.values()})
    st.visited.add(world.start)
    st.score = world.rooms[world.start].points
    return st


def _accessible(world: ScriptedWorld, st: _GameState, obj_id: str) -> bool:
    return st.locations[obj_id] in (st.room, INVENTORY)


def _holds(world: ScriptedWorld, st: _GameState, cond: dict) -> bool:
    if "object" in cond:
        at = cond.get("at", "here")
        loc = st.locations[cond["object"]]
        if at == "here":
            return loc == st.room
        return loc == at
    if "unlocked" in cond:
        room, d = cond["unlocked"]
        return _exit_open(world, st, room, d)
    return True


def _exit_open(world: ScriptedWorld, st: _GameState, room: str, direction: str) -> bool:
    return direction not in world.rooms[room].locked or (room, direction) in st.unlocked


def _rule_applies(world: ScriptedWorld, st: _GameState, idx: int, rule: Rule) -> bool:
    if rule.consumable and idx in st.fired:
        return False
    if rule.room is not None and rule.room != st.room:
        return False
    if not _accessible(world, st, rule.noun):
        return False
    return all(_holds(world, st, c) for c in rule.requires)


def _fire(world: ScriptedWorld, st: _GameState, idx: int, rule: Rule) -> int:
    if rule.consumable:
        st.fired.add(idx)
    for eff in rule.effects:
        if "move" in eff:
            to = eff.get("to")
            st.locations[eff["move"]] = st.room if to == "here" else to
        elif "unlock" in eff:
            st.unlocked.add(tuple(eff["unlock"]))
        elif "lock" in eff:
            st.unlocked.discard(tuple(eff["lock"]))
        elif eff.get("end"):
            st.ended = True
    st.score += rule.points
    return rule.points


def _move(world: ScriptedWorld, st: _GameState, direction: str) -> int:
    st.room = world.rooms[st.room].exits[direction]
    if st.room in st.visited:
        return 0
    st.visited.add(st.room)
    pts = world.rooms[st.room].points
    st.score += pts
    return pts


def reachable_points(world: ScriptedWorld, limit: int = 200_000) -> int:
    """Sum of points of every rule and room that can fire in some play-through."""
    start = _initial_state(world)
    gained_rules: set[int] = set()
    gained_rooms: set[str] = {world.start}
    seen = {start.key()}
    todo = deque([start])
    while todo:
        st = todo.popleft()
        if st.ended:
            continue
        successors = []
        for d in world.rooms[st.room].exits:
            if _exit_open(world, st, st.room, d):
                nxt = st.copy()
                _move(world, nxt, d)
                gained_rooms.add(nxt.room)
                successors.append(nxt)
        for idx, rule in enumerate(world.rules):
            if _rule_applies(world, st, idx, rule):
                nxt = st.copy()
                _fire(world, nxt, idx, rule)
                gained_rules.add(idx)
                successors.append(nxt)
        for nxt in successors:
            k = nxt.key()
            if k not in seen:
                if len(seen) >= limit:
                    raise WorldError(f"world state space exceeds {limit} states")
                seen.add(k)
                todo.append(nxt)
    return (sum(world.rules[i].points for i in gained_rules)
            + sum(world.rooms[r].points for r in gained_rooms))


def normalize_command(command: str) -> str:
    return " ".join(command.lower().split())


class ScriptedEnv:
    """Deterministic engine for a :class:`ScriptedWorld`."""

    def __init__(self, world: ScriptedWorld | str | Path):
        if not isinstance(world, ScriptedWorld):
            world = load_world(world)
        self.world = world
        self.max_score = world.max_score
        self._names = {}
        for obj in world.objects.values():
            for nm in obj.names():
                self._names.setdefault(nm, []).append(obj.id)
        self._state = _initial_state(world)

    @property
    def room(self) -> str:
        return self._state.room

    @property
    def score(self) -> int:
        return self._state.score

    def reset(self) -> EnvObservation:
        self._state = _initial_state(self.world)
        return self._obs(self.look_text())

    def look_text(self) -> str:
        st = self._state
        room = self.world.rooms[st.room]
        visible = [o.description for o in self.world.objects.values()
                   if st.locations[o.id] == st.room and not o.scenery]
        text = room.description
        if visible:
            text += "\nYou can see " + _join(visible) + "."
        return text

    def _obs(self, text: str) -> EnvObservation:
        return EnvObservation(text, self._state.score, self._state.ended)

    def resolve(self, phrase: str) -> str | None:
        for obj_id in self._names.get(phrase, ()):
            if _accessible(self.world, self._state, obj_id):
                return obj_id
        return None

    def step(self, command: str) -> EnvObservation:
        st = self._state
        cmd = normalize_command(command)
        if st.ended:
            return self._obs("The game is over.")
        if cmd in LOOK_COMMANDS:
            return self._obs(self.look_text())
        words = cmd.split(" ")
        if len(words) == 1:
            room = self.world.rooms[st.room]
            if cmd in room.exits and _exit_open(self.world, st, st.room, cmd):
                _move(self.world, st, cmd)
                return self._obs(self.look_text())
            return self._obs(self.world.failure)
        verb, phrase = words[0], " ".join(words[1:])
        obj_id = self.resolve(phrase)
        if obj_id is not None:
            for idx, rule in enumerate(self.world.rules):
                if rule.verb == verb and rule.noun == obj_id and _rule_applies(self.world, st, idx, rule):
                    _fire(self.world, st, idx, rule)
                    return self._obs(rule.response)
        return self._obs(self.world.failure)


def _join(items: list[str]) -> str:
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " and " + items[-1]


# --- external interpreters -------------------------------------------------------

DEFAULT_SCORE_PATTERN = r"Score:\s*(-?\d+)"
DEFAULT_PROMPT = r">\s*$"


def parse_score(raw: str, previous: int = 0, pattern: str = DEFAULT_SCORE_PATTERN) -> int:
    """Score from the last match of ``pattern`` in ``raw``; ``previous`` if none."""
    matches = re.findall(pattern, raw)
    if not matches:
        return previous
    last = matches[-1]
    if isinstance(last, tuple):
        last = last[0]
    return int(last)


class ExternalEnv:
    """Drive an interpreter process: newline-terminated commands in, prompt-delimited text out.

    Reads give up after ``timeout`` seconds and return whatever text arrived.
    """

    def __init__(self, argv: list[str], *, prompt: str = DEFAULT_PROMPT,
                 score_pattern: str = DEFAULT_SCORE_PATTERN, timeout: float = 2.0,
                 max_score: int | None = None, cwd=None):
        self.argv = list(argv)
        self.prompt = re.compile(prompt)
        self.score_pattern = score_pattern
        self.timeout = timeout
        self.max_score = max_score
        self.cwd = cwd
        self._proc: subprocess.Popen | None = None
        self._queue: queue.Queue | None = None
        self._score = 0
        self._dead = False

    def _spawn(self) -> None:
        try:
            self._proc = subprocess.Popen(self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                          stderr=subprocess.STDOUT, cwd=self.cwd, bufsize=0)
        except OSError as exc:
            raise EnvSpawnError(f"cannot start {self.argv[0]!r}: {exc}") from exc
        self._queue = queue.Queue()
        threading.Thread(target=_pump, args=(self._proc.stdout, self._queue), daemon=True).start()
        self._dead = False

    def _read(self) -> tuple[str, bool]:
        """Collect output until the prompt shows up, the child exits, or time runs out."""
        buf = ""
        deadline = time.monotonic() + self.timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return buf, False
            try:
                chunk = self._queue.get(timeout=remaining)
            except queue.Empty:
                return buf, False
            if chunk is None:
                return buf, True
            buf += chunk.decode("utf-8", errors="replace")
            m = self.prompt.search(buf)
            if m:
                return buf[:m.start()], False

    def reset(self) -> EnvObservation:
        self.close()
        self._spawn()
        text, died = self._read()
        if died:
            self.close()
            raise EnvSpawnError(f"{self.argv[0]!r} exited during startup; output:\n{text}")
        self._score = parse_score(text, 0, self.score_pattern)
        return EnvObservation(text, self._score)

    def step(self, command: str) -> EnvObservation:
        if self._proc is None or self._dead:
            return EnvObservation("", self._score, terminal=True, error=True)
        try:
            self._proc.stdin.write((command + "\n").encode("utf-8"))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._dead = True
            return EnvObservation("", self._score, terminal=True, error=True)
        text, died = self._read()
        self._score = parse_score(text, self._score, self.score_pattern)
        if died:
            self._dead = True
            return EnvObservation(text, self._score, terminal=True, error=True)
        return EnvObservation(text, self._score)

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.kill()
                self._proc.wait(timeout=5)
            except OSError:
                pass
            for stream in (self._proc.stdin, self._proc.stdout):
                try:
                    stream.close()
                except OSError:
                    pass
            self._proc = None

    def __del__(self):
        self.close()


def _pump(stream, q: queue.Queue) -> None:
    while True:
        try:
            chunk = stream.read1(4096) if hasattr(stream, "read1") else stream.read(4096)
        except (OSError, ValueError):
            chunk = b""
        if not chunk:
            q.put(None)
            return
        q.put(chunk)
