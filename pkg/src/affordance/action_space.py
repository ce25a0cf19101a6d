"""Per-state verb lists under the different action-space reduction strategies.

Every strategy keeps the navigation and essential verbs and differs only in
which manipulation verbs it adds for the current noun:

========== ==============================================================
baseline   the whole manipulation list
affordance top affordant verbs for the noun that are also manipulation verbs
random     a fixed-size random draw from the manipulation list, per epoch
cooccur.   manipulation verbs seen near the noun more than a threshold
conceptnet manipulation verbs listed by ConceptNet's CapableOf relation
freeform   top affordant verbs drawn from the whole verb lexicon
========== ==============================================================
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import os
import re
import threading
import urllib.error
import urllib.parse
import urllib.request
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .affordance import AffordanceModel, affordant_verbs
from .embeddings import Lexicon, normalize_token

logger = logging.getLogger(__name__)

NAVIGATION_VERBS = ("north", "south", "east", "west", "northeast", "southeast",
                    "southwest", "northwest", "up", "down", "enter")
ESSENTIAL_VERBS = ("get", "drop", "push", "pull", "open", "close")

CONCEPTNET_CACHE_ENV = "AFFORDANCE_CONCEPTNET_CACHE"


class StrategyKind(str, enum.Enum):
    BASELINE = "baseline"
    AFFORDANCE = "affordance"
    RANDOM = "random"
    COOCCURRENCE = "cooccurrence"
    CONCEPTNET = "conceptnet"
    FREEFORM = "freeform"

    @property
    def prunes_nouns(self) -> bool:
        return self in (StrategyKind.AFFORDANCE, StrategyKind.FREEFORM)

    @property
    def needs_model(self) -> bool:
        return self in (StrategyKind.AFFORDANCE, StrategyKind.FREEFORM)


@dataclass(frozen=True)
class StrategyParams:
    verb_budget: int = 30
    noun_budget: int = 15
    cooc_threshold: int = 3
    freeform_top: int = 15

    def __post_init__(self):
        for name in ("verb_budget", "noun_budget", "freeform_top"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.cooc_threshold < 0:
            raise ValueError("cooc_threshold must be non-negative")


@dataclass(frozen=True)
class VerbInventory:
    navigation: tuple[str, ...] = NAVIGATION_VERBS
    essential: tuple[str, ...] = ESSENTIAL_VERBS
    manipulation: tuple[str, ...] = ()

    @classmethod
    def from_lexicon(cls, lexicon: Lexicon, k: int = 1000, **kw) -> "VerbInventory":
        return cls(manipulation=lexicon.top_verbs(k), **kw)

    @property
    def always(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.navigation + self.essential))


def _union(*groups: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(v for g in groups for v in g))


def head_noun(phrase: str) -> str:
    parts = phrase.split()
    return parts[-1] if parts else phrase


def random_draw(manipulation: tuple[str, ...], k: int, seed: int, epoch: int) -> tuple[str, ...]:
    """The per-epoch random verb subset; a pure function of (seed, epoch)."""
    rng = np.random.default_rng([seed, epoch])
    k = min(k, len(manipulation))
    idx = rng.choice(len(manipulation), size=k, replace=False)
    return tuple(manipulation[i] for i in sorted(idx))


def verbs_for(strategy: StrategyKind | str, noun: str | None, inventory: VerbInventory,
              model: AffordanceModel | None = None, epoch: int = 0, seed: int = 0, *,
              params: StrategyParams = StrategyParams(), vocabulary: Iterable[str] | None = None,
              cooccurrence: "CooccurrenceTable | None" = None,
              conceptnet: "ConceptNetClient | None" = None) -> tuple[str, ...]:
    """Ordered, duplicate-free verb list for one state.

    ``vocabulary`` is the full verb lexicon used by the affordance query
    (defaults to the manipulation list). The result always starts with the
    navigation and essential verbs.
    """
    strategy = StrategyKind(strategy)
    base = inventory.always
    manip = inventory.manipulation

    if strategy is StrategyKind.BASELINE:
        return _union(base, manip)
    if strategy is StrategyKind.RANDOM:
        return _union(base, random_draw(manip, params.verb_budget, seed, epoch))
    if not noun:
        return base
    head = normalize_token(head_noun(noun))

    if strategy in (StrategyKind.AFFORDANCE, StrategyKind.FREEFORM):
        if model is None:
            raise ValueError(f"{strategy.value} strategy needs an affordance model")
        if head not in model.store:
            logger.info("noun %r not in embedding store; using navigation/essential verbs", head)
            return base
        vocab = list(vocabulary) if vocabulary is not None else list(manip)
        if strategy is StrategyKind.AFFORDANCE:
            ranked = affordant_verbs(model, head, params.verb_budget, vocab)
            allowed = set(manip)
            return _union(base, (v for v, _ in ranked if v in allowed))
        ranked = affordant_verbs(model, head, params.freeform_top, vocab)
        return _union(base, (v for v, _ in ranked))

    if strategy is StrategyKind.COOCCURRENCE:
        if cooccurrence is None:
            raise ValueError("cooccurrence strategy needs a co-occurrence table")
        return _union(base, (v for v in manip if cooccurrence.get(v, head) > params.cooc_threshold))

    if strategy is StrategyKind.CONCEPTNET:
        if conceptnet is None:
            raise ValueError("conceptnet strategy needs a ConceptNet client")
        try:
            capable = conceptnet.capable_of(head)
        except ConceptNetCacheMiss as exc:
            logger.info("%s; using navigation/essential verbs", exc)
            capable = frozenset()
        return _union(base, (v for v in manip if v in capable))

    raise ValueError(f"unhandled strategy {strategy}")


class ActionSpace:
    """Binds a strategy to its resources and memoizes per-noun verb lists."""

    def __init__(self, strategy, inventory: VerbInventory, model=None, *, seed: int = 0,
                 params: StrategyParams = StrategyParams(), vocabulary=None,
                 cooccurrence=None, conceptnet=None):
        self.strategy = StrategyKind(strategy)
        self.inventory = inventory
        self.model = model
        self.seed = seed
        self.params = params
        self.vocabulary = tuple(vocabulary) if vocabulary is not None else None
        self.cooccurrence = cooccurrence
        self.conceptnet = conceptnet
        self._cache: dict = {}

    def verbs(self, noun: str | None, epoch: int = 0) -> tuple[str, ...]:
        # random depends only on the epoch, the rest only on the noun
        key = epoch if self.strategy is StrategyKind.RANDOM else noun
        hit = self._cache.get(key)
        if hit is None:
            hit = verbs_for(self.strategy, noun, self.inventory, self.model, epoch, self.seed,
                            params=self.params, vocabulary=self.vocabulary,
                            cooccurrence=self.cooccurrence, conceptnet=self.conceptnet)
            self._cache[key] = hit
        return hit


# --- co-occurrence -------------------------------------------------------------

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass
class CooccurrenceTable:
    counts: Counter = field(default_factory=Counter)
    radius: int = 9
    corpus: str = ""

    def get(self, verb: str, noun: str) -> int:
        return self.counts.get((verb, noun), 0)

    def __len__(self) -> int:
        return len(self.counts)

    def merge(self, other: "CooccurrenceTable") -> "CooccurrenceTable":
        if other.radius != self.radius:
            raise ValueError("cannot merge tables built with different radii")
        return CooccurrenceTable(self.counts + other.counts, self.radius, self.corpus)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(f"#radius={self.radius}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["verb", "noun", "count"])
            for (v, n), c in sorted(self.counts.items()):
                writer.writerow([v, n, c])

    @classmethod
    def load(cls, path) -> "CooccurrenceTable":
        counts: Counter = Counter()
        radius = None
        with open(path, encoding="utf-8") as fh:
            first = fh.readline().strip()
            if not first.startswith("#radius="):
                raise ValueError(f"{path}: missing '#radius=' header line")
            radius = int(first.split("=", 1)[1])
            for row in csv.DictReader(fh):
                counts[(row["verb"], row["noun"])] = int(row["count"])
        return cls(counts, radius, str(path))


def count_cooccurrences(tokens: list[str], verbs, nouns, radius: int) -> Counter:
    """Count (verb, noun) position pairs at distance 1..radius in one document."""
    counts: Counter = Counter()
    n = len(tokens)
    for i, tok in enumerate(tokens):
        if tok not in verbs:
            continue
        for j in range(max(0, i - radius), min(n, i + radius + 1)):
            if j != i and tokens[j] in nouns:
                counts[(tok, tokens[j])] += 1
    return counts


def build_cooccurrence(corpus, lexicon: Lexicon, verb_k: int = 1000, noun_k: int = 30000,
                       radius: int = 9) -> CooccurrenceTable:
    """Scan a UTF-8 corpus where each line is one document.

    Windows never cross line boundaries.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    verbs = set(lexicon.top_verbs(verb_k))
    nouns = set(lexicon.top_nouns(noun_k))
    total: Counter = Counter()
    with open(corpus, encoding="utf-8") as fh:
        for line in fh:
            total.update(count_cooccurrences(tokenize(line), verbs, nouns, radius))
    return CooccurrenceTable(total, radius, str(corpus))


# --- ConceptNet ----------------------------------------------------------------

class ConceptNetError(RuntimeError):
    pass


class ConceptNetCacheMiss(ConceptNetError):
    """No cached response and the client is offline."""


class ConceptNetHTTPError(ConceptNetError):
    """The live endpoint could not be reached or returned an error."""


class ConceptNetParseError(ConceptNetError):
    pass


_ARTICLES = {"a", "an", "the", "to"}


def capable_of_verbs(payload: dict, noun: str | None = None) -> frozenset:
    """Extract verbs from a ConceptNet ``/query`` response.

    Only ``/r/CapableOf`` edges count. Multi-word end labels are reduced to
    their first word (``"look cool"`` -> ``look``).
    """
    try:
        edges = payload["edges"]
        verbs = set()
        for edge in edges:
            rel = edge["rel"]["@id"]
            if rel != "/r/CapableOf":
                continue
            if noun is not None and not _concept_matches(edge["start"]["@id"], noun):
                continue
            words = [w for w in edge["end"]["label"].lower().split() if w not in _ARTICLES]
            if words:
                verbs.add(words[0])
    except (KeyError, TypeError, AttributeError) as exc:
        raise ConceptNetParseError(f"malformed ConceptNet response: {exc!r}") from None
    return frozenset(verbs)


def _concept_matches(concept_id: str, noun: str) -> bool:
    parts = concept_id.split("/")
    return len(parts) > 3 and parts[3] == noun.replace(" ", "_")


class ConceptNetClient:
    """CapableOf lookups with a one-file-per-noun JSON cache.

    ``offline=True`` never touches the network; a missing cache file raises
    :class:`ConceptNetCacheMiss`. ``network_calls`` counts live requests.
    """

    def __init__(self, cache_dir=None, *, offline: bool = False,
                 base_url: str = "https://api.conceptnet.io", timeout: float = 10.0,
                 fetch: Callable[[str], bytes] | None = None):
        cache_dir = cache_dir or os.environ.get(CONCEPTNET_CACHE_ENV)
        if cache_dir is None:
            raise ValueError(f"no ConceptNet cache directory (pass one or set {CONCEPTNET_CACHE_ENV})")
        self.cache_dir = Path(cache_dir)
        self.offline = offline
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._fetch = fetch or self._http_get
        self._lock = threading.Lock()
        self.network_calls = 0

    def query_url(self, noun: str) -> str:
        start = urllib.parse.quote(f"/c/en/{noun.replace(' ', '_')}")
        return f"{self.base_url}/query?start={start}&rel=/r/CapableOf"

    def cache_path(self, noun: str) -> Path:
        return self.cache_dir / f"{noun.replace(' ', '_').replace('/', '_')}.json"

    def _http_get(self, url: str) -> bytes:
        with urllib.request.urlopen(url, timeout=self.timeout) as resp:
            return resp.read()

    def fetch_payload(self, noun: str) -> dict:
        noun = normalize_token(noun)
        path = self.cache_path(noun)
        if path.exists():
            raw = path.read_bytes()
        elif self.offline:
            raise ConceptNetCacheMiss(f"no cached ConceptNet response for {noun!r} in {self.cache_dir}")
        else:
            self.network_calls += 1
            try:
                raw = self._fetch(self.query_url(noun))
            except (urllib.error.URLError, OSError, TimeoutError) as exc:
                raise ConceptNetHTTPError(f"ConceptNet request for {noun!r} failed: {exc}") from exc
            self._write_cache(path, raw)
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConceptNetParseError(f"{path}: {exc}") from None

    def _write_cache(self, path: Path, raw: bytes) -> None:
        with self._lock:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(raw)
            os.replace(tmp, path)

    def capable_of(self, noun: str) -> frozenset:
        noun = normalize_token(noun)
        return capable_of_verbs(self.fetch_payload(noun), noun)


def conceptnet_capableof(noun: str, client: ConceptNetClient) -> frozenset:
    return client.capable_of(noun)
