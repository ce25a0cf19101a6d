"""Affordance queries over a word-vector store.

An affordance direction is the mean of ``verb - noun`` over a handful of
exemplar pairs. Adding it to a noun vector lands near the verbs one would
naturally apply to that noun. A second query projects nouns onto a
difference axis such as ``forest - tree``; nouns that score low sit near the
small, graspable end.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingStore, TokenNotFound, nearest, normalize_token

logger = logging.getLogger(__name__)

DEFAULT_PAIRS: tuple[tuple[str, str], ...] = (
    ("sing", "song"),
    ("drink", "water"),
    ("read", "book"),
    ("eat", "food"),
    ("wear", "coat"),
    ("drive", "car"),
    ("ride", "horse"),
    ("give", "gift"),
    ("attack", "enemy"),
    ("say", "word"),
    ("open", "door"),
    ("climb", "tree"),
    ("heal", "wound"),
    ("cure", "disease"),
    ("paint", "picture"),
)

# (less manipulable, more manipulable)
DEFAULT_AXIS: tuple[str, str] = ("forest", "tree")


class MissingTokens(KeyError):
    def __init__(self, tokens: Sequence[str]):
        self.tokens = list(tokens)
        super().__init__(self.tokens)

    def __str__(self) -> str:
        return "tokens not in store: " + ", ".join(self.tokens)


@dataclass(frozen=True)
class CanonicalPairSet:
    pairs: tuple[tuple[str, str], ...] = DEFAULT_PAIRS

    def __post_init__(self):
        pairs = tuple((normalize_token(v), normalize_token(n)) for v, n in self.pairs)
        if not pairs:
            raise ValueError("a canonical pair set needs at least one pair")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def subset(self, indices: Iterable[int]) -> "CanonicalPairSet":
        return CanonicalPairSet(tuple(self.pairs[i] for i in indices))

    @classmethod
    def from_file(cls, path) -> "CanonicalPairSet":
        """Read ``verb noun`` lines (``#`` comments allowed)."""
        pairs = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'verb noun'")
            pairs.append((parts[0], parts[1]))
        return cls(tuple(pairs))


@dataclass(frozen=True)
class AffordanceModel:
    store: EmbeddingStore
    pairs: CanonicalPairSet
    vector: np.ndarray

    def affordant_verbs(self, noun: str, n: int = 30, verb_candidates=None) -> list[tuple[str, float]]:
        return affordant_verbs(self, noun, n, verb_candidates)


def build_affordance_model(store: EmbeddingStore,
                           pairs: CanonicalPairSet | Sequence[tuple[str, str]] = CanonicalPairSet()
                           ) -> AffordanceModel:
    if not isinstance(pairs, CanonicalPairSet):
        pairs = CanonicalPairSet(tuple(pairs))
    missing = [t for pair in pairs for t in pair if t not in store]
    if missing:
        raise MissingTokens(sorted(set(missing)))
    diffs = np.array([store.lookup(v) - store.lookup(n) for v, n in pairs])
    vector = diffs.mean(axis=0)
    vector.setflags(write=False)
    return AffordanceModel(store, pairs, vector)


def affordant_verbs(model: AffordanceModel, noun: str, n: int = 30,
                    verb_candidates: Iterable[str] | None = None) -> list[tuple[str, float]]:
    """The ``n`` candidate verbs closest (cosine) to ``noun + affordance``.

    The noun itself never appears in the result.
    """
    query = model.store.lookup(noun) + model.vector
    if verb_candidates is not None:
        verb_candidates = list(verb_candidates)
        if not verb_candidates:
            return []
    return nearest(model.store, query, verb_candidates, n, exclude={noun})


@dataclass(frozen=True)
class ProjectionAxis:
    positive: str
    negative: str
    vector: np.ndarray

    @property
    def unit(self) -> np.ndarray:
        return self.vector / np.linalg.norm(self.vector)


def make_axis(store: EmbeddingStore, positive: str, negative: str) -> ProjectionAxis:
    missing = [t for t in (positive, negative) if t not in store]
    if missing:
        raise MissingTokens(missing)
    vec = store.lookup(positive) - store.lookup(negative)
    if not np.any(vec):
        raise ValueError(f"axis {positive}-{negative} is a zero vector")
    return ProjectionAxis(normalize_token(positive), normalize_token(negative), vec)


def read_axes(path) -> list[tuple[str, str]]:
    """Read ``positive negative`` lines from an axis config file."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            pos, neg = line.split()
            out.append((pos, neg))
    return out


def manipulability_score(store: EmbeddingStore, axis: ProjectionAxis, noun: str) -> float:
    """Projection of the raw noun vector on the unit axis (lower = more graspable)."""
    return float(np.dot(store.lookup(noun), axis.unit))


def _head(phrase: str) -> str:
    return phrase.split()[-1] if phrase.split() else phrase


def rank_manipulable(store: EmbeddingStore, axis: ProjectionAxis, nouns: Iterable[str],
                     k: int | None = None) -> list[str]:
    """Order ``nouns`` from most to least manipulable, keeping at most ``k``.

    Multi-word phrases (``"red pill"``) are scored by their last word.
    Nouns absent from the store are dropped.
    """
    scored = []
    for noun in dict.fromkeys(nouns):
        try:
            scored.append((manipulability_score(store, axis, _head(noun)), noun))
        except TokenNotFound:
            continue
    scored.sort()
    ranked = [noun for _, noun in scored]
    return ranked if k is None else ranked[:k]


def project_2d(store: EmbeddingStore, axis_x: ProjectionAxis, axis_y: ProjectionAxis,
               words: Iterable[str]) -> list[tuple[str, float, float]]:
    ux, uy = axis_x.unit, axis_y.unit
    rows, skipped = [], 0
    for w in words:
        if w not in store:
            skipped += 1
            continue
        vec = store.lookup(w)
        rows.append((normalize_token(w), float(vec @ ux), float(vec @ uy)))
    if skipped:
        logger.warning("project_2d: %d words not in store", skipped)
    return rows


def write_projection_csv(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["token", "x", "y"])
    for tok, x, y in rows:
        writer.writerow([tok, f"{x:.6f}", f"{y:.6f}"])
