"""Word vector storage, lexicon lists and exhaustive similarity search.

Vectors are read from the plain-text word2vec or GloVe formats. Tokens are
lowercased on load and on lookup, the first occurrence of a duplicated token
wins, and zero vectors are rejected since they cannot be normalized.
"""

from __future__ import annotations

import gzip
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FORMATS = ("word2vec-text", "glove-text")


class EmbeddingParseError(ValueError):
    """Raised when an embedding or lexicon file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TokenNotFound(KeyError):
    """Raised when a token is absent from an :class:`EmbeddingStore`."""

    def __init__(self, token: str):
        self.token = token
        super().__init__(token)

    def __str__(self) -> str:
        return f"token not in store: {self.token!r}"


class ZeroVectorError(ValueError):
    """Raised when a similarity is requested against a zero vector."""


def normalize_token(token: str) -> str:
    return token.strip().lower()


class EmbeddingStore:
    """Immutable token -> vector map with a parallel unit-normalized matrix.

    Rows of :attr:`vectors` follow :attr:`tokens`; :attr:`unit` holds the
    same rows scaled to unit length.
    """

    def __init__(self, tokens: Sequence[str], vectors, duplicates: int = 0):
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(tokens):
            raise ValueError("vectors must be a (len(tokens), dimension) array")
        if vectors.shape[0] == 0:
            raise ValueError("an embedding store needs at least one token")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("non-finite vector component")
        norms = np.linalg.norm(vectors, axis=1)
        zero = np.flatnonzero(norms == 0)
        if len(zero):
            raise ZeroVectorError(f"zero-norm vector for token {tokens[zero[0]]!r}")

        self.tokens: tuple[str, ...] = tuple(tokens)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate tokens")
        self.vectors = vectors
        self.unit = vectors / norms[:, None]
        self.vectors.setflags(write=False)
        self.unit.setflags(write=False)
        self.duplicates = duplicates

    @classmethod
    def from_dict(cls, table: dict) -> "EmbeddingStore":
        tokens, rows = [], []
        seen = set()
        for tok, vec in table.items():
            tok = normalize_token(tok)
            if tok in seen:
                continue
            seen.add(tok)
            tokens.append(tok)
            rows.append(vec)
        return cls(tokens, rows)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token) -> bool:
        return normalize_token(token) in self.index

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, token: str) -> np.ndarray:
        return self.lookup(token)

    def lookup(self, token: str) -> np.ndarray:
        try:
            return self.vectors[self.index[normalize_token(token)]]
        except KeyError:
            raise TokenNotFound(token) from None

    def unit_vector(self, token: str) -> np.ndarray:
        try:
            return self.unit[self.index[normalize_token(token)]]
        except KeyError:
            raise TokenNotFound(token) from None

    def scaled(self, factor: float) -> "EmbeddingStore":
        """Copy of the store with every vector multiplied by ``factor``."""
        return EmbeddingStore(self.tokens, self.vectors * factor)

    def nearest(self, query, candidates: Iterable[str] | None = None, n: int = 10,
                exclude: Iterable[str] = ()) -> list[tuple[str, float]]:
        return nearest(self, query, candidates, n, exclude)

    def save(self, path, fmt: str = "word2vec-text", precision: int = 6) -> None:
        """Write the raw vectors in a text format readable by :func:`load_embeddings`."""
        with open(path, "w", encoding="utf-8") as fh:
            if fmt == "word2vec-text":
                fh.write(f"{len(self)} {self.dimension}\n")
            elif fmt != "glove-text":
                raise ValueError(f"unknown format {fmt!r}")
            for tok, vec in zip(self.tokens, self.vectors):
                if precision is None:
                    comps = " ".join(repr(float(x)) for x in vec)
                else:
                    comps = " ".join(f"{x:.{precision}f}" for x in vec)
                fh.write(f"{tok} {comps}\n")


def load_embeddings(path, fmt: str = "word2vec-text") -> EmbeddingStore:
    """Parse a text embedding file.

    ``word2vec-text`` files start with a ``"<count> <dimension>"`` header;
    ``glove-text`` files have none and take their dimension from the first
    data line. Blank lines are ignored; ``.gz`` files are decompressed on the fly.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown embedding format {fmt!r}, expected one of {FORMATS}")
    tokens: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    duplicates = 0
    dim = None

    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        lines = enumerate(fh, start=1)
        if fmt == "word2vec-text":
            header = None
            for lineno, line in lines:
                if line.strip():
                    header = (lineno, line)
                    break
            if header is None:
                raise EmbeddingParseError(f"empty embedding file {path}")
            lineno, line = header
            parts = line.split()
            try:
                _count, dim = int(parts[0]), int(parts[1])
            except (ValueError, IndexError):
                raise EmbeddingParseError("expected '<count> <dimension>' header", lineno) from None
            if len(parts) != 2 or dim < 1:
                raise EmbeddingParseError("expected '<count> <dimension>' header", lineno)

        for lineno, line in lines:
            parts = line.split()
            if not parts:
                continue
            if dim is None:
                dim = len(parts) - 1
                if dim < 1:
                    raise EmbeddingParseError("data line has no vector components", lineno)
            if len(parts) - 1 != dim:
                raise EmbeddingParseError(
                    f"expected {dim} components, found {len(parts) - 1}", lineno)
            try:
                vec = [float(x) for x in parts[1:]]
            except ValueError as exc:
                raise EmbeddingParseError(str(exc), lineno) from None
            if not all(math.isfinite(x) for x in vec):
                raise EmbeddingParseError("non-finite vector component", lineno)
            if not any(vec):
                raise EmbeddingParseError(f"zero-norm vector for {parts[0]!r}", lineno)
            tok = normalize_token(parts[0])
            if tok in seen:
                duplicates += 1
                continue
            seen.add(tok)
            tokens.append(tok)
            rows.append(vec)

    if not tokens:
        raise EmbeddingParseError(f"no vectors in {path}")
    if duplicates:
        logger.warning("%s: %d duplicate tokens ignored (first occurrence kept)", path, duplicates)
    return EmbeddingStore(tokens, rows, duplicates=duplicates)


def lookup(store: EmbeddingStore, token: str) -> np.ndarray:
    return store.lookup(token)


def cosine(u, v) -> float:
    """Cosine similarity of two equal-length nonzero vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVectorError("cosine undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def nearest(store: EmbeddingStore, query, candidates: Iterable[str] | None = None,
            n: int = 10, exclude: Iterable[str] = ()) -> list[tuple[str, float]]:
    """Rank ``candidates`` by cosine similarity to ``query``.

    Every candidate is scored (no approximate index). Candidates missing
    from the store are skipped and counted in a log message. Ties are broken
    by token order so results are reproducible. ``candidates=None`` means
    the whole store.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    query = np.asarray(query, dtype=np.float64)
    qn = np.linalg.norm(query)
    if qn == 0:
        raise ZeroVectorError("nearest() query is a zero vector")
    excluded = {normalize_token(t) for t in exclude}

    if candidates is None:
        rows = [i for i, t in enumerate(store.tokens) if t not in excluded]
    else:
        rows, skipped = [], 0
        for tok in {normalize_token(t) for t in candidates}:
            if tok in excluded:
                continue
            i = store.index.get(tok)
            if i is None:
                skipped += 1
            else:
                rows.append(i)
        if skipped:
            logger.debug("nearest(): %d candidates not in store", skipped)
    if not rows:
        return []

    rows = np.asarray(rows)
    sims = np.clip(store.unit[rows] @ (query / qn), -1.0, 1.0)
    toks = [store.tokens[i] for i in rows]
    order = sorted(range(len(rows)), key=lambda k: (-sims[k], toks[k]))[:n]
    return [(toks[k], float(sims[k])) for k in order]


@dataclass(frozen=True)
class Lexicon:
    """Frequency-ordered verb and noun lists plus an adjective set."""

    verbs: tuple[str, ...] = ()
    nouns: tuple[str, ...] = ()
    adjectives: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "verbs", _dedupe(self.verbs))
        object.__setattr__(self, "nouns", _dedupe(self.nouns))
        object.__setattr__(self, "adjectives", frozenset(normalize_token(a) for a in self.adjectives))
        object.__setattr__(self, "_noun_set", frozenset(self.nouns))
        object.__setattr__(self, "_verb_set", frozenset(self.verbs))

    def top_verbs(self, k: int) -> tuple[str, ...]:
        return self.verbs[:max(k, 0)]

    def top_nouns(self, k: int) -> tuple[str, ...]:
        return self.nouns[:max(k, 0)]

    def is_noun(self, token: str) -> bool:
        return token in self._noun_set

    def is_verb(self, token: str) -> bool:
        return token in self._verb_set

    def is_adjective(self, token: str) -> bool:
        return token in self.adjectives

    @classmethod
    def from_files(cls, verbs=None, nouns=None, adjectives=None) -> "Lexicon":
        return cls(
            verbs=tuple(read_token_list(verbs)) if verbs else (),
            nouns=tuple(read_token_list(nouns)) if nouns else (),
            adjectives=frozenset(read_token_list(adjectives)) if adjectives else frozenset(),
        )


def _dedupe(tokens: Iterable[str]) -> tuple[str, ...]:
    out, seen = [], set()
    for t in tokens:
        t = normalize_token(t)
        if t and t not in seen:
            seen.add(t)
            out.append(t)
    return tuple(out)


def read_token_list(path) -> list[str]:
    """One token per line; blank lines and ``#`` comments are skipped."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(normalize_token(line))
    return out


def write_token_list(path, tokens: Iterable[str], comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for t in tokens:
            fh.write(f"{t}\n")
