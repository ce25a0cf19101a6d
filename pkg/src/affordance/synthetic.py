"""Synthetic word vectors and corpora with a known semantic layout.

Real skip-gram vectors trained on Wikipedia are large and cannot be bundled,
so the package ships a small stand-in generated from a hand-written
common-sense table (``data/toy_knowledge.txt``). The layout is built so the
vector algebra behaves the way it does on real embeddings:

* every verb carries a shared offset ``a``; a verb that applies to nouns
  ``S`` sits at ``mean(S) + a`` plus noise, so ``noun + a`` lands near it;
* nouns carry a size component along a hidden direction, small objects at
  one end and massive or abstract things at the other, which is what a
  ``forest - tree`` axis picks up;
* gendered words are offset along a third direction.

The same module also produces random stores for property tests and a toy
corpus for the co-occurrence counter.
"""

from __future__ import annotations

import gzip
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingStore, Lexicon, load_embeddings, read_token_list

logger = logging.getLogger(__name__)

DATA_DIR = Path(str(resources.files("affordance") / "data"))


@dataclass
class Knowledge:
    affords: dict = field(default_factory=dict)  # noun -> verbs
    small: list = field(default_factory=list)
    large: list = field(default_factory=list)
    generic: list = field(default_factory=list)
    masculine: list = field(default_factory=list)
    feminine: list = field(default_factory=list)

    def verb_objects(self) -> dict:
        out: dict[str, list[str]] = {}
        for noun, verbs in self.affords.items():
            for v in verbs:
                out.setdefault(v, []).append(noun)
        for v in self.generic:
            out.setdefault(v, []).extend(n for n in self.small if n not in out[v])
        return out

    def nouns(self) -> list[str]:
        seen = dict.fromkeys([*self.affords, *self.small, *self.large, *self.masculine, *self.feminine])
        return list(seen)


def read_knowledge(path=None) -> Knowledge:
    path = Path(path) if path else DATA_DIR / "toy_knowledge.txt"
    k = Knowledge()
    section = None
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            continue
        if section == "affords":
            noun, verbs = line.split(":", 1)
            k.affords.setdefault(noun.strip(), []).extend(verbs.split())
        elif section in ("small", "large", "generic", "masculine", "feminine"):
            getattr(k, section).extend(line.split())
        else:
            raise ValueError(f"{path}: line outside a known section: {raw!r}")
    return k


def bundled_lexicon() -> Lexicon:
    return Lexicon.from_files(DATA_DIR / "verbs.txt", DATA_DIR / "nouns.txt", DATA_DIR / "adjectives.txt")


def bundled_embeddings_path() -> Path:
    return DATA_DIR / "toy_vectors.txt.gz"


def bundled_store() -> EmbeddingStore:
    return load_embeddings(bundled_embeddings_path())


def _orthonormal(rng: np.random.Generator, dim: int, k: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((dim, k)))
    return q.T


def semantic_store(lexicon: Lexicon, knowledge: Knowledge | None = None, *, extra_nouns=(),
                   n_nouns: int = 1000, dim: int = 48, seed: int = 7, size_weight: float = 0.8,
                   gender_weight: float = 0.8, verb_noise: float = 0.25) -> EmbeddingStore:
    """Generate vectors for every lexicon verb plus the most frequent nouns.

    Tokens named in ``knowledge`` as nouns (or passed in ``extra_nouns``) are
    always nouns, even where the lexicon also lists them as verbs.
    """
    knowledge = knowledge or read_knowledge()
    rng = np.random.default_rng(seed)
    aff, size, gender = _orthonormal(rng, dim, 3)

    forced_nouns = dict.fromkeys([*knowledge.nouns(), *extra_nouns])
    nouns = list(dict.fromkeys([*forced_nouns, *lexicon.top_nouns(n_nouns)]))
    noun_set = set(nouns)
    verbs = [v for v in lexicon.verbs if v not in forced_nouns]
    for v in knowledge.verb_objects():
        if v not in verbs and v not in noun_set:
            verbs.append(v)
    # a token listed as both keeps its verb role unless knowledge says noun
    nouns = [n for n in nouns if n in forced_nouns or n not in set(verbs)]

    small, large = set(knowledge.small), set(knowledge.large)
    masc, fem = set(knowledge.masculine), set(knowledge.feminine)
    table = {}
    for n in nouns:
        if n in small:
            s = -1.0
        elif n in large:
            s = 1.0
        else:
            s = rng.uniform(-0.3, 1.0)
        vec = rng.standard_normal(dim) / np.sqrt(dim) + size_weight * s * size
        if n in masc:
            vec += gender_weight * gender
        elif n in fem:
            vec -= gender_weight * gender
        table[n] = vec

    objects = knowledge.verb_objects()
    for v in verbs:
        targets = [table[n] for n in objects.get(v, ()) if n in table]
        noise = rng.standard_normal(dim) / np.sqrt(dim)
        if targets:
            table[v] = np.mean(targets, axis=0) + aff + verb_noise * noise
        else:
            table[v] = aff + noise
    return EmbeddingStore(list(table), np.array(list(table.values())))


def random_store(n_tokens: int = 30, dim: int = 8, seed: int = 0, prefix: str = "w") -> EmbeddingStore:
    """Gaussian vectors for tokens ``w00, w01, ...``."""
    rng = np.random.default_rng(seed)
    width = len(str(n_tokens - 1))
    toks = [f"{prefix}{i:0{width}d}" for i in range(n_tokens)]
    return EmbeddingStore(toks, rng.standard_normal((n_tokens, dim)))


def toy_corpus(knowledge: Knowledge | None = None, lexicon: Lexicon | None = None, *,
               lines: int = 4000, seed: int = 3, filler: int = 300) -> list[str]:
    """Sentences in which afforded verb/noun pairs appear close together.

    Frequent verbs (``have``, ``make``, ``use`` ...) show up next to every
    kind of noun, so raw counts favour them, as in real text.
    """
    knowledge = knowledge or read_knowledge()
    lexicon = lexicon or bundled_lexicon()
    rng = np.random.default_rng(seed)
    pairs = [(v, n) for n, vs in knowledge.affords.items() for v in vs]
    pairs += [(v, n) for v in knowledge.generic for n in knowledge.small]
    common_verbs = ["have", "make", "use", "see", "get", "find", "move", "give"]
    nouns = knowledge.nouns()
    fill_words = list(lexicon.top_nouns(filler)) + list(lexicon.top_verbs(filler)) + \
        ["the", "a", "and", "of", "with", "to", "in", "it", "was", "they"]
    out = []
    for _ in range(lines):
        words = list(rng.choice(fill_words, size=rng.integers(6, 16)))
        if rng.random() < 0.6:
            v, n = pairs[rng.integers(len(pairs))]
        else:
            v, n = common_verbs[rng.integers(len(common_verbs))], nouns[rng.integers(len(nouns))]
        i = int(rng.integers(0, len(words)))
        words[i:i] = [v, "the", n]
        out.append(" ".join(words))
    return out


def write_toy_corpus(path, **kw) -> None:
    Path(path).write_text("\n".join(toy_corpus(**kw)) + "\n", encoding="utf-8")


def world_nouns(lexicon: Lexicon, world_paths) -> list[str]:
    """Lexicon nouns that occur in the text of the given world files."""
    from .action_space import tokenize
    import json

    out = {}
    for p in world_paths:
        data = json.loads(Path(p).read_text(encoding="utf-8"))
        texts = [r["description"] for r in data["rooms"]]
        texts += [o.get("description", "") + " " + o.get("name", o["id"]) for o in data.get("objects", [])]
        for t in texts:
            for tok in tokenize(t):
                if lexicon.is_noun(tok):
                    out.setdefault(tok)
    return list(out)


def build_bundled_vectors(out=None, **kw) -> EmbeddingStore:
    """Regenerate ``data/toy_vectors.txt.gz`` from the bundled lexicon, table and worlds."""
    from .text_env import BUNDLED_WORLDS, bundled_world_path

    lexicon = bundled_lexicon()
    extra = world_nouns(lexicon, [bundled_world_path(w) for w in BUNDLED_WORLDS])
    extra += ["pebble", "mountain", "forest", "tree", "building", "brick"]
    store = semantic_store(lexicon, extra_nouns=extra, **kw)
    out = Path(out) if out else bundled_embeddings_path()
    tmp = out.with_suffix(".tmp")
    store.save(tmp, precision=5)
    with open(tmp, "rb") as src, gzip.GzipFile(out, "wb", mtime=0) as dst:
        dst.write(src.read())
    tmp.unlink()
    return store


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    s = build_bundled_vectors()
    print(f"wrote {bundled_embeddings_path()} ({len(s)} tokens, dim {s.dimension})")
