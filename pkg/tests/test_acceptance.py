"""Acceptance criteria, one test each.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL/SKIP line per
criterion is printed in the terminal summary. Criterion 3 needs a real
skip-gram vector file: set ``AFFORDANCE_EMBEDDINGS`` (and optionally
``AFFORDANCE_EMBEDDINGS_FORMAT`` and ``AFFORDANCE_VERBS``).
"""

import os
import random
import re
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from affordance.action_space import (ESSENTIAL_VERBS, NAVIGATION_VERBS, ConceptNetClient,
                                     CooccurrenceTable, StrategyKind, VerbInventory,
                                     build_cooccurrence, conceptnet_capableof, verbs_for)
from affordance.affordance import (DEFAULT_PAIRS, affordant_verbs, build_affordance_model, make_axis,
                                   rank_manipulable)
from affordance.agent import QTable, hash_state, q_update
from affordance.cli import main
from affordance.embeddings import EmbeddingStore, Lexicon, load_embeddings, nearest, read_token_list
from affordance.harness import ExperimentConfig, run_experiment
from affordance.synthetic import DATA_DIR, bundled_lexicon, bundled_store

criterion = pytest.mark.criterion


# --- independent oracles -------------------------------------------------------------

def oracle_cos(u, v):
    return float(sum(a * b for a, b in zip(u, v)) /
                 (sum(a * a for a in u) ** 0.5 * sum(b * b for b in v) ** 0.5))


def oracle_rank(store, query, cands, n, exclude=()):
    rows = [(t, oracle_cos(query, store.vectors[store.index[t]])) for t in set(cands)
            if t not in exclude and t in store.index]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows[:n]


def oracle_fnv(data: bytes) -> int:
    h = 14695981039346656037
    for b in data:
        h = ((h ^ b) * 1099511628211) % (1 << 64)
    return h


def oracle_cooc(tokens, verbs, nouns, r):
    out = Counter()
    for i, a in enumerate(tokens):
        for j, b in enumerate(tokens):
            if i != j and abs(i - j) <= r and a in verbs and b in nouns:
                out[(a, b)] += 1
    return out


def same_ranking(got, ref):
    return [t for t, _ in got] == [t for t, _ in ref] and \
        all(abs(x - y) <= 1e-9 for (_, x), (_, y) in zip(got, ref))


# --- criteria ----------------------------------------------------------------------------

@criterion(1, "affordance queries, manipulability ranking and nearest match brute-force oracles")
def test_criterion_1_query_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    for trial in range(200):
        n_tok = int(rng.integers(6, 51))
        dim = int(rng.integers(1, 17))
        toks = [f"t{i}" for i in range(n_tok)]
        store = EmbeddingStore(toks, rng.standard_normal((n_tok, dim)))
        cands = [t for t in toks if rng.random() < 0.6] + ["ghost"]
        q = rng.standard_normal(dim)
        if not np.any(q):
            continue
        k = int(rng.integers(1, n_tok + 2))
        ex = {toks[0]}
        assert same_ranking(nearest(store, q, cands, k, ex), oracle_rank(store, q, cands, k, ex))

        pairs = [(toks[i], toks[i + 1]) for i in range(0, min(6, n_tok - 1), 2)]
        model = build_affordance_model(store, pairs)
        a = [sum(store.vectors[store.index[v]][d] - store.vectors[store.index[nn]][d] for v, nn in pairs)
             / len(pairs) for d in range(dim)]
        noun = toks[int(rng.integers(n_tok))]
        query = [x + y for x, y in zip(store.vectors[store.index[noun]], a)]
        if any(query):
            assert same_ranking(affordant_verbs(model, noun, k, cands),
                                oracle_rank(store, query, cands, k, {noun}))

        pos, neg = toks[1], toks[2]
        if np.any(store.vectors[1] != store.vectors[2]):
            axis = make_axis(store, pos, neg)
            d = [x - y for x, y in zip(store.vectors[1], store.vectors[2])]
            norm = sum(x * x for x in d) ** 0.5
            score = {t: sum(x * y for x, y in zip(store.vectors[store.index[t]], d)) / norm for t in toks}
            nouns = [t for t in toks if rng.random() < 0.5] + ["ghost"]
            ref = sorted((t for t in nouns if t in score), key=lambda t: (score[t], t))
            kk = int(rng.integers(1, len(nouns) + 1))
            assert rank_manipulable(store, axis, nouns, kk) == ref[:kk]
    assert time.perf_counter() - t0 < 10


@criterion(2, "constructed analogy v = n + a ranks the paired verb first for every canonical noun")
def test_criterion_2_constructed_analogy():
    rng = np.random.default_rng(0)
    dim = 32
    a = rng.standard_normal(dim) * 2
    table = {}
    for verb, noun in DEFAULT_PAIRS:
        table[noun] = rng.standard_normal(dim)
    for verb, noun in DEFAULT_PAIRS:
        table[verb] = table[noun] + a
    for i in range(40):
        table[f"distractor{i}"] = rng.standard_normal(dim) + a
    store = EmbeddingStore.from_dict(table)
    model = build_affordance_model(store)
    verbs = [v for v, _ in DEFAULT_PAIRS] + [f"distractor{i}" for i in range(40)]
    for verb, noun in DEFAULT_PAIRS:
        top = affordant_verbs(model, noun, 1, verbs)
        assert top[0][0] == verb, (noun, top)
        assert abs(top[0][1] - 1.0) < 1e-9


@criterion(3, "real skip-gram vectors: sword and horse lists overlap the published examples")
def test_criterion_3_published_overlap():
    path = os.environ.get("AFFORDANCE_EMBEDDINGS")
    if not path:
        pytest.skip("set AFFORDANCE_EMBEDDINGS to a Wikipedia-trained skip-gram vector file")
    store = load_embeddings(path, os.environ.get("AFFORDANCE_EMBEDDINGS_FORMAT", "word2vec-text"))
    verbs_path = os.environ.get("AFFORDANCE_VERBS")
    verbs = read_token_list(verbs_path) if verbs_path else list(bundled_lexicon().verbs)
    model = build_affordance_model(store)
    sword = {"vanquish", "duel", "unsheathe", "wield", "summon", "behead", "battle", "impale",
             "overpower", "cloak"}
    horse = {"gallop", "ride", "race", "outrun"}
    top_sword = {v for v, _ in affordant_verbs(model, "sword", 20, verbs)}
    top_horse = {v for v, _ in affordant_verbs(model, "horse", 20, verbs)}
    print("sword:", sorted(top_sword & sword), "horse:", sorted(top_horse & horse))
    assert len(top_sword & sword) >= 2
    assert len(top_horse & horse) >= 2


@criterion(4, "Q-values never decrease under 1e5 random update sequences; hand-computed cases")
def test_criterion_4_q_update():
    t0 = time.perf_counter()
    q = QTable(0.9)
    assert q_update(q, 1, "a", 0, 2) == 0
    q.set(10, "x", 10.0)
    assert q_update(q, 3, "take key", 5, 10) == 14.0
    q.set(4, "a", 10.0)
    assert q_update(q, 4, "a", 0, 99) == 10.0
    q2 = QTable(0.5)
    q2.set(7, "n", 4.0)
    assert q_update(q2, 6, "a", -1, 7) == 1.0
    assert q_update(q2, 6, "a", -3, 7) == 1.0

    rng = random.Random(7)
    negative = 0
    for _ in range(100_000):
        table = QTable(rng.random())
        for _ in range(rng.randint(1, 4)):
            s, a, s2 = rng.randrange(3), rng.choice("ab"), rng.randrange(3)
            r = rng.uniform(-10, 10)
            before = table.get(s, a)
            if r + table.gamma * table.max_value(s2) - before < 0:
                negative += 1
            assert q_update(table, s, a, r, s2) >= before
    assert negative > 10_000
    assert time.perf_counter() - t0 < 5


@criterion(5, "state hash ignores digits and matches an FNV-1a 64 reference")
def test_criterion_5_state_hash():
    t0 = time.perf_counter()
    rng = random.Random(5)
    alphabet = "abcdefghij klmnop QRST.,:\n\t0123456789"
    for _ in range(10_000):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 40)))
        swapped = re.sub(r"\d", lambda m: str(rng.randrange(10)), text)
        h = hash_state(text)
        assert h == hash_state(swapped)
        assert h == oracle_fnv(" ".join(re.sub(r"\d", "", text).split()).encode())
    assert time.perf_counter() - t0 < 2


@criterion(6, "affordance pruning learns faster than baseline on the bundled worlds")
def test_criterion_6_direction_of_effect(tmp_path):
    t0 = time.perf_counter()
    faster, peak_ok = 0, 0
    lines = []
    for world in ("cottage", "library", "vault"):
        cfg = ExperimentConfig(world=world, strategies=["baseline", "affordance"], epochs=100, steps=200,
                               runs=10, seed=0, jobs=os.cpu_count() or 1, out=str(tmp_path / world))
        rec = run_experiment(cfg)
        assert not rec.failures
        mb, ma = rec.median_first_reward("baseline"), rec.median_first_reward("affordance")
        pb, pa = rec.mean_peak("baseline"), rec.mean_peak("affordance")
        faster += ma < mb
        peak_ok += pa >= pb
        lines.append(f"{world}: first reward {ma:g} vs {mb:g}, peak {pa:.3f} vs {pb:.3f}")
    print("\n".join(lines))
    assert faster >= 2, lines
    assert peak_ok == 3, lines
    assert time.perf_counter() - t0 < 600


@criterion(7, "co-occurrence counts equal an all-pairs counter for radius 1, 3 and 9")
def test_criterion_7_cooccurrence(tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    vocab = [f"w{i}" for i in range(30)]
    verbs, nouns = vocab[:12], vocab[8:22]
    lex = Lexicon(verbs=tuple(verbs), nouns=tuple(nouns))
    for radius in (1, 3, 9):
        for trial in range(20):
            words = list(rng.choice(vocab, size=200))
            # plant a pair exactly at the radius boundary and one just beyond it
            words[10], words[10 + radius] = verbs[0], nouns[-1]
            words[100], words[101 + radius] = verbs[1], nouns[-2]
            p = tmp_path / f"r{radius}_{trial}.txt"
            p.write_text(" ".join(words) + "\n")
            table = build_cooccurrence(p, lex, radius=radius)
            assert table.counts == oracle_cooc(words, set(verbs), set(nouns), radius)
    assert time.perf_counter() - t0 < 5


@criterion(8, "every strategy keeps navigation and essential verbs; affordance <= 47, freeform <= 32")
def test_criterion_8_strategy_contracts():
    store, lexicon = bundled_store(), bundled_lexicon()
    inv = VerbInventory.from_lexicon(lexicon)
    model = build_affordance_model(store)
    cooc = CooccurrenceTable(Counter({(v, n): 4 for v in inv.manipulation[:50]
                                      for n in ("sword", "lamp", "door")}))
    client = ConceptNetClient(DATA_DIR / "conceptnet", offline=True)
    base = set(NAVIGATION_VERBS) | set(ESSENTIAL_VERBS)
    nouns = list(lexicon.top_nouns(60)) + ["sword", "lamp", "old lamp", "door", "qqqq", None]
    for strat in StrategyKind:
        for noun in nouns:
            for epoch in (0, 1):
                kw = dict(vocabulary=lexicon.verbs, cooccurrence=cooc, conceptnet=client)
                out = verbs_for(strat, noun, inv, model, epoch, 3, **kw)
                assert base <= set(out)
                assert out == verbs_for(strat, noun, inv, model, epoch, 3, **kw)
                if strat is StrategyKind.AFFORDANCE:
                    assert len(out) <= 47
                if strat is StrategyKind.FREEFORM:
                    assert len(out) <= 32


def tree(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@criterion(9, "two compare runs with the same config produce byte-identical CSV trees")
def test_criterion_9_replay_determinism(tmp_path, capsys):
    args = ["compare", "--world", "vault", "--strategy", "baseline,affordance,random,freeform",
            "--epochs", "8", "--steps", "80", "--runs", "3", "--seed", "11"]
    assert main(args + ["--out", str(tmp_path / "one")]) == 0
    assert main(args + ["--out", str(tmp_path / "two"), "--jobs", "2"]) == 0
    one, two = tree(tmp_path / "one"), tree(tmp_path / "two")
    assert len(one) == 4 * 3 + 3
    assert one == two


@criterion(10, "ConceptNet CapableOf extraction for sword from the offline fixture; cache hits are free")
def test_criterion_10_conceptnet_offline():
    def no_network(url):
        raise AssertionError(f"unexpected network access: {url}")

    expected = {"kill", "harm", "parry", "fence", "strike", "thrust", "slash", "injure", "look", "cut"}
    offline = ConceptNetClient(DATA_DIR / "conceptnet", offline=True)
    assert conceptnet_capableof("sword", offline) == expected
    online = ConceptNetClient(DATA_DIR / "conceptnet", fetch=no_network)
    assert conceptnet_capableof("sword", online) == expected
    assert online.network_calls == 0 and offline.network_calls == 0


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
