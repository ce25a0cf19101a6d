import io

import numpy as np
import pytest

from affordance.affordance import (DEFAULT_PAIRS, CanonicalPairSet, MissingTokens, affordant_verbs,
                                   build_affordance_model, make_axis, manipulability_score,
                                   project_2d, rank_manipulable, read_axes, write_projection_csv)
from affordance.embeddings import EmbeddingStore, TokenNotFound
from affordance.synthetic import random_store


def pair_store(rng, dim=10):
    toks = sorted({t for p in DEFAULT_PAIRS for t in p} | {f"x{i}" for i in range(10)})
    return EmbeddingStore(toks, rng.standard_normal((len(toks), dim)))


def test_single_pair_difference():
    s = EmbeddingStore(["sing", "song"], [[1, 0], [0, 1]])
    m = build_affordance_model(s, [("sing", "song")])
    assert list(m.vector) == [1.0, -1.0]


def test_mean_of_two_differences():
    s = EmbeddingStore(["v1", "n1", "v2", "n2"], [[3, 1], [1, 1], [1, 4], [1, 2]])
    m = build_affordance_model(s, [("v1", "n1"), ("v2", "n2")])
    assert np.allclose(m.vector, [1, 1])


def test_default_pairs_match_resummation():
    rng = np.random.default_rng(1)
    s = pair_store(rng)
    m = build_affordance_model(s)
    total = [0.0] * s.dimension
    for v, n in DEFAULT_PAIRS:
        for i in range(s.dimension):
            total[i] += s.lookup(v)[i] - s.lookup(n)[i]
    ref = [t / len(DEFAULT_PAIRS) for t in total]
    assert np.max(np.abs(m.vector - ref)) < 1e-9
    assert len(m.pairs) == 15


def test_permutation_invariance():
    rng = np.random.default_rng(2)
    s = pair_store(rng)
    a = build_affordance_model(s).vector
    perm = rng.permutation(len(DEFAULT_PAIRS))
    b = build_affordance_model(s, CanonicalPairSet().subset(perm)).vector
    assert np.max(np.abs(a - b)) < 1e-9


def test_missing_pair_tokens_listed():
    s = EmbeddingStore(["sing"], [[1, 0]])
    with pytest.raises(MissingTokens) as exc:
        build_affordance_model(s, [("sing", "song"), ("eat", "food")])
    assert exc.value.tokens == ["eat", "food", "song"]


def test_pair_file(tmp_path):
    p = tmp_path / "pairs.txt"
    p.write_text("# exemplars\nsing song\nEat food\n")
    assert CanonicalPairSet.from_file(p).pairs == (("sing", "song"), ("eat", "food"))
    p.write_text("sing\n")
    with pytest.raises(ValueError):
        CanonicalPairSet.from_file(p)
    with pytest.raises(ValueError):
        CanonicalPairSet(())


def test_exact_analogy_drink_water():
    # drink = water + a exactly, fly is elsewhere
    s = EmbeddingStore(["sing", "song", "water", "drink", "fly"],
                       [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, -1, 1], [-1, 0, 0.2]])
    m = build_affordance_model(s, [("sing", "song")])
    res = affordant_verbs(m, "water", 1, {"drink", "fly"})
    assert [v for v, _ in res] == ["drink"]
    assert res[0][1] == pytest.approx(1.0)


def test_affordant_verbs_errors():
    s = EmbeddingStore(["sing", "song"], [[1, 0], [0, 1]])
    m = build_affordance_model(s, [("sing", "song")])
    with pytest.raises(TokenNotFound):
        affordant_verbs(m, "horse", 3)
    assert affordant_verbs(m, "song", 3, []) == []


def oracle_affordant(store, pairs, noun, n, cands):
    a = np.zeros(store.dimension)
    for v, nn in pairs:
        a += store.vectors[store.index[v]] - store.vectors[store.index[nn]]
    a /= len(pairs)
    q = store.vectors[store.index[noun]] + a
    rows = []
    for c in sorted(set(cands)):
        if c == noun:
            continue
        x = store.vectors[store.index[c]]
        rows.append((c, float(np.dot(q, x) / np.sqrt(np.dot(q, q) * np.dot(x, x)))))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows[:n]


def test_affordant_verbs_matches_oracle_and_properties():
    rng = np.random.default_rng(9)
    for trial in range(25):
        s = random_store(int(rng.integers(12, 51)), int(rng.integers(2, 17)), seed=trial)
        toks = list(s.tokens)
        pairs = [(toks[i], toks[i + 1]) for i in range(0, 6, 2)]
        m = build_affordance_model(s, pairs)
        cands = rng.choice(toks, size=len(toks) // 2, replace=False).tolist()
        noun = cands[0]
        got = affordant_verbs(m, noun, 7, cands)
        ref = oracle_affordant(s, pairs, noun, 7, cands)
        assert [v for v, _ in got] == [v for v, _ in ref]
        assert np.allclose([x for _, x in got], [x for _, x in ref], atol=1e-9)
        assert set(v for v, _ in got) <= set(cands)
        assert noun not in {v for v, _ in got}
        scaled = build_affordance_model(s.scaled(3.7), pairs)
        assert [v for v, _ in affordant_verbs(scaled, noun, 7, cands)] == [v for v, _ in got]


def test_manipulability_endpoints_and_oracle():
    rng = np.random.default_rng(12)
    s = random_store(30, 8, seed=4)
    ax = make_axis(s, "w00", "w01")
    assert manipulability_score(s, ax, "w00") > manipulability_score(s, ax, "w01")
    d = s.lookup("w00") - s.lookup("w01")
    for t in s.tokens:
        v = s.lookup(t)
        ref = sum(v[i] * d[i] for i in range(8)) / np.sqrt(sum(x * x for x in d))
        assert abs(manipulability_score(s, ax, t) - ref) < 1e-9
    nouns = list(rng.choice(s.tokens, 20, replace=False))
    ranked = rank_manipulable(s, ax, nouns)
    assert ranked == sorted(nouns, key=lambda n: (manipulability_score(s, ax, n), n))
    assert rank_manipulable(s, ax, nouns) == ranked
    assert rank_manipulable(s.scaled(0.25), make_axis(s.scaled(0.25), "w00", "w01"), nouns) == ranked


def test_rank_manipulable_contract():
    s = random_store(10, 4, seed=1)
    ax = make_axis(s, "w0", "w1")
    assert rank_manipulable(s, ax, ["w0", "w1"], 2) == ["w1", "w0"]
    scores = {t: manipulability_score(s, ax, t) for t in s.tokens}
    assert rank_manipulable(s, ax, s.tokens, 1) == [min(scores, key=scores.get)]
    assert rank_manipulable(s, ax, ["nope", "zip"]) == []
    assert rank_manipulable(s, ax, ["big w0", "w1", "ghost"]) == ["w1", "big w0"]


def test_axis_errors():
    s = EmbeddingStore(["a", "b", "c"], [[1, 0], [1, 0], [0, 1]])
    with pytest.raises(ValueError):
        make_axis(s, "a", "b")
    with pytest.raises(MissingTokens):
        make_axis(s, "a", "zz")


def test_bundled_pebble_below_mountain(store):
    ax = make_axis(store, "forest", "tree")
    assert manipulability_score(store, ax, "pebble") < manipulability_score(store, ax, "mountain")


def test_project_2d_oracle_and_csv():
    s = random_store(12, 5, seed=8)
    ax, ay = make_axis(s, "w00", "w01"), make_axis(s, "w02", "w03")
    words = ["w00", "w01", "w05", "missing"]
    rows = project_2d(s, ax, ay, words)
    assert len(rows) == 3
    x = {t: xv for t, xv, _ in rows}
    assert x["w00"] > x["w01"]
    for tok, xv, yv in rows:
        v = s.lookup(tok)
        assert abs(xv - v @ ax.vector / np.linalg.norm(ax.vector)) < 1e-9
        assert abs(yv - v @ ay.vector / np.linalg.norm(ay.vector)) < 1e-9
    buf = io.StringIO()
    write_projection_csv([("a", 1.0, -0.5)], buf)
    assert buf.getvalue() == "token,x,y\na,1.000000,-0.500000\n"


def test_read_axes(tmp_path):
    p = tmp_path / "axes.txt"
    p.write_text("forest tree\n# c\nqueen king\n")
    assert read_axes(p) == [("forest", "tree"), ("queen", "king")]


def test_bundled_affordances_for_world_objects(store, lexicon):
    m = build_affordance_model(store)
    for noun, verb in [("lamp", "light"), ("bread", "eat"), ("book", "read"), ("bell", "ring"),
                       ("door", "unlock"), ("key", "take")]:
        top = [v for v, _ in affordant_verbs(m, noun, 30, lexicon.verbs)]
        assert verb in top, (noun, top[:10])
