# %% [markdown]
# Three ways to guess what you can do with a sword.
#
# 1. the affordance query over word vectors;
# 2. raw co-occurrence counts within nine words in a corpus;
# 3. ConceptNet's CapableOf edges (read from the bundled offline cache).
#
# Co-occurrence favours frequent, generic verbs. The vector query and the
# knowledge graph give more specific ones.

# %%
import tempfile
from pathlib import Path

from affordance import ConceptNetClient, affordant_verbs, build_affordance_model, build_cooccurrence
from affordance.synthetic import DATA_DIR, bundled_lexicon, bundled_store, write_toy_corpus

store, lexicon = bundled_store(), bundled_lexicon()
model = build_affordance_model(store)
print("vectors:   ", [v for v, _ in affordant_verbs(model, "sword", 10, lexicon.verbs)])

# %%
with tempfile.TemporaryDirectory() as tmp:
    corpus = Path(tmp) / "corpus.txt"
    write_toy_corpus(corpus)
    table = build_cooccurrence(corpus, lexicon, radius=9)
counts = sorted(((c, v) for (v, n), c in table.counts.items() if n == "sword"), reverse=True)
print("co-occur:  ", [v for c, v in counts[:10]])

# %%
client = ConceptNetClient(DATA_DIR / "conceptnet", offline=True)
print("conceptnet:", sorted(client.capable_of("sword")))
print("network calls:", client.network_calls)
