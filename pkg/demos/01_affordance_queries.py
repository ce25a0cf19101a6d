# %% [markdown]
# Affordant verbs from vector arithmetic.
#
# The affordance direction is the mean of `verb - noun` over fifteen exemplar
# pairs such as (sing, song) and (drink, water). Adding it to any noun
# vector gives a point whose nearest verbs are the things one usually does
# to that noun.
#
# The bundled vectors are synthetic (see `affordance.synthetic`). Pass a real
# word2vec text file with `--embeddings` to the CLI for Wikipedia-scale results.

# %%
import numpy as np

from affordance import affordant_verbs, build_affordance_model, cosine
from affordance.synthetic import bundled_lexicon, bundled_store

store = bundled_store()
verbs = bundled_lexicon().verbs
model = build_affordance_model(store)
print(f"{len(store)} tokens, dimension {store.dimension}")
print("affordance vector norm:", round(float(np.linalg.norm(model.vector)), 3))

# %%
for noun in ["sword", "horse", "door", "lamp", "bread", "book", "bell", "key"]:
    ranked = affordant_verbs(model, noun, 8, verbs)
    print(f"{noun:>6}: " + ", ".join(v for v, _ in ranked))

# %% [markdown]
# The exemplar pairs all point roughly the same way; their spread shows how
# noisy a single pair would be on its own.

# %%
diffs = [store[v] - store[n] for v, n in model.pairs]
sims = [cosine(d, model.vector) for d in diffs]
for (v, n), s in zip(model.pairs, sims):
    print(f"{v:>7} - {n:<8} cos to mean = {s:.2f}")

# %% [markdown]
# Fewer exemplars give a noisier direction. Compare the rank of the obvious
# verb under a three-pair model and the full model.

# %%
small = build_affordance_model(store, model.pairs.subset([0, 1, 2]))
for noun, verb in [("lamp", "light"), ("bell", "ring"), ("bread", "eat")]:
    full_rank = [v for v, _ in affordant_verbs(model, noun, 50, verbs)].index(verb)
    few = [v for v, _ in affordant_verbs(small, noun, 200, verbs)]
    few_rank = few.index(verb) if verb in few else None
    print(f"{noun}/{verb}: rank {full_rank} with 15 pairs, {few_rank} with 3")
