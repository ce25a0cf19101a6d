# %% [markdown]
# Baseline vs pruned action spaces on the bundled worlds.
#
# Each strategy trains a fresh tabular Q-learner for a few runs. The baseline
# draws from about a thousand verbs per state. The affordance agent keeps the
# thirty most affordant ones for the chosen noun, plus navigation and a few
# essential verbs. Results go to `demo_results/<world>/`.
#
# Scale `EPOCHS` and `RUNS` up (100 and 10) for the full comparison; that
# takes a few minutes per world on one core.
#
# The offline ConceptNet cache only holds `sword`, so the conceptnet agent
# falls back to navigation and essential verbs for every other noun. Point
# `conceptnet_cache` at a fuller cache (or go online) for a fair comparison.

# %%
import tempfile
from pathlib import Path

from affordance.action_space import build_cooccurrence
from affordance.harness import ExperimentConfig, run_experiment
from affordance.synthetic import DATA_DIR, bundled_lexicon, write_toy_corpus

EPOCHS, STEPS, RUNS = 40, 200, 4
out_root = Path("demo_results")

tmp = Path(tempfile.mkdtemp())
write_toy_corpus(tmp / "corpus.txt")
build_cooccurrence(tmp / "corpus.txt", bundled_lexicon()).save(tmp / "cooc.csv")

strategies = ["baseline", "affordance", "random", "freeform", "cooccurrence", "conceptnet"]

# %%
for world in ("cottage", "library", "vault"):
    cfg = ExperimentConfig(world=world, strategies=strategies, epochs=EPOCHS, steps=STEPS, runs=RUNS,
                           cooccurrence=str(tmp / "cooc.csv"), conceptnet_cache=str(DATA_DIR / "conceptnet"),
                           out=str(out_root / world))
    rec = run_experiment(cfg)
    print(f"\n{world} (max score {rec.max_score})")
    print(f"{'strategy':>13} {'peak':>6} {'first reward':>13}")
    for s in strategies:
        print(f"{s:>13} {rec.mean_peak(s):6.3f} {rec.median_first_reward(s):13g}")

# %% [markdown]
# Mean score per epoch for one world, the data behind a learning-curve plot.

# %%
curve = rec.mean_curve("affordance")
print("affordance, vault, mean score every 5 epochs:", [round(float(x), 1) for x in curve[::5]])
