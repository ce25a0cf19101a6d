# %% [markdown]
# Which nouns can be picked up?
#
# Project nouns onto the `forest - tree` difference. Small, graspable objects
# land near the `tree` end, and large or abstract things land near `forest`.
# A second axis makes a 2-D point cloud, written as CSV for plotting.

# %%
import io

from affordance import make_axis, manipulability_score, project_2d, rank_manipulable
from affordance.affordance import write_projection_csv
from affordance.synthetic import bundled_store

store = bundled_store()
axis = make_axis(store, "forest", "tree")

nouns = ["pebble", "key", "coin", "lamp", "apple", "book", "sword", "chair",
         "table", "house", "mountain", "forest", "ocean", "building"]
for n in rank_manipulable(store, axis, nouns):
    print(f"{n:>9} {manipulability_score(store, axis, n):+.3f}")

# %% [markdown]
# The agent keeps only the most manipulable nouns it sees, at most fifteen
# per state. Here is the cut for one room description.

# %%
room = ["kitchen", "cottage", "table", "oven", "garden", "lamp", "bread", "loaf"]
print(rank_manipulable(store, axis, room, k=4))

# %% [markdown]
# Two axes give a scatter. The y axis here is a gender direction, which only
# separates gendered words.

# %%
gender = make_axis(store, "king", "queen")
words = ["king", "queen", "man", "woman", "boy", "girl", "pebble", "mountain", "lamp", "forest"]
buf = io.StringIO()
write_projection_csv(project_2d(store, axis, gender, words), buf)
print(buf.getvalue())
