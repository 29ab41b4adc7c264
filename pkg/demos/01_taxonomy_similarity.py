"""
Concept similarity in a taxonomy
================================

Each context dimension is a tree of concepts. Two concepts are compared
through their deepest shared ancestor: the deeper it sits relative to the
two concepts, the closer they are.
"""

from importlib import resources

from situcbr import concept_similarity, depth, lcs, load_taxonomy

data = resources.files("situcbr") / "data" / "ontologies"
location = load_taxonomy((data / "location.json").read_text())

# %%
# The bundled location tree: France at the root, two regions, three cities.
def show(concept_id):
    print(f"{'  ' * (depth(location, concept_id) - 1)}{concept_id}")
    for child in location.children(concept_id):
        show(child)


show(location.root)

# %%
# Paris and Evry share Ile-de-France (depth 2); both sit at depth 3.
a, b = "paris", "evry"
print(f"lcs({a}, {b}) = {lcs(location, a, b)}")
print(f"sim({a}, {b}) = {concept_similarity(location, a, b)}")

# %%
# Across regions the only common ancestor is the root.
print(f"sim(paris, lille) = {concept_similarity(location, 'paris', 'lille')}")

# %%
# Results are exact fractions, so sums over dimensions carry no rounding.
print(float(concept_similarity(location, "paris", "evry")))
