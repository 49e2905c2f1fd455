"""Walkthrough: the randomized property suite and fault injection.

Run with ``python demos/random_suite.py`` from the repository root.
"""

# %%
from __future__ import annotations

from tcspace.harness import KINDS, GeneratorSpec, run_property_suite

# %% [markdown]
# Each trial draws a random metric space and a pair sequence, builds the
# projection and certifies it exactly. Reports are byte-deterministic.

# %%
for kind in KINDS:
    rep = run_property_suite(GeneratorSpec(kind, 8, seed=1), 5, n_pairs=3, battery=4, samples=2)
    print(f"{kind:>18}: completed {rep.completed}, skipped {rep.skipped}, ok {rep.ok}")

# %% [markdown]
# A perturbed dual must be caught, and the report keeps a replayable
# counterexample.

# %%
rep = run_property_suite(GeneratorSpec("clustered", 6, seed=1), 2, n_pairs=3,
                         fault="perturb-dual", battery=2, samples=1)
print("ok:", rep.ok)
print("first failure:", rep.counterexample["failed"])
