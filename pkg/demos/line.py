"""Walkthrough: four points on a line and the prefix matching criterion.

Run with ``python demos/line.py`` from the repository root.
"""

# %%
from __future__ import annotations

from tcspace import build_projection, certify_projection
from tcspace.matching import check_prefix_matching_criterion
from tcspace.metric import space_from_dict

space = space_from_dict({
    "points": ["0", "1", "10", "11"],
    "distances": [[0, 1, 10, 11], [1, 0, 9, 10], [10, 9, 0, 1], [11, 10, 1, 0]],
})

# %% [markdown]
# Every prefix of a usable pair sequence must itself be a minimum matching.
# Pairing the close points first works; pairing across first does not.

# %%
good = [("0", "1"), ("10", "11")]
bad = [("0", "10"), ("1", "11")]
for pairs in (good, bad):
    res = check_prefix_matching_criterion(space, pairs)
    if res.passed:
        print(pairs, "passes")
    else:
        print(pairs, f"fails at prefix {res.failing_prefix}:",
              f"weight {res.prefix_weight} against optimum {res.optimum}")

# %%
P = build_projection(space, good)
for i, t in enumerate(P.functionals, start=1):
    print(f"t{i}:", {x: str(v) for x, v in t.values.items()})
print("certified:", certify_projection(P).ok)
