"""Unit interval plus a constant map to sqrt(2): isolated points come from constants.

Run with ``python demos/isolated_points.py``.
"""
# %%
from ifsends.attractor import (
    hausdorff_upper,
    idempotent_images,
    isolated_candidates,
    sample_cloud,
)
from ifsends.fixtures import fixtures
from ifsends.semigroup import build_ball

F = fixtures()
abc, abd = F["ex19_abc"].system, F["ex19_abd"].system

# %% Constant maps in the semigroup, computed exactly.
C = idempotent_images(build_ball(abd, 4))
print(len(C.values), "constant values at depth 4:")
for p in sorted(C.values, key=lambda p: float(p.coords[0])):
    print("  ", p)

# %% Isolated points of a fine cloud; every one is a constant value once the
# ball is deep enough to contain the word that produces it.
C = idempotent_images(build_ball(abd, 8))
cloud = sample_cloud(abd, 10)
cands = isolated_candidates(cloud, 1 / 128)
for p in sorted(cands, key=lambda p: float(p.coords[0])):
    print(f"  {float(p.coords[0]):.6f}  {p}  in C: {p in C}")

# %% Replacing the constant 1 by sqrt(2) moves the attractor a visible distance.
layers = lambda s: [len(build_ball(s, 4).layer(k)) for k in range(1, 5)]
print("layer sizes {a,b,c}:", layers(abc), " {a,b,d}:", layers(abd))
h = hausdorff_upper(sample_cloud(abc, 12), sample_cloud(abd, 12))
print(f"Hausdorff distance bound between the attractors: {h:.4f}")
