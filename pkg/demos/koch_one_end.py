"""Koch curve: two maps make a tree, a third map ties it into one end.

Run with ``python demos/koch_one_end.py``.
"""
# %%
from ifsends.attractor import count_components, sample_cloud
from ifsends.ends import build_link_graph, classify_ends, one_ended_certificate
from ifsends.fixtures import fixtures
from ifsends.report import default_epsilon
from ifsends.semigroup import build_ball, word_evaluate

F = fixtures()
koch2, koch3 = F["koch2"].system, F["koch3"].system

# %% The extra map c satisfies two relations, checked in exact arithmetic.
for lhs, rhs in F["koch3"].relations:
    same = word_evaluate(koch3, lhs) == word_evaluate(koch3, rhs)
    print(f"{koch3.word_str(lhs, ' ')} = {koch3.word_str(rhs, ' ')}: {same}")

# %% Ball growth: the two-map semigroup is free, the three-map one is not.
for name, s in [("koch2", koch2), ("koch3", koch3)]:
    ball = build_ball(s, 7)
    print(name, [len(ball.layer(k)) for k in range(1, 8)])

# %% Ends estimates for growing k.
print("koch2 ends:", classify_ends(koch2, 6, 3).samples)
print("koch3 ends:", classify_ends(koch3, 5, 4).samples)

# %% Relations become edges of the link graph; a connected link graph and no
# constant maps certify a single end.
lg = build_link_graph(koch3, 3)
for e in lg.edges:
    print(f"  {koch3.names[e.f]} -- {koch3.names[e.g]}  via "
          f"{koch3.word_str((e.f,) + e.u)} = {koch3.word_str((e.g,) + e.v)}")
cert = one_ended_certificate(koch3, 6)
print("certificate at link depth", cert.depth, "->", cert.implications())

# %% The attractor itself is one connected curve at every sampled resolution.
for L in (6, 9):
    cloud = sample_cloud(koch3, L)
    rep = count_components(cloud, default_epsilon(cloud))
    print(f"L={L}: {len(cloud)} points, error {cloud.error_radius:.4f}, "
          f"{rep.component_count} component(s)")
