"""Two projections onto the axes: a one-point attractor with a two-ended graph.

Run with ``python demos/projections_two_ends.py``.
"""
# %%
from ifsends.attractor import count_components, sample_cloud
from ifsends.ends import build_link_graph, end_components, link_graph_connected
from ifsends.fixtures import fixtures
from ifsends.semigroup import build_ball, certify_no_idempotents, find_idempotents, is_dead_end

s = fixtures()["ex14_projections"].system

# %% Every mixed word collapses to the constant map onto the origin.
ball = build_ball(s, 6)
print("ball of radius 6 has", len(ball), "elements")
for v in sorted(find_idempotents(ball)):
    print("constant:", s.word_str(ball.word(v)), "dead-end:", is_dead_end(ball, v))
print(certify_no_idempotents(s))

# %% Deleting a ball leaves the two rays a^k and b^k.
for k in range(1, 5):
    comps = end_components(ball, k)
    print(f"k={k}: {len(comps)} ends; first words "
          f"{[s.word_str(ball.word(min(c))) for c in comps]}")

# %% The link graph is connected, yet the graph has two ends: the constant
# element breaks the certificate.
print("link graph connected:", link_graph_connected(build_link_graph(s, 4)))

# %% The attractor is the single point {0}, which counts as nonisolated.
cloud = sample_cloud(s, 6)
rep = count_components(cloud, 0.01)
print(cloud.points, "one-point space:", rep.one_point,
      "nondegenerate components:", rep.nondegenerate_count)
