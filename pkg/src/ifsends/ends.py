"""Ends of the Cayley graph, the link graph and the one-end certificate.

Ends are estimated on the undirected ball: after deleting every vertex of
depth <= k, the components that still reach the frontier stand in for the
infinite components.  The link graph joins generators ``f, g`` when some
``f o u`` equals some ``g o v``; edges carry the witnessing words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx

from .affine import IfsSystem, compose
from .semigroup import (
    BallTruncated,
    CayleyBall,
    IdempotentEvidence,
    Word,
    build_ball,
    certify_no_idempotents,
    word_evaluate,
)

__all__ = [
    "LinkEdge",
    "LinkGraph",
    "EndsEstimate",
    "OneEndCertificate",
    "CertificateRefused",
    "build_link_graph",
    "link_graph_connected",
    "estimate_ends",
    "end_components",
    "classify_ends",
    "one_ended_certificate",
    "walk_end",
    "link_dot",
]


@dataclass(frozen=True)
class LinkEdge:
    f: int
    g: int
    u: Word
    v: Word  # f o u == g o v


@dataclass
class LinkGraph:
    system: IfsSystem
    depth: int
    edges: list[LinkEdge] = field(default_factory=list)
    merged: dict[int, int] = field(default_factory=dict)  # duplicate generator -> representative
    depth_limited: bool = False

    @property
    def vertices(self) -> list[int]:
        return list(range(len(self.system)))

    def edge_set(self) -> set[tuple[int, int]]:
        return {(e.f, e.g) for e in self.edges}

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(self.vertices)
        for e in self.edges:
            G.add_edge(e.f, e.g, witness=e)
        for dup, rep in self.merged.items():
            G.add_edge(dup, rep, witness=None)
        return G

    def verify(self) -> bool:
        """Re-check every witness by exact evaluation."""
        s = self.system
        return all(
            word_evaluate(s, (e.f,) + e.u) == word_evaluate(s, (e.g,) + e.v) for e in self.edges
        )

    def to_json(self) -> dict:
        s = self.system
        return {
            "depth": self.depth,
            "depth_limited": self.depth_limited,
            "vertices": list(s.names),
            "merged": {s.names[a]: s.names[b] for a, b in sorted(self.merged.items())},
            "edges": [
                {
                    "f": s.names[e.f],
                    "g": s.names[e.g],
                    "u": s.word_str(e.u, " "),
                    "v": s.word_str(e.v, " "),
                }
                for e in self.edges
            ],
            "connected": link_graph_connected(self),
        }


def _shortlex(w: Word) -> tuple:
    return (len(w), w)


def _left_products(system: IfsSystem, f: int, ball: CayleyBall) -> dict[tuple, Word]:
    """Map key of ``f o u`` to the shortlex-least ``u`` in the ball."""
    gen = system.maps[f]
    out: dict[tuple, Word] = {}
    for v in range(len(ball)):  # vertex order is shortlex order of words
        key = compose(gen, ball.maps[v]).key
        if key not in out:
            out[key] = ball.word(v)
    return out


def _duplicates(system: IfsSystem) -> dict[int, int]:
    first: dict[tuple, int] = {}
    merged = {}
    for i, m in enumerate(system.maps):
        if m.key in first:
            merged[i] = first[m.key]
        else:
            first[m.key] = i
    return merged


def build_link_graph(system: IfsSystem, depth: int, ball: CayleyBall | None = None) -> LinkGraph:
    """Link graph with witnesses ``u, v`` of length <= ``depth``.

    A missing edge means no witness exists up to ``depth``.  The ball may be
    passed in when the caller already has one of radius >= ``depth``.
    """
    if depth < 1:
        raise ValueError("link depth must be >= 1")
    merged = _duplicates(system)
    lg = LinkGraph(system, depth, merged=merged)
    if ball is None or ball.radius < depth:
        try:
            ball = build_ball(system, depth)
        except BallTruncated as exc:
            lg.depth_limited = True
            depth = exc.completed_depth
            lg.depth = depth
            if depth < 1:
                return lg
            ball = build_ball(system, depth)
    keep = [v for v in range(len(ball)) if ball.depths[v] <= depth]
    sub = _SubBall(ball, keep)
    reps = [i for i in range(len(system)) if i not in merged]
    prods = {f: _left_products(system, f, sub) for f in reps}
    for i, f in enumerate(reps):
        for g in reps[i + 1:]:
            common = prods[f].keys() & prods[g].keys()
            if not common:
                continue
            u, v = min(
                ((prods[f][k], prods[g][k]) for k in common),
                key=lambda p: (len(p[0]) + len(p[1]), p[0], p[1]),
            )
            lg.edges.append(LinkEdge(f, g, u, v))
    return lg


class _SubBall:
    """Read-only view of the vertices of a ball up to some depth."""

    def __init__(self, ball: CayleyBall, keep: list[int]) -> None:
        self._ball = ball
        self._keep = keep
        self.maps = [ball.maps[v] for v in keep]

    def __len__(self) -> int:
        return len(self._keep)

    def word(self, i: int) -> Word:
        return self._ball.word(self._keep[i])


def link_graph_connected(lg: LinkGraph) -> bool:
    G = lg.to_networkx()
    return G.number_of_nodes() <= 1 or nx.is_connected(G)


def end_components(ball: CayleyBall, k: int) -> list[set[int]]:
    """Components of the undirected ball minus depth <= k that touch the frontier."""
    depths = ball.depths
    N = ball.radius
    alive = [d > k for d in depths]
    parent = list(range(len(ball)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v, row in enumerate(ball.succ):
        if row is None or not alive[v]:
            continue
        for t in row:
            if alive[t]:
                a, b = find(v), find(t)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict[int, set[int]] = {}
    for v in range(len(ball)):
        if alive[v]:
            groups.setdefault(find(v), set()).add(v)
    return [
        comp for _, comp in sorted(groups.items())
        if any(depths[v] == N for v in comp)
    ]


def estimate_ends(ball: CayleyBall, k: int) -> int:
    """Number of frontier-reaching components after deleting the ball of radius k."""
    if not k < ball.radius - 1:
        raise ValueError(f"need k < radius - 1 (k={k}, radius={ball.radius})")
    return len(end_components(ball, k))


@dataclass
class EndsEstimate:
    samples: list[tuple[int, int, int]]
    classification: str  # ZeroEnds | Exactly(n) | GrowingUnbounded | Inconclusive

    @property
    def exactly(self) -> int | None:
        if self.classification.startswith("Exactly("):
            return int(self.classification[8:-1])
        return None

    def to_json(self) -> dict:
        text = self.classification
        if text == "GrowingUnbounded":
            text = "unbounded growth observed"
        return {
            "samples": [list(s) for s in self.samples],
            "classification": self.classification,
            "summary": text,
        }


def classify_ends(
    system: IfsSystem,
    k_max: int,
    margin: int,
    ball: CayleyBall | None = None,
) -> EndsEstimate:
    """Sample ``estimate_ends`` for k = 1..k_max on balls of radius k + margin.

    One ball of radius ``k_max + margin`` is built and truncated per sample,
    which is equivalent to building each ball separately because balls nest.
    """
    if k_max < 2 or margin < 2:
        raise ValueError("need k_max >= 2 and margin >= 2")
    N_max = k_max + margin
    if ball is None or ball.radius < N_max:
        ball = build_ball(system, N_max)
    samples = []
    for k in range(1, k_max + 1):
        sub = truncate_ball(ball, k + margin)
        if sub.is_finite_semigroup:
            samples.append((k, k + margin, 0))
            return EndsEstimate(samples, "ZeroEnds")
        samples.append((k, k + margin, estimate_ends(sub, k)))
    counts = [c for _, _, c in samples]
    top = counts[-3:]
    if len(top) == 3 and top[0] == top[1] == top[2]:
        label = f"Exactly({top[0]})"
    elif len(top) == 3 and top[0] < top[1] < top[2]:
        label = "GrowingUnbounded"
    elif len(top) < 3 and len(set(top)) == 1:
        label = f"Exactly({top[0]})"
    else:
        label = "Inconclusive"
    return EndsEstimate(samples, label)


def truncate_ball(ball: CayleyBall, N: int) -> CayleyBall:
    """The sub-ball of radius ``N`` (vertex ids are preserved, as balls nest)."""
    if N >= ball.radius:
        return ball
    out = CayleyBall(ball.system, N)
    n = sum(1 for d in ball.depths if d <= N)
    out.maps = ball.maps[:n]
    out.depths = ball.depths[:n]
    out.parent = ball.parent[:n]
    out.letter = ball.letter[:n]
    out.roots = list(ball.roots)
    out.succ = [row if d < N else None for row, d in zip(ball.succ[:n], out.depths)]
    out.index = {m.key: v for v, m in enumerate(out.maps)}
    return out


def walk_end(ball: CayleyBall, k: int, word: Sequence[int]) -> int | None:
    """Index (into ``end_components(ball, k)``) of the end a walk prefix lies in.

    The walk is followed for ``ball.radius`` steps; ``None`` if the final
    vertex sits inside the deleted ball or in a component without frontier.
    """
    v = ball.vertex_of_word(tuple(word[: ball.radius]))
    if v is None:
        return None
    for i, comp in enumerate(end_components(ball, k)):
        if v in comp:
            return i
    return None


@dataclass
class OneEndCertificate:
    no_idempotents: IdempotentEvidence
    spanning_tree: list[LinkEdge]
    depth: int

    def implications(self) -> list[str]:
        return ["one end (link graph connected, no idempotents)", "connected attractor"]

    def to_json(self, system: IfsSystem) -> dict:
        return {
            "no_idempotents": self.no_idempotents.to_json(system),
            "link_depth": self.depth,
            "spanning_tree": [
                {"f": system.names[e.f], "g": system.names[e.g],
                 "u": system.word_str(e.u, " "), "v": system.word_str(e.v, " ")}
                for e in self.spanning_tree
            ],
            "implies": self.implications(),
        }


class CertificateRefused(Exception):
    """The one-end certificate could not be issued; ``reason`` names the failing leg."""

    def __init__(self, reason: str, evidence: IdempotentEvidence,
                 partition: list[list[str]] | None = None) -> None:
        super().__init__(reason)
        self.reason = reason
        self.evidence = evidence
        self.partition = partition

    def to_json(self, system: IfsSystem) -> dict:
        return {
            "refused": self.reason,
            "idempotents": self.evidence.to_json(system),
            "unlinked_partition": self.partition,
        }


def one_ended_certificate(system: IfsSystem, depth: int) -> OneEndCertificate:
    """Certificate of one end: no idempotents and a connected link graph.

    Link depths 1..``depth`` are tried in turn and the search stops at the
    first depth whose link graph is connected, so systems that link through
    short relations never build the full ball.
    """
    evidence = certify_no_idempotents(system)
    if not evidence.certified_none:
        if evidence.status == "FoundAtDepth":
            w = system.word_str(evidence.witness, " ")
            raise CertificateRefused(f"idempotent {w!r} found at depth {evidence.depth}", evidence)
        raise CertificateRefused(f"idempotents not excluded up to depth {evidence.depth}", evidence)
    lg = None
    for d in range(1, depth + 1):
        lg = build_link_graph(system, d)
        if link_graph_connected(lg):
            G = lg.to_networkx()
            tree = nx.minimum_spanning_tree(G)
            edges = sorted(
                (G.edges[a, b]["witness"] for a, b in tree.edges if G.edges[a, b]["witness"]),
                key=lambda e: (e.f, e.g),
            )
            return OneEndCertificate(evidence, edges, d)
        if lg.depth_limited:
            break
    G = lg.to_networkx()
    parts = [sorted(system.names[i] for i in c) for c in nx.connected_components(G)]
    parts.sort()
    raise CertificateRefused(
        f"link graph disconnected up to depth {lg.depth}", evidence, parts)


def link_dot(lg: LinkGraph) -> str:
    s = lg.system
    lines = ["graph link {"]
    for name in s.names:
        lines.append(f'  "{name}";')
    for e in lg.edges:
        lhs = s.word_str((e.f,) + e.u, " ")
        rhs = s.word_str((e.g,) + e.v, " ")
        lines.append(f'  "{s.names[e.f]}" -- "{s.names[e.g]}" [label="{lhs} = {rhs}"];')
    for dup, rep in sorted(lg.merged.items()):
        lines.append(f'  "{s.names[dup]}" -- "{s.names[rep]}" [label="equal maps", style=dotted];')
    lines.append("}")
    return "\n".join(lines) + "\n"
