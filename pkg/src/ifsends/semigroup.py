"""Truncated Cayley graph of the semigroup generated by an IFS.

Vertices are distinct maps, edges go from ``s`` to ``s o f`` for each
generator ``f``.  Balls are built breadth first with exact deduplication on
the packed coefficient key; words are stored as parent pointers and rebuilt
on demand.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .affine import AffineMap, ExactPoint, IfsSystem, compose, is_constant
from .exact_field import QuadScalar, det

__all__ = [
    "Word",
    "SemigroupElement",
    "CayleyBall",
    "BallTruncated",
    "UndeterminedError",
    "IdempotentEvidence",
    "build_ball",
    "word_evaluate",
    "congruent",
    "iter_layers",
    "constancy_exceptions",
    "find_idempotents",
    "is_dead_end",
    "certify_no_idempotents",
    "balls_isomorphic",
    "cayley_dot",
]

Word = tuple  # tuple[int, ...] of generator indices

DEFAULT_VERTEX_CAP = 5_000_000


class BallTruncated(RuntimeError):
    """Vertex cap hit; ``completed_depth`` layers were fully built."""

    def __init__(self, completed_depth: int, cap: int) -> None:
        super().__init__(f"vertex cap {cap} exceeded after completing depth {completed_depth}")
        self.completed_depth = completed_depth
        self.cap = cap


class UndeterminedError(ValueError):
    """A query about a frontier vertex, whose out-edges are unknown."""


@dataclass(frozen=True)
class SemigroupElement:
    map: AffineMap
    shortest_word: Word
    depth: int
    vertex_id: int


class CayleyBall:
    """Ball of radius ``radius`` around the identity in the Cayley graph.

    ``succ[v][g]`` is the vertex reached from ``v`` along generator ``g``;
    it is ``None`` for frontier vertices (depth == radius), whose out-edges
    were never computed.
    """

    def __init__(self, system: IfsSystem, radius: int) -> None:
        self.system = system
        self.radius = radius
        self.maps: list[AffineMap] = []
        self.depths: list[int] = []
        self.parent: list[int] = []  # -1 for depth-1 vertices
        self.letter: list[int] = []
        self.succ: list[list[int] | None] = []
        self.roots: list[int] = []  # vertex of each generator
        self.index: dict[tuple, int] = {}

    def __len__(self) -> int:
        return len(self.maps)

    @property
    def complete_to(self) -> int:
        return self.radius

    @property
    def frontier(self) -> set[int]:
        return {v for v, d in enumerate(self.depths) if d == self.radius}

    def is_frontier(self, v: int) -> bool:
        return self.depths[v] == self.radius

    @property
    def is_finite_semigroup(self) -> bool:
        """No element at depth == radius: the BFS closed and the ball is all of S."""
        return not self.depths or max(self.depths) < self.radius

    def word(self, v: int) -> Word:
        out = []
        while v >= 0:
            out.append(self.letter[v])
            v = self.parent[v]
        return tuple(reversed(out))

    def element(self, v: int) -> SemigroupElement:
        return SemigroupElement(self.maps[v], self.word(v), self.depths[v], v)

    @property
    def elements(self) -> list[SemigroupElement]:
        return [self.element(v) for v in range(len(self))]

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        return [
            (v, g, t)
            for v, row in enumerate(self.succ)
            if row is not None
            for g, t in enumerate(row)
        ]

    def lookup(self, f: AffineMap) -> int | None:
        return self.index.get(f.key)

    def vertex_of_word(self, word: Sequence[int]) -> int | None:
        """Follow edges from the root; ``None`` once the walk leaves known edges."""
        if not word:
            raise ValueError("empty word denotes the identity, which is not a vertex")
        v = self.roots[word[0]]
        for g in word[1:]:
            row = self.succ[v]
            if row is None:
                return None
            v = row[g]
        return v

    def layer(self, k: int) -> list[int]:
        return [v for v, d in enumerate(self.depths) if d == k]


def build_ball(system: IfsSystem, N: int, cap: int = DEFAULT_VERTEX_CAP) -> CayleyBall:
    """Breadth-first ball of radius ``N``.

    Layers are expanded in vertex order with generators in declaration order,
    so the first word found for an element is its shortlex-least word.
    """
    if N < 1:
        raise ValueError("ball radius must be >= 1")
    ball = CayleyBall(system, N)
    maps, depths, index = ball.maps, ball.depths, ball.index
    gens = system.maps
    n_gens = len(gens)

    def add(m: AffineMap, depth: int, parent: int, letter: int) -> int:
        v = len(maps)
        if v >= cap:
            raise BallTruncated(depth - 1, cap)
        index[m.key] = v
        maps.append(m)
        depths.append(depth)
        ball.parent.append(parent)
        ball.letter.append(letter)
        ball.succ.append(None)
        return v

    for g, m in enumerate(gens):
        v = index.get(m.key)
        if v is None:
            v = add(m, 1, -1, g)
        ball.roots.append(v)

    start = 0
    for depth in range(1, N):
        stop = len(maps)
        for v in range(start, stop):
            s = maps[v]
            row = [0] * n_gens
            for g in range(n_gens):
                t = compose(s, gens[g])
                u = index.get(t.key)
                if u is None:
                    u = add(t, depth + 1, v, g)
                row[g] = u
            ball.succ[v] = row
        start = stop
    return ball


def word_evaluate(system: IfsSystem, w: Sequence[int]) -> AffineMap:
    """Evaluate ``f1 o f2 o ... o fn`` for the word ``f1 f2 ... fn``."""
    if not w:
        raise ValueError("cannot evaluate the empty word")
    gens = system.maps
    out = gens[w[0]]
    for g in w[1:]:
        out = compose(out, gens[g])
    return out


def congruent(system: IfsSystem, w1: Sequence[int], w2: Sequence[int]) -> bool:
    return word_evaluate(system, w1) == word_evaluate(system, w2)


def find_idempotents(ball: CayleyBall) -> dict[int, ExactPoint]:
    """Vertices whose map is constant, with the constant value.

    Constant, idempotent and dead-end coincide for contracting systems, so
    the cheap test (zero linear part) is used.
    """
    out = {}
    for v, m in enumerate(ball.maps):
        if is_constant(m):
            d = m.dim
            out[v] = ExactPoint(d, m.r, *_translation_key(m))
    return out


def _translation_key(m: AffineMap) -> tuple[int, tuple[int, ...]]:
    tail = m.num[2 * m.dim * m.dim:]
    g = math.gcd(m.den, *tail)
    return m.den // g, tuple(x // g for x in tail)


def iter_layers(system: IfsSystem, depth: int):
    """Yield ``(k, maps)`` for the BFS layers 1..depth without building adjacency.

    Only the keys of earlier layers are retained, so this reaches depths whose
    full ball would not fit in memory.
    """
    seen: set[tuple] = set()
    layer = []
    for m in system.maps:
        if m.key not in seen:
            seen.add(m.key)
            layer.append(m)
    for k in range(1, depth + 1):
        yield k, layer
        if k == depth:
            return
        nxt = []
        for s in layer:
            for g in system.maps:
                t = compose(s, g)
                key = t.key
                if key not in seen:
                    seen.add(key)
                    nxt.append(t)
        layer = nxt


def constancy_exceptions(system: IfsSystem, depth: int) -> tuple[int, list[AffineMap]]:
    """Check constant <=> idempotent <=> dead-end on the non-frontier part of B_depth.

    Returns the number of elements checked and the elements where the three
    properties disagree.  All three are properties of the map itself, so the
    check streams over layers 1..depth-1.
    """
    checked = 0
    bad = []
    for _, layer in iter_layers(system, depth - 1):
        for s in layer:
            const = is_constant(s)
            idem = compose(s, s) == s
            dead = all(compose(s, g) == s for g in system.maps)
            checked += 1
            if not (const == idem == dead):
                bad.append(s)
    return checked, bad


def is_dead_end(ball: CayleyBall, v: int) -> bool:
    row = ball.succ[v]
    if row is None:
        raise UndeterminedError(f"vertex {v} is on the frontier; its out-edges are unknown")
    return all(t == v for t in row)


@dataclass(frozen=True)
class IdempotentEvidence:
    """Outcome of :func:`certify_no_idempotents`.

    ``status`` is ``"CertifiedNone"``, ``"FoundAtDepth"`` or ``"UnknownUpTo"``.
    """

    status: str
    depth: int | None = None
    witness: Word | None = None
    method: str = ""
    detail: str = ""

    @property
    def certified_none(self) -> bool:
        return self.status == "CertifiedNone"

    def to_json(self, system: IfsSystem) -> dict:
        return {
            "status": self.status,
            "depth": self.depth,
            "witness": None if self.witness is None else system.word_str(self.witness, " "),
            "method": self.method,
            "detail": self.detail,
        }


def _column_space(M: Sequence[Sequence[QuadScalar]]) -> tuple:
    """Canonical key of the column space: reduced row echelon form of M^T."""
    d = len(M)
    rows = [[M[i][j] for i in range(d)] for j in range(d)]  # rows of M^T
    return _rref_key(rows, d)


def _rref_key(rows: list[list[QuadScalar]], d: int) -> tuple:
    rows = [list(r) for r in rows if any(not x.is_zero() for x in r)]
    out: list[list[QuadScalar]] = []
    col = 0
    while rows and col < d:
        piv = next((r for r in rows if not r[col].is_zero()), None)
        if piv is None:
            col += 1
            continue
        rows.remove(piv)
        inv = piv[col].inverse()
        piv = [x * inv for x in piv]
        rows = [[x - r[col] * y for x, y in zip(r, piv)] for r in rows]
        rows = [r for r in rows if any(not x.is_zero() for x in r)]
        out = [[x - o[col] * y for x, y in zip(o, piv)] for o in out]
        out.append(piv)
        col += 1
    return tuple(tuple(r) for r in out)


def _image(M, basis: tuple) -> tuple:
    d = len(M)
    vecs = [[sum((M[i][k] * b[k] for k in range(d)), QuadScalar(0)) for i in range(d)] for b in basis]
    return _rref_key(vecs, d)


def certify_no_idempotents(
    system: IfsSystem, max_depth: int = 8, subspace_cap: int = 10_000
) -> IdempotentEvidence:
    """Decide whether the semigroup contains a constant map.

    1. All generator determinants nonzero: every product is invertible.
    2. Otherwise track the image subspace ``Im(M_w)`` of words under
       left multiplication.  If the reachable set of subspaces closes up
       without reaching ``{0}``, no product of linear parts vanishes.
    3. If ``{0}`` is reached, the shortest constant word is located in a
       ball, which also yields the shortlex-least witness.  If the subspace
       orbit exceeds ``subspace_cap``, fall back to a ball search.
    """
    lins = [m.linear for m in system.maps]
    if all(not det(M).is_zero() for M in lins):
        return IdempotentEvidence("CertifiedNone", method="determinants",
                                  detail="every generator has an invertible linear part")

    d = system.dim
    full = _rref_key([[QuadScalar(int(i == j)) for j in range(d)] for i in range(d)], d)
    seen = {full: 0}
    queue = deque([full])
    hit_depth = None
    while queue:
        V = queue.popleft()
        k = seen[V]
        for M in lins:
            W = _image(M, V)
            if W in seen:
                continue
            seen[W] = k + 1
            if not W:
                hit_depth = k + 1
                queue.clear()
                break
            if len(seen) > subspace_cap:
                queue.clear()
                break
            queue.append(W)
    if hit_depth is None and len(seen) <= subspace_cap:
        return IdempotentEvidence(
            "CertifiedNone", method="image-subspace closure",
            detail=f"{len(seen)} reachable image subspaces, none trivial",
        )

    limit = hit_depth if hit_depth is not None else max_depth
    try:
        ball = build_ball(system, limit)
    except BallTruncated as exc:
        return IdempotentEvidence("UnknownUpTo", depth=exc.completed_depth, method="ball search")
    consts = find_idempotents(ball)
    if consts:
        v = min(consts)
        return IdempotentEvidence("FoundAtDepth", depth=ball.depths[v], witness=ball.word(v),
                                  method="ball search")
    return IdempotentEvidence("UnknownUpTo", depth=limit, method="ball search")


def balls_isomorphic(b1: CayleyBall, b2: CayleyBall, depth: int) -> bool:
    """Rooted, label-preserving isomorphism of the depth-``depth`` induced subgraphs.

    Both graphs are deterministic and accessible from the root, so an
    isomorphism that fixes labels is unique if it exists; it is found by a
    parallel BFS that insists the pairing stay a bijection.
    """
    if b1.radius < depth + 1 or b2.radius < depth + 1:
        raise ValueError(f"both balls need radius >= {depth + 1}")
    if len(b1.system) != len(b2.system):
        return False
    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}

    def pair(u: int, v: int, queue: deque) -> bool:
        if fwd.get(u, v) != v or bwd.get(v, u) != u:
            return False
        if u not in fwd:
            fwd[u], bwd[v] = v, u
            queue.append((u, v))
        return True

    queue: deque = deque()
    for g in range(len(b1.system)):
        if not pair(b1.roots[g], b2.roots[g], queue):
            return False
    while queue:
        u, v = queue.popleft()
        if b1.depths[u] != b2.depths[v]:
            return False
        for t1, t2 in zip(b1.succ[u], b2.succ[v]):
            in1, in2 = b1.depths[t1] <= depth, b2.depths[t2] <= depth
            if in1 != in2:
                return False
            if in1 and not pair(t1, t2, queue):
                return False
    return True


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def cayley_dot(ball: CayleyBall) -> str:
    """Graphviz rendering; dead-ends are drawn as double circles."""
    sysm = ball.system
    lines = ["digraph cayley {", '  rankdir=TB;', '  root [label="id", shape=point];']
    for v in range(len(ball)):
        label = _dot_escape(sysm.word_str(ball.word(v)))
        attrs = [f'label="{label}"']
        if ball.succ[v] is not None and is_dead_end(ball, v):
            attrs.append('shape=doublecircle, dead_end="true"')
        elif ball.succ[v] is None:
            attrs.append("style=dashed")
        lines.append(f"  v{v} [{', '.join(attrs)}];")
    for g, v in enumerate(ball.roots):
        lines.append(f'  root -> v{v} [label="{_dot_escape(sysm.names[g])}"];')
    for v, g, t in ball.edges:
        lines.append(f'  v{v} -> v{t} [label="{_dot_escape(sysm.names[g])}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
