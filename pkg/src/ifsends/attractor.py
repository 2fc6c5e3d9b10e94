"""Finite, exact approximations of the attractor.

A cloud is the set ``{w(seed) : |w| = L}`` for an exact attractor point
``seed``, so every cloud point lies on the attractor and every attractor
point is within ``error_radius`` of the cloud.  Everything that involves
distances (components, isolation, Hausdorff bounds, rasters) works on the
float images of those exact points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .affine import AffineMap, ExactPoint, IfsSystem, apply, compose, contraction_bound, fixed_point, is_constant
from .exact_field import format_scalar
from .semigroup import CayleyBall, Word, find_idempotents, word_evaluate

__all__ = [
    "DEFAULT_CLOUD_CAP",
    "CloudTooLarge",
    "WalkSpec",
    "PointCloud",
    "Component",
    "ComponentReport",
    "IdempotentImageSet",
    "GridRaster",
    "product_contraction",
    "sample_cloud",
    "encode_walk",
    "walk_is_ray",
    "count_components",
    "component_of",
    "idempotent_images",
    "isolated_candidates",
    "render_raster",
    "to_pgm",
    "cloud_csv",
    "hausdorff_upper",
]

DEFAULT_CLOUD_CAP = 2_000_000
DEGENERACY_FACTOR = 10
_LINEAR_CAP = 200_000
_KNN = 16


class CloudTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class WalkSpec:
    """The eventually periodic walk ``preperiod . period . period ...``."""

    preperiod: Word
    period: Word

    def __post_init__(self) -> None:
        if not self.period:
            raise ValueError("period must be nonempty")

    def prefix(self, n: int) -> Word:
        out = list(self.preperiod[:n])
        i = 0
        while len(out) < n:
            out.append(self.period[i % len(self.period)])
            i += 1
        return tuple(out)


@dataclass
class PointCloud:
    system: IfsSystem
    points: list[ExactPoint]
    word_length: int
    error_radius: float
    seed: ExactPoint | None = None
    _layers: list[tuple[list[int], list[int]]] = field(default_factory=list, repr=False)
    _floats: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def floats(self) -> np.ndarray:
        if self._floats is None:
            d = self.system.dim
            arr = np.array([p.to_float() for p in self.points], dtype=float)
            self._floats = arr.reshape(len(self.points), d)
        return self._floats

    def word(self, i: int) -> Word:
        """A word ``w`` of length ``word_length`` with ``points[i] == w(seed)``."""
        if not self._layers:
            return ()
        out = []
        for gens, parents in reversed(self._layers):
            out.append(gens[i])
            i = parents[i]
        return tuple(out)


def product_contraction(system: IfsSystem, L: int, cap: int = _LINEAR_CAP) -> float:
    """Largest Frobenius bound over the linear parts of all products of length ``L``.

    Linear parts are enumerated exactly with deduplication; if their number
    exceeds ``cap`` the bound falls back to ``lambda ** L``.
    """
    if L == 0:
        return 1.0
    zero = [0] * system.dim
    lins = {}
    for m in system.maps:
        lm = AffineMap.from_parts(m.linear, zero, m.r)
        lins.setdefault(lm.key, lm)
    gens = list(lins.values())
    layer = dict(lins)
    for _ in range(L - 1):
        nxt: dict[tuple, AffineMap] = {}
        for s in layer.values():
            for g in gens:
                t = compose(s, g)
                nxt.setdefault(t.key, t)
        if len(nxt) > cap:
            return system.lam ** L
        layer = nxt
    return min(max(contraction_bound(m) for m in layer.values()), system.lam ** L)


def sample_cloud(system: IfsSystem, L: int, cap: int = DEFAULT_CLOUD_CAP) -> PointCloud:
    """Exact points ``w(seed)`` for all words ``w`` of length ``L``.

    The seed is the fixed point of the first nonconstant generator.  Words
    are expanded one letter at a time with exact deduplication, so the work
    is bounded by the number of distinct points per layer.
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    gens = system.maps
    if all(is_constant(m) for m in gens):
        pts = {}
        for m in gens:
            p = apply(m, ExactPoint.from_coords([0] * system.dim, m.r))
            pts.setdefault(p.key, p)
        return PointCloud(system, list(pts.values()), L, 0.0)
    if len(gens) ** L > cap:
        raise CloudTooLarge(
            f"{len(gens)}^{L} = {len(gens) ** L} words exceeds the cloud cap {cap}")
    seed = fixed_point(next(m for m in gens if not is_constant(m)))
    points = [seed]
    layers = []
    for _ in range(L):
        index: dict[tuple, int] = {}
        nxt: list[ExactPoint] = []
        lg: list[int] = []
        lp: list[int] = []
        for g, m in enumerate(gens):
            for i, p in enumerate(points):
                q = apply(m, p)
                if q.key not in index:
                    index[q.key] = len(nxt)
                    nxt.append(q)
                    lg.append(g)
                    lp.append(i)
        points = nxt
        layers.append((lg, lp))
    err = system.diameter_bound * product_contraction(system, L)
    return PointCloud(system, points, L, err, seed, layers)


def encode_walk(system: IfsSystem, walk: WalkSpec) -> ExactPoint:
    """Exact point encoded by an eventually periodic walk.

    The limit is ``P(fix(Q))``.  When a prefix is already constant this is
    that constant, because every later prefix equals it.
    """
    q = word_evaluate(system, walk.period)
    x = fixed_point(q)
    if walk.preperiod:
        x = apply(word_evaluate(system, walk.preperiod), x)
    return x


def walk_is_ray(system: IfsSystem, walk: WalkSpec) -> bool:
    """Whether the walk visits pairwise distinct vertices.

    For contractions a vertex can only repeat once the prefix is constant,
    and the rank of the prefixes stabilises within ``dim`` periods, so one
    prefix of length ``|P| + (dim + 1)|Q|`` decides.
    """
    n = len(walk.preperiod) + (system.dim + 1) * len(walk.period)
    return not is_constant(word_evaluate(system, walk.prefix(n)))


@dataclass(frozen=True)
class Component:
    size: int
    bbox_min: tuple[float, ...]
    bbox_max: tuple[float, ...]
    diameter: float

    def to_json(self) -> dict:
        return {"size": self.size, "bbox": [list(self.bbox_min), list(self.bbox_max)],
                "diameter": self.diameter}


@dataclass
class ComponentReport:
    epsilon: float
    component_count: int
    components: list[Component]
    nondegenerate_count: int
    labels: np.ndarray
    degeneracy_threshold: float
    one_point: bool = False

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "component_count": self.component_count,
            "nondegenerate_count": self.nondegenerate_count,
            "degeneracy_threshold": self.degeneracy_threshold,
            "one_point_space": self.one_point,
            "components": [c.to_json() for c in self.components],
        }


def _diameter(pts: np.ndarray) -> float:
    if len(pts) <= 1:
        return 0.0
    if pts.shape[1] > 1 and len(pts) > pts.shape[1] + 1:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            # flat set: the extreme points along the box span its diameter
            return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    if pts.shape[1] == 1:
        return float(pts.max() - pts.min())
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def _cell_roots(X: np.ndarray, epsilon: float, seed_roots: np.ndarray) -> np.ndarray:
    """Union-find over cells of side epsilon / sqrt(d), started from known components.

    Every cell lies inside one component.  Nearby cells are compared point
    set against point set, but only when they are not already joined, so
    dense clouds never enumerate their point pairs.
    """
    d = X.shape[1]
    h = epsilon / math.sqrt(d)
    cells = np.floor((X - X.min(axis=0)) / h).astype(np.int64)
    keys, inverse = np.unique(cells, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(len(keys) + 1))
    where = {tuple(k): c for c, k in enumerate(keys.tolist())}
    parent = list(range(len(keys)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        a, b = find(a), find(b)
        if a != b:
            parent[max(a, b)] = min(a, b)

    anchor: dict[int, int] = {}
    for c, r in zip(inverse.tolist(), seed_roots.tolist()):
        union(c, anchor.setdefault(r, c))

    R = math.ceil(math.sqrt(d)) + 1
    offsets = [o for o in itertools.product(range(-R, R + 1), repeat=d) if o > (0,) * d]
    trees: dict[int, cKDTree] = {}
    for c, key in enumerate(keys.tolist()):
        for o in offsets:
            nb = where.get(tuple(k + dk for k, dk in zip(key, o)))
            if nb is None or find(c) == find(nb):
                continue
            if nb not in trees:
                trees[nb] = cKDTree(X[order[bounds[nb]:bounds[nb + 1]]])
            dist, _ = trees[nb].query(X[order[bounds[c]:bounds[c + 1]]])
            if dist.min() <= epsilon:
                union(c, nb)
    return np.array([find(c) for c in range(len(keys))])[inverse]


def _chain_labels(X: np.ndarray, epsilon: float) -> np.ndarray:
    """Component labels of the graph joining points at distance <= epsilon.

    The K nearest neighbours within epsilon give exact edges; when no point
    has K such neighbours that graph is the whole epsilon-graph, otherwise
    the cell pass completes it.  Labels are numbered by first occurrence.
    """
    n = len(X)
    if n == 0:
        return np.zeros(0, dtype=int)
    K = min(_KNN, n)
    # the query bound is exclusive; widen it and filter with <= below
    dist, idx = cKDTree(X).query(X, k=K, distance_upper_bound=epsilon * (1 + 1e-9) + 1e-300)
    dist, idx = dist.reshape(n, K), idx.reshape(n, K)
    ok = dist <= epsilon
    rows = np.repeat(np.arange(n), K)[ok.ravel()]
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, idx[ok])), shape=(n, n))
    roots = connected_components(graph, directed=False)[1]
    if K < n and ok[:, -1].any() and epsilon > 0:
        roots = _cell_roots(X, epsilon, roots)
    _, first, raw = np.unique(roots, return_index=True, return_inverse=True)
    remap = np.empty(len(first), dtype=int)
    remap[np.argsort(first)] = np.arange(len(first))
    return remap[raw.reshape(-1)]


def count_components(cloud: PointCloud, epsilon: float,
                     degeneracy: float | None = None) -> ComponentReport:
    """ε-chain components: points at distance <= epsilon are joined."""
    if epsilon < 2 * cloud.error_radius:
        raise ValueError(
            f"epsilon {epsilon:g} is below 2 * error_radius = {2 * cloud.error_radius:g}")
    thr = DEGENERACY_FACTOR * epsilon if degeneracy is None else degeneracy
    X = cloud.floats
    n = len(X)
    labels = _chain_labels(X, epsilon)
    count = int(labels.max()) + 1 if n else 0
    comps = []
    for c in range(count):
        pts = X[labels == c]
        comps.append(Component(len(pts), tuple(pts.min(axis=0).tolist()),
                               tuple(pts.max(axis=0).tolist()), _diameter(pts)))
    nondeg = sum(1 for c in comps if c.diameter > thr)
    return ComponentReport(epsilon, count, comps, nondeg, labels, thr, one_point=(n == 1))


def component_of(cloud: PointCloud, report: ComponentReport, x: ExactPoint) -> int:
    """Label of the cloud point nearest to ``x`` (an attractor point)."""
    _, i = cKDTree(cloud.floats).query(x.to_float())
    return int(report.labels[int(i)])


@dataclass
class IdempotentImageSet:
    values: list[ExactPoint]
    depth: int

    def __contains__(self, p: ExactPoint) -> bool:
        return p.key in {v.key for v in self.values}

    def keys(self) -> set[tuple]:
        return {v.key for v in self.values}


def idempotent_images(ball: CayleyBall) -> IdempotentImageSet:
    seen = {}
    for v, p in find_idempotents(ball).items():
        seen.setdefault(p.key, p)
    return IdempotentImageSet(list(seen.values()), ball.radius)


def isolated_candidates(cloud: PointCloud, epsilon: float) -> list[ExactPoint]:
    """Cloud points with no other cloud point in their closed ε-ball.

    A one-point cloud has no candidates: a one-point space counts as
    nonisolated.
    """
    if epsilon < 2 * cloud.error_radius:
        raise ValueError(
            f"epsilon {epsilon:g} is below 2 * error_radius = {2 * cloud.error_radius:g}")
    if len(cloud) <= 1:
        return []
    X = cloud.floats
    dist, _ = cKDTree(X).query(X, k=2)
    return [cloud.points[i] for i in np.flatnonzero(dist[:, 1] > epsilon)]


@dataclass
class GridRaster:
    width: int
    height: int
    pixels: np.ndarray  # bool, shape (height, width), row 0 at the top
    origin: tuple[float, float]
    resolution: int

    @property
    def set_count(self) -> int:
        return int(self.pixels.sum())


def render_raster(cloud: PointCloud, resolution: int) -> GridRaster:
    """Binary raster at ``resolution`` pixels per unit over the padded bounding box."""
    d = cloud.system.dim
    if d > 2:
        raise ValueError("rasters are only available in dimension 1 and 2")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    X = cloud.floats
    pad = cloud.error_radius
    lo = X.min(axis=0) - pad
    hi = X.max(axis=0) + pad
    w = int(math.floor((hi[0] - lo[0]) * resolution)) + 1
    cols = np.clip(np.floor((X[:, 0] - lo[0]) * resolution).astype(int), 0, w - 1)
    if d == 1:
        h = 8
        pix = np.zeros((h, w), dtype=bool)
        pix[:, cols] = True
        return GridRaster(w, h, pix, (float(lo[0]), 0.0), resolution)
    h = int(math.floor((hi[1] - lo[1]) * resolution)) + 1
    rows = np.clip(np.floor((hi[1] - X[:, 1]) * resolution).astype(int), 0, h - 1)
    pix = np.zeros((h, w), dtype=bool)
    pix[rows, cols] = True
    return GridRaster(w, h, pix, (float(lo[0]), float(hi[1])), resolution)


def to_pgm(raster: GridRaster) -> bytes:
    header = f"P5\n{raster.width} {raster.height}\n255\n".encode("ascii")
    return header + (raster.pixels.astype(np.uint8) * 255).tobytes()


def cloud_csv(cloud: PointCloud) -> str:
    d = cloud.system.dim
    axes = "xyz"[:d]
    lines = [",".join([f"{a}_exact" for a in axes] + [f"{a}" for a in axes])]
    for p, f in zip(cloud.points, cloud.floats):
        exact = [format_scalar(c) for c in p.coords]
        lines.append(",".join(exact + [repr(float(v)) for v in f]))
    return "\n".join(lines) + "\n"


def _directed(A: np.ndarray, B: np.ndarray) -> float:
    if len(A) == 0:
        return 0.0
    dist, _ = cKDTree(B).query(A)
    return float(dist.max())


def hausdorff_upper(a: PointCloud, b: PointCloud) -> float:
    """Certified upper bound on the Hausdorff distance of the two attractors.

    Clouds lie on their attractors, so every point of attractor A is within
    ``a.error_radius`` of cloud A, and cloud B is inside attractor B.
    """
    if a.system.dim != b.system.dim:
        raise ValueError("clouds live in different dimensions")
    h_ab = _directed(a.floats, b.floats)
    h_ba = _directed(b.floats, a.floats)
    bound = max(h_ab + a.error_radius, h_ba + b.error_radius)
    return bound * (1 + 1e-12) + 1e-15
