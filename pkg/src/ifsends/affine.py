"""Affine maps ``x -> M x + t`` over Q(sqrt r) and iterated function systems.

Maps and points are stored packed: a common positive integer denominator and
a flat tuple of integer pairs ``(p, q)`` meaning ``(p + q sqrt r) / den``.
The pair tuple is reduced by the gcd of all entries, so two maps are equal as
functions exactly when their packed keys are equal.  This is what makes the
Cayley-graph deduplication a plain dictionary lookup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact_field import (
    ExactMatrix,
    ExactVector,
    QuadScalar,
    identity,
    is_squarefree,
    solve,
)

__all__ = [
    "AffineMap",
    "ExactPoint",
    "IfsSystem",
    "AdmissionError",
    "compose",
    "is_constant",
    "apply",
    "fixed_point",
    "contraction_bound",
    "bounding_ball",
    "enclosing_ball",
]

FROBENIUS_SLACK = 1e-9


class AdmissionError(ValueError):
    """A system that violates the IFS admission rules."""


def _pack(values: Sequence[QuadScalar]) -> tuple[int, tuple[int, ...]]:
    den = 1
    for v in values:
        den = math.lcm(den, v.rat.denominator, v.rad.denominator)
    num: list[int] = []
    for v in values:
        num.append(v.rat.numerator * (den // v.rat.denominator))
        num.append(v.rad.numerator * (den // v.rad.denominator))
    return _reduce(den, num)


def _reduce(den: int, num: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    g = math.gcd(den, *num)
    if g != 1:
        return den // g, tuple(x // g for x in num)
    return den, tuple(num)


def _unpack(den: int, num: Sequence[int], r: int) -> tuple[QuadScalar, ...]:
    return tuple(
        QuadScalar(Fraction(num[2 * i], den), Fraction(num[2 * i + 1], den), r)
        for i in range(len(num) // 2)
    )


class AffineMap:
    """Affine self-map of R^d with coefficients in Q(sqrt r)."""

    __slots__ = ("dim", "r", "den", "num", "_hash")

    def __init__(self, dim: int, r: int, den: int, num: tuple[int, ...]) -> None:
        # callers hand in already-reduced data; use from_parts for user input
        self.dim = dim
        self.r = r
        self.den = den
        self.num = num
        self._hash = hash((den, num))

    @classmethod
    def from_parts(cls, linear, translation, r: int = 0) -> "AffineMap":
        d = len(linear)
        if any(len(row) != d for row in linear) or len(translation) != d:
            raise ValueError("dimension mismatch between linear part and translation")
        vals = [QuadScalar._coerce(x) if not isinstance(x, QuadScalar) else x
                for row in linear for x in row]
        vals += [QuadScalar._coerce(x) if not isinstance(x, QuadScalar) else x
                 for x in translation]
        for v in vals:
            if v.rad and v.r != r:
                raise ValueError(f"coefficient {v} is not in Q(sqrt {r})")
        den, num = _pack(vals)
        if r in (0, 1):
            num = tuple(0 if i % 2 else x for i, x in enumerate(num))
        return cls(d, r, den, num)

    @classmethod
    def identity(cls, dim: int, r: int = 0) -> "AffineMap":
        return cls.from_parts(identity(dim), [0] * dim, r)

    @property
    def key(self) -> tuple:
        return (self.den, self.num)

    @property
    def linear(self) -> ExactMatrix:
        d = self.dim
        vals = _unpack(self.den, self.num[: 2 * d * d], self.r)
        return tuple(tuple(vals[i * d:(i + 1) * d]) for i in range(d))

    @property
    def translation(self) -> ExactVector:
        d = self.dim
        return _unpack(self.den, self.num[2 * d * d:], self.r)

    def linear_float(self) -> np.ndarray:
        d, s = self.dim, math.sqrt(self.r)
        n = self.num
        out = np.empty((d, d))
        for i in range(d):
            for j in range(d):
                c = 2 * (i * d + j)
                out[i, j] = n[c] / self.den + (n[c + 1] / self.den) * s
        return out

    def translation_float(self) -> np.ndarray:
        d, s = self.dim, math.sqrt(self.r)
        n, base = self.num, 2 * self.dim * self.dim
        return np.array([n[base + 2 * i] / self.den + (n[base + 2 * i + 1] / self.den) * s
                         for i in range(d)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineMap):
            return NotImplemented
        return self.dim == other.dim and self.den == other.den and self.num == other.num

    def __hash__(self) -> int:
        return self._hash

    def __call__(self, p: "ExactPoint") -> "ExactPoint":
        return apply(self, p)

    def __matmul__(self, other: "AffineMap") -> "AffineMap":
        return compose(self, other)

    def __repr__(self) -> str:
        lin = "; ".join(", ".join(str(x) for x in row) for row in self.linear)
        tr = ", ".join(str(x) for x in self.translation)
        return f"AffineMap([{lin}] ; [{tr}])"


@dataclass(frozen=True)
class ExactPoint:
    """Point of R^d with coordinates in Q(sqrt r), packed like AffineMap."""

    dim: int
    r: int
    den: int
    num: tuple[int, ...]

    @classmethod
    def from_coords(cls, coords, r: int = 0) -> "ExactPoint":
        vals = [x if isinstance(x, QuadScalar) else QuadScalar(x, 0, r) for x in coords]
        den, num = _pack(vals)
        if r in (0, 1):
            num = tuple(0 if i % 2 else x for i, x in enumerate(num))
        return cls(len(vals), r, den, num)

    @property
    def coords(self) -> ExactVector:
        return _unpack(self.den, self.num, self.r)

    @property
    def key(self) -> tuple:
        return (self.den, self.num)

    def to_float(self) -> np.ndarray:
        s = math.sqrt(self.r)
        n, den = self.num, self.den
        return np.array([n[2 * i] / den + (n[2 * i + 1] / den) * s for i in range(self.dim)])

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


def compose(f: AffineMap, g: AffineMap) -> AffineMap:
    """Return ``f o g`` (``g`` is applied first)."""
    d = f.dim
    if g.dim != d:
        raise ValueError(f"dimension mismatch: {d} vs {g.dim}")
    r = f.r or g.r
    F, G = f.num, g.num
    dg = g.den
    out = [0] * len(F)
    base = 2 * d * d
    if r:
        for i in range(d):
            ri = 2 * i * d
            for j in range(d + 1):
                # column j of [Mg | tg]
                p = q = 0
                for k in range(d):
                    a, b = F[ri + 2 * k], F[ri + 2 * k + 1]
                    c = 2 * (k * d + j) if j < d else base + 2 * k
                    x, y = G[c], G[c + 1]
                    p += a * x + r * b * y
                    q += a * y + b * x
                if j < d:
                    o = ri + 2 * j
                else:
                    o = base + 2 * i
                    p += dg * F[o]
                    q += dg * F[o + 1]
                out[o], out[o + 1] = p, q
    else:
        for i in range(d):
            ri = 2 * i * d
            for j in range(d + 1):
                p = 0
                for k in range(d):
                    c = 2 * (k * d + j) if j < d else base + 2 * k
                    p += F[ri + 2 * k] * G[c]
                if j < d:
                    out[ri + 2 * j] = p
                else:
                    out[base + 2 * i] = p + dg * F[base + 2 * i]
    den, num = _reduce(f.den * dg, out)
    return AffineMap(d, r, den, num)


def is_constant(f: AffineMap) -> bool:
    return not any(f.num[: 2 * f.dim * f.dim])


def apply(f: AffineMap, p: ExactPoint) -> ExactPoint:
    d = f.dim
    if p.dim != d:
        raise ValueError(f"dimension mismatch: {d} vs {p.dim}")
    r = f.r or p.r
    F, P, dp = f.num, p.num, p.den
    base = 2 * d * d
    out = [0] * (2 * d)
    for i in range(d):
        ri = 2 * i * d
        a0, b0 = F[base + 2 * i], F[base + 2 * i + 1]
        pp, qq = dp * a0, dp * b0
        for k in range(d):
            a, b = F[ri + 2 * k], F[ri + 2 * k + 1]
            x, y = P[2 * k], P[2 * k + 1]
            pp += a * x + r * b * y
            qq += a * y + b * x
        out[2 * i], out[2 * i + 1] = pp, qq
    den, num = _reduce(f.den * dp, out)
    return ExactPoint(d, r, den, num)


def fixed_point(f: AffineMap) -> ExactPoint:
    """Unique solution of ``f(p) = p``; raises ZeroDivisionError if I - M is singular."""
    d = f.dim
    lin = f.linear
    i_minus_m = tuple(
        tuple(QuadScalar(int(i == j)) - lin[i][j] for j in range(d)) for i in range(d)
    )
    return ExactPoint.from_coords(solve(i_minus_m, f.translation), f.r)


def contraction_bound(f: AffineMap) -> float:
    """Frobenius norm of the linear part plus a fixed slack.

    This bounds the operator 2-norm from above; admission needs it below 1.
    """
    return float(np.linalg.norm(f.linear_float())) + FROBENIUS_SLACK


@dataclass
class IfsSystem:
    """An admitted iterated function system."""

    dim: int
    radicand: int
    names: tuple[str, ...]
    maps: tuple[AffineMap, ...]
    lam: float = field(init=False)
    diameter_bound: float = field(init=False)

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise AdmissionError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if not is_squarefree(self.radicand):
            raise AdmissionError(f"radicand {self.radicand} is not a square-free non-negative integer")
        if not self.maps:
            raise AdmissionError("a system needs at least one generator")
        if len(self.names) != len(self.maps):
            raise AdmissionError("one name per generator required")
        if len(set(self.names)) != len(self.names):
            dup = next(n for n in self.names if self.names.count(n) > 1)
            raise AdmissionError(f"duplicate generator name {dup!r}")
        self.names = tuple(self.names)
        self.maps = tuple(self.maps)
        for name, m in zip(self.names, self.maps):
            if m.dim != self.dim:
                raise AdmissionError(f"generator {name!r} has dimension {m.dim}, expected {self.dim}")
            bound = contraction_bound(m)
            if bound >= 1:
                raise AdmissionError(
                    f"generator {name!r} is not certified contracting "
                    f"(Frobenius bound {bound:.6f} >= 1)"
                )
        self.lam = max(contraction_bound(m) for m in self.maps)
        self.diameter_bound = bounding_ball(self)[1]

    @classmethod
    def from_maps(cls, maps: dict[str, AffineMap], radicand: int = 0) -> "IfsSystem":
        names = tuple(maps)
        first = next(iter(maps.values()))
        return cls(first.dim, radicand, names, tuple(maps.values()))

    def __len__(self) -> int:
        return len(self.maps)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def word(self, names: Sequence[str] | str) -> tuple[int, ...]:
        """Translate generator names to a word of indices."""
        if isinstance(names, str):
            names = names.split() if " " in names else list(names)
        return tuple(self.index(n) for n in names)

    def word_str(self, word: Sequence[int], sep: str = "") -> str:
        if any(len(n) > 1 for n in self.names) and not sep:
            sep = " "
        return sep.join(self.names[i] for i in word)

    def subsystem(self, names: Sequence[str]) -> "IfsSystem":
        idx = [self.index(n) for n in names]
        return IfsSystem(self.dim, self.radicand, tuple(names), tuple(self.maps[i] for i in idx))


def _upward(x: float) -> float:
    return x * (1 + 1e-12) + 1e-15


def bounding_ball(system: IfsSystem) -> tuple[float, float]:
    """Radius ``R`` of an origin-centred ball containing the attractor, and a diameter bound.

    ``R = max ||t_f|| / (1 - lambda)``.  The returned diameter bound is the
    smaller of ``2R`` and the diameter of the tighter ball from
    :func:`enclosing_ball`, so it is always a valid upper bound.
    """
    lam = max(contraction_bound(m) for m in system.maps)
    tmax = max(float(np.linalg.norm(m.translation_float())) for m in system.maps)
    R = _upward(tmax / (1 - lam))
    _, rc = enclosing_ball(system)
    return R, min(2 * R, 2 * rc)


def _word_depth(n_gens: int, budget: int = 4096) -> int:
    m = 1
    while n_gens ** (m + 1) <= budget and m < 8:
        m += 1
    return m


def enclosing_ball(system: IfsSystem) -> tuple[np.ndarray, float]:
    """A certified ball ``B(c, R)`` containing the attractor.

    Uses the fact that if ``|w(c) - c| + Lip(w) R <= R`` for every word of a
    fixed length ``m``, the m-fold Hutchinson operator maps the ball into
    itself.  Lipschitz constants are Frobenius norms of the exact products.
    """
    maps = system.maps
    pts = []
    for m in maps:
        try:
            pts.append(fixed_point(m).to_float())
        except ZeroDivisionError:  # pragma: no cover - excluded by admission
            pts.append(m.translation_float())
    c = np.mean(pts, axis=0)
    depth = _word_depth(len(maps))
    lins = [m.linear_float() for m in maps]
    trs = [m.translation_float() for m in maps]
    # compose in floats: w = f1 o ... o fm; exact products are tiny, slack covers rounding
    layer = [(np.eye(system.dim), np.zeros(system.dim))]
    for _ in range(depth):
        layer = [(L @ lins[g], L @ trs[g] + t) for (L, t) in layer for g in range(len(maps))]
    R = 0.0
    for L, t in layer:
        lip = float(np.linalg.norm(L)) + FROBENIUS_SLACK
        off = float(np.linalg.norm(L @ c + t - c))
        R = max(R, off / (1 - lip))
    return c, _upward(R) + 1e-9 * (R > 0)
