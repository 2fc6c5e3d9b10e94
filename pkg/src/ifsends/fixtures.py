"""Built-in systems: every affine example of the ends-of-IFS examples.

Each fixture is DSL source plus the analysis parameters and expected
outcomes used by ``verify`` and the acceptance tests.

Two transcriptions differ from the printed formulas, because the printed
maps do not satisfy the printed relations:

* Koch: ``b`` carries an overall sign on its linear part, and ``c`` has
  translation ``(1/3, sqrt(3)/9)``.  With these, ``a`` and ``b`` are the two
  halves of the standard Koch curve from (0, 0) to (1, 0) and both relations
  hold.  ``KOCH3_AS_PRINTED`` keeps the literal text for the anomaly path.
* Sierpinski ``e``: the ``y sqrt(3)/8`` term of the first coordinate is
  negative, which makes ``e`` the rank-one projection onto the right edge
  conjugate to ``d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .dsl import IfsDocument, parse

__all__ = ["Fixture", "FIXTURE_SOURCES", "KOCH3_AS_PRINTED", "fixtures", "fixture", "fixture_specs"]

_KOCH_AB = """\
map a : [-1/2, 0+1/6r; 0-1/6r, -1/2] ; [1/2, 0+1/6r]
map b : [-1/2, 0-1/6r; 0+1/6r, -1/2] ; [1, 0]
"""

_SIERPINSKI_ABC = """\
map a : [1/2, 0; 0, 1/2] ; [0, 0]
map b : [1/2, 0; 0, 1/2] ; [1/2, 0]
map c : [1/2, 0; 0, 1/2] ; [1/4, 0+1/4r]
"""

_CARPET8 = """\
map a1 : [1/3, 0; 0, 1/3] ; [0, 2/3]
map a2 : [1/3, 0; 0, 1/3] ; [1/3, 2/3]
map a3 : [1/3, 0; 0, 1/3] ; [2/3, 2/3]
map a4 : [1/3, 0; 0, 1/3] ; [0, 1/3]
map a6 : [1/3, 0; 0, 1/3] ; [2/3, 1/3]
map a7 : [1/3, 0; 0, 1/3] ; [0, 0]
map a8 : [1/3, 0; 0, 1/3] ; [1/3, 0]
map a9 : [1/3, 0; 0, 1/3] ; [2/3, 0]
"""

FIXTURE_SOURCES: dict[str, str] = {
    "ex14_projections": """\
# two projections onto the axes; attractor {0}
dim 2
radicand 0
map a : [1/2, 0; 0, 0] ; [0, 0]
map b : [0, 0; 0, 1/2] ; [0, 0]
expect a b = b a
""",
    "ex14_halfconst": """\
# x/2 and the constant 1; attractor {2^-n} u {0}
dim 1
radicand 0
map a : [1/2] ; [0]
map b : [0] ; [1]
expect b a = b b
expect a b a = a b b
""",
    "koch2": "# Koch curve, two similarities of ratio 1/sqrt(3)\ndim 2\nradicand 3\n" + _KOCH_AB,
    "koch3": "# Koch curve with the linking map c\ndim 2\nradicand 3\n" + _KOCH_AB + """\
map c : [1/3, 0; 0, 1/3] ; [1/3, 0+1/9r]
expect a a b = c a
expect c b = b b a
""",
    "sierpinski3": "# Sierpinski triangle\ndim 2\nradicand 3\n" + _SIERPINSKI_ABC,
    "sierpinski5": "# Sierpinski triangle with two edge projections\ndim 2\nradicand 3\n"
    + _SIERPINSKI_ABC + """\
map d : [1/2, 0; 0, 0] ; [1/4, 0]
map e : [1/8, 0-1/8r; 0-1/8r, 3/8] ; [3/4, 0+1/4r]
expect a b d = d a d
expect d b d = b a d
expect b c e = e b e
expect e c e = c b e
""",
    "carpet8": "# Sierpinski carpet, keypad numbering\ndim 2\nradicand 0\n" + _CARPET8,
    "carpet10": "# Sierpinski carpet with two projections to vertical lines\ndim 2\nradicand 0\n"
    + _CARPET8 + """\
map w : [0, 0; 0, 2/3] ; [0, 1/6]
map e : [0, 0; 0, 2/3] ; [1, 1/6]
expect a1 e = a2 w
expect a2 e = a3 w
expect a7 e = a8 w
expect a8 e = a9 w
expect a4 w = w a4
expect a6 e = e a6
expect w a1 a4 = a1 a7 w
expect w a7 a4 = a7 a1 w
expect e a1 a4 = a3 a9 e
""",
    "crooked_koch4": """\
# crooked Koch curve; z -> z/3, (1+i)z/3 + 1/3, -iz/3 + (2+i)/3, z/3 + 2/3 as real matrices
dim 2
radicand 0
map a : [1/3, 0; 0, 1/3] ; [0, 0]
map b : [1/3, -1/3; 1/3, 1/3] ; [1/3, 0]
map c : [0, 1/3; -1/3, 0] ; [2/3, 1/3]
map d : [1/3, 0; 0, 1/3] ; [2/3, 0]
""",
    "ex19_abc": """\
# unit interval plus the constant 1
dim 1
radicand 2
map a : [1/2] ; [0]
map b : [1/2] ; [1/2]
map c : [0] ; [1]
""",
    "ex19_abd": """\
# unit interval plus the constant sqrt(2)
dim 1
radicand 2
map a : [1/2] ; [0]
map b : [1/2] ; [1/2]
map d : [0] ; [0+1r]
""",
    "ex21": """\
# countable attractor with two accumulation points
dim 2
radicand 0
map a : [1/2, 0; 0, 0] ; [0, 0]
map b : [0, 0; 1/2, 0] ; [1, 0]
""",
}

KOCH3_AS_PRINTED = """\
dim 2
radicand 3
map a : [-1/2, 0+1/6r; 0-1/6r, -1/2] ; [1/2, 0+1/6r]
map b : [1/2, 0+1/6r; 0-1/6r, 1/2] ; [1, 0]
map c : [1/3, 0; 0, 1/3] ; [1/3, 2/9]
expect a a b = c a
expect c b = b b a
"""

DESCRIPTIONS = {
    "ex14_projections": "projections to the axes: idempotent, two ends, linked",
    "ex14_halfconst": "x/2 with constant 1: one end, not linked",
    "koch2": "Koch curve from two similarities (tree-like graph)",
    "koch3": "Koch curve plus linking map c: one-ended",
    "sierpinski3": "Sierpinski triangle, three maps",
    "sierpinski5": "Sierpinski triangle plus two edge projections: one-ended",
    "carpet8": "Sierpinski carpet, eight maps",
    "carpet10": "Sierpinski carpet plus two vertical projections: one-ended",
    "crooked_koch4": "crooked Koch curve: free semigroup",
    "ex19_abc": "unit interval with constant 1",
    "ex19_abd": "unit interval with constant sqrt(2): isolated points",
    "ex21": "countable attractor, two ends, infinitely many dead-ends",
}


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    source: str
    params: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)

    @property
    def document(self) -> IfsDocument:
        return _parsed(self.name)


# Analysis parameters chosen so every fixture runs in seconds; the
# expectations are what the acceptance suite checks.
_SPECS: dict[str, tuple[dict, dict]] = {
    "ex14_projections": (
        dict(ball_depth=9, link_depth=4, k_max=6, margin=3, L=6),
        dict(ends="Exactly(2)", idempotents="FoundAtDepth", link_connected=True,
             certificate=False, nondegenerate=0),
    ),
    "ex14_halfconst": (
        dict(ball_depth=9, link_depth=8, k_max=6, margin=3, L=10),
        dict(ends="Exactly(1)", idempotents="FoundAtDepth", link_edges=0, certificate=False),
    ),
    "koch2": (
        dict(ball_depth=9, link_depth=4, k_max=6, margin=3, L=10),
        dict(ends="GrowingUnbounded", idempotents="CertifiedNone", certificate=False,
             components=1),
    ),
    "koch3": (
        dict(ball_depth=9, link_depth=3, k_max=5, margin=4, L=9),
        dict(ends="Exactly(1)", idempotents="CertifiedNone", certificate=True, components=1,
             nondegenerate=1, C_empty=True),
    ),
    "sierpinski3": (
        dict(ball_depth=6, link_depth=3, k_max=3, margin=3, L=7),
        dict(ends="GrowingUnbounded", idempotents="CertifiedNone", certificate=False,
             components=1),
    ),
    "sierpinski5": (
        dict(ball_depth=6, link_depth=3, k_max=3, margin=3, L=7),
        dict(ends="Exactly(1)", idempotents="CertifiedNone", certificate=True, components=1),
    ),
    "carpet8": (
        dict(ball_depth=6, link_depth=3, k_max=3, margin=3, L=6),
        dict(ends="GrowingUnbounded", idempotents="CertifiedNone", certificate=False,
             components=1),
    ),
    "carpet10": (
        dict(ball_depth=6, link_depth=3, k_max=3, margin=3, L=6),
        dict(ends="Exactly(1)", idempotents="CertifiedNone", certificate=True, components=1),
    ),
    "crooked_koch4": (
        dict(ball_depth=6, link_depth=3, k_max=3, margin=2, L=7),
        dict(ends="GrowingUnbounded", idempotents="CertifiedNone", link_edges=0,
             certificate=False, components=1),
    ),
    "ex19_abc": (
        dict(ball_depth=10, link_depth=4, k_max=4, margin=3, L=10),
        dict(idempotents="FoundAtDepth", certificate=False),
    ),
    "ex19_abd": (
        dict(ball_depth=10, link_depth=4, k_max=4, margin=3, L=10, epsilon=1 / 128),
        dict(idempotents="FoundAtDepth", certificate=False,
             C_contains=["1/2+1/2*sqrt(2)", "3/4+1/4*sqrt(2)", "7/8+1/8*sqrt(2)"]),
    ),
    "ex21": (
        dict(ball_depth=10, link_depth=4, k_max=6, margin=3, L=12, epsilon=1 / 64),
        dict(ends="Exactly(2)", idempotents="FoundAtDepth", certificate=False, nondegenerate=0),
    ),
}


@lru_cache(maxsize=None)
def _parsed(name: str) -> IfsDocument:
    return parse(FIXTURE_SOURCES[name])


def fixture(name: str) -> Fixture:
    if name not in FIXTURE_SOURCES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_SOURCES)}")
    params, expected = _SPECS[name]
    return Fixture(name, DESCRIPTIONS[name], FIXTURE_SOURCES[name], dict(params), dict(expected))


def fixtures() -> dict[str, IfsDocument]:
    """All built-in documents, keyed by fixture name."""
    return {name: _parsed(name) for name in FIXTURE_SOURCES}


def fixture_specs() -> dict[str, Fixture]:
    return {name: fixture(name) for name in FIXTURE_SOURCES}
