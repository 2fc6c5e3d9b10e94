"""Line-oriented description language for affine iterated function systems.

::

    # Sierpinski triangle
    dim 2
    radicand 3
    map a : [1/2, 0; 0, 1/2] ; [0, 0]
    map c : [1/2, 0; 0, 1/2] ; [1/4, 0+1/4r]
    expect a b d = d a d

A coefficient is ``rational`` or ``rational (+|-) rational r`` where ``r``
stands for the square root of the declared radicand.  ``#`` starts a
comment.  Words in ``expect`` lines are whitespace-separated generator
names; a run of names without spaces is accepted when it splits into
generator names in exactly one way.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .affine import AdmissionError, AffineMap, IfsSystem, contraction_bound
from .exact_field import QuadScalar, is_squarefree

__all__ = ["DslError", "IfsDocument", "parse", "serialize", "format_coeff"]

NAME_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*")


class DslError(ValueError):
    """Parse or admission failure, located by line and column (1-based)."""

    def __init__(self, message: str, line: int, col: int = 1) -> None:
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass
class IfsDocument:
    source: str
    system: IfsSystem
    relations: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def names(self) -> tuple[str, ...]:
        return self.system.names


class _Cursor:
    def __init__(self, text: str, lineno: int) -> None:
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r":
            self.pos += 1

    def mark(self) -> int:
        """Position of the next token."""
        self.skip_ws()
        return self.pos

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, message: str, pos: int | None = None) -> DslError:
        return DslError(message, self.lineno, (self.pos if pos is None else pos) + 1)

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of line"
            raise self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def at_end(self) -> bool:
        return self.peek() == ""

    def integer(self) -> int:
        self.skip_ws()
        m = re.compile(r"\d+").match(self.text, self.pos)
        if not m:
            found = self.text[self.pos:self.pos + 1] or "end of line"
            raise self.error(f"expected an integer, found {found!r}")
        self.pos = m.end()
        return int(m.group())

    def name(self) -> str:
        self.skip_ws()
        m = NAME_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected a name")
        self.pos = m.end()
        return m.group()

    def rational(self) -> Fraction:
        neg = False
        if self.peek() == "-":
            neg = True
            self.pos += 1
        num = self.integer()
        den = 1
        if self.peek() == "/":
            self.pos += 1
            start = self.mark()
            den = self.integer()
            if den == 0:
                raise self.error("zero denominator", start)
        value = Fraction(num, den)
        return -value if neg else value

    def coeff(self, r: int) -> QuadScalar:
        rat = self.rational()
        if self.peek() in ("+", "-"):
            sign = 1 if self.text[self.pos] == "+" else -1
            self.pos += 1
            if self.peek() == "-":
                raise self.error("unexpected '-' after sign")
            rad = self.rational()
            if self.peek() != "r":
                raise self.error("expected 'r' after the radical coefficient")
            self.pos += 1
            return QuadScalar(rat, sign * rad, r)
        return QuadScalar(rat, 0, r)


def _split_word(token: str, names: list[str]) -> list[list[str]]:
    """All ways to write ``token`` as a concatenation of generator names."""
    ways: list[list[list[str]]] = [[] for _ in range(len(token) + 1)]
    ways[0] = [[]]
    for i in range(len(token)):
        if not ways[i]:
            continue
        for n in names:
            if token.startswith(n, i):
                ways[i + len(n)].extend(w + [n] for w in ways[i][:2])
    return ways[len(token)]


def _word(tokens: list[tuple[str, int]], names: list[str], lineno: int) -> tuple[int, ...]:
    out: list[int] = []
    for tok, col in tokens:
        if tok in names:
            out.append(names.index(tok))
            continue
        ways = _split_word(tok, names)
        if not ways:
            raise DslError(f"unknown generator {tok!r}", lineno, col)
        if len(ways) > 1:
            raise DslError(f"ambiguous word {tok!r}; separate names with spaces", lineno, col)
        out.extend(names.index(n) for n in ways[0])
    return tuple(out)


def parse(source: str) -> IfsDocument:
    """Parse and admit a system description."""
    dim = radicand = None
    names: list[str] = []
    maps: list[AffineMap] = []
    pending_rel: list[tuple[int, list, list]] = []
    diagnostics: list[str] = []

    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = raw.split("#", 1)[0]
        cur = _Cursor(text, lineno)
        if cur.at_end():
            continue
        kw_pos = cur.mark()
        kw = cur.name()
        if dim is None:
            if kw != "dim":
                raise cur.error("document must start with 'dim'", kw_pos)
            dim = cur.integer()
            if dim not in (1, 2, 3):
                raise cur.error(f"dimension must be 1, 2 or 3, got {dim}", kw_pos)
        elif radicand is None:
            if kw != "radicand":
                raise cur.error("expected 'radicand' after 'dim'", kw_pos)
            radicand = cur.integer()
            if not is_squarefree(radicand):
                raise cur.error(f"radicand {radicand} is not square-free", kw_pos)
        elif kw == "map":
            name_pos = cur.mark()
            name = cur.name()
            if name in names:
                raise cur.error(f"duplicate generator name {name!r}", name_pos)
            cur.expect(":")
            lin_pos = cur.mark()
            cur.expect("[")
            rows = [[cur.coeff(radicand)]]
            while cur.peek() in (",", ";"):
                sep = cur.text[cur.pos]
                cur.pos += 1
                if sep == ";":
                    rows.append([])
                rows[-1].append(cur.coeff(radicand))
            cur.expect("]")
            if len(rows) != dim or any(len(row) != dim for row in rows):
                raise cur.error(f"linear part of {name!r} must be {dim}x{dim}", lin_pos)
            cur.expect(";")
            vec_pos = cur.mark()
            cur.expect("[")
            vec = [cur.coeff(radicand)]
            while cur.peek() == ",":
                cur.pos += 1
                vec.append(cur.coeff(radicand))
            cur.expect("]")
            if len(vec) != dim:
                raise cur.error(f"translation of {name!r} must have {dim} entries", vec_pos)
            if not cur.at_end():
                raise cur.error("unexpected trailing input")
            m = AffineMap.from_parts(rows, vec, radicand)
            bound = contraction_bound(m)
            if bound >= 1:
                raise cur.error(
                    f"generator {name!r} is not certified contracting "
                    f"(Frobenius bound {bound:.6f} >= 1)", name_pos)
            for other, om in zip(names, maps):
                if om == m:
                    diagnostics.append(
                        f"line {lineno}: warning: generator {name!r} equals {other!r} as a map")
            names.append(name)
            maps.append(m)
        elif kw == "expect":
            sides: list[list[tuple[str, int]]] = [[]]
            while not cur.at_end():
                if cur.peek() == "=":
                    if len(sides) == 2:
                        raise cur.error("more than one '='")
                    cur.pos += 1
                    sides.append([])
                    continue
                pos = cur.mark()
                sides[-1].append((cur.name(), pos + 1))
            if len(sides) != 2 or not sides[0] or not sides[1]:
                raise cur.error("relation must read 'expect WORD = WORD'", kw_pos)
            pending_rel.append((lineno, sides[0], sides[1]))
        else:
            raise cur.error(f"unknown keyword {kw!r}", kw_pos)

    if dim is None or radicand is None:
        raise DslError("missing 'dim' / 'radicand' header", 1)
    if not maps:
        raise DslError("no generators declared", len(source.splitlines()) or 1)
    relations = [(_word(lhs, names, ln), _word(rhs, names, ln)) for ln, lhs, rhs in pending_rel]
    try:
        system = IfsSystem(dim, radicand, tuple(names), tuple(maps))
    except AdmissionError as exc:  # pragma: no cover - per-line checks fire first
        raise DslError(str(exc), 1) from exc
    return IfsDocument(source, system, relations, diagnostics)


def format_coeff(x: QuadScalar) -> str:
    """DSL spelling of a coefficient (``1/2``, ``-1/2+1/6r``)."""
    if not x.rad:
        return str(x.rat)
    sign = "+" if x.rad > 0 else "-"
    return f"{x.rat}{sign}{abs(x.rad)}r"


def serialize(doc: IfsDocument) -> str:
    sysm = doc.system
    lines = [f"dim {sysm.dim}", f"radicand {sysm.radicand}"]
    for name, m in zip(sysm.names, sysm.maps):
        lin = "; ".join(", ".join(format_coeff(x) for x in row) for row in m.linear)
        tr = ", ".join(format_coeff(x) for x in m.translation)
        lines.append(f"map {name} : [{lin}] ; [{tr}]")
    for lhs, rhs in doc.relations:
        lines.append(f"expect {sysm.word_str(lhs, ' ')} = {sysm.word_str(rhs, ' ')}")
    return "\n".join(lines) + "\n"
