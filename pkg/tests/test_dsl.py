from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ifsends.dsl import DslError, format_coeff, parse, serialize
from ifsends.exact_field import QuadScalar
from ifsends.fixtures import KOCH3_AS_PRINTED, fixture, fixtures

EXPECTED_NAMES = ["ex14_projections", "ex14_halfconst", "koch2", "koch3", "sierpinski3",
                  "sierpinski5", "carpet8", "carpet10", "crooked_koch4", "ex19_abc",
                  "ex19_abd", "ex21"]


def test_parse_interval_with_root_two():
    doc = parse("dim 1\nradicand 2\nmap a : [1/2] ; [0]\nmap d : [0] ; [0+1/1r]")
    a, d = doc.system.maps
    assert a.linear[0][0] == QuadScalar(Fraction(1, 2), 0, 2)
    assert d.linear[0][0].is_zero()
    assert d.translation[0] == QuadScalar(0, 1, 2)


def test_parse_projection():
    doc = parse("dim 2\nradicand 0\nmap a : [1/2,0;0,0] ; [0,0]")
    assert doc.system.maps[0] == fixtures()["ex14_projections"].system.maps[0]


@pytest.mark.parametrize("source,line,col,needle", [
    ("dim 1\nradicand 0\nmap a : [1/0] ; [0]", 3, 12, "zero denominator"),
    ("dim 2\nradicand 0\nmap a : [1/2] ; [0, 0]", 3, 9, "must be 2x2"),
    ("dim 1\nradicand 4\n", 2, 1, "not square-free"),
    ("dim 1\nradicand 0\nmap a : [1/2] ; [0]\nmap a : [1/3] ; [0]", 4, 5, "duplicate"),
    ("dim 1\nradicand 0\nmap a : [2] ; [0]", 3, 5, "Frobenius bound 2.0"),
    ("dim 1\nradicand 0\nmap a : [1/2] ; [0] extra", 3, 21, "trailing"),
    ("radicand 0\n", 1, 1, "must start with 'dim'"),
    ("dim 4\n", 1, 1, "dimension"),
    ("dim 1\nradicand 0\nmap a : [1/2] ; [0]\nexpect a = z", 4, 12, "unknown generator"),
    ("dim 1\nradicand 0\nmap a : [1/2] ; [0]\nexpect a a", 4, 1, "expect WORD = WORD"),
    ("dim 1\nradicand 0\nfoo", 3, 1, "unknown keyword"),
    ("dim 1\nradicand 0\n", 2, 1, "no generators"),
    ("dim 1\nradicand 3\nmap a : [1/2+1/3] ; [0]", 3, 17, "expected 'r'"),
])
def test_errors_carry_location(source, line, col, needle):
    with pytest.raises(DslError) as info:
        parse(source)
    assert (info.value.line, info.value.col) == (line, col)
    assert needle in info.value.message


def test_comments_and_whitespace():
    doc = parse("# header\n  dim   1 # one\nradicand 0\n\n map  a:[ 1/2 ];[ -1/4 ]  \n")
    assert doc.system.maps[0].translation[0] == QuadScalar(Fraction(-1, 4))


def test_words_may_be_run_together():
    doc = parse("dim 1\nradicand 0\nmap a : [1/2] ; [0]\nmap b : [1/2] ; [1/2]\nexpect aab = a a b")
    assert doc.relations == [((0, 0, 1), (0, 0, 1))]


def test_ambiguous_run_is_rejected():
    src = "dim 1\nradicand 0\nmap a : [1/2] ; [0]\nmap aa : [1/3] ; [0]\nexpect aaa = a"
    with pytest.raises(DslError, match="ambiguous"):
        parse(src)


def test_duplicate_map_warns():
    doc = parse("dim 1\nradicand 0\nmap a : [1/2] ; [0]\nmap b : [1/2] ; [0]")
    assert doc.diagnostics == ["line 4: warning: generator 'b' equals 'a' as a map"]


def test_fixture_corpus():
    F = fixtures()
    assert list(F) == EXPECTED_NAMES
    for name, n_gen, n_rel in [("koch3", 3, 2), ("sierpinski5", 5, 4), ("carpet10", 10, 9)]:
        assert len(F[name].system) == n_gen and len(F[name].relations) == n_rel
    for name in EXPECTED_NAMES:
        fx = fixture(name)
        assert fx.description and fx.expected
    with pytest.raises(KeyError):
        fixture("nope")


@pytest.mark.parametrize("name", EXPECTED_NAMES)
def test_fixture_round_trip(name):
    doc = fixtures()[name]
    again = parse(serialize(doc))
    assert again.system.maps == doc.system.maps
    assert again.system.names == doc.system.names
    assert again.relations == doc.relations
    assert serialize(again) == serialize(doc)


def test_printed_koch_parses():
    doc = parse(KOCH3_AS_PRINTED)
    assert len(doc.system) == 3 and len(doc.relations) == 2
    assert doc.system.maps != fixtures()["koch3"].system.maps


def test_format_coeff():
    assert format_coeff(QuadScalar(Fraction(-1, 2), Fraction(1, 6), 3)) == "-1/2+1/6r"
    assert format_coeff(QuadScalar(0, Fraction(-1, 9), 3)) == "0-1/9r"
    assert format_coeff(QuadScalar(Fraction(2, 3))) == "2/3"


small = st.fractions(min_value=-1, max_value=1, max_denominator=9)


@st.composite
def documents(draw):
    dim = draw(st.integers(1, 3))
    r = draw(st.sampled_from([0, 2, 3, 5]))
    n = draw(st.integers(1, 3))
    scale = Fraction(1, 2 * dim)
    lines = [f"dim {dim}", f"radicand {r}"]
    for i in range(n):
        def c(bound=Fraction(1)):
            rat = draw(small) * bound
            rad = draw(small) * bound / 3 if r else 0
            return format_coeff(QuadScalar(rat, rad, r))
        lin = "; ".join(", ".join(c(scale) for _ in range(dim)) for _ in range(dim))
        tr = ", ".join(c() for _ in range(dim))
        lines.append(f"map g{i} : [{lin}] ; [{tr}]")
    w = lambda: " ".join(f"g{draw(st.integers(0, n - 1))}" for _ in range(draw(st.integers(1, 4))))
    lines += [f"expect {w()} = {w()}" for _ in range(draw(st.integers(0, 2)))]
    return "\n".join(lines) + "\n"


@given(documents())
def test_round_trip_property(src):
    doc = parse(src)
    again = parse(serialize(doc))
    assert again.system.maps == doc.system.maps
    assert again.relations == doc.relations
    assert serialize(again) == serialize(doc)
