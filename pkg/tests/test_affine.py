import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ifsends.affine import (
    AdmissionError,
    AffineMap,
    ExactPoint,
    IfsSystem,
    apply,
    bounding_ball,
    compose,
    contraction_bound,
    enclosing_ball,
    fixed_point,
    is_constant,
)
from ifsends.exact_field import QuadScalar
from ifsends.fixtures import fixtures
from ifsends.semigroup import word_evaluate

F = fixtures()
R = 3
small = st.fractions(min_value=-3, max_value=3, max_denominator=6)


@st.composite
def scalars(draw):
    return QuadScalar(draw(small), draw(small), R)


@st.composite
def maps(draw, dim=2):
    lin = [[draw(scalars()) for _ in range(dim)] for _ in range(dim)]
    tr = [draw(scalars()) for _ in range(dim)]
    return AffineMap.from_parts(lin, tr, R)


@st.composite
def points(draw, dim=2):
    return ExactPoint.from_coords([draw(scalars()) for _ in range(dim)], R)


def float_apply(f, x):
    return f.linear_float() @ x + f.translation_float()


def m1(a, t):
    return AffineMap.from_parts([[Fraction(a)]], [Fraction(t)])


def test_identity_is_neutral():
    g = F["koch3"].system.maps[0]
    I = AffineMap.identity(2, R)
    assert compose(I, g) == g and compose(g, I) == g


def test_projections_commute_to_origin():
    a, b = F["ex14_projections"].system.maps
    ab = compose(a, b)
    assert ab == compose(b, a)
    assert is_constant(ab)
    assert apply(ab, ExactPoint.from_coords([5, 7])) == ExactPoint.from_coords([0, 0])


def test_koch_relation_coefficientwise():
    a, b, c = F["koch3"].system.maps
    assert compose(compose(a, a), b) == compose(c, a)
    assert compose(c, b) == compose(compose(b, b), a)


def test_is_constant_examples():
    s = F["koch3"].system
    assert not is_constant(s.maps[0])
    d = F["ex19_abd"].system.maps[2]
    assert is_constant(d)


def test_apply_examples():
    s = F["ex19_abd"].system
    sqrt2 = ExactPoint.from_coords([QuadScalar(0, 1, 2)], 2)
    got = apply(s.maps[1], sqrt2)
    assert got == ExactPoint.from_coords([QuadScalar(Fraction(1, 2), Fraction(1, 2), 2)], 2)
    b21 = F["ex21"].system.maps[1]
    assert apply(b21, ExactPoint.from_coords([1, 0])) == ExactPoint.from_coords([1, Fraction(1, 2)])
    p = ExactPoint.from_coords([1, 2])
    assert apply(AffineMap.identity(2), p) == p


def test_fixed_point_examples():
    assert fixed_point(m1(Fraction(1, 2), 0)) == ExactPoint.from_coords([0])
    assert fixed_point(m1(Fraction(1, 2), Fraction(1, 2))) == ExactPoint.from_coords([1])
    a = F["ex14_projections"].system.maps[0]
    assert fixed_point(a) == ExactPoint.from_coords([0, 0])


def test_fixed_point_singular_is_refused():
    with pytest.raises(ZeroDivisionError):
        fixed_point(AffineMap.identity(1))


def test_contraction_bound_examples():
    zero = AffineMap.from_parts([[0, 0], [0, 0]], [0, 0])
    assert contraction_bound(zero) <= 1e-9
    assert contraction_bound(F["sierpinski3"].system.maps[0]) == pytest.approx(math.sqrt(0.5), abs=1e-8)
    assert contraction_bound(F["koch3"].system.maps[0]) == pytest.approx(math.sqrt(2 / 3), abs=1e-8)


def test_bounding_ball_examples():
    R0, D0 = bounding_ball(IfsSystem(1, 0, ("a",), (m1(Fraction(1, 2), 0),)))
    assert R0 == pytest.approx(0, abs=1e-12) and D0 == pytest.approx(0, abs=1e-12)
    Rab, Dab = bounding_ball(F["ex19_abd"].system.subsystem(["a", "b"]))
    assert Rab == pytest.approx(1, abs=1e-6)
    assert Dab >= 1  # the attractor is [0, 1]
    Rp, _ = bounding_ball(F["ex14_projections"].system)
    assert Rp == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("name", sorted(F))
def test_enclosing_ball_contains_sampled_orbits(name):
    s = F[name].system
    c, rad = enclosing_ball(s)
    rng = np.random.default_rng(7)
    x = np.zeros(s.dim)
    for _ in range(2000):
        x = float_apply(s.maps[rng.integers(len(s))], x)
        assert np.linalg.norm(x - c) <= rad + 1e-6 or _ < 40  # burn-in from the origin


def test_admission_refuses_expanding_map():
    with pytest.raises(AdmissionError):
        IfsSystem(1, 0, ("a",), (m1(1, 0),))
    with pytest.raises(AdmissionError):
        IfsSystem(1, 4, ("a",), (m1(Fraction(1, 2), 0),))
    with pytest.raises(AdmissionError):
        IfsSystem(1, 0, ("a", "a"), (m1(Fraction(1, 2), 0), m1(Fraction(1, 3), 0)))


@given(maps(), maps(), maps())
def test_compose_is_associative(f, g, h):
    assert compose(compose(f, g), h) == compose(f, compose(g, h))


@given(maps(), maps(), points())
def test_compose_applies_right_first(f, g, p):
    assert apply(compose(f, g), p) == apply(f, apply(g, p))


@given(maps(), maps())
def test_compose_matches_float_products(f, g):
    fg = compose(f, g)
    assert np.allclose(fg.linear_float(), f.linear_float() @ g.linear_float(), atol=1e-9)
    x = np.array([0.3, -1.7])
    assert np.allclose(float_apply(fg, x), float_apply(f, float_apply(g, x)), atol=1e-9)


@given(maps(), maps())
def test_key_equality_is_function_equality(f, g):
    same = all(apply(f, p) == apply(g, p) for p in
               [ExactPoint.from_coords(v, R) for v in ([0, 0], [1, 0], [0, 1])])
    assert (f == g) == same
    assert (f.key == g.key) == (f == g)


@given(maps())
def test_constant_iff_zero_linear_part(f):
    assert is_constant(f) == (np.count_nonzero(f.linear_float()) == 0)


@given(maps())
def test_contraction_bound_dominates_spectral_norm(f):
    assert contraction_bound(f) >= np.linalg.norm(f.linear_float(), 2)


def test_koch_words_agree_with_float_evaluation():
    s = F["koch3"].system
    for w in ["aab", "ca", "cb", "bba", "abcabc"]:
        m = word_evaluate(s, s.word(w))
        x = np.array([0.25, 0.5])
        y = x
        for letter in reversed(w):
            y = float_apply(s.maps[s.index(letter)], y)
        assert np.allclose(float_apply(m, x), y)


@given(st.sampled_from(sorted(F)), st.integers(0, 2 ** 31))
def test_generators_respect_their_lipschitz_bound(name, seed):
    s = F[name].system
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, s.dim)) * 3
    for f in s.maps:
        d = np.linalg.norm(float_apply(f, x) - float_apply(f, y))
        assert d <= contraction_bound(f) * np.linalg.norm(x - y) + 1e-9
