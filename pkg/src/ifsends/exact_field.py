"""Exact arithmetic in Q(sqrt r) with small vectors and matrices.

A scalar is ``rat + rad * sqrt(r)`` with both parts :class:`fractions.Fraction`.
The radicand ``r`` is a square-free non-negative integer fixed per system;
for ``r`` in {0, 1} the radical part is folded into the rational part so the
stored form is always canonical.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "QuadScalar",
    "ExactVector",
    "ExactMatrix",
    "is_squarefree",
    "scalar",
    "scalar_to_float",
    "vector",
    "matrix",
    "identity",
    "zero_matrix",
    "mat_mul",
    "mat_vec",
    "mat_add",
    "vec_add",
    "vec_sub",
    "det",
    "solve",
    "matrix_ops",
    "format_scalar",
]

Number = Union[int, Fraction]


def is_squarefree(r: int) -> bool:
    """True for non-negative ``r`` with no square factor > 1 (0 and 1 count)."""
    if r < 0:
        return False
    if r < 4:
        return True
    p = 2
    while p * p <= r:
        if r % (p * p) == 0:
            return False
        p += 1
    return True


class QuadScalar:
    """Immutable element ``rat + rad * sqrt(r)`` of Q(sqrt r)."""

    __slots__ = ("rat", "rad", "r")

    def __init__(self, rat: Number = 0, rad: Number = 0, r: int = 0) -> None:
        rat = Fraction(rat)
        rad = Fraction(rad)
        if r < 0:
            raise ValueError(f"radicand must be non-negative, got {r}")
        if r in (0, 1):
            rat = rat + rad * r
            rad = Fraction(0)
            r = 0
        object.__setattr__(self, "rat", rat)
        object.__setattr__(self, "rad", rad)
        object.__setattr__(self, "r", r)

    def __setattr__(self, name, value):
        raise AttributeError("QuadScalar is immutable")

    # -- helpers ---------------------------------------------------------
    def _radicand_with(self, other: "QuadScalar") -> int:
        if not self.rad:
            return other.r if other.rad else max(self.r, other.r)
        if other.rad and other.r != self.r:
            raise ValueError(f"cannot mix sqrt({self.r}) and sqrt({other.r})")
        return self.r

    @staticmethod
    def _coerce(x) -> "QuadScalar":
        if isinstance(x, QuadScalar):
            return x
        if isinstance(x, (int, Fraction)):
            return QuadScalar(x)
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.rat and not self.rad

    def conjugate(self) -> "QuadScalar":
        return QuadScalar(self.rat, -self.rad, self.r)

    def norm(self) -> Fraction:
        """Field norm ``rat^2 - rad^2 r``; nonzero for nonzero scalars."""
        return self.rat * self.rat - self.rad * self.rad * self.r

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        r = self._radicand_with(other)
        return QuadScalar(self.rat + other.rat, self.rad + other.rad, r)

    __radd__ = __add__

    def __neg__(self):
        return QuadScalar(-self.rat, -self.rad, self.r)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        r = self._radicand_with(other)
        return QuadScalar(
            self.rat * other.rat + self.rad * other.rad * r,
            self.rat * other.rad + self.rad * other.rat,
            r,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadScalar":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in Q(sqrt r)")
        n = self.norm()
        return QuadScalar(self.rat / n, -self.rad / n, self.r)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    # -- comparison / hashing -------------------------------------------
    def _key(self):
        return (self.rat, self.rad, self.r if self.rad else 0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return not self.rad and self.rat == other
        if not isinstance(other, QuadScalar):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __float__(self) -> float:
        return scalar_to_float(self)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __repr__(self) -> str:
        return f"QuadScalar({self.rat!s}, {self.rad!s}, r={self.r})"

    def __str__(self) -> str:
        return format_scalar(self)


def scalar(value, r: int = 0) -> QuadScalar:
    if isinstance(value, QuadScalar):
        return value
    if isinstance(value, tuple):
        return QuadScalar(value[0], value[1], r)
    return QuadScalar(value, 0, r)


def format_scalar(x: QuadScalar) -> str:
    """Render as ``p/q`` or ``p/q+s/t*sqrt(r)``."""
    if not x.rad:
        return str(x.rat)
    sign = "+" if x.rad > 0 else "-"
    return f"{x.rat}{sign}{abs(x.rad)}*sqrt({x.r})"


def scalar_to_float(x: QuadScalar) -> float:
    """Nearest-double approximation of ``x`` (a few ulp).

    Opposite-signed parts are evaluated through the conjugate so that
    cancellation never costs relative accuracy.  Raises ``OverflowError``
    instead of returning an infinity.
    """
    a, b = x.rat, x.rad
    if not b:
        return float(a)
    root = math.sqrt(x.r)
    if a == 0 or (a > 0) == (b > 0):
        val = float(a) + float(b) * root
    else:
        # a + b sqrt r = (a^2 - b^2 r) / (a - b sqrt r), denominator has no cancellation
        val = float(a * a - b * b * x.r) / (float(a) - float(b) * root)
    if not math.isfinite(val):
        raise OverflowError(f"{format_scalar(x)} does not fit a double")
    return val


# -- vectors and matrices --------------------------------------------------
ExactVector = tuple  # tuple[QuadScalar, ...]
ExactMatrix = tuple  # tuple[tuple[QuadScalar, ...], ...], row-major


def vector(entries: Iterable, r: int = 0) -> ExactVector:
    return tuple(scalar(e, r) for e in entries)


def matrix(rows: Iterable[Iterable], r: int = 0) -> ExactMatrix:
    m = tuple(tuple(scalar(e, r) for e in row) for row in rows)
    if any(len(row) != len(m) for row in m):
        raise ValueError("matrix must be square")
    return m


def identity(d: int) -> ExactMatrix:
    return tuple(tuple(QuadScalar(int(i == j)) for j in range(d)) for i in range(d))


def zero_matrix(d: int) -> ExactMatrix:
    return tuple(tuple(QuadScalar(0) for _ in range(d)) for _ in range(d))


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise ValueError(f"dimension mismatch: {a} vs {b}")


def mat_mul(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    _check_dims(len(A), len(B))
    n = len(A)
    return tuple(
        tuple(sum((A[i][k] * B[k][j] for k in range(n)), QuadScalar(0)) for j in range(n))
        for i in range(n)
    )


def mat_vec(A: ExactMatrix, v: ExactVector) -> ExactVector:
    _check_dims(len(A), len(v))
    return tuple(sum((a * x for a, x in zip(row, v)), QuadScalar(0)) for row in A)


def mat_add(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    _check_dims(len(A), len(B))
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(A, B))


def vec_add(u: ExactVector, v: ExactVector) -> ExactVector:
    _check_dims(len(u), len(v))
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u: ExactVector, v: ExactVector) -> ExactVector:
    _check_dims(len(u), len(v))
    return tuple(x - y for x, y in zip(u, v))


def det(A: ExactMatrix) -> QuadScalar:
    n = len(A)
    if n == 0:
        return QuadScalar(1)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if n == 3:
        return (
            A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
            - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
            + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0])
        )
    raise ValueError("determinants are supported for d <= 3")


def solve(A: ExactMatrix, b: ExactVector) -> ExactVector:
    """Solve ``A x = b`` exactly by Gauss-Jordan elimination."""
    n = len(A)
    _check_dims(n, len(b))
    rows = [list(A[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if not rows[i][col].is_zero()), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = rows[col][col].inverse()
        rows[col] = [x * inv for x in rows[col]]
        for i in range(n):
            if i != col and not rows[i][col].is_zero():
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[col])]
    return tuple(rows[i][n] for i in range(n))


def matrix_ops(A: ExactMatrix, B, op: str):
    """Dispatch for ``mul`` (matrix or vector), ``add``, ``det`` and ``eq``."""
    if op == "mul":
        if B and isinstance(B[0], tuple):
            return mat_mul(A, B)
        return mat_vec(A, B)
    if op == "add":
        return mat_add(A, B)
    if op == "det":
        return det(A)
    if op == "eq":
        _check_dims(len(A), len(B))
        return A == B
    raise ValueError(f"unknown matrix op {op!r}")
