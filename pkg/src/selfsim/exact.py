"""Exact scalars: rationals and the quadratic field Q(sqrt 3).

Points of the built-in systems live either in Q^d or in Q(sqrt 3)^d.  Both
kinds are handled by the same generic code paths, so everything here works
on plain ``Fraction`` values as well as on :class:`QSqrt3`.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

__all__ = [
    "QSqrt3",
    "SQRT3",
    "Scalar",
    "as_scalar",
    "format_scalar",
    "parse_scalar",
    "format_point",
    "scalar_abs",
    "solve_affine",
    "SolveResult",
]


class QSqrt3:
    """Element ``a + b*sqrt(3)`` with rational ``a`` and ``b``."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @staticmethod
    def _coerce(other):
        if isinstance(other, QSqrt3):
            return other
        if isinstance(other, (int, Fraction)) or isinstance(other, Rational):
            return QSqrt3(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QSqrt3(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QSqrt3(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QSqrt3(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __neg__(self):
        return QSqrt3(-self.a, -self.b)

    def __pos__(self):
        return self

    def norm(self) -> Fraction:
        """Field norm ``a^2 - 3 b^2``; zero only for the zero element."""
        return self.a * self.a - 3 * self.b * self.b

    def conjugate(self) -> "QSqrt3":
        return QSqrt3(self.a, -self.b)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt3)")
        num = self * o.conjugate()
        return QSqrt3(num.a / n, num.b / n)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with 3 b^2
        d = a * a - 3 * b * b
        return sa if d > 0 else (sb if d < 0 else 0)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __le__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() <= 0

    def __gt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() > 0

    def __ge__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return float(self.a) + float(self.b) * 3.0 ** 0.5

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __repr__(self):
        return f"QSqrt3({format_scalar(self)})"


SQRT3 = QSqrt3(0, 1)

Scalar = Union[Fraction, QSqrt3]


def as_scalar(x, field: str = "rational") -> Scalar:
    """Coerce ``x`` (int, Fraction, string, QSqrt3) into the given field."""
    if isinstance(x, str):
        x = parse_scalar(x)
    if isinstance(x, float):
        raise TypeError(f"refusing to coerce float {x!r} to an exact scalar")
    if field == "quadratic-sqrt3":
        return x if isinstance(x, QSqrt3) else QSqrt3(x, 0)
    if isinstance(x, QSqrt3):
        if x.b != 0:
            raise ValueError(f"{format_scalar(x)} is not rational")
        return x.a
    return Fraction(x)


def scalar_abs(x: Scalar) -> Scalar:
    return abs(x)


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(x: Scalar) -> str:
    """Render as ``p/q`` or ``p/q+r/s*sqrt3`` (lossless)."""
    if isinstance(x, QSqrt3):
        if x.b == 0:
            return _fmt_q(x.a)
        b = _fmt_q(x.b)
        if x.a == 0:
            return f"{b}*sqrt3"
        sep = "" if x.b < 0 else "+"
        return f"{_fmt_q(x.a)}{sep}{b}*sqrt3"
    return _fmt_q(Fraction(x))


def format_point(p: Sequence[Scalar]) -> list[str]:
    return [format_scalar(c) for c in p]


def parse_scalar(s: str) -> Scalar:
    """Inverse of :func:`format_scalar`; also accepts ``sqrt3`` and ``-sqrt3``."""
    s = s.replace(" ", "")
    if not s.endswith("sqrt3"):
        return Fraction(s)
    head = s[: -len("sqrt3")].rstrip("*")
    cut = max(head.rfind("+"), head.rfind("-"))
    if cut > 0:
        a, braw = head[:cut], head[cut:]
    else:
        a, braw = "0", head
    if braw in ("", "+"):
        b = Fraction(1)
    elif braw == "-":
        b = Fraction(-1)
    else:
        b = Fraction(braw)
    return QSqrt3(Fraction(a), b)


class SolveResult:
    """Outcome of an exact linear solve: ``kind`` is unique, none or subspace."""

    __slots__ = ("kind", "solution", "nullity")

    def __init__(self, kind: str, solution=None, nullity: int = 0):
        self.kind = kind
        self.solution = solution
        self.nullity = nullity

    def __repr__(self):
        return f"SolveResult({self.kind!r}, nullity={self.nullity})"


def solve_affine(matrix: Sequence[Sequence[Scalar]], rhs: Sequence[Scalar]) -> SolveResult:
    """Solve ``matrix @ x = rhs`` exactly by Gauss-Jordan elimination."""
    n_rows = len(matrix)
    n_cols = len(matrix[0]) if n_rows else 0
    aug = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    pivots = []
    r = 0
    for c in range(n_cols):
        p = next((i for i in range(r, n_rows) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        piv = aug[r][c]
        aug[r] = [v / piv for v in aug[r]]
        for i in range(n_rows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [vi - f * vr for vi, vr in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    for i in range(r, n_rows):
        if aug[i][n_cols] != 0:
            return SolveResult("none")
    zero = rhs[0] * 0 if len(rhs) else Fraction(0)
    x = [zero] * n_cols
    for i, c in enumerate(pivots):
        x[c] = aug[i][n_cols]
    nullity = n_cols - len(pivots)
    if nullity:
        return SolveResult("subspace", tuple(x), nullity)
    return SolveResult("unique", tuple(x))
