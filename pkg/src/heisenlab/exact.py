"""Exact scalars and small-matrix linear algebra over exact fields.

Coordinates in this package are one of

* ``Fraction`` -- exact rationals (the default for parsed input),
* ``QSqrt2`` -- exact elements ``p + q*sqrt(2)`` of the number field Q(sqrt 2),
* ``float`` -- inexact reals, compared with ``FLOAT_TOL``.

The linear algebra helpers below work on lists of lists of any exact field
elements (Fraction and QSqrt2 mix freely).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence, Union

FLOAT_TOL = 1e-12


class ExactnessError(TypeError):
    """Raised when an operation needs exact coordinates but got floats."""


@total_ordering
class QSqrt2:
    """Exact element ``p + q*sqrt(2)`` with rational ``p`` and ``q``."""

    __slots__ = ("p", "q")

    def __init__(self, p=0, q=0):
        self.p = Fraction(p)
        self.q = Fraction(q)

    @classmethod
    def _lift(cls, other):
        if isinstance(other, QSqrt2):
            return other
        if isinstance(other, (int, Fraction)):
            return cls(other, 0)
        return None

    def __repr__(self) -> str:
        return f"QSqrt2({self.p}, {self.q})"

    def __str__(self) -> str:
        if self.q == 0:
            return str(self.p)
        if self.p == 0:
            return f"{self.q}*sqrt2"
        sign = "+" if self.q > 0 else "-"
        return f"{self.p}{sign}{abs(self.q)}*sqrt2"

    def __float__(self) -> float:
        return float(self.p) + float(self.q) * math.sqrt(2.0)

    def __hash__(self) -> int:
        if self.q == 0:
            return hash(self.p)
        return hash((self.p, self.q))

    def __eq__(self, other) -> bool:
        o = self._lift(other)
        if o is None:
            if isinstance(other, float):
                return float(self) == other
            return NotImplemented
        return self.p == o.p and self.q == o.q

    def sign(self) -> int:
        p, q = self.p, self.q
        sp = (p > 0) - (p < 0)
        sq = (q > 0) - (q < 0)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: compare p^2 with 2 q^2
        return sp if p * p > 2 * q * q else sq

    def __lt__(self, other) -> bool:
        o = self._lift(other)
        if o is None:
            if isinstance(other, float):
                return float(self) < other
            return NotImplemented
        return (self - o).sign() < 0

    def __bool__(self) -> bool:
        return self.p != 0 or self.q != 0

    def __neg__(self) -> QSqrt2:
        return QSqrt2(-self.p, -self.q)

    def __pos__(self) -> QSqrt2:
        return self

    def __abs__(self) -> QSqrt2:
        return -self if self.sign() < 0 else self

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return float(self) + other
            return NotImplemented
        return QSqrt2(self.p + o.p, self.q + o.q)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return float(self) - other
            return NotImplemented
        return QSqrt2(self.p - o.p, self.q - o.q)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return float(self) * other
            return NotImplemented
        return QSqrt2(self.p * o.p + 2 * self.q * o.q, self.p * o.q + self.q * o.p)

    __rmul__ = __mul__

    def conjugate_field(self) -> QSqrt2:
        """Galois conjugate ``p - q*sqrt(2)``."""
        return QSqrt2(self.p, -self.q)

    def norm(self) -> Fraction:
        return self.p * self.p - 2 * self.q * self.q

    def inverse(self) -> QSqrt2:
        nrm = self.norm()
        if nrm == 0:
            raise ZeroDivisionError("QSqrt2 division by zero")
        return QSqrt2(self.p / nrm, -self.q / nrm)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return float(self) / other
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return other / float(self)
            return NotImplemented
        return o * self.inverse()

    def __floor__(self) -> int:
        guess = math.floor(float(self))
        # float rounding can be off by one near integers; fix exactly
        while self < guess:
            guess -= 1
        while not self < guess + 1:
            guess += 1
        return guess

    def __mod__(self, other):
        if other != 1:
            raise ValueError("QSqrt2 only supports reduction mod 1")
        return self - math.floor(self)

    def is_rational(self) -> bool:
        return self.q == 0


SQRT2 = QSqrt2(0, 1)

Exact = Union[Fraction, QSqrt2]
Coordinate = Union[Fraction, QSqrt2, float]


def is_exact(v) -> bool:
    return isinstance(v, (int, Fraction, QSqrt2))


def to_coordinate(v) -> Coordinate:
    """Normalise a scalar: ints and strings become Fractions, rational QSqrt2
    values collapse to Fractions, floats stay floats."""
    if isinstance(v, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, Fraction):
        return v
    if isinstance(v, QSqrt2):
        return v.p if v.q == 0 else v
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        return parse_scalar(v)
    raise TypeError(f"unsupported coordinate type {type(v).__name__}")


def parse_scalar(text: str) -> Coordinate:
    """Parse ``"3"``, ``"-1/2"``, ``"0.25e-1"``, ``"1/2+3/4*sqrt2"`` or ``"sqrt2"``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    if "sqrt2" in s:
        # split at the last +/- that is not the leading sign
        body = s.replace("*sqrt2", "").replace("sqrt2", "1") if s.endswith("sqrt2") else None
        if body is None:
            raise ValueError(f"cannot parse scalar {text!r}")
        cut = max(body.rfind("+", 1), body.rfind("-", 1))
        if cut > 0 and body[cut - 1] not in "eE/":
            p, q = body[:cut], body[cut:]
        else:
            p, q = "0", body
        if q in ("+", "-"):
            q += "1"
        return to_coordinate(QSqrt2(Fraction(p), Fraction(q)))
    if any(c in s for c in ".eE") or s.lower() in ("inf", "-inf", "nan"):
        return float(s)
    return Fraction(s)


def format_scalar(v: Coordinate) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def exact_floor(v: Coordinate) -> int:
    return math.floor(v)


def approx(v: Coordinate) -> float:
    return float(v)


def scalar_close(a: Coordinate, b: Coordinate, tol: float = FLOAT_TOL) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= tol


# --- exact linear algebra -------------------------------------------------

Matrix = list


def _copy(rows: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in rows]


def row_echelon(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over an exact field; returns (R, pivot columns)."""
    m = _copy(rows)
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(row_echelon(rows)[1])


def solve(a: Sequence[Sequence], b: Sequence) -> list | None:
    """Solve ``a @ x = b`` exactly.  Returns the unique solution, or ``None``
    when the system is inconsistent.  Raises ``ValueError`` if the solution is
    not unique."""
    ncols = len(a[0]) if a else 0
    aug = [list(r) + [bi] for r, bi in zip(a, b)]
    red, pivots = row_echelon(aug)
    if ncols in pivots:
        return None
    if len(pivots) < ncols:
        raise ValueError("system is underdetermined")
    x = [Fraction(0)] * ncols
    for row, c in zip(red, pivots):
        x[c] = row[ncols]
    return x


def inverse(a: Sequence[Sequence]) -> list[list]:
    n = len(a)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    red, pivots = row_echelon(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*a)]


def determinant(a: Sequence[Sequence]):
    m = _copy(a)
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = det * m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] * inv
            if f != 0:
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


def min_norm_solve(a: Sequence[Sequence], b: Sequence) -> list:
    """Minimum Euclidean norm solution of a full-row-rank system, via the
    normal equations ``x = a^T (a a^T)^{-1} b``."""
    at = transpose(a)
    gram = matmul(a, at)
    z = solve(gram, b)
    if z is None:
        raise ValueError("inconsistent system")
    return matvec(at, z)


# --- integer lattices -----------------------------------------------------

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def column_hermite(rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], int]:
    """Column-style echelon form over Z.

    Returns ``(E, U, r)`` with ``rows @ U == E``, ``U`` unimodular, the first
    ``r`` columns of ``E`` linearly independent and the remaining columns zero.
    The last ``ncols - r`` columns of ``U`` are a Z-basis of the integer kernel.
    """
    m = [list(map(int, r)) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def colop(j: int, k: int, a: int, b: int, c: int, d: int) -> None:
        # (col_j, col_k) <- (a col_j + b col_k, c col_j + d col_k)
        for mat in (m, u):
            for row in mat:
                x, y = row[j], row[k]
                row[j], row[k] = a * x + b * y, c * x + d * y

    piv = 0
    for i in range(nrows):
        if piv == ncols:
            break
        for k in range(piv + 1, ncols):
            a, b = m[i][piv], m[i][k]
            if b == 0:
                continue
            g, s, t = _xgcd(a, b)
            colop(piv, k, s, t, -b // g, a // g)
        if m[i][piv] != 0:
            if m[i][piv] < 0:
                colop(piv, piv, -1, 0, 0, -1)
            piv += 1
    return m, u, piv


def rational_rows_to_int(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    """Scale each row by the lcm of its denominators."""
    out = []
    for row in rows:
        lcm = 1
        for v in row:
            lcm = lcm * Fraction(v).denominator // math.gcd(lcm, Fraction(v).denominator)
        out.append([int(Fraction(v) * lcm) for v in row])
    return out


def rational_expansion(values: Iterable) -> list[Fraction]:
    """Split Q(sqrt 2) values into their rational and sqrt(2) parts."""
    out = []
    for v in values:
        if isinstance(v, QSqrt2):
            out.extend([v.p, v.q])
        else:
            out.extend([Fraction(v), Fraction(0)])
    return out
