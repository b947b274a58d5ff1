"""Twisted group ring of time-frequency shifts.

Basis elements are points ``g = (x, y)`` of R^n x R^n and multiplication
is twisted by a cocycle::

    (a, b) * (x, y) = exp(2 pi i a.y) (a + x, b + y)

Phases are kept as exact turns (angle / 2 pi, reduced mod 1) whenever the
coordinates are exact, so products never accumulate rounding in the twist.
Coefficients of algebra elements are complex doubles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import exact
from .exact import FLOAT_TOL, Coordinate, ExactnessError, is_exact, to_coordinate

CHOP = 1e-12


class DimensionError(ValueError):
    """Operands live in different ambient dimensions."""


def _check_dims(*ns: int) -> None:
    if len(set(ns)) > 1:
        raise DimensionError(f"dimension mismatch: {ns}")


def _dot(u: Sequence[Coordinate], v: Sequence[Coordinate]) -> Coordinate:
    return to_coordinate(sum((a * b for a, b in zip(u, v)), Fraction(0)))


# exact values of exp(2 pi i turn) on the quarter turns keep cancellations exact
_QUARTERS = {Fraction(0): 1 + 0j, Fraction(1, 2): -1 + 0j, Fraction(1, 4): 1j, Fraction(3, 4): -1j}


@dataclass(frozen=True)
class Phase:
    """A unit complex number ``exp(2 pi i turn)`` stored by its turn mod 1."""

    turn: Coordinate = Fraction(0)

    def __post_init__(self):
        t = to_coordinate(self.turn)
        t = t % 1
        if isinstance(t, float) and t >= 1.0:
            t = 0.0
        object.__setattr__(self, "turn", to_coordinate(t))

    @property
    def exact(self) -> bool:
        return is_exact(self.turn)

    @property
    def value(self) -> complex:
        if isinstance(self.turn, Fraction) and self.turn in _QUARTERS:
            return _QUARTERS[self.turn]
        return cmath.exp(2j * math.pi * float(self.turn))

    def __add__(self, other: Phase) -> Phase:
        return Phase(self.turn + other.turn)

    def __neg__(self) -> Phase:
        return Phase(-self.turn)

    def __sub__(self, other: Phase) -> Phase:
        return Phase(self.turn - other.turn)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Phase):
            return NotImplemented
        if self.exact and other.exact:
            return self.turn == other.turn
        d = abs(float(self.turn) - float(other.turn)) % 1.0
        return min(d, 1.0 - d) <= FLOAT_TOL

    def __hash__(self) -> int:
        return hash(self.turn) if self.exact else hash(round(float(self.turn) / FLOAT_TOL))

    def __str__(self) -> str:
        return exact.format_scalar(self.turn)


ZERO_PHASE = Phase(0)


class GroupElement:
    """A point ``(x, y)`` of R^n x R^n; ``x`` translates, ``y`` modulates.

    Coordinates are normalised by :func:`heisenlab.exact.to_coordinate`. If
    any coordinate is a float, all of them are converted to floats and the
    element compares within ``FLOAT_TOL``.
    """

    __slots__ = ("x", "y", "_key")

    def __init__(self, x: Iterable, y: Iterable):
        xs = tuple(to_coordinate(v) for v in x)
        ys = tuple(to_coordinate(v) for v in y)
        if len(xs) != len(ys):
            raise DimensionError("x and y must have the same length")
        if not all(map(is_exact, xs + ys)):
            xs = tuple(float(v) for v in xs)
            ys = tuple(float(v) for v in ys)
            key = tuple(round(v / FLOAT_TOL) for v in xs + ys)
        else:
            key = xs + ys
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", ys)
        object.__setattr__(self, "_key", key)

    def __setattr__(self, name, value):
        raise AttributeError("GroupElement is immutable")

    @classmethod
    def identity(cls, n: int) -> GroupElement:
        return cls([0] * n, [0] * n)

    @classmethod
    def from_vector(cls, v: Sequence) -> GroupElement:
        """Build from a flat vector ``(x_1..x_n, y_1..y_n)`` of R^{2n}."""
        if len(v) % 2:
            raise DimensionError("vector length must be even")
        n = len(v) // 2
        return cls(v[:n], v[n:])

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def exact(self) -> bool:
        return all(map(is_exact, self.x + self.y))

    @property
    def vector(self) -> tuple:
        return self.x + self.y

    def is_identity(self) -> bool:
        return all(v == 0 for v in self._key)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        if self.exact != other.exact:
            return self.n == other.n and all(
                abs(float(a) - float(b)) <= FLOAT_TOL for a, b in zip(self.vector, other.vector)
            )
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __add__(self, other: GroupElement) -> GroupElement:
        _check_dims(self.n, other.n)
        return GroupElement(
            [a + b for a, b in zip(self.x, other.x)], [a + b for a, b in zip(self.y, other.y)]
        )

    def __neg__(self) -> GroupElement:
        return GroupElement([-a for a in self.x], [-b for b in self.y])

    def __sub__(self, other: GroupElement) -> GroupElement:
        return self + (-other)

    def scale(self, k) -> GroupElement:
        return GroupElement([k * a for a in self.x], [k * b for b in self.y])

    def __repr__(self) -> str:
        return f"GroupElement({self})"

    def __str__(self) -> str:
        xs = ",".join(exact.format_scalar(v) for v in self.x)
        ys = ",".join(exact.format_scalar(v) for v in self.y)
        return f"({xs};{ys})" if self.n > 1 else f"({xs},{ys})"

    def sort_key(self) -> tuple:
        return tuple(float(v) for v in self.vector)

    def to_json(self) -> dict:
        return {"x": [exact.format_scalar(v) for v in self.x], "y": [exact.format_scalar(v) for v in self.y]}

    @classmethod
    def from_json(cls, d: Mapping) -> GroupElement:
        return cls([_json_coord(v) for v in d["x"]], [_json_coord(v) for v in d["y"]])


def _json_coord(v):
    return exact.parse_scalar(v) if isinstance(v, str) else to_coordinate(v)


def ge_multiply(g: GroupElement, h: GroupElement) -> tuple[Phase, GroupElement]:
    """Twisted product of basis elements: ``(a,b)(x,y) = e(a.y) (a+x, b+y)``."""
    _check_dims(g.n, h.n)
    return Phase(_dot(g.x, h.y)), g + h


def ge_inverse(g: GroupElement) -> tuple[Phase, GroupElement]:
    """Inverse of a basis element: ``e(x.y) (-x,-y)``, so that ``g g^-1 = 1``."""
    return Phase(_dot(g.x, g.y)), -g


def ge_power(g: GroupElement, m: int) -> tuple[Phase, GroupElement]:
    """``g^m`` for any integer ``m``: ``e(m(m-1)/2 x.y) (m x, m y)``."""
    return Phase(Fraction(m * (m - 1), 2) * _dot(g.x, g.y)), g.scale(m)


class AlgebraElement:
    """Finite sum ``sum lambda_g g`` in the twisted group ring.

    Coefficients with modulus below ``CHOP`` are dropped. Equality compares
    supports exactly and coefficients to within ``CHOP``.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[GroupElement, complex] | Iterable = ()):
        self.n = n
        acc: dict[GroupElement, complex] = {}
        items = list(terms.items() if isinstance(terms, Mapping) else terms)
        if not all(g.exact for g, _ in items):
            # one float key forces the whole support into tolerance comparison
            items = [(GroupElement([float(v) for v in g.x], [float(v) for v in g.y]), c) for g, c in items]
        for g, c in items:
            _check_dims(n, g.n)
            acc[g] = acc.get(g, 0j) + complex(c)
        self._terms = {g: c for g, c in acc.items() if abs(c) >= CHOP}

    @classmethod
    def zero(cls, n: int) -> AlgebraElement:
        return cls(n)

    @classmethod
    def one(cls, n: int) -> AlgebraElement:
        return cls(n, {GroupElement.identity(n): 1})

    @classmethod
    def basis(cls, g: GroupElement, coeff: complex = 1, phase: Phase = ZERO_PHASE) -> AlgebraElement:
        return cls(g.n, {g: coeff * phase.value})

    @property
    def terms(self) -> Mapping[GroupElement, complex]:
        return dict(self._terms)

    def support(self) -> list[GroupElement]:
        return sorted(self._terms, key=GroupElement.sort_key)

    def coefficient(self, g: GroupElement) -> complex:
        return self._terms.get(g, 0j)

    def __iter__(self) -> Iterator[tuple[GroupElement, complex]]:
        for g in self.support():
            yield g, self._terms[g]

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def exact(self) -> bool:
        return all(g.exact for g in self._terms)

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        _check_dims(self.n, other.n)
        return AlgebraElement(self.n, list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self) -> AlgebraElement:
        return AlgebraElement(self.n, {g: -c for g, c in self._terms.items()})

    def __sub__(self, other: AlgebraElement) -> AlgebraElement:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return alg_multiply(self, other)
        if isinstance(other, (int, float, complex, Fraction)):
            return AlgebraElement(self.n, {g: c * complex(other) for g, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, Fraction)):
            return self * other
        return NotImplemented

    def isclose(self, other: AlgebraElement, tol: float = CHOP) -> bool:
        if self.n != other.n or set(self._terms) != set(other._terms):
            return False
        return all(abs(c - other._terms[g]) <= tol for g, c in self._terms.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None

    def __repr__(self) -> str:
        if not self._terms:
            return f"AlgebraElement({self.n}, 0)"
        body = " + ".join(f"({c:.6g})*{g}" for g, c in self)
        return f"AlgebraElement({self.n}, {body})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [dict(g.to_json(), re=c.real, im=c.imag) for g, c in self],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> AlgebraElement:
        n = int(d["n"])
        return cls(n, [(GroupElement.from_json(t), complex(t["re"], t.get("im", 0.0))) for t in d["terms"]])


def alg_multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    _check_dims(a.n, b.n)
    out = []
    for g, c in a._terms.items():
        for h, d in b._terms.items():
            ph, gh = ge_multiply(g, h)
            out.append((gh, c * d * ph.value))
    return AlgebraElement(a.n, out)


def alg_adjoint(a: AlgebraElement) -> AlgebraElement:
    """``(lambda g)^* = conj(lambda) g^{-1}`` extended antilinearly."""
    out = []
    for g, c in a._terms.items():
        ph, gi = ge_inverse(g)
        out.append((gi, c.conjugate() * ph.value))
    return AlgebraElement(a.n, out)


def conjugation_turn(g: GroupElement, h: GroupElement) -> Coordinate:
    """Turn of ``g h g^{-1} = e(beta(g, h)) h`` with ``beta = a.d - b.c``."""
    _check_dims(g.n, h.n)
    return to_coordinate(_dot(g.x, h.y) - _dot(g.y, h.x))


def alg_conjugate(g: GroupElement, a: AlgebraElement) -> AlgebraElement:
    """``g a g^{-1}``; support is unchanged, each coefficient picks up a phase."""
    _check_dims(g.n, a.n)
    return AlgebraElement(a.n, {h: c * Phase(conjugation_turn(g, h)).value for h, c in a._terms.items()})


def symbolic_trace(a: AlgebraElement) -> complex:
    """Coefficient of the identity."""
    return a.coefficient(GroupElement.identity(a.n))


# --- simplicity ------------------------------------------------------------

@dataclass(frozen=True)
class Move:
    """One ideal-preserving step.

    ``kind == "left"``: ``alpha <- scalar * g^{-1} * alpha``.
    ``kind == "conj_sub"``: ``alpha <- g alpha g^{-1} - alpha``.
    """

    kind: str
    element: GroupElement
    scalar: complex = 1 + 0j

    def apply(self, a: AlgebraElement) -> AlgebraElement:
        if self.kind == "left":
            ph, gi = ge_inverse(self.element)
            return AlgebraElement.basis(gi, self.scalar, ph) * a
        if self.kind == "conj_sub":
            return alg_conjugate(self.element, a) - a
        raise ValueError(f"unknown move {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "element": self.element.to_json(),
                "re": self.scalar.real, "im": self.scalar.imag}


@dataclass
class Certificate:
    """Replayable proof that the two-sided ideal generated by ``start`` is everything."""

    start: AlgebraElement
    moves: list[Move] = field(default_factory=list)

    def replay(self, trace: bool = False):
        a = self.start
        states = [a]
        for mv in self.moves:
            a = mv.apply(a)
            states.append(a)
        return states if trace else a

    def to_json(self) -> dict:
        return {"start": self.start.to_json(), "moves": [m.to_json() for m in self.moves]}


class ReductionError(RuntimeError):
    pass


def reduce_to_unit(a: AlgebraElement) -> Certificate:
    """Shrink ``a`` to the identity using only moves that stay in its ideal.

    While the support has two or more points: translate so the identity is in
    the support, pick another support point ``p``, and conjugate by an element
    that flips the sign of ``p``.  Subtracting the original kills the identity
    term and keeps ``p``, so the support strictly shrinks.
    """
    from .symplectic import solve_commutation

    if not a:
        raise ValueError("cannot reduce the zero element")
    if not a.exact:
        raise ExactnessError("reduce_to_unit needs exact coordinates")
    one = GroupElement.identity(a.n)
    cert = Certificate(a)
    cur = a
    while len(cur) > 1:
        if one not in cur._terms:
            mv = Move("left", cur.support()[0])
            cert.moves.append(mv)
            cur = mv.apply(cur)
        target = next(g for g in cur.support() if g != one)
        sep = solve_commutation([], target, Fraction(1, 2))
        mv = Move("conj_sub", sep)
        nxt = mv.apply(cur)
        if not nxt or len(nxt) >= len(cur):
            raise ReductionError("conjugate-and-subtract failed to shrink the support")
        cert.moves.append(mv)
        cur = nxt
    (g, c), = cur._terms.items()
    cert.moves.append(Move("left", g, 1 / c))
    return cert


# --- discrete subgroups ----------------------------------------------------

class Coefficients(tuple):
    """Integer coordinates of a subgroup member; ``certified`` is False when
    they came from floating-point least squares."""

    certified: bool = True

    def __new__(cls, values, certified: bool = True):
        obj = super().__new__(cls, values)
        obj.certified = certified
        return obj


class DiscreteSubgroup:
    """Subgroup of R^n x R^n spanned over Z by R-linearly independent generators."""

    def __init__(self, n: int, generators: Iterable[GroupElement]):
        self.n = n
        self.generators = tuple(generators)
        for g in self.generators:
            _check_dims(n, g.n)
        if len(self.generators) > 2 * n:
            raise ValueError("too many generators for a discrete subgroup")
        if self.exact:
            r = exact.rank([g.vector for g in self.generators]) if self.generators else 0
        else:
            r = np.linalg.matrix_rank(self.matrix(), tol=1e-9) if self.generators else 0
        if r != len(self.generators):
            raise ValueError("generators are not linearly independent over R")

    @classmethod
    def standard(cls, n: int) -> DiscreteSubgroup:
        """Z^n x Z^n."""
        gens = []
        for i in range(2 * n):
            v = [0] * (2 * n)
            v[i] = 1
            gens.append(GroupElement.from_vector(v))
        return cls(n, gens)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def exact(self) -> bool:
        return all(g.exact for g in self.generators)

    def matrix(self) -> np.ndarray:
        """Generators as columns of a float 2n x r matrix."""
        if not self.generators:
            return np.zeros((2 * self.n, 0))
        return np.array([[float(v) for v in g.vector] for g in self.generators]).T

    def element(self, coeffs: Sequence[int]) -> GroupElement:
        out = GroupElement.identity(self.n)
        for m, g in zip(coeffs, self.generators):
            out = out + g.scale(m)
        return out

    def __repr__(self) -> str:
        return f"DiscreteSubgroup(n={self.n}, generators=[{', '.join(map(str, self.generators))}])"

    def to_json(self) -> dict:
        return {"n": self.n, "generators": [g.to_json() for g in self.generators]}


def subgroup_member(G: DiscreteSubgroup, g: GroupElement) -> Coefficients | None:
    """Integer coordinates of ``g`` in the generators of ``G``, or ``None``."""
    _check_dims(G.n, g.n)
    if not G.generators:
        return Coefficients(()) if g.is_identity() else None
    if G.exact and g.exact:
        cols = [h.vector for h in G.generators]
        a = exact.transpose(cols)
        sol = exact.solve(a, list(g.vector))
        if sol is None:
            return None
        ints = []
        for v in sol:
            v = to_coordinate(v)
            if not isinstance(v, Fraction) or v.denominator != 1:
                return None
            ints.append(int(v))
        return Coefficients(ints)
    m = G.matrix()
    target = np.array([float(v) for v in g.vector])
    sol, *_ = np.linalg.lstsq(m, target, rcond=None)
    ints = np.rint(sol)
    if np.max(np.abs(m @ ints - target), initial=0.0) > 1e-9:
        return None
    return Coefficients([int(v) for v in ints], certified=False)
