"""Skew Laurent polynomials over the subring C*H.

Given ``G = H + Z x`` every element of C*G is uniquely ``sum_i a_i x^i`` with
``a_i`` in C*H.  Multiplication follows the twisted rule
``(a X^i)(b X^j) = a sigma^i(b) X^{i+j}`` where ``sigma(b) = x b x^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from .algebra import (
    AlgebraElement,
    DiscreteSubgroup,
    GroupElement,
    Phase,
    alg_conjugate,
    conjugation_turn,
    ge_multiply,
    ge_power,
    subgroup_member,
)
from .exact import to_coordinate


class SplittingError(ValueError):
    pass


class SubgroupSplitting:
    """``G = H + Z x`` with ``H``'s generators plus ``x`` a Z-basis of ``G``."""

    def __init__(self, G: DiscreteSubgroup, H: DiscreteSubgroup, x: GroupElement):
        if H.rank + 1 != G.rank:
            raise SplittingError("H must have rank one less than G")
        basis = DiscreteSubgroup(G.n, list(H.generators) + [x])
        for g in G.generators:
            if subgroup_member(basis, g) is None:
                raise SplittingError(f"{g} is not in H + Zx")
        for g in basis.generators:
            if subgroup_member(G, g) is None:
                raise SplittingError(f"{g} is not in G")
        self.G, self.H, self.x = G, H, x
        self._basis = basis

    @classmethod
    def last_generator(cls, G: DiscreteSubgroup) -> SubgroupSplitting:
        """Split off the last generator of ``G``."""
        if G.rank == 0:
            raise SplittingError("the trivial group has no infinite cyclic quotient")
        return cls(G, DiscreteSubgroup(G.n, G.generators[:-1]), G.generators[-1])

    @property
    def n(self) -> int:
        return self.G.n

    def split(self, g: GroupElement) -> tuple[int, GroupElement]:
        """``g = h + m x``; returns ``(m, h)``."""
        coeffs = subgroup_member(self._basis, g)
        if coeffs is None:
            raise SplittingError(f"{g} is not in G")
        m = coeffs[-1]
        return m, g - self.x.scale(m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SubgroupSplitting):
            return NotImplemented
        return self.x == other.x and self.H.generators == other.H.generators


def decompose_element(g: GroupElement, s: SubgroupSplitting) -> tuple[int, Phase, GroupElement]:
    """Write the basis element ``g`` as ``e(turn) h x^m``; returns ``(m, phase, h)``."""
    m, h = s.split(g)
    return m, -_recompose_turn(h, s, m), h


def _recompose_turn(h: GroupElement, s: SubgroupSplitting, m: int) -> Phase:
    # h x^m = e(turn) (h + m x)
    pm, xm = ge_power(s.x, m)
    pmul, _ = ge_multiply(h, xm)
    return pm + pmul


@dataclass
class TwistedPoly:
    """``sum_i coeffs[i] X^i`` with each coefficient in C*H (Laurent degrees allowed)."""

    splitting: SubgroupSplitting
    coeffs: dict[int, AlgebraElement] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {i: a for i, a in self.coeffs.items() if a}

    @classmethod
    def constant(cls, s: SubgroupSplitting, a: AlgebraElement) -> TwistedPoly:
        return cls(s, {0: a})

    @classmethod
    def monomial(cls, s: SubgroupSplitting, degree: int = 1, a: AlgebraElement | None = None) -> TwistedPoly:
        return cls(s, {degree: a if a is not None else AlgebraElement.one(s.n)})

    def degrees(self) -> list[int]:
        return sorted(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __add__(self, other: TwistedPoly) -> TwistedPoly:
        _same_splitting(self, other)
        out = dict(self.coeffs)
        for i, a in other.coeffs.items():
            out[i] = out[i] + a if i in out else a
        return TwistedPoly(self.splitting, out)

    def __mul__(self, other: TwistedPoly) -> TwistedPoly:
        return tp_multiply(self, other)

    def isclose(self, other: TwistedPoly, tol: float = 1e-12) -> bool:
        if set(self.coeffs) != set(other.coeffs):
            return False
        return all(a.isclose(other.coeffs[i], tol) for i, a in self.coeffs.items())

    def to_json(self) -> dict:
        return {
            "x": self.splitting.x.to_json(),
            "coeffs": {str(i): self.coeffs[i].to_json() for i in self.degrees()},
        }


def _same_splitting(p: TwistedPoly, q: TwistedPoly) -> None:
    if p.splitting is not q.splitting and p.splitting != q.splitting:
        raise SplittingError("twisted polynomials use different splittings")


def sigma_power(s: SubgroupSplitting, i: int, a: AlgebraElement) -> AlgebraElement:
    """``x^i a x^{-i}``: conjugation by the point ``i x`` (phases only depend on it)."""
    return alg_conjugate(s.x.scale(i), a)


def x_power(s: SubgroupSplitting, m: int) -> AlgebraElement:
    ph, g = ge_power(s.x, m)
    return AlgebraElement.basis(g, 1, ph)


def decompose(a: AlgebraElement, s: SubgroupSplitting) -> TwistedPoly:
    out: dict[int, list] = {}
    for g, c in a:
        m, ph, h = decompose_element(g, s)
        out.setdefault(m, []).append((h, c * ph.value))
    return TwistedPoly(s, {m: AlgebraElement(a.n, terms) for m, terms in out.items()})


def recompose(p: TwistedPoly) -> AlgebraElement:
    s = p.splitting
    total = AlgebraElement.zero(s.n)
    for i in p.degrees():
        total = total + p.coeffs[i] * x_power(s, i)
    return total


def tp_multiply(p: TwistedPoly, q: TwistedPoly) -> TwistedPoly:
    _same_splitting(p, q)
    s = p.splitting
    out: dict[int, AlgebraElement] = {}
    for i, a in p.coeffs.items():
        for j, b in q.coeffs.items():
            term = a * sigma_power(s, i, b)
            out[i + j] = out[i + j] + term if i + j in out else term
    return TwistedPoly(s, out)


def zeta_twist(p: TwistedPoly, t) -> TwistedPoly:
    """Multiply the degree-``i`` coefficient by ``exp(2 pi i i t)``."""
    t = to_coordinate(t)
    return TwistedPoly(p.splitting, {i: a * Phase(i * t).value for i, a in p.coeffs.items()})


def normalize(p: TwistedPoly) -> tuple[int, TwistedPoly]:
    """Left-multiply by ``X^m`` so the lowest degree becomes 0; returns ``(m, X^m p)``."""
    if not p:
        return 0, p
    m = -min(p.coeffs)
    return m, tp_multiply(TwistedPoly.monomial(p.splitting, m), p)


def twist_turns(a: AlgebraElement, s: SubgroupSplitting, y: GroupElement, t) -> list[tuple[GroupElement, Phase, Phase]]:
    """Exact phase bookkeeping for the identity ``y a y^{-1} = a'``.

    For every support point ``g`` returns the exact phase that conjugation by
    ``y`` attaches to ``g`` and the exact phase the route
    decompose -> twist -> recompose attaches to it.  The identity holds
    exactly iff each pair is equal.
    """
    rows = []
    for g, _ in a:
        conj = Phase(conjugation_turn(y, g))
        m, ph, h = decompose_element(g, s)
        twisted = ph + Phase(m * to_coordinate(t)) + _recompose_turn(h, s, m)
        rows.append((g, conj, twisted))
    return rows
