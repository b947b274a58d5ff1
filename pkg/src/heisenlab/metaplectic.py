"""Reduction of a discrete subgroup to a lattice containing the modulations.

A discrete subgroup ``G`` of R^n x R^n is embedded in R^{2n} x R^{2n},
completed to a real basis, and pushed through the linear map with matrix

    T = [[I/sqrt2, -J/sqrt2], [J/sqrt2, I/sqrt2]],   J = [[0, I], [I, 0]],

which factors as ``T = B A C B`` into a chirp, a dilation and a Fourier
transform.  The result is a lattice ``H`` containing ``0 x Z^{2n}`` and a
unitary ``u`` with ``u g u^{-1} = c(g) tau^{-1}(g)`` for every ``g``.  On such
a lattice the trace is realised by inner products against indicator
functions of small cubes.

All coordinates here are exact elements of Q(sqrt 2).
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .algebra import (
    AlgebraElement,
    DiscreteSubgroup,
    GroupElement,
    Phase,
    _dot,
    subgroup_member,
)
from .exact import SQRT2, ExactnessError, to_coordinate

FACTOR_KINDS = ("Dilation", "Chirp", "Fourier", "InverseDilation", "InverseChirp", "InverseFourier")


class MetaplecticError(RuntimeError):
    pass


class CubeParameterError(ValueError):
    """No valid cube side could be certified for the lattice."""


# --- embedding and bases ----------------------------------------------------

def embed_double(g: GroupElement) -> GroupElement:
    """``(x, y) -> ((x, 0), (y, 0))`` from R^n x R^n into R^{2n} x R^{2n}."""
    z = [0] * g.n
    return GroupElement(list(g.x) + z, list(g.y) + z)


def embed_algebra(a: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(2 * a.n, [(embed_double(g), c) for g, c in a])


def embed_subgroup(G: DiscreteSubgroup) -> DiscreteSubgroup:
    return DiscreteSubgroup(2 * G.n, [embed_double(g) for g in G.generators])


def _unit(i: int, size: int) -> list[Fraction]:
    v = [Fraction(0)] * size
    v[i] = Fraction(1)
    return v


def complete_basis(G: DiscreteSubgroup) -> list[GroupElement]:
    """Extend ``G``'s generators to a basis of R^{2n} greedily from ``e_1, e_2, ...``."""
    if not G.exact:
        raise ExactnessError("complete_basis needs exact generators")
    size = 2 * G.n
    basis = list(G.generators)
    rows = [list(g.vector) for g in basis]
    for i in range(size):
        if len(basis) == size:
            break
        cand = _unit(i, size)
        if exact.rank(rows + [cand]) > len(rows):
            rows.append(cand)
            basis.append(GroupElement.from_vector(cand))
    return basis


# --- exact matrices ---------------------------------------------------------

def _zeros(r: int, c: int) -> list[list]:
    return [[Fraction(0)] * c for _ in range(r)]


def _eye(k: int) -> list[list]:
    return [_unit(i, k) for i in range(k)]


def j_exact(d: int) -> list[list]:
    h = d // 2
    j = _zeros(d, d)
    for i in range(h):
        j[i][h + i] = Fraction(1)
        j[h + i][i] = Fraction(1)
    return j


def _blocks(a, b, c, d) -> list[list]:
    return [ra + rb for ra, rb in zip(a, b)] + [rc + rd for rc, rd in zip(c, d)]


def _smul(s, m) -> list[list]:
    return [[s * v for v in row] for row in m]


def chirp_matrix(d: int) -> list[list]:
    """``[[I, 0], [-J, I]]`` on R^d x R^d."""
    return _blocks(_eye(d), _zeros(d, d), _smul(-1, j_exact(d)), _eye(d))


def dilation_matrix(d: int) -> list[list]:
    """``[[J/sqrt2, 0], [0, sqrt2 J]]``."""
    j = j_exact(d)
    return _blocks(_smul(SQRT2 / 2, j), _zeros(d, d), _zeros(d, d), _smul(SQRT2, j))


def fourier_matrix(d: int) -> list[list]:
    """``[[0, -I], [I, 0]]``."""
    return _blocks(_zeros(d, d), _smul(-1, _eye(d)), _eye(d), _zeros(d, d))


def transition_exact(n: int) -> list[list]:
    d = 2 * n
    j = j_exact(d)
    s = SQRT2 / 2
    return _blocks(_smul(s, _eye(d)), _smul(-s, j), _smul(s, j), _smul(s, _eye(d)))


def _to_float(m) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in m])


@dataclass
class Transition:
    T: np.ndarray
    B: np.ndarray
    A: np.ndarray
    C: np.ndarray

    @property
    def factorization_error(self) -> float:
        return float(np.max(np.abs(self.B @ self.A @ self.C @ self.B - self.T)))


def transition_matrix(n: int) -> Transition:
    """Transition matrix from the standard basis to the rotated basis, and its
    chirp/dilation/Fourier factors ``B, A, C`` with ``B A C B = T``."""
    if n < 1:
        raise ValueError("n must be positive")
    d = 2 * n
    T = transition_exact(n)
    B, A, C = chirp_matrix(d), dilation_matrix(d), fourier_matrix(d)
    if exact.matmul(exact.matmul(exact.matmul(B, A), C), B) != T:
        raise MetaplecticError("exact factorization check failed")
    return Transition(_to_float(T), _to_float(B), _to_float(A), _to_float(C))


# --- factors ----------------------------------------------------------------

def _jvec(v: Sequence) -> list:
    h = len(v) // 2
    return list(v[h:]) + list(v[:h])


@dataclass(frozen=True)
class MetaplecticFactor:
    """A unitary on L^2(R^d) that conjugates shifts to linearly mapped shifts.

    ``conjugation(g)`` returns ``(phase, M g)`` with
    ``u^{-1} rho(g) u = phase * rho(M g)``.
    """

    kind: str
    d: int

    def __post_init__(self):
        if self.kind not in FACTOR_KINDS:
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.d % 2:
            raise ValueError("metaplectic factors need an even dimension")

    @property
    def inverse(self) -> MetaplecticFactor:
        k = self.kind[len("Inverse"):] if self.kind.startswith("Inverse") else "Inverse" + self.kind
        return MetaplecticFactor(k, self.d)

    def matrix(self) -> list[list]:
        base = self.kind.replace("Inverse", "")
        m = {"Dilation": dilation_matrix, "Chirp": chirp_matrix, "Fourier": fourier_matrix}[base](self.d)
        return exact.inverse(m) if self.kind.startswith("Inverse") else m

    def _forward(self, g: GroupElement) -> tuple[Phase, GroupElement]:
        x, y = list(g.x), list(g.y)
        if self.kind == "Chirp":
            jx = _jvec(x)
            return Phase(-_dot(jx, x) / 2), GroupElement(x, [a - b for a, b in zip(y, jx)])
        if self.kind == "Dilation":
            return Phase(0), GroupElement([v * SQRT2 / 2 for v in _jvec(x)], [v * SQRT2 for v in _jvec(y)])
        if self.kind == "Fourier":
            return Phase(-_dot(x, y)), GroupElement([-v for v in y], x)
        raise AssertionError(self.kind)

    def _backward_map(self, g: GroupElement) -> GroupElement:
        x, y = list(g.x), list(g.y)
        base = self.kind.replace("Inverse", "")
        if base == "Chirp":
            return GroupElement(x, [a + b for a, b in zip(y, _jvec(x))])
        if base == "Dilation":
            return GroupElement([v * SQRT2 for v in _jvec(x)], [v * SQRT2 / 2 for v in _jvec(y)])
        return GroupElement(y, [-v for v in x])

    def conjugation(self, g: GroupElement) -> tuple[Phase, GroupElement]:
        if g.n != self.d:
            raise ValueError("group element and factor dimensions differ")
        if not self.kind.startswith("Inverse"):
            return self._forward(g)
        # (u^{-1})^{-1} g u^{-1} = u g u^{-1} = conj(c(M^{-1} g)) M^{-1} g
        h = self._backward_map(g)
        ph, _ = self.inverse._forward(h)
        return -ph, h

    def to_json(self) -> dict:
        return {"kind": self.kind, "d": self.d}


@dataclass
class MetaplecticPipeline:
    """Factors listed in the order they act on functions.

    For ``u = u_k ... u_1`` the composite satisfies
    ``u^{-1} rho(g) u = e(.) rho(M_1 ... M_k g)``, so listing
    chirp, dilation, Fourier, chirp realises ``T = B A C B``.
    """

    factors: list[MetaplecticFactor]
    source: DiscreteSubgroup | None = None
    target: DiscreteSubgroup | None = None
    table: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.factors[0].d if self.factors else 0

    def pull(self, g: GroupElement) -> tuple[Phase, GroupElement]:
        """``u^{-1} rho(g) u = phase * rho(tau g)``."""
        total = Phase(0)
        for fac in reversed(self.factors):
            ph, g = fac.conjugation(g)
            total = total + ph
        return total, g

    def matrix(self) -> list[list]:
        m = _eye(2 * self.d)
        for fac in self.factors:
            m = exact.matmul(m, fac.matrix())
        return m

    def tau_inverse(self, g: GroupElement) -> GroupElement:
        v = exact.matvec(exact.inverse(self.matrix()), list(g.vector))
        return GroupElement.from_vector(v)

    def push(self, g: GroupElement) -> tuple[Phase, GroupElement]:
        """``u rho(g) u^{-1} = c(g) rho(tau^{-1} g)``; returns ``(c(g), tau^{-1} g)``."""
        h = self.tau_inverse(g)
        ph, back = self.pull(h)
        if back != g:
            raise MetaplecticError("pipeline matrix and conjugation chain disagree")
        return -ph, h

    def transport(self, a: AlgebraElement) -> AlgebraElement:
        """Image of ``a`` under ``alpha -> u alpha u^{-1}``; accepts elements of
        the source dimension and embeds them first."""
        if a.n * 2 == self.d:
            a = embed_algebra(a)
        out = []
        for g, c in a:
            ph, h = self.table[g] if g in self.table else self.push(g)
            out.append((h, c * ph.value))
        return AlgebraElement(self.d, out)

    def to_json(self) -> dict:
        return {
            "factors": [f.to_json() for f in self.factors],
            "map": [
                {"g": g.to_json(), "turn": str(ph), "h": h.to_json()} for g, (ph, h) in self.table.items()
            ],
            "target": self.target.to_json() if self.target is not None else None,
        }


def standard_pipeline(n: int) -> MetaplecticPipeline:
    d = 2 * n
    return MetaplecticPipeline([MetaplecticFactor(k, d) for k in ("Chirp", "Dilation", "Fourier", "Chirp")])


def build_H(G: DiscreteSubgroup) -> tuple[DiscreteSubgroup, MetaplecticPipeline]:
    """Lattice ``H`` of R^{2n} x R^{2n} containing ``0 x Z^{2n}`` with
    ``tau H = K`` containing the embedded ``G``, plus the pipeline ``u``."""
    if not G.exact:
        raise ExactnessError("build_H needs exact generators")
    n = G.n
    size = 4 * n
    T = transition_exact(n)
    Tt = exact.transpose(T)  # T is orthogonal
    basis = [embed_double(g) for g in complete_basis(G)]
    f_tail = [GroupElement.from_vector([T[i][j] for i in range(size)]) for j in range(2 * n, size)]
    K = basis + f_tail
    coords = [exact.matvec(Tt, list(k.vector)) for k in K]
    for i, a in enumerate(coords[2 * n:], start=2 * n):
        if a != _unit(i, size):
            raise MetaplecticError("tail of K does not have unit coordinates")
    H = DiscreteSubgroup(2 * n, [GroupElement.from_vector(a) for a in coords])
    for j in range(2 * n):
        if subgroup_member(H, GroupElement.from_vector(_unit(2 * n + j, size))) is None:
            raise MetaplecticError(f"(0, e_{j + 1}) is not in H")

    pipe = standard_pipeline(n)
    if pipe.matrix() != T:
        raise MetaplecticError("pipeline does not realise T")
    src = embed_subgroup(G)
    for g in src.generators:
        ph, h = pipe.push(g)
        if subgroup_member(H, h) is None:
            raise MetaplecticError(f"tau^-1 {g} is not in H")
        pipe.table[g] = (ph, h)
    pipe.source, pipe.target = src, H
    return H, pipe


# --- cube trace ---------------------------------------------------------------

def _lll(basis: np.ndarray, delta: float = 0.75) -> np.ndarray:
    """LLL on the columns of ``basis``; returns the integer transform ``U``."""
    b = basis.astype(float).copy()
    k = b.shape[1]
    u = np.eye(k, dtype=object)

    def gso(b):
        bs = np.zeros_like(b)
        mu = np.zeros((k, k))
        for i in range(k):
            bs[:, i] = b[:, i]
            for j in range(i):
                mu[i, j] = b[:, i] @ bs[:, j] / (bs[:, j] @ bs[:, j])
                bs[:, i] -= mu[i, j] * bs[:, j]
        return bs, mu

    bs, mu = gso(b)
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            q = round(mu[i, j])
            if q:
                b[:, i] -= q * b[:, j]
                u[:, i] = u[:, i] - q * u[:, j]
                bs, mu = gso(b)
        if bs[:, i] @ bs[:, i] >= (delta - mu[i, i - 1] ** 2) * (bs[:, i - 1] @ bs[:, i - 1]):
            i += 1
        else:
            b[:, [i - 1, i]] = b[:, [i, i - 1]]
            u[:, [i - 1, i]] = u[:, [i, i - 1]]
            bs, mu = gso(b)
            i = max(i - 1, 1)
    return u


@dataclass
class CubeTraceData:
    H: DiscreteSubgroup
    b: int
    min_translation: object
    offsets: list = field(default_factory=list)

    @property
    def c(self) -> int:
        return len(self.offsets)


def translation_lattice(H: DiscreteSubgroup) -> list[list]:
    """Exact Z-basis (columns) of the projection of ``H`` onto translations.

    Raises :class:`CubeParameterError` if that projection is not discrete or
    if ``H`` contains a pure modulation ``(0, k)`` with ``k`` not integral.
    """
    d = H.n
    gens = H.generators
    mx = [[g.x[i] for g in gens] for i in range(d)]
    mk = [[g.y[i] for g in gens] for i in range(d)]
    rat_rows = []
    for row in mx:
        exp_ = exact.rational_expansion(row)
        rat_rows.append(exp_[0::2])
        rat_rows.append(exp_[1::2])
    _, U, r = exact.column_hermite(exact.rational_rows_to_int(rat_rows))
    real_rank = exact.rank(mx)
    if r != real_rank:
        raise CubeParameterError("no valid cube parameter: translation parts are not discrete")
    for col in range(r, len(gens)):
        u = [Fraction(U[i][col]) for i in range(len(gens))]
        k = exact.matvec(mk, u)
        if any(not isinstance(to_coordinate(v), Fraction) or to_coordinate(v).denominator != 1 for v in k):
            raise CubeParameterError("no valid cube parameter: H contains (0, k) with k not integral")
    first = [[Fraction(U[i][c]) for c in range(r)] for i in range(len(gens))]
    return exact.matmul(mx, first)


def _inf_norm(v: Sequence) -> object:
    return max((abs(to_coordinate(c)) for c in v), default=Fraction(0))


def choose_b(H: DiscreteSubgroup, radius: int = 3) -> CubeTraceData:
    """Smallest integer ``b`` with ``1/b`` strictly below the least sup-norm of a
    nonzero translation in ``H``; subcubes of side ``1/b`` are then moved off
    themselves by every element of ``H`` with a nonzero translation."""
    if not H.exact:
        raise ExactnessError("choose_b needs exact generators")
    d = H.n
    if H.rank != 2 * d:
        raise CubeParameterError("no valid cube parameter: H is not a lattice")
    B = translation_lattice(H)
    r = len(B[0]) if B and B[0] else 0
    if r != d:
        raise CubeParameterError("no valid cube parameter: translations do not span R^d")
    U = _lll(_to_float(B))
    B = exact.matmul(B, [[Fraction(int(v)) for v in row] for row in U])
    Bf = _to_float(B)

    coeffs = np.array([m for m in itertools.product(range(-radius, radius + 1), repeat=r) if any(m)])
    norms = np.max(np.abs(coeffs @ Bf.T), axis=1)
    best = float(np.min(norms))
    sigma = float(np.linalg.svd(Bf, compute_uv=False)[-1])
    if sigma * (radius + 1) / math.sqrt(d) <= best * (1 + 1e-9):
        raise CubeParameterError(
            f"no valid cube parameter: enumeration radius {radius} cannot certify the minimum"
        )
    cands = coeffs[norms <= best * (1 + 1e-9) + 1e-12]
    m_exact = min(_inf_norm(exact.matvec(B, [Fraction(int(v)) for v in m])) for m in cands)
    if m_exact <= 0:
        raise CubeParameterError("no valid cube parameter: zero translation length")
    b = math.floor(1 / m_exact) + 1
    offsets = [tuple(Fraction(i, b) for i in idx) for idx in itertools.product(range(b), repeat=d)]
    return CubeTraceData(H, b, m_exact, offsets)


def _interval(k: Fraction, lo: Fraction, width: Fraction) -> complex:
    if k == 0:
        return float(width)
    kf = float(k)
    hi = float(lo + width)
    return (cmath.exp(2j * math.pi * kf * hi) - cmath.exp(2j * math.pi * kf * float(lo))) / (2j * math.pi * kf)


def cube_trace(theta: AlgebraElement, data: CubeTraceData, check: bool = True) -> complex:
    """``sum_i <theta chi_i, chi_i>`` over the ``b^d`` subcubes of the unit cube."""
    if theta.n != data.H.n:
        raise ValueError("element and lattice dimensions differ")
    side = Fraction(1, data.b)
    total = 0j
    for g, lam in theta:
        if check and subgroup_member(data.H, g) is None:
            raise ValueError(f"{g} is not in H")
        if any(v != 0 for v in g.x):
            if not _inf_norm(g.x) > side:
                raise MetaplecticError("cube parameter does not separate this translation")
            continue
        k = [to_coordinate(v) for v in g.y]
        acc = 0j
        for off in data.offsets:
            term = 1 + 0j
            for kj, oj in zip(k, off):
                term *= _interval(kj, oj, side)
            acc += term
        total += lam * acc
    return total
