"""Symplectic form on R^n x R^n and the commutation solver.

``beta((a, b), (c, d)) = a.d - b.c`` is the exponent of the commutator of
two time-frequency shifts: ``g h g^{-1} = exp(2 pi i beta(g, h)) h``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .algebra import GroupElement, Phase, _check_dims, conjugation_turn
from .exact import Coordinate, is_exact, to_coordinate


class DependentGeneratorsError(ValueError):
    pass


def form_beta(u: GroupElement, v: GroupElement) -> Coordinate:
    return conjugation_turn(u, v)


def conjugation_phase(g: GroupElement, h: GroupElement) -> Phase:
    return Phase(form_beta(g, h))


def form_matrix(n: int) -> list[list[Fraction]]:
    """Gram matrix of beta on the standard basis of R^{2n}: ``[[0, I], [-I, 0]]``."""
    m = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        m[i][n + i] = Fraction(1)
        m[n + i][i] = Fraction(-1)
    return m


def _row(h: GroupElement) -> list:
    # beta(y, h) = y_x . h_y - y_y . h_x, linear in y = (y_x, y_y)
    return list(h.y) + [-c for c in h.x]


def solve_commutation(H_gens: Sequence[GroupElement], x: GroupElement, t) -> GroupElement:
    """Minimum-norm ``y`` with ``beta(y, h) = 0`` for every ``h`` in ``H_gens``
    and ``beta(y, x) = t``.

    Conjugation by ``y`` then fixes every ``h`` and multiplies ``x`` by
    ``exp(2 pi i t)``.
    """
    gens = list(H_gens) + [x]
    _check_dims(*(g.n for g in gens))
    n = x.n
    if len(gens) > 2 * n:
        raise DependentGeneratorsError("more than 2n vectors cannot be independent")
    t = to_coordinate(t)
    rows = [_row(g) for g in gens]
    rhs = [Fraction(0)] * (len(gens) - 1) + [t]
    if all(g.exact for g in gens) and is_exact(t):
        if exact.rank(rows) != len(rows):
            raise DependentGeneratorsError("input vectors are linearly dependent")
        y = exact.min_norm_solve(rows, rhs)
        return GroupElement.from_vector(y)
    a = np.array([[float(v) for v in r] for r in rows])
    if np.linalg.matrix_rank(a, tol=1e-9) != len(rows):
        raise DependentGeneratorsError("input vectors are linearly dependent")
    y = np.linalg.pinv(a) @ np.array([float(v) for v in rhs])
    return GroupElement.from_vector([float(v) for v in y])
