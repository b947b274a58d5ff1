"""Gram-matrix certification of linear independence for finite Gabor systems."""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import DiscreteSubgroup, GroupElement
from .exact import format_scalar, to_coordinate
from .gaussian import as_sum, inner_product, tf_shift

KAPPA = 10.0
CERTIFIED = "certified-independent"
INCONCLUSIVE = "inconclusive"
CSV_COLUMNS = ["a", "b", "offset_x", "offset_y", "num_points", "lambda_min", "cond", "residual", "verdict"]


def worker_count(threads: int | None = None) -> int:
    """Explicit ``threads`` wins, then ``HEISENLAB_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("HEISENLAB_THREADS", "").strip()
        threads = int(env) if env else 1
    return max(1, int(threads))


class CosetPoints(list):
    """Enumerated points; ``truncated`` is set when ``max_points`` cut the list."""

    truncated: bool = False


@dataclass(frozen=True)
class CosetWindow:
    G: DiscreteSubgroup
    offset: GroupElement | None = None
    radius: float = 1.0
    max_points: int = 10_000

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        if self.max_points < 1:
            raise ValueError("max_points must be positive")
        if self.offset is not None and self.offset.n != self.G.n:
            raise ValueError("offset and subgroup dimensions differ")


def _combine(G: DiscreteSubgroup, offset: GroupElement, m: Sequence[int]) -> GroupElement:
    p = offset
    for mi, g in zip(m, G.generators):
        if mi:
            p = p + g.scale(mi)
    return p


def enumerate_coset(w: CosetWindow) -> CosetPoints:
    """Points ``offset + sum m_i g_i`` with ``|sum m_i g_i| <= radius``, in
    lexicographic order of ``(m_1, ..., m_r)``."""
    G = w.G
    offset = w.offset if w.offset is not None else GroupElement.identity(G.n)
    out = CosetPoints()
    if G.rank == 0:
        out.append(offset)
        return out
    M = np.array([[float(v) for v in g.vector] for g in G.generators]).T
    smin = float(np.linalg.svd(M, compute_uv=False)[-1])
    bound = int(math.floor(w.radius / smin + 1e-9))
    for m in itertools.product(range(-bound, bound + 1), repeat=G.rank):
        if np.linalg.norm(M @ np.array(m, dtype=float)) > w.radius + 1e-12:
            continue
        if len(out) == w.max_points:
            out.truncated = True
            break
        out.append(_combine(G, offset, m))
    return out


def grid_points(G: DiscreteSubgroup, side: int, offset: GroupElement | None = None) -> CosetPoints:
    """``offset + sum m_i g_i`` for ``m`` in ``{0, ..., side-1}^r``; ``side^r`` points."""
    if side < 1:
        raise ValueError("side must be positive")
    offset = offset if offset is not None else GroupElement.identity(G.n)
    return CosetPoints(_combine(G, offset, m) for m in itertools.product(range(side), repeat=G.rank))


def gram_matrix(points: Sequence[GroupElement], f, threads: int | None = None) -> np.ndarray:
    """``G[i, j] = <rho(p_i) f, rho(p_j) f>``, symmetrized to be exactly Hermitian."""
    f = as_sum(f)
    shifted = [tf_shift(p, f) for p in points]
    k = len(shifted)
    gram = np.zeros((k, k), dtype=complex)

    def row(i: int) -> None:
        for j in range(i, k):
            gram[i, j] = inner_product(shifted[i], shifted[j])

    workers = worker_count(threads)
    if workers == 1 or k < 2:
        for i in range(k):
            row(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(row, range(k)))
    upper = np.triu(gram)
    full = upper + np.triu(gram, 1).conj().T
    return (full + full.conj().T) / 2


@dataclass
class GramReport:
    points: list
    gram: np.ndarray
    eigenvalues: np.ndarray
    residual: float
    kappa: float = KAPPA
    truncated: bool = False
    eigenvector: np.ndarray = field(default=None, repr=False)

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def cond(self) -> float:
        return float(self.eigenvalues[-1] / self.lambda_min) if self.lambda_min > 0 else math.inf

    @property
    def verdict(self) -> str:
        return CERTIFIED if self.lambda_min > self.kappa * self.residual else INCONCLUSIVE

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "points": [p.to_json() for p in self.points],
            "num_points": len(self.points),
            "truncated": self.truncated,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "lambda_min": self.lambda_min,
            "cond": self.cond if math.isfinite(self.cond) else None,
            "residual": self.residual,
            "kappa": self.kappa,
            "verdict": self.verdict,
        }


def certify(points: Sequence[GroupElement], f, kappa: float = KAPPA, threads: int | None = None) -> GramReport:
    if not points:
        raise ValueError("need at least one point")
    gram = gram_matrix(points, f, threads)
    vals, vecs = np.linalg.eigh(gram)
    v = vecs[:, 0]
    residual = float(np.linalg.norm(gram @ v - vals[0] * v))
    return GramReport(
        list(points),
        gram,
        vals,
        residual,
        kappa,
        truncated=getattr(points, "truncated", False),
        eigenvector=v,
    )


def rectangular_lattice(a, b) -> DiscreteSubgroup:
    """``aZ x bZ`` in R x R."""
    a, b = to_coordinate(a), to_coordinate(b)
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    return DiscreteSubgroup(1, [GroupElement([a], [0]), GroupElement([0], [b])])


def _fmt(v: float) -> str:
    return repr(float(v))


def report_row(report: GramReport, a="", b="", offset: GroupElement | None = None) -> dict:
    if offset is None:
        ox = oy = ""
    else:
        ox = " ".join(format_scalar(v) for v in offset.x)
        oy = " ".join(format_scalar(v) for v in offset.y)
    return {
        "a": a if isinstance(a, str) else format_scalar(to_coordinate(a)),
        "b": b if isinstance(b, str) else format_scalar(to_coordinate(b)),
        "offset_x": ox,
        "offset_y": oy,
        "num_points": len(report.points),
        "lambda_min": _fmt(report.lambda_min),
        "cond": _fmt(report.cond),
        "residual": _fmt(report.residual),
        "verdict": report.verdict,
    }


def density_sweep(
    pairs: Iterable[tuple],
    f,
    sides: Iterable[int],
    offset: GroupElement | None = None,
    kappa: float = KAPPA,
    threads: int | None = None,
) -> list[dict]:
    """One CSV row per ``(a, b, side)``: a ``side x side`` grid of ``g + (aZ x bZ)``."""
    offset = offset if offset is not None else GroupElement.identity(1)
    sides = list(sides)
    rows = []
    for a, b in pairs:
        G = rectangular_lattice(a, b)
        for side in sides:
            rep = certify(grid_points(G, side, offset), f, kappa, threads)
            rows.append(report_row(rep, a, b, offset))
    return rows


def rows_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    return buf.getvalue()


def write_csv(rows: Iterable[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(rows_to_csv(rows))
