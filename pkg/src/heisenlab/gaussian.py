"""Closed-form calculus for generalized Gaussians on R^d.

A packet is ``f(t) = exp(-pi t^T A t + 2 pi w^T t + r)`` with complex
symmetric ``A`` whose real part is positive definite.  The family is closed
under time-frequency shifts, the Fourier transform, chirp multiplication,
linear changes of variable and tensor products, and its inner products have
closed forms.  Storing the log-amplitude ``r`` rather than a prefactor turns
scalings into additions and avoids overflow.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .algebra import AlgebraElement, DimensionError, GroupElement

SYM_TOL = 1e-14


class PacketError(ValueError):
    pass


class QuadratureWarning(RuntimeWarning):
    pass


def _logdet(a: np.ndarray) -> complex:
    # every eigenvalue has positive real part here, so principal logs give the
    # analytic continuation of log det from real SPD matrices
    return complex(np.sum(np.log(np.linalg.eigvals(a).astype(complex))))


def j_matrix(d: int) -> np.ndarray:
    """``[[0, I], [I, 0]]`` with ``d/2`` blocks."""
    if d % 2:
        raise PacketError("J needs an even dimension")
    h = d // 2
    j = np.zeros((d, d))
    j[:h, h:] = np.eye(h)
    j[h:, :h] = np.eye(h)
    return j


@dataclass(frozen=True)
class GaussianPacket:
    A: np.ndarray
    w: np.ndarray
    r: complex = 0j

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        w = np.atleast_1d(np.asarray(self.w, dtype=complex))
        if A.shape != (w.size, w.size):
            raise PacketError("A must be d x d with d = len(w)")
        if np.max(np.abs(A - A.T), initial=0.0) >= SYM_TOL * max(1.0, np.max(np.abs(A))):
            raise PacketError("A must be symmetric")
        A = (A + A.T) / 2
        if np.min(np.linalg.eigvalsh(A.real)) <= 0:
            raise PacketError("Re A must be positive definite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "r", complex(self.r))

    @property
    def d(self) -> int:
        return self.w.size

    @classmethod
    def standard(cls, d: int = 1) -> GaussianPacket:
        """``exp(-pi |t|^2)``."""
        return cls(np.eye(d), np.zeros(d))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if t.ndim == 1 and self.d > 1:
            t = t[None, :]
        t = t.reshape(-1, self.d)
        quad = np.einsum("ki,ij,kj->k", t, self.A, t)
        return np.exp(-np.pi * quad + 2 * np.pi * t @ self.w + self.r)

    def to_json(self) -> dict:
        cj = lambda z: {"re": float(z.real), "im": float(z.imag)}  # noqa: E731
        return {
            "d": self.d,
            "A": [[cj(z) for z in row] for row in self.A],
            "w": [cj(z) for z in self.w],
            "r": cj(self.r),
        }

    @classmethod
    def from_json(cls, d: dict) -> GaussianPacket:
        cz = lambda o: complex(o["re"], o.get("im", 0.0)) if isinstance(o, dict) else complex(o)  # noqa: E731
        p = cls(np.array([[cz(z) for z in row] for row in d["A"]]), np.array([cz(z) for z in d["w"]]), cz(d["r"]))
        if "d" in d and int(d["d"]) != p.d:
            raise PacketError("declared d does not match A")
        return p


class PacketSum(tuple):
    """Finite sum of packets of a common dimension; the empty sum is zero."""

    def __new__(cls, packets: Iterable[GaussianPacket] = (), d: int | None = None):
        packets = tuple(packets)
        dims = {p.d for p in packets}
        if d is not None:
            dims.add(d)
        if len(dims) > 1:
            raise DimensionError(f"mixed packet dimensions {sorted(dims)}")
        obj = super().__new__(cls, packets)
        obj.d = dims.pop() if dims else 0
        return obj

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1, max(self.d, 1))
        out = np.zeros(t.shape[0], dtype=complex)
        for p in self:
            out += p(t)
        return out

    def __add__(self, other):
        return PacketSum(tuple(self) + tuple(other), self.d or other.d)

    def to_json(self) -> list:
        return [p.to_json() for p in self]


def as_sum(f) -> PacketSum:
    if isinstance(f, PacketSum):
        return f
    if isinstance(f, GaussianPacket):
        return PacketSum([f])
    return PacketSum(f)


def _map(f, fn) -> PacketSum:
    f = as_sum(f)
    return PacketSum([fn(p) for p in f], f.d)


def scale(f, c: complex) -> PacketSum:
    c = complex(c)
    if c == 0:
        return PacketSum((), as_sum(f).d)
    lc = cmath.log(c)
    return _map(f, lambda p: GaussianPacket(p.A, p.w, p.r + lc))


def tf_shift(g: GroupElement, f) -> PacketSum:
    """``(x, y) f(t) = exp(2 pi i y.t) f(t + x)``."""
    f = as_sum(f)
    if g.n != f.d:
        raise DimensionError(f"group dimension {g.n} vs packet dimension {f.d}")
    x = np.array([float(v) for v in g.x])
    y = np.array([float(v) for v in g.y])

    def shift(p: GaussianPacket) -> GaussianPacket:
        ax = p.A @ x
        return GaussianPacket(p.A, p.w - ax + 1j * y, p.r - np.pi * x @ ax + 2 * np.pi * p.w @ x)

    return _map(f, shift)


def apply_algebra(theta: AlgebraElement, f) -> PacketSum:
    f = as_sum(f)
    if theta.n != f.d:
        raise DimensionError(f"algebra dimension {theta.n} vs packet dimension {f.d}")
    out = PacketSum((), f.d)
    for g, c in theta:
        out = out + scale(tf_shift(g, f), c)
    return out


def fourier(f, inverse: bool = False) -> PacketSum:
    """``u f(t) = int exp(2 pi i t.s) f(s) ds`` (``inverse`` flips the sign)."""
    sgn = -1j if inverse else 1j

    def ft(p: GaussianPacket) -> GaussianPacket:
        try:
            ainv = np.linalg.inv(p.A)
        except np.linalg.LinAlgError as exc:
            raise PacketError("A is numerically singular") from exc
        ainv = (ainv + ainv.T) / 2
        return GaussianPacket(ainv, sgn * ainv @ p.w, p.r + np.pi * p.w @ ainv @ p.w - 0.5 * _logdet(p.A))

    return _map(f, ft)


def chirp(f, sign: int = 1) -> PacketSum:
    """Multiply by ``exp(-sign * pi i t.Jt)``."""
    f = as_sum(f)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    j = j_matrix(f.d)
    return _map(f, lambda p: GaussianPacket(p.A + sign * 1j * j, p.w, p.r))


def linear_substitute(f, M, scale_factor: complex = 1.0) -> PacketSum:
    """``f(t) -> scale_factor * f(M t)``."""
    M = np.asarray(M, dtype=float)
    f = as_sum(f)
    if M.shape != (f.d, f.d):
        raise DimensionError("substitution matrix has the wrong shape")
    if abs(np.linalg.det(M)) < 1e-14:
        raise PacketError("substitution matrix is singular")
    lc = cmath.log(complex(scale_factor))
    return _map(f, lambda p: GaussianPacket(M.T @ p.A @ M, M.T @ p.w, p.r + lc))


def dilation(f, inverse: bool = False) -> PacketSum:
    """Unitary ``f(t) -> 2^{-d/4} f(Jt / sqrt 2)`` (inverse: ``2^{d/4} f(sqrt2 J t)``)."""
    f = as_sum(f)
    j = j_matrix(f.d)
    if inverse:
        return linear_substitute(f, math.sqrt(2) * j, 2 ** (f.d / 4))
    return linear_substitute(f, j / math.sqrt(2), 2 ** (-f.d / 4))


def tensor(f, g) -> PacketSum:
    """``(f x g)(s, t) = f(s) g(t)``."""
    f, g = as_sum(f), as_sum(g)
    out = []
    for p in f:
        for q in g:
            A = np.zeros((p.d + q.d, p.d + q.d), dtype=complex)
            A[: p.d, : p.d] = p.A
            A[p.d :, p.d :] = q.A
            out.append(GaussianPacket(A, np.concatenate([p.w, q.w]), p.r + q.r))
    return PacketSum(out, f.d + g.d)


def _log_ip(p: GaussianPacket, q: GaussianPacket) -> complex:
    S = p.A + q.A.conj()
    v = p.w + q.w.conj()
    return p.r + q.r.conjugate() + np.pi * v @ np.linalg.solve(S, v) - 0.5 * _logdet(S)


def inner_product(f, g) -> complex:
    """``<f, g> = int f(t) conj(g(t)) dt`` in closed form."""
    f, g = as_sum(f), as_sum(g)
    if f and g and f.d != g.d:
        raise DimensionError("packet dimensions differ")
    return complex(sum((cmath.exp(_log_ip(p, q)) for p in f for q in g), 0j))


def norm(f) -> float:
    return math.sqrt(max(inner_product(f, f).real, 0.0))


def _packet_distance(p: GaussianPacket, q: GaussianPacket) -> float:
    pp, qq = inner_product(p, p).real, inner_product(q, q).real
    coarse = pp + qq - 2 * inner_product(p, q).real
    if coarse > 1e-8 * pp:
        return math.sqrt(coarse)
    # Nearly equal packets: the Gram formula loses half the digits, so
    # integrate |p|^2 |1 - q/p|^2 with Gauss-Hermite nodes on the weight |p|^2.
    d = p.d
    P = p.A.real
    mu = np.linalg.solve(P, p.w.real)
    L = np.linalg.cholesky(np.linalg.inv(4 * np.pi * P))
    k = 6 if d <= 4 else 4
    z, wts = np.polynomial.hermite_e.hermegauss(k)
    wts = wts / math.sqrt(2 * math.pi)
    zz = np.array(list(product(z, repeat=d)))
    ww = np.prod(np.array(list(product(wts, repeat=d))), axis=1)
    t = mu + zz @ L.T
    dA, dw, dr = q.A - p.A, q.w - p.w, q.r - p.r
    delta = -np.pi * np.einsum("ki,ij,kj->k", t, dA, t) + 2 * np.pi * t @ dw + dr
    return math.sqrt(pp * float(np.sum(ww * np.abs(np.expm1(delta)) ** 2)))


def _merged_difference(f: PacketSum, g: PacketSum, rtol: float = 1e-13) -> PacketSum:
    # Packets of f - g sharing (A, w) up to rtol collapse into one packet whose
    # coefficient is summed relative to the largest exponent of the group.
    groups: list[list[tuple[GaussianPacket, int]]] = []
    for p, s in [(p, 1) for p in f] + [(q, -1) for q in g]:
        for grp in groups:
            rep = grp[0][0]
            tol = rtol * max(1.0, np.max(np.abs(rep.A)), np.max(np.abs(rep.w), initial=0.0))
            if np.max(np.abs(rep.A - p.A)) <= tol and np.max(np.abs(rep.w - p.w), initial=0.0) <= tol:
                grp.append((p, s))
                break
        else:
            groups.append([(p, s)])
    out = []
    for grp in groups:
        top = max(grp, key=lambda e: e[0].r.real)[0]
        c = sum(s * cmath.exp(p.r - top.r) for p, s in grp)
        if c != 0:
            out.append(GaussianPacket(top.A, top.w, top.r + cmath.log(c)))
    return PacketSum(out, f.d or g.d)


def l2_distance(f, g) -> float:
    """``||f - g||_2``, accurate to relative round-off for nearby single packets.

    For sums, packets with matching quadratic data are merged first so that
    equal terms cancel before any inner product is formed.
    """
    f, g = as_sum(f), as_sum(g)
    if len(f) == 1 and len(g) == 1:
        return _packet_distance(f[0], g[0])
    h = _merged_difference(f, g)
    return math.sqrt(max(inner_product(h, h).real, 0.0))


def quadrature_inner_product(f, g, nodes: int = 200, radius: float = 6.0, tol: float = 1e-8) -> complex:
    """Tensor Gauss-Legendre approximation of ``<f, g>`` over ``[-R, R]^d``.

    Error model: the result is compared with the same rule at three quarters of the nodes,
    and the integrand is sampled on the box boundary to bound truncation.  If
    that estimate exceeds ``tol`` a :class:`QuadratureWarning` is issued.
    """
    f, g = as_sum(f), as_sum(g)
    d = f.d or g.d
    if d > 2:
        raise DimensionError("quadrature oracle supports d <= 2")
    if not f or not g:
        return 0j

    def rule(k: int) -> complex:
        x, w = np.polynomial.legendre.leggauss(k)
        x, w = radius * x, radius * w
        pts = np.array(list(product(x, repeat=d)))
        wts = np.prod(np.array(list(product(w, repeat=d))), axis=1)
        return complex(np.sum(wts * f(pts) * np.conj(g(pts))))

    val = rule(nodes)
    edge = np.linspace(-radius, radius, 41)
    if d == 1:
        bnd = np.array([[-radius], [radius]])
    else:
        bnd = np.array([[a, s * radius] for a in edge for s in (-1, 1)] + [[s * radius, a] for a in edge for s in (-1, 1)])
    tail = float(np.max(np.abs(f(bnd) * np.conj(g(bnd))))) * (2 * radius) ** d
    est = abs(val - rule(max(3 * nodes // 4, 2))) + tail
    if est > tol:
        warnings.warn(f"quadrature error estimate {est:.2e} exceeds {tol:.1e}", QuadratureWarning, stacklevel=2)
    return val


# --- metaplectic factors on packets ---------------------------------------

def apply_factor(kind: str, f) -> PacketSum:
    f = as_sum(f)
    if kind == "Dilation":
        return dilation(f)
    if kind == "InverseDilation":
        return dilation(f, inverse=True)
    if kind == "Chirp":
        return chirp(f, 1)
    if kind == "InverseChirp":
        return chirp(f, -1)
    if kind == "Fourier":
        return fourier(f)
    if kind == "InverseFourier":
        return fourier(f, inverse=True)
    raise ValueError(f"unknown factor kind {kind!r}")


INVERSE_KIND = {
    "Dilation": "InverseDilation",
    "InverseDilation": "Dilation",
    "Chirp": "InverseChirp",
    "InverseChirp": "Chirp",
    "Fourier": "InverseFourier",
    "InverseFourier": "Fourier",
}


def apply_pipeline(pipeline, f, direction: str = "forward") -> PacketSum:
    """Apply a metaplectic pipeline (anything with ``factors`` of ``.kind``/``.d``).

    ``forward`` applies the factors in list order; ``inverse`` applies the
    inverse factors in reverse order.
    """
    f = as_sum(f)
    factors: Sequence = pipeline.factors
    for fac in factors:
        if fac.d != f.d:
            raise DimensionError(f"pipeline acts on R^{fac.d}, packet lives on R^{f.d}")
    if direction == "forward":
        kinds = [fac.kind for fac in factors]
    elif direction == "inverse":
        kinds = [INVERSE_KIND[fac.kind] for fac in reversed(factors)]
    else:
        raise ValueError("direction must be 'forward' or 'inverse'")
    for kind in kinds:
        f = apply_factor(kind, f)
    return f
