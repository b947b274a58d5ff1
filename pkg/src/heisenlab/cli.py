"""Command-line front end.

Exit codes: 0 success, 1 inconclusive or failed check, 2 parse or config error.
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import gaussian as gl
from .algebra import (
    AlgebraElement,
    DiscreteSubgroup,
    GroupElement,
    alg_conjugate,
    ge_multiply,
    reduce_to_unit,
    symbolic_trace,
)
from .exact import ExactnessError, format_scalar, parse_scalar
from .independence import (
    CosetWindow,
    certify,
    density_sweep,
    enumerate_coset,
    grid_points,
    report_row,
    rows_to_csv,
)
from .metaplectic import build_H, choose_b, cube_trace, transition_matrix
from .symplectic import solve_commutation
from .twisted import SubgroupSplitting, decompose, recompose, twist_turns, zeta_twist

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_ERROR = 0, 1, 2


class LiteralError(ValueError):
    pass


# --- element literals ------------------------------------------------------

_COEFF = r"(?:\[[^\]]*\]|[0-9.eE/j]+)"
_TERM = re.compile(rf"^(?:(?P<c>{_COEFF})\s*\*\s*)?(?P<g>\([^()]*\))$|^(?P<s>{_COEFF})$")


def _split_terms(text: str) -> list[tuple[int, str]]:
    terms, depth, start, sign = [], 0, 0, 1
    s = text.replace("−", "-").replace(" ", "")
    if not s:
        raise LiteralError("empty element literal")
    if s[0] in "+-":
        sign, s = (-1 if s[0] == "-" else 1), s[1:]
    for i, ch in enumerate(s):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise LiteralError(f"unbalanced brackets in {text!r}")
        elif ch in "+-" and depth == 0 and i > start and s[i - 1] not in "eE*/":
            terms.append((sign, s[start:i]))
            sign, start = (-1 if ch == "-" else 1), i + 1
    if depth:
        raise LiteralError(f"unbalanced brackets in {text!r}")
    terms.append((sign, s[start:]))
    return terms


def _parse_coeff(text: str) -> complex | Fraction:
    text = text.strip("[]")
    try:
        if "j" in text:
            return complex(text)
        return Fraction(text)
    except ValueError:
        raise LiteralError(f"bad coefficient {text!r}") from None


def parse_group(text: str) -> GroupElement:
    """``(x1,..,xn;y1,..,yn)``, or ``(a,b,...)`` split in half when there is no ``;``."""
    s = text.strip().replace(" ", "")
    if not (s.startswith("(") and s.endswith(")")):
        raise LiteralError(f"group element must be parenthesised: {text!r}")
    body = s[1:-1]
    try:
        if ";" in body:
            xs, ys = body.split(";")
            x = [parse_scalar(v) for v in xs.split(",")]
            y = [parse_scalar(v) for v in ys.split(",")]
        else:
            vals = [parse_scalar(v) for v in body.split(",")]
            if len(vals) % 2:
                raise LiteralError(f"odd number of coordinates in {text!r}")
            x, y = vals[: len(vals) // 2], vals[len(vals) // 2:]
    except (ValueError, ZeroDivisionError) as exc:
        raise LiteralError(f"bad coordinate in {text!r}: {exc}") from None
    if len(x) != len(y) or not x:
        raise LiteralError(f"x and y parts differ in length in {text!r}")
    return GroupElement(x, y)


def parse_element(text: str, n: int | None = None) -> AlgebraElement:
    """Parse ``c1*(x;y) + c2*(x;y) - ...``; a bare scalar means a multiple of the identity."""
    parsed = []
    for sign, term in _split_terms(text):
        m = _TERM.match(term)
        if not m:
            raise LiteralError(f"cannot parse term {term!r}")
        if m.group("s") is not None:
            parsed.append((None, sign * _parse_coeff(m.group("s"))))
            continue
        c = _parse_coeff(m.group("c")) if m.group("c") else 1
        parsed.append((parse_group(m.group("g")), sign * c))
    dims = {g.n for g, _ in parsed if g is not None}
    if n is not None:
        dims.add(n)
    if len(dims) > 1:
        raise LiteralError(f"mixed dimensions {sorted(dims)} in {text!r}")
    n = dims.pop() if dims else 1
    return AlgebraElement(n, [(g if g is not None else GroupElement.identity(n), complex(c)) for g, c in parsed])


def _subgroup(gens: list[str]) -> DiscreteSubgroup:
    elems = [parse_group(g) for g in gens]
    if not elems:
        raise LiteralError("at least one generator is required")
    return DiscreteSubgroup(elems[0].n, elems)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, default=str))


def _complex_json(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


# --- algebra ---------------------------------------------------------------

def cmd_algebra(args) -> int:
    if args.op == "mul":
        a, b = parse_element(args.a), parse_element(args.b)
        out = {"product": (a * b).to_json()}
        if len(a) == len(b) == 1 and a.coefficient(a.support()[0]) == 1 and b.coefficient(b.support()[0]) == 1:
            ph, g = ge_multiply(a.support()[0], b.support()[0])
            out.update(turn=str(ph), element=str(g))
        _emit(out)
    elif args.op == "conj":
        g = parse_group(args.g)
        _emit({"conjugate": alg_conjugate(g, parse_element(args.a, g.n)).to_json()})
    elif args.op == "trace":
        _emit({"trace": _complex_json(symbolic_trace(parse_element(args.a)))})
    elif args.op == "reduce":
        cert = reduce_to_unit(parse_element(args.a))
        out = cert.to_json()
        out["num_moves"] = len(cert.moves)
        if args.replay:
            final = cert.replay()
            err = abs(final.coefficient(GroupElement.identity(final.n)) - 1) if len(final) == 1 else float("inf")
            ok = len(final) == 1 and err < 1e-9
            out["replay"] = {"final": final.to_json(), "error": err, "verified": ok}
            _emit(out)
            return EXIT_OK if ok else EXIT_INCONCLUSIVE
        _emit(out)
    return EXIT_OK


def cmd_symplectic(args) -> int:
    x = parse_group(args.x)
    hs = [parse_group(h) for h in args.h]
    y = solve_commutation(hs, x, parse_scalar(args.t))
    _emit({"y": str(y), "json": y.to_json()})
    return EXIT_OK


def _splitting(gens: list[str]) -> SubgroupSplitting:
    return SubgroupSplitting.last_generator(_subgroup(gens))


def cmd_poly(args) -> int:
    s = _splitting(args.gen)
    a = parse_element(args.alpha, s.n)
    p = decompose(a, s)
    if args.op == "decompose":
        _emit({"poly": p.to_json(), "roundtrip": recompose(p).isclose(a)})
        return EXIT_OK
    t = parse_scalar(args.t)
    y = solve_commutation(s.H.generators, s.x, t)
    conj = alg_conjugate(y, a)
    twisted = recompose(zeta_twist(p, t))
    turns = twist_turns(a, s, y, t)
    exact_ok = all(c == w for _, c, w in turns)
    ok = exact_ok and conj.isclose(twisted)
    _emit({"y": str(y), "conjugate": conj.to_json(), "twisted": twisted.to_json(), "exact_match": ok})
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


# --- metaplectic -----------------------------------------------------------

def _random_h_element(rng: random.Random, H: DiscreteSubgroup, terms: int = 3) -> AlgebraElement:
    out = []
    for _ in range(terms):
        g = H.element([rng.randint(-1, 1) for _ in range(H.rank)])
        out.append((g, complex(rng.uniform(-1, 1), rng.uniform(-1, 1))))
    return AlgebraElement(H.n, out)


def cmd_metaplectic(args) -> int:
    if args.op == "factor":
        tr = transition_matrix(args.n)
        err = tr.factorization_error
        _emit({"n": args.n, "T": tr.T.tolist(), "B": tr.B.tolist(), "A": tr.A.tolist(), "C": tr.C.tolist(),
               "factorization_error": err, "factorization": "PASS" if err < 1e-12 else "FAIL"})
        return EXIT_OK if err < 1e-12 else EXIT_INCONCLUSIVE
    G = _subgroup(args.gen)
    H, pipe = build_H(G)
    data = choose_b(H)
    if args.op == "build":
        err = transition_matrix(G.n).factorization_error
        out = {
            "H": [str(h) for h in H.generators],
            "pipeline": pipe.to_json(),
            "factorization": "PASS" if err < 1e-12 else "FAIL",
            "b": data.b,
            "cubes": data.c,
        }
        status = EXIT_OK if err < 1e-12 else EXIT_INCONCLUSIVE
        if args.check_trace:
            rng = random.Random(args.seed)
            dev = 0.0
            for _ in range(100):
                a, b = _random_h_element(rng, H), _random_h_element(rng, H)
                dev = max(dev, abs(cube_trace(a * b, data, check=False) - cube_trace(b * a, data, check=False)))
            out["trace_commutator_max_deviation"] = dev
            if dev >= 1e-10:
                status = EXIT_INCONCLUSIVE
        _emit(out)
        return status
    a = parse_element(args.alpha, G.n)
    sym = symbolic_trace(a)
    cube = cube_trace(pipe.transport(a), data)
    dev = abs(sym - cube)
    _emit({"symbolic": _complex_json(sym), "cube": _complex_json(cube), "deviation": dev, "b": data.b})
    return EXIT_OK if dev < 1e-9 else EXIT_INCONCLUSIVE


# --- gaussian --------------------------------------------------------------

def _load_packet(source: str | None, d: int):
    if source is None:
        return gl.GaussianPacket.standard(d)
    text = Path(source).read_text() if not source.lstrip().startswith(("{", "[")) else source
    obj = json.loads(text)
    packets = obj if isinstance(obj, list) else [obj]
    return gl.PacketSum(gl.GaussianPacket.from_json(p) for p in packets)


def cmd_gauss(args) -> int:
    f = _load_packet(args.f, args.d)
    if args.op == "ip":
        g = _load_packet(args.g, args.d)
        out = {"closed_form": _complex_json(gl.inner_product(f, g))}
        if args.quadrature:
            out["quadrature"] = _complex_json(gl.quadrature_inner_product(f, g))
        _emit(out)
    else:
        _emit(gl.fourier(f, inverse=args.inverse).to_json())
    return EXIT_OK


# --- independence ----------------------------------------------------------

_COORDS = {"type": "array", "items": {"type": ["string", "number"]}, "minItems": 2}
_POINT = {"oneOf": [{"type": "string"}, _COORDS]}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "generators": {"type": "array", "items": _POINT},
        "offset": _POINT,
        "window": {
            "oneOf": [
                {"type": "object", "properties": {"kind": {"const": "standard"}}, "required": ["kind"],
                 "additionalProperties": False},
                {"type": "object", "required": ["A", "w", "r"]},
                {"type": "array", "items": {"type": "object", "required": ["A", "w", "r"]}, "minItems": 1},
            ]
        },
        "enumeration": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["mode", "radius"],
                 "properties": {"mode": {"const": "ball"}, "radius": {"type": "number", "minimum": 0},
                                "max_points": {"type": "integer", "minimum": 1}}},
                {"type": "object", "additionalProperties": False, "required": ["mode", "side"],
                 "properties": {"mode": {"const": "grid"}, "side": {"type": "integer", "minimum": 1}}},
            ]
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["pairs", "sides"],
            "properties": {
                "pairs": {"type": "array", "items": {"type": "array", "items": {"type": ["string", "number"]},
                                                     "minItems": 2, "maxItems": 2}},
                "sides": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            },
        },
        "kappa": {"type": "number", "exclusiveMinimum": 0},
        "crosscheck": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer"},
        "threads": {"type": "integer", "minimum": 1},
        "output": {"type": "object", "properties": {"csv": {"type": "string"}, "json": {"type": "string"}},
                   "additionalProperties": False},
    },
    "required": ["n", "generators"],
}

DEFAULTS = {
    "offset": None,
    "window": {"kind": "standard"},
    "enumeration": {"mode": "ball", "radius": 1.5, "max_points": 10_000},
    "kappa": 10.0,
    "crosscheck": 0,
    "seed": 0,
    "threads": None,
    "output": {},
}


def load_config(path) -> dict:
    cfg = json.loads(Path(path).read_text())
    jsonschema.validate(cfg, CONFIG_SCHEMA)
    return {**DEFAULTS, **cfg}


def _config_point(p, n: int) -> GroupElement:
    if isinstance(p, str):
        g = parse_group(p)
    else:
        vals = [parse_scalar(str(v)) for v in p]
        if len(vals) != 2 * n:
            raise LiteralError(f"expected {2 * n} coordinates, got {len(vals)}")
        g = GroupElement.from_vector(vals)
    if g.n != n:
        raise LiteralError(f"point {p!r} is not in dimension {n}")
    return g


def _config_window(w, d: int):
    if isinstance(w, dict) and w.get("kind") == "standard":
        return gl.GaussianPacket.standard(d)
    packets = w if isinstance(w, list) else [w]
    f = gl.PacketSum(gl.GaussianPacket.from_json(p) for p in packets)
    if f.d != d:
        raise ValueError(f"window lives on R^{f.d}, expected R^{d}")
    return f


def _rectangular_params(G: DiscreteSubgroup) -> tuple[str, str]:
    if G.n == 1 and G.rank == 2:
        (a, b) = G.generators
        if a.y[0] == 0 and b.x[0] == 0:
            return format_scalar(a.x[0]), format_scalar(b.y[0])
    return "", ""


def _crosscheck(report, f, count: int, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    k = len(report.points)
    out = []
    for _ in range(count):
        i, j = (int(v) for v in rng.integers(0, k, size=2))
        q = gl.quadrature_inner_product(gl.tf_shift(report.points[i], f), gl.tf_shift(report.points[j], f), nodes=400)
        out.append({"i": i, "j": j, "closed_form": _complex_json(report.gram[i, j]),
                    "quadrature": _complex_json(q), "error": float(abs(q - report.gram[i, j]))})
    return out


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_independence(args) -> int:
    cfg = load_config(args.config or sample_config_path())
    n = cfg["n"]
    G = DiscreteSubgroup(n, [_config_point(p, n) for p in cfg["generators"]])
    offset = _config_point(cfg["offset"], n) if cfg["offset"] is not None else GroupElement.identity(n)
    f = _config_window(cfg["window"], n)
    out_csv = Path(args.out) if args.out else Path(cfg["output"].get("csv", "report.csv"))
    out_json = Path(cfg["output"]["json"]) if "json" in cfg["output"] else out_csv.with_suffix(".json")

    if args.op == "sweep":
        if "sweep" not in cfg:
            raise ValueError("config has no 'sweep' section")
        if n != 1:
            raise ValueError("density sweeps are defined for n = 1")
        pairs = [(parse_scalar(str(a)), parse_scalar(str(b))) for a, b in cfg["sweep"]["pairs"]]
        rows = density_sweep(pairs, f, cfg["sweep"]["sides"], offset, cfg["kappa"], cfg["threads"])
        _write(out_csv, rows_to_csv(rows))
        _write(out_json, json.dumps({"rows": rows}, indent=2) + "\n")
        print(f"wrote {len(rows)} rows to {out_csv}")
        return EXIT_OK if all(r["verdict"] == "certified-independent" for r in rows) else EXIT_INCONCLUSIVE

    enum = cfg["enumeration"]
    if enum["mode"] == "grid":
        points = grid_points(G, enum["side"], offset)
    else:
        points = enumerate_coset(CosetWindow(G, offset, enum["radius"], enum.get("max_points", 10_000)))
    report = certify(points, f, cfg["kappa"], cfg["threads"])
    a, b = _rectangular_params(G)
    _write(out_csv, rows_to_csv([report_row(report, a, b, offset)]))
    payload = report.to_dict()
    ok = report.certified
    if cfg["crosscheck"] and f.d <= 2:
        checks = _crosscheck(report, f, cfg["crosscheck"], cfg["seed"])
        payload["crosscheck"] = checks
        ok = ok and all(c["error"] < 1e-6 for c in checks)
    _write(out_json, json.dumps(payload, indent=2) + "\n")
    print(f"{report.verdict}: {len(points)} points, lambda_min={report.lambda_min!r}, residual={report.residual!r}")
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def sample_config_path() -> Path:
    return Path(str(resources.files("heisenlab") / "configs" / "z2_gaussian.json"))


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heisenlab", description="Time-frequency shift algebra laboratory.")
    sub = p.add_subparsers(dest="command", required=True)

    alg = sub.add_parser("algebra", help="twisted group ring arithmetic").add_subparsers(dest="op", required=True)
    m = alg.add_parser("mul", help="product a * b")
    m.add_argument("a")
    m.add_argument("b")
    c = alg.add_parser("conj", help="g a g^-1")
    c.add_argument("g")
    c.add_argument("a")
    alg.add_parser("trace", help="coefficient of the identity").add_argument("a")
    r = alg.add_parser("reduce", help="certificate reducing a to the unit")
    r.add_argument("a")
    r.add_argument("--replay", action="store_true", help="re-verify the certificate")

    sym = sub.add_parser("symplectic", help="commutation solver").add_subparsers(dest="op", required=True)
    s = sym.add_parser("solve", help="y fixing every h and twisting x by exp(2 pi i t)")
    s.add_argument("--h", action="append", default=[], help="generator of H (repeatable)")
    s.add_argument("--x", required=True)
    s.add_argument("--t", required=True, help="target turn, e.g. 1/2")

    poly = sub.add_parser("poly", help="twisted Laurent polynomials").add_subparsers(dest="op", required=True)
    for name, text in (("decompose", "split alpha by powers of x"), ("twist", "twist and compare with conjugation")):
        q = poly.add_parser(name, help=text)
        q.add_argument("--gen", action="append", required=True, help="generator of G; the last one is x")
        q.add_argument("--alpha", required=True)
        if name == "twist":
            q.add_argument("--t", required=True, help="twist turn")

    meta = sub.add_parser("metaplectic", help="lattice transport").add_subparsers(dest="op", required=True)
    f = meta.add_parser("factor", help="transition matrix and its factorization")
    f.add_argument("--n", type=int, default=1)
    b = meta.add_parser("build", help="target lattice H and operator pipeline")
    b.add_argument("--gen", action="append", required=True, help="generator of G (repeatable)")
    b.add_argument("--check-trace", action="store_true", help="compare traces on random elements")
    b.add_argument("--seed", type=int, default=0)
    t = meta.add_parser("trace", help="symbolic trace and transported cube trace")
    t.add_argument("--gen", action="append", required=True, help="generator of G (repeatable)")
    t.add_argument("--alpha", required=True)

    gauss = sub.add_parser("gauss", help="Gaussian packet calculus").add_subparsers(dest="op", required=True)
    ip = gauss.add_parser("ip", help="closed-form inner product")
    ip.add_argument("--f", help="packet JSON or file (default: standard Gaussian)")
    ip.add_argument("--g", help="packet JSON or file (default: standard Gaussian)")
    ip.add_argument("--d", type=int, default=1)
    ip.add_argument("--quadrature", action="store_true", help="also evaluate by quadrature")
    fo = gauss.add_parser("fourier", help="Fourier transform of a packet")
    fo.add_argument("--f", help="packet JSON or file (default: standard Gaussian)")
    fo.add_argument("--d", type=int, default=1)
    fo.add_argument("--inverse", action="store_true")

    ind = sub.add_parser("independence", help="Gram certification").add_subparsers(dest="op", required=True)
    for name, text in (("certify", "certify one finite point set"), ("sweep", "density sweep to CSV")):
        q = ind.add_parser(name, help=text)
        q.add_argument("--config", help="JSON config (default: bundled sample)")
        q.add_argument("--out", help="output path, overrides the config")
    return p


HANDLERS = {
    "algebra": cmd_algebra,
    "symplectic": cmd_symplectic,
    "poly": cmd_poly,
    "metaplectic": cmd_metaplectic,
    "gauss": cmd_gauss,
    "independence": cmd_independence,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return HANDLERS[args.command](args)
    except (ValueError, ExactnessError, OSError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
