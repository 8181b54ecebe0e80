"""Command-line front end: ``blockreg analyze|canon|verify <file>``.

Vector-field files are JSON documents::

    {"version": 1,
     "P": [[2, 0, "-1/3"], [0, 2, "-1"], [3, 0, "lambda"]],
     "Q": [[1, 1, "2/3"]],
     "params": {"lambda": "1/2"}}

A coefficient is a rational ``"num/den"``, a parameter name, or
``"<rational>*<name>"``.  Repeated monomials are summed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import numverify as nv
from .blockmap import RealPoleUnexpected
from .blowup import NotInV, NotIsolated, VectorField, ZeroDirectionalPolynomial
from .canon import NotCanonicalizable, Unsupported, quadratic_canonicalize, quadratic_classify
from .pipeline import Analysis, StageError, analyze, verify, verify_regular
from .polyalg import BivarPoly

SCHEMA_VERSION = 1
FILE_VERSION = 1
FIXTURES = Path(__file__).with_name("fixtures")

EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_NUMERIC = 0, 2, 3, 4


class ParseError(ValueError):
    pass


class UnsupportedClass(ValueError):
    pass


class NotQuadratic(UnsupportedClass):
    pass


_UNSUPPORTED = (NotInV, NotIsolated, ZeroDirectionalPolynomial, Unsupported, NotCanonicalizable,
                RealPoleUnexpected, UnsupportedClass)


# ------------------------------------------------------------ file format

def _rational(text, where: str) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ParseError(f"{where}: coefficient must be a string like \"num/den\"")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: not an exact rational: {text!r}") from exc


def _coefficient(text, params: Dict[str, Fraction], where: str) -> Fraction:
    if isinstance(text, str) and any(ch.isalpha() for ch in text):
        factor, _, name = text.rpartition("*")
        name = name.strip()
        neg = name.startswith("-")
        name = name.lstrip("-").strip()
        if name not in params:
            raise ParseError(f"{where}: unknown parameter {name!r}")
        c = _rational(factor, where) if factor.strip() else Fraction(1)
        return (-c if neg else c) * params[name]
    return _rational(text, where)


def _monomials(entries, params, name: str) -> BivarPoly:
    if not isinstance(entries, list):
        raise ParseError(f"{name} must be a list of [i, j, coefficient] entries")
    terms: Dict = {}
    for n, e in enumerate(entries):
        where = f"{name}[{n}]"
        if not isinstance(e, list) or len(e) != 3:
            raise ParseError(f"{where}: expected [i, j, coefficient]")
        i, j, c = e
        if not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in (i, j)):
            raise ParseError(f"{where}: exponents must be non-negative integers")
        terms[(i, j)] = terms.get((i, j), Fraction(0)) + _coefficient(c, params, where)
    return BivarPoly(terms)


def parse_polys(doc: dict, overrides: Optional[Dict[str, str]] = None):
    """``(P, Q, params)`` without requiring a singular point at the origin."""
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    unknown = set(doc) - {"version", "P", "Q", "params"}
    if unknown:
        raise ParseError(f"unknown fields: {', '.join(sorted(unknown))}")
    if doc.get("version") != FILE_VERSION:
        raise ParseError(f"unsupported format version {doc.get('version')!r}")
    if "P" not in doc or "Q" not in doc:
        raise ParseError("both P and Q are required")
    raw = doc.get("params", {})
    if not isinstance(raw, dict):
        raise ParseError("params must be an object")
    raw = {**raw, **(overrides or {})}
    params = {}
    for k, v in raw.items():
        if not k.isidentifier():
            raise ParseError(f"bad parameter name {k!r}")
        params[k] = _rational(v, f"params.{k}")
    return _monomials(doc["P"], params, "P"), _monomials(doc["Q"], params, "Q"), params


def parse_field(doc: dict, overrides: Optional[Dict[str, str]] = None) -> VectorField:
    P, Q, _ = parse_polys(doc, overrides)
    try:
        return VectorField(P, Q)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def load(path, overrides=None) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def field_to_doc(X: VectorField) -> dict:
    def entries(poly):
        return [[i, j, str(Fraction(c))] for (i, j), c in sorted(poly.terms.items())]
    return {"version": FILE_VERSION, "P": entries(X.P), "Q": entries(X.Q)}


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.json"


# ------------------------------------------------------------ report

def _num(v):
    if v is None:
        return None
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, complex):
        return [_num(v.real), _num(v.imag)]
    f = float(v)
    return repr(f) if not math.isfinite(f) else f


def _series(s):
    if s is None:
        return None
    return {"terms": [[e, k, _num(c)] for e, k, c in s.triples()], "truncation": str(s.trunc),
            "log_part_at_truncation": bool(getattr(s, "logs_at_trunc", False))}


def report_dict(doc: dict, an: Analysis, order: int) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "input": doc, "order": order}
    data = an.stages.get("characteristic_data")
    if data is not None:
        out["characteristic_directions"] = [
            {"direction": _num(d.direction) if not d.is_infinite else "inf",
             "multiplicity": d.multiplicity, "r_star": _num(d.r_star),
             "lambda_along": _num(d.lambda_along), "lambda_transverse": _num(d.lambda_transverse)}
            for d in data.directions]
    c0 = an.stages.get("c0")
    if c0 is not None:
        out["c0"] = {"regularisable": c0.regularisable, "reason": c0.reason,
                     "r_star": _num(c0.r_star), "tolerance": 0 if an.field.exact else 1e-12}
    if an.residue is not None:
        r = an.residue
        out["c1"] = {"residue_sum": _num(complex(r.residue_sum)), "principal_value": _num(r.principal_value),
                     "passes": r.passes_C1, "tolerance": r.tol}
    if an.normal_form is not None:
        nf, res = an.normal_form, an.resonance
        out["normal_form"] = {"r": _num(nf.r) if not hasattr(nf.r, "value") else nf.r.value,
                              "p": nf.p, "q": nf.q, "m": res.m, "alpha_m": _num(res.alpha_m),
                              "resonance": res.label(), "order": nf.N}
    if an.transition is not None:
        F = an.transition
        out["transition"] = {"k": F.k, "coefficients": [_num(c) for c in F.coefficients],
                             "ladder_drift": [_num(d) for d in F.ladder_diagnostics],
                             "second_order_variational_zero": F.second_order_variational_zero,
                             "lattice": F.exponent_lattice, "tolerance": 1e-7}
    rep = an.report
    if rep is not None:
        out["class"] = rep.cls.label()
        out["block_map"] = {"upper": _series(rep.upper_series), "lower": _series(rep.lower_series),
                            "leading_correction": {
                                "exponent": _num(rep.leading_correction_exponent),
                                "coefficient": _num(rep.leading_correction_coefficient),
                                "log_degree": 1 if rep.alpha_pm is not None else 0},
                            "caveat": rep.caveat}
    out["stopped_at"] = an.stopped_at
    return out


_THEOREM = {
    "c0": "C0 gate: even degree, one real characteristic direction, negative critical value",
    "c1": "C1 by residue test of the principal value",
    "class": "class from the leading-order comparison of k - 1 and (m - 1) q",
}


def render_text(rep: dict) -> str:
    lines = []
    c0 = rep.get("c0")
    if c0:
        verdict = "pass" if c0["regularisable"] else f"fail ({c0['reason']})"
        lines.append(f"C0: {verdict}, r* = {c0['r_star']}  [{_THEOREM['c0']}]")
    c1 = rep.get("c1")
    if c1:
        verdict = "pass" if c1["passes"] else "fail"
        lines.append(f"C1: {verdict}, PV = {c1['principal_value']:.12g} (tol {c1['tolerance']:g})"
                     f"  [{_THEOREM['c1']}]")
    nf = rep.get("normal_form")
    if nf:
        lines.append(f"saddle: r = {nf['r']}, {nf['resonance']}, alpha_m = {nf['alpha_m']}")
    tr = rep.get("transition")
    if tr:
        cs = ", ".join(f"{c:.10g}" for c in tr["coefficients"])
        lines.append(f"transition: k = {tr['k']}, F = [{cs}]")
    if "class" in rep:
        lines.append(f"class: {rep['class']}  [{_THEOREM['class']}]")
    if rep.get("block_map"):
        lc = rep["block_map"]["leading_correction"]
        if lc["coefficient"] is not None:
            tag = " ln x" if lc["log_degree"] else ""
            lines.append(f"leading correction: {lc['coefficient']:.10g} x^{lc['exponent']}{tag}")
        if rep["block_map"]["caveat"]:
            lines.append(f"note: {rep['block_map']['caveat']}")
    v = rep.get("verification")
    if v:
        lines.append(f"numeric check: {v['verdict']} ({v['kind']})")
        if v.get("note"):
            lines.append(f"  {v['note']}")
    return "\n".join(lines) + "\n"


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=True, default=_json_default) + "\n"


def _emit(rep: dict, fmt: str, stream) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        stream.write(dumps(rep))
    else:
        stream.write(render_text(rep))


# ------------------------------------------------------------ commands

def _overrides(items: Sequence[str]) -> Dict[str, str]:
    out = {}
    for it in items or ():
        k, sep, v = it.partition("=")
        if not sep:
            raise ParseError(f"--param expects name=value, got {it!r}")
        out[k.strip()] = v.strip()
    return out


def cmd_analyze(path, order: int = 5, fmt: str = "json", params=None, stream=None) -> dict:
    doc = load(path)
    X = parse_field(doc, params)
    an = analyze(X, order=order)
    rep = report_dict(doc, an, order)
    _emit(rep, fmt, stream)
    return rep


def cmd_canon(path, fmt: str = "json", params=None, stream=None) -> dict:
    doc = load(path)
    X = parse_field(doc, params)
    if X.s != 2 or X.degree != 2:
        raise NotQuadratic("canon needs a homogeneous quadratic field")
    c = quadratic_canonicalize(X)
    cls = quadratic_classify(c)
    rep = {"schema_version": SCHEMA_VERSION, "input": doc, "kappa1": c.kappa1, "kappa2": c.kappa2,
           "transform": [list(row) for row in c.transform], "time_scale": c.scale,
           "class": cls.label(), "tolerance": 1e-10}
    stream = stream or sys.stdout
    if fmt == "json":
        stream.write(dumps(rep))
    else:
        stream.write(f"kappa1 = {c.kappa1:.12g}, kappa2 = {c.kappa2:.12g}\nclass: {cls.label()}\n")
    return rep


def parse_ladder(spec: str) -> List[float]:
    """``a:b:ratio`` -> geometric ladder from ``a`` down to ``b``."""
    try:
        a, b, ratio = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ParseError(f"ladder must be a:b:ratio, got {spec!r}") from exc
    if not (a > 0 and b > 0 and 0 < ratio < 1):
        raise ParseError("ladder needs positive bounds and 0 < ratio < 1")
    hi, lo = max(a, b), min(a, b)
    out, y = [], hi
    while y >= lo * (1 - 1e-12):
        out.append(y)
        y *= ratio
    return out


def _fit_dict(f):
    if isinstance(f, nv.IllConditioned):
        return {"status": "IllConditioned", "note": str(f)}
    return {"status": "ok", "slope": f.slope, "alpha": f.alpha, "coefficient": f.coefficient,
            "relative_coefficient": f.relative_coefficient, "residual": f.residual, "model": f.model}


def cmd_verify(path, ladder: Optional[str] = None, tol: float = 1e-12, section: float = nv.DEFAULT_SECTION,
               csv_path: Optional[str] = None, fmt: str = "json", params=None, order: int = 5,
               workers: int = 1, stream=None) -> dict:
    doc = load(path)
    lad = parse_ladder(ladder) if ladder else list(nv.DEFAULT_LADDER)
    P, Q, _ = parse_polys(doc, params)
    if (0, 0) in P.terms or (0, 0) in Q.terms:
        ver = verify_regular(P, Q, lad, tol)
        rep = {"schema_version": SCHEMA_VERSION, "input": doc, "class": "regular point"}
    else:
        X = parse_field(doc, params)
        an = analyze(X, order=order)
        rep = report_dict(doc, an, order)
        if an.stopped_at is not None:
            raise UnsupportedClass("field is not C0-regularisable; nothing to verify")
        ver = verify(an, lad, tol, section, workers)
    csv_path = Path(csv_path) if csv_path else Path(f"{Path(path).stem}.samples.csv")
    csv_path.write_text(nv.samples_to_csv(list(ver.upper) + list(ver.lower)))
    rep["verification"] = {"verdict": ver.verdict.label, "kind": ver.verdict.kind,
                           "note": ver.verdict.details.get("note"),
                           "details": {k: _num(v) if not isinstance(v, str) else v
                                       for k, v in sorted(ver.verdict.details.items())},
                           "sections": [ver.sections.entry, ver.sections.exit],
                           "fit_upper": _fit_dict(ver.fit_upper), "fit_lower": _fit_dict(ver.fit_lower),
                           "tolerance": tol, "sample_table": str(csv_path)}
    _emit(rep, fmt, stream)
    return rep


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blockreg", description="Block regularisation of planar singular points.")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="full symbolic pipeline")
    a.add_argument("file")
    a.add_argument("--order", type=int, default=5)
    a.add_argument("--format", choices=("json", "text"), default="json")
    a.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")

    c = sub.add_parser("canon", help="quadratic canonical form")
    c.add_argument("file")
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")

    v = sub.add_parser("verify", help="numerical check of the block map")
    v.add_argument("file")
    v.add_argument("--ladder", default=None, help="a:b:ratio, e.g. 1e-3:1e-6:0.5")
    v.add_argument("--tol", type=float, default=1e-12)
    v.add_argument("--section", type=float, default=nv.DEFAULT_SECTION)
    v.add_argument("--csv", default=None, help="where to write the sample table")
    v.add_argument("--order", type=int, default=5)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--format", choices=("json", "text"), default="json")
    v.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = _overrides(args.param)
        if args.command == "analyze":
            cmd_analyze(args.file, args.order, args.format, params)
        elif args.command == "canon":
            cmd_canon(args.file, args.format, params)
        else:
            cmd_verify(args.file, args.ladder, args.tol, args.section, args.csv, args.format,
                       params, args.order, args.workers)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _UNSUPPORTED as exc:
        print(f"unsupported: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except StageError as exc:
        code = EXIT_UNSUPPORTED if isinstance(exc.error, _UNSUPPORTED) else EXIT_NUMERIC
        print(f"error in {exc}", file=sys.stderr)
        return code
    except (ArithmeticError, ValueError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":   # pragma: no cover
    sys.exit(main())
