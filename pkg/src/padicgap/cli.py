"""Command-line entry point: analyze, counterexample, gapcheck.

Documents are JSON.  Exact rationals travel as "num/den" strings and every
document is written canonically (sorted keys, two-space indent, trailing
newline), so serialize -> parse -> serialize is byte-identical.

Exit codes: 2 parse or shape error, 3 no prime found, 4 precision
exhausted, 5 bit budget exceeded, 6 verification failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from fractions import Fraction
from importlib import resources

import jsonschema

from . import counterexample, pipeline
from .dynamics import INF, RationalMap
from .errors import (
    BudgetExceeded,
    NoPrimeFound,
    NotPrime,
    PadicGapError,
    PrecisionExhausted,
    WrongShape,
)
from .growth import GapReport, RationalPower, verify_gap
from .padic_core import Prime, vp
from .pipeline import ClassRecord, Config, GapCertificate, MultiPoly, PeriodicWitness, ProblemInstance
from .tower_counting import counting_check

EXIT_PARSE = 2
EXIT_NO_PRIME = 3
EXIT_PRECISION = 4
EXIT_BUDGET = 5
EXIT_VERIFY = 6


class ParseError(ValueError):
    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


# serialization -------------------------------------------------------------------


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def frac_text(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s, location="") -> Fraction:
    try:
        if isinstance(s, bool):
            raise ValueError
        if isinstance(s, int):
            return Fraction(s)
        num, _, den = str(s).partition("/")
        return Fraction(int(num), int(den) if den else 1)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not an exact rational: {s!r}", location) from None


def _schema(name: str) -> dict:
    text = resources.files("padicgap").joinpath("schema", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name: str) -> None:
    validator = jsonschema.Draft202012Validator(_schema(name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        loc = "/".join(str(x) for x in err.absolute_path) or "<root>"
        raise ParseError(err.message, loc)


def _jsonable(x):
    if isinstance(x, Fraction):
        return frac_text(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if hasattr(x, "value"):
        return int(x.value)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def certificate_to_doc(cert: GapCertificate) -> dict:
    classes = []
    for rec in cert.classes:
        gap = None
        if rec.gap is not None:
            viol = list(rec.gap.violation) if rec.gap.violation else None
            gap = {"passed": rec.gap.passed, "checked": rec.gap.checked, "violation": viol}
        classes.append({
            "offset": rec.offset,
            "status": rec.status,
            "v": list(rec.v) if rec.v is not None else None,
            "delta": rec.delta,
            "B": rec.B,
            "M": rec.M_claim,
            "zeros": list(rec.zeros),
            "gap": gap,
        })
    return {
        "type": "certificate",
        "kind": cert.kind,
        "p": cert.p,
        "N": cert.N,
        "T": cert.T,
        "k": cert.k,
        "M": cert.M,
        "C0": frac_text(cert.C0),
        "epsilon": frac_text(cert.epsilon),
        "C": {"base": frac_text(cert.C.base), "exponent": frac_text(cert.C.exponent)},
        "threshold": cert.threshold,
        "boost_factor": cert.boost_factor,
        "n_max": cert.n_max,
        "precision": {"K": cert.K, "D": cert.D, "loss": cert.loss},
        "classes": classes,
        "extra": _jsonable(cert.extra),
    }


def doc_to_certificate(doc: dict) -> GapCertificate:
    validate(doc, "certificate")
    classes = []
    for rec in doc["classes"]:
        g = rec["gap"]
        gap = None
        if g is not None:
            gap = GapReport(g["passed"], g["checked"],
                            tuple(g["violation"]) if g["violation"] is not None else None)
        classes.append(ClassRecord(
            rec["offset"], rec["status"], tuple(rec["v"]) if rec["v"] is not None else None,
            rec["delta"], rec["B"], rec["M"], list(rec["zeros"]), gap,
        ))
    C = RationalPower(parse_frac(doc["C"]["base"], "C/base"),
                      parse_frac(doc["C"]["exponent"], "C/exponent"))
    prec = doc["precision"]
    return GapCertificate(
        doc["kind"], doc["p"], doc["N"], doc["T"], doc["k"], doc["M"],
        parse_frac(doc["C0"], "C0"), parse_frac(doc["epsilon"], "epsilon"), C,
        doc["threshold"], classes, prec["K"], prec["D"], prec["loss"], doc["n_max"],
        doc["boost_factor"], dict(doc["extra"]),
    )


def witness_to_doc(w: PeriodicWitness) -> dict:
    return {"type": "witness", "ell1": w.ell1, "k": w.k, "n_max": w.n_max,
            "validated": w.validated, "samples": list(w.samples), "p": w.p, "K": w.K}


def doc_to_witness(doc: dict) -> PeriodicWitness:
    validate(doc, "witness")
    return PeriodicWitness(doc["ell1"], doc["k"], list(doc["samples"]), doc["n_max"],
                           doc["validated"], doc["p"], doc["K"])


def sequence_to_doc(state, checklist, steps: int, note: str | None = None) -> dict:
    return {
        "type": "sequence",
        "p": state.p,
        "n1": state.n[0],
        "steps": steps,
        "n": [str(x) if x.bit_length() > 60 else x for x in state.n],
        "pending": state.pending,
        "c": [frac_text(c) for c in state.c],
        "checklist": [{"name": name, "index": idx, "ok": ok} for name, idx, ok in checklist.items],
        "passed": checklist.passed,
        "note": note,
    }


def to_document(obj) -> dict:
    if isinstance(obj, GapCertificate):
        return certificate_to_doc(obj)
    if isinstance(obj, PeriodicWitness):
        return witness_to_doc(obj)
    raise TypeError(type(obj).__name__)


def from_document(doc: dict):
    kind = doc.get("type") if isinstance(doc, dict) else None
    if kind == "certificate":
        return doc_to_certificate(doc)
    if kind == "witness":
        return doc_to_witness(doc)
    raise ParseError(f"unknown document type {kind!r}", "type")


# instances ------------------------------------------------------------------------


def parse_instance(doc: dict, overrides: dict | None = None) -> tuple[ProblemInstance, str, int]:
    """(instance, mode, boost factor) from an instance document."""
    validate(doc, "instance")
    maps = []
    for i, m in enumerate(doc["maps"]):
        try:
            maps.append(RationalMap.from_coeffs(m["num"], m.get("den", [1])))
        except ValueError as err:
            raise ParseError(str(err), f"maps/{i}") from None
    point = []
    for i, x in enumerate(doc["point"]):
        point.append(INF if x == "inf" else parse_frac(x, f"point/{i}"))
    variety = []
    for i, H in enumerate(doc["variety"]):
        try:
            variety.append(MultiPoly(tuple(H["degrees"]), tuple((c, tuple(e)) for c, e in H["terms"])))
        except ValueError as err:
            raise ParseError(str(err), f"variety/{i}") from None
    cfg = dict(doc.get("config", {}))
    cfg.update({k: v for k, v in (overrides or {}).items() if v is not None})
    boost_e = cfg.pop("boost", 1)
    if "epsilon" in cfg:
        cfg["epsilon"] = parse_frac(cfg["epsilon"], "config/epsilon")
    try:
        config = Config(**cfg)
        instance = ProblemInstance(maps, point, variety, config)
    except (TypeError, ValueError) as err:
        raise ParseError(str(err), "config") from None
    return instance, doc.get("mode", "general"), int(boost_e)


def instance_digest(doc: dict) -> str:
    return hashlib.sha256(dumps(doc).encode()).hexdigest()


# commands --------------------------------------------------------------------------


def _write(text: str, path: str | None) -> None:
    if not path or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".padicgap-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _range(text: str) -> tuple[int, int]:
    a, _, b = text.partition(":")
    try:
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None


def _frac_arg(text: str) -> str:
    try:
        parse_frac(text)
    except ParseError as err:
        raise argparse.ArgumentTypeError(str(err)) from None
    return text


def run_analyze(doc: dict, overrides: dict, mode_flag: str | None = None):
    instance, mode, e = parse_instance(doc, overrides)
    mode = mode_flag or mode
    if mode == "curve":
        result = pipeline.curve_case_analyze(instance)
    else:
        result = pipeline.analyze(instance)
        if isinstance(result, GapCertificate) and e > 1:
            result = pipeline.boost(result, e)
    return result


def cmd_analyze(args) -> int:
    with open(args.config) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ParseError(err.msg, f"line {err.lineno} column {err.colno}") from None
    overrides = {
        "prime_range": args.prime_range,
        "K": args.precision,
        "D": args.degree,
        "n_max": args.n_max,
        "epsilon": args.epsilon,
        "boost": args.boost,
    }
    t0 = time.perf_counter()
    result = run_analyze(doc, overrides, args.mode)
    elapsed = time.perf_counter() - t0
    out = to_document(result)
    _write(dumps(out), args.output)
    if args.manifest:
        manifest = {
            "type": "manifest",
            "command": "analyze",
            "instance": doc,
            "instance_digest": instance_digest(doc),
            "config": _jsonable({k: v for k, v in overrides.items() if v is not None}),
            "mode": args.mode,
            "outcome": {"type": out["type"], "digest": hashlib.sha256(dumps(out).encode()).hexdigest()},
            "timing_seconds": round(elapsed, 3),
        }
        _write(dumps(manifest), args.manifest)
    if isinstance(result, PeriodicWitness) and not result.validated:
        return EXIT_VERIFY
    if isinstance(result, GapCertificate) and not result.passed:
        return EXIT_VERIFY
    return 0


def cmd_replay(args) -> int:
    with open(args.seed_manifest) as fh:
        manifest = json.load(fh)
    if manifest.get("type") != "manifest" or manifest.get("command") != "analyze":
        raise ParseError("not an analyze manifest", "type")
    doc = manifest["instance"]
    if instance_digest(doc) != manifest["instance_digest"]:
        raise ParseError("instance digest mismatch", "instance_digest")
    overrides = dict(manifest.get("config", {}))
    if "prime_range" in overrides:
        overrides["prime_range"] = tuple(overrides["prime_range"])
    result = run_analyze(doc, overrides, manifest.get("mode"))
    out = dumps(to_document(result))
    _write(out, args.output)
    digest = hashlib.sha256(out.encode()).hexdigest()
    if digest != manifest["outcome"]["digest"]:
        print("replay differs from the recorded outcome", file=sys.stderr)
        return EXIT_VERIFY
    return 0


def cmd_counterexample(args) -> int:
    try:
        Prime(args.p)
    except NotPrime as err:
        raise ParseError(str(err), "p") from None
    if args.steps < 0 or args.n1 < 1:
        raise ParseError("need steps >= 0 and n1 >= 1", "steps")
    state = counterexample.start(args.p, args.n1)
    note = None
    code = 0
    for _ in range(args.steps):
        try:
            counterexample.next_term(state, args.bit_budget)
        except BudgetExceeded as err:
            note = str(err)
            code = EXIT_BUDGET
            break
    check = counterexample.verify(state)
    _write(dumps(sequence_to_doc(state, check, args.steps, note)), args.output)
    if code:
        return code
    return 0 if check.passed else EXIT_VERIFY


def gapcheck(cert: GapCertificate, inject=()) -> tuple[bool, list]:
    """Re-run the exact inequalities recorded in a certificate."""
    lines = []
    zeros = {rec.offset: list(rec.zeros) for rec in cert.classes}
    for off, m in inject:
        if off not in zeros:
            raise ParseError(f"no class with offset {off}", "inject")
        zeros[off] = sorted(set(zeros[off]) | {m})
    ok = True
    for rec in cert.classes:
        rep = verify_gap(zeros[rec.offset], cert.C, min_value=cert.threshold)
        ok = ok and rep.passed
        detail = "" if rep.passed else f" violation {rep.violation}"
        lines.append(f"class {rec.offset}: {'pass' if rep.passed else 'FAIL'} "
                     f"({rep.checked} gaps checked){detail}")
    if cert.kind == "curve":
        for off, m, n, need, _got, _ok in cert.extra.get("chain", []):
            got = vp(n - m, cert.p) or 0
            good = got >= need
            ok = ok and good
            if not good:
                lines.append(f"chain {off}: {m} -> {n} has v_p = {got} < {need}")
    S = sorted(set(cert.extra.get("early_zeros", []))
               | {off + cert.N * m for off, zs in zeros.items() for m in zs})
    M_values = range(0, cert.n_max + 1)
    report = counting_check(S, cert.N, cert.C, cert.T, M_values)
    ok = ok and report.passed
    lines.append(f"counting: {'pass' if report.passed else 'FAIL'} (A = {report.A})")
    return ok, lines


def _inject(text: str) -> tuple[int, int]:
    a, _, b = text.partition(":")
    try:
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected OFFSET:M, got {text!r}") from None


def cmd_gapcheck(args) -> int:
    with open(args.certificate) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ParseError(err.msg, f"line {err.lineno} column {err.colno}") from None
    obj = from_document(doc)
    if isinstance(obj, PeriodicWitness):
        print("witness: validated" if obj.validated else "witness: NOT validated")
        return 0 if obj.validated else EXIT_VERIFY
    ok, lines = gapcheck(obj, args.inject or ())
    for line in lines:
        print(line)
    print("PASS" if ok else "FAIL")
    return 0 if ok else EXIT_VERIFY


# entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padicgap", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="certificate or periodic witness for an instance")
    a.add_argument("config", nargs="?", help="instance document (JSON)")
    a.add_argument("--prime-range", type=_range, metavar="A:B")
    a.add_argument("--precision", type=int, metavar="K")
    a.add_argument("--degree", type=int, metavar="D")
    a.add_argument("--n-max", type=int)
    a.add_argument("--epsilon", type=_frac_arg, metavar="NUM/DEN")
    a.add_argument("--boost", type=int, metavar="E")
    a.add_argument("--mode", choices=["general", "curve"])
    a.add_argument("--seed-manifest", metavar="FILE", help="re-run from a run manifest")
    a.add_argument("-o", "--output")
    a.add_argument("--manifest", metavar="FILE", help="write a run manifest")

    c = sub.add_parser("counterexample", help="the interpolating sequence n_j")
    c.add_argument("p", type=int)
    c.add_argument("n1", type=int)
    c.add_argument("steps", type=int)
    c.add_argument("--bit-budget", type=int, default=counterexample.DEFAULT_BIT_BUDGET)
    c.add_argument("-o", "--output")

    g = sub.add_parser("gapcheck", help="re-verify a certificate without p-adic work")
    g.add_argument("certificate")
    g.add_argument("--inject", type=_inject, action="append", metavar="OFFSET:M",
                   help="add a zero m to the class with this offset")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            if args.seed_manifest:
                return cmd_replay(args)
            if not args.config:
                raise ParseError("missing instance document", "config")
            return cmd_analyze(args)
        if args.command == "counterexample":
            return cmd_counterexample(args)
        return cmd_gapcheck(args)
    except (ParseError, WrongShape) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except NoPrimeFound as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NO_PRIME
    except BudgetExceeded as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BUDGET
    except (PrecisionExhausted, PadicGapError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PRECISION
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
