"""Command-line interface.

Every command builds a JSON-serializable payload; ``--pretty`` renders that
payload as text instead of printing it.  Exit status: 0 success, 1
computation error (or a failed check), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional, Tuple

from . import __version__
from .algebra import NotReversible, TruncationPolicy
from .fgl import adams_series, context, n_series
from .numcore import NonPLocalResult, NonUnitParameter, is_prime
from .obstruction import (
    MapQuery, PreconditionFailed, bp_adams_exponent, check_bp_adams, derive_constraint,
    evaluate, scan, scan_csv,
)
from .selfcheck import run as run_selfcheck
from .spectral import SsConfig, TruncationTooSmall, cross_check, presentation_closed_form

PRIME_ENV = "BPSTIEFEL_PRIME"

COMPUTATION_ERRORS = (ArithmeticError, NonUnitParameter, NotReversible, TruncationTooSmall,
                      PreconditionFailed)


class UsageError(Exception):
    pass


def default_prime() -> int:
    raw = os.environ.get(PRIME_ENV, "2")
    try:
        p = int(raw)
    except ValueError:
        raise UsageError(f"{PRIME_ENV}={raw!r} is not an integer") from None
    return p


def _prime(p: Optional[int]) -> int:
    p = default_prime() if p is None else p
    if not is_prime(p):
        raise UsageError(f"p: {p} is not prime")
    return p


def parse_range(text: str) -> range:
    """'a:b' (inclusive) or a single integer."""
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}; use a:b") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}; need 1 <= a <= b")
    return range(lo, hi + 1)


def parse_kind(text: str) -> Tuple[str, Optional[Fraction]]:
    name, _, arg = text.partition(":")
    if name in ("log", "exp", "fgl") and not arg:
        return name, None
    if name in ("nseries", "adams") and arg:
        try:
            return name, Fraction(arg)
        except (ValueError, ZeroDivisionError):
            pass
    raise argparse.ArgumentTypeError(
        f"invalid series kind {text!r}; use log, exp, fgl, nseries:a or adams:a")


# payload builders -----------------------------------------------------------

def present_payload(args) -> Tuple[dict, int]:
    p = _prime(args.p)
    if not 1 <= args.k <= args.n:
        raise UsageError(f"k: need 1 <= k <= n, got n={args.n}, k={args.k}")
    xmax = args.xmax if args.xmax is not None else args.n + 8
    if xmax < args.n:
        raise UsageError(f"--xmax: must be at least n={args.n}")
    cfg = SsConfig(args.n, args.k, p, xmax)
    mode = args.mode or "closed_form"
    closed = presentation_closed_form(cfg).to_json()
    if mode == "closed_form":
        return closed, 0
    report = cross_check(cfg)
    engine = {"n": cfg.n, "k": cfg.k, "p": cfg.p, "xmax": cfg.xmax, "window": cfg.window,
              **{key: v for key, v in report.to_json().items()
                 if key in ("x_column", "exterior_column", "gamma_multipliers")}}
    if mode == "engine":
        return {"engine": engine}, 0
    payload = {"closed_form": closed, "engine": engine, "agree": report.agree,
               "first_discrepancy": report.first_discrepancy}
    return payload, 0 if report.agree else 1


def series_payload(args) -> Tuple[dict, int]:
    p = _prime(args.p)
    kind, a = args.kind
    if args.xmax < 1:
        raise UsageError("xmax: must be at least 1")
    if args.jorder < 2:
        raise UsageError("jorder: must be at least 2 (series are computed mod J^jorder)")
    pol = TruncationPolicy(p, args.xmax, args.jorder - 1)
    ctx = context(pol)
    if kind == "log":
        text = ctx.log.render()
    elif kind == "exp":
        text = ctx.exp.render()
    elif kind == "fgl":
        text = ctx.fgl.render(("x", "y"))
    elif kind == "nseries":
        text = n_series(a, pol).render()
    else:
        text = adams_series(a, pol).render()
    return {"kind": args.kind_text, "p": p, "xmax": args.xmax, "jorder": args.jorder,
            "series": text}, 0


def _query(args) -> MapQuery:
    try:
        return MapQuery(args.n, args.k, args.m, args.l)
    except ValueError as exc:
        raise UsageError(f"n k m l: {exc}") from None


def obstruct_payload(args) -> Tuple[dict, int]:
    q = _query(args)
    payload = evaluate(q).to_json()
    if args.derive:
        s = bp_adams_exponent(q)
        if check_bp_adams(q).fires:
            payload["constraint"] = derive_constraint(q, s).to_json()
        else:
            payload["constraint"] = None
    return payload, 0


def scan_payload(args) -> Tuple[object, int]:
    reports = list(scan(args.n, args.k, args.m, args.l, workers=args.workers))
    if args.csv:
        return scan_csv(reports), 0
    return [r.to_json() for r in reports], 0


def selfcheck_payload(args) -> Tuple[dict, int]:
    results = run_selfcheck(quick=args.quick, mutate_transgression=args.mutate_transgression)
    ok = all(r.ok for r in results)
    payload = {"ok": ok, "quick": args.quick,
               "suites": [{"name": r.name, "ok": r.ok, "detail": r.detail} for r in results]}
    return payload, 0 if ok else 1


# pretty rendering (from the JSON payload only) -------------------------------

def _module_str(m: dict) -> str:
    parts = []
    if m["free"]:
        parts.append("Z(p)" if m["free"] == 1 else f"Z(p)^{m['free']}")
    parts += [f"Z/p^{e}" for e in m["torsion"]]
    return " + ".join(parts) or "0"


def _xpow(j: int) -> str:
    return "x" if j == 1 else f"x^{j}"


def pretty_presentation(d: dict) -> List[str]:
    n, k = d["n"], d["k"]
    lo = n - k + 1
    gens = ", ".join(f"{c}*{_xpow(j)}" if c != 1 else _xpow(j) for c, j in d["ideal"])
    gammas = ", ".join(f"gamma{j} (degree {deg})"
                       for j, deg in zip(range(lo + 1, n + 1), d["gamma_degrees"]))
    return [
        f"BP^*(PW({n},{k})) at p={d['p']}",
        f"  exterior on: {gammas or 'none'}",
        f"  ideal: ({gens})",
        "  staircase: " + " ".join(f"e{j}={e}" for j, e in zip(range(lo, n + 1), d["staircase"])),
        "  minimal generators: " + ", ".join(_xpow(j) for j in d["minimal_generators"]),
        "  gamma multipliers: " + (" ".join(
            f"s{j}={s}" for j, s in zip(range(lo + 1, n + 1), d["gamma_multipliers"])) or "none"),
    ]


def pretty_engine(d: dict) -> List[str]:
    lines = [f"E_oo for PW({d['n']},{d['k']}) at p={d['p']}, total degree <= {d['window']}"]
    lines.append("  x-column: " + ", ".join(
        f"x^{a}: {_module_str(m)}" for a, m in enumerate(d["x_column"]) if not _zero(m)))
    lines.append("  exterior column: " + ", ".join(
        f"deg {t}: {_module_str(m)}" for t, m in enumerate(d["exterior_column"]) if not _zero(m)))
    mults = d["gamma_multipliers"]
    lines.append("  gamma multipliers: " + (" ".join(str(m) for m in mults) or "none"))
    return lines


def _zero(m: dict) -> bool:
    return not m["free"] and not m["torsion"]


def render_pretty(command: str, payload) -> str:
    if command == "series":
        return payload["series"]
    if command == "present":
        lines = []
        if "n" in payload:
            lines += pretty_presentation(payload)
        if "closed_form" in payload:
            lines += pretty_presentation(payload["closed_form"])
        if "engine" in payload:
            lines += pretty_engine(payload["engine"])
        if "agree" in payload:
            lines.append("agree" if payload["agree"] else f"DISAGREE: {payload['first_discrepancy']}")
        return "\n".join(lines)
    if command == "obstruct":
        return "\n".join(_pretty_report(payload))
    if command == "scan":
        if isinstance(payload, str):
            return payload.rstrip("\n")
        return "\n".join(_scan_line(r) for r in payload)
    if command == "selfcheck":
        lines = [f"{'PASS' if s['ok'] else 'FAIL'} {s['name']}: {s['detail']}" for s in payload["suites"]]
        lines.append("all suites passed" if payload["ok"] else "selfcheck FAILED")
        return "\n".join(lines)
    raise ValueError(command)


def _scan_line(r: dict) -> str:
    first = next((c["name"] for c in r["criteria"] if c["fires"]), "-")
    return f"({r['n']},{r['k']}) -> ({r['m']},{r['l']}): {r['verdict']} [{first}]"


def _pretty_report(r: dict) -> List[str]:
    lines = [f"W({r['n']},{r['k']}) -> W({r['m']},{r['l']}): {r['verdict']}"]
    for c in r["criteria"]:
        w = f" {json.dumps(c['witness'])}" if c["witness"] else ""
        lines.append(f"  {c['name']}: {'fires' if c['fires'] else 'does not fire'}{w}")
    lines += [f"  note: {n}" for n in r["notes"]]
    con = r.get("constraint")
    if con:
        lines.append(f"  constraint (s={con['s']}): {con['constraint']}  [{con['closed_form']}]")
        lines.append(f"  v2(lhs) = {con['lhs_valuation']}, v2(rhs) >= {con['rhs_valuation_at_least']}"
                     f" -> {'unsatisfiable' if con['unsatisfiable'] else 'satisfiable'}")
    return lines


# argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("--out", metavar="FILE", help="write output to FILE instead of stdout")

    parser = argparse.ArgumentParser(
        prog="bpstiefel",
        description="BP-cohomology of projective Stiefel manifolds and equivariant-map obstructions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("present", parents=[common],
                        help="presentation of BP^*(PW(n,k)) from the closed form and/or the engine")
    pr.add_argument("n", type=int)
    pr.add_argument("k", type=int)
    pr.add_argument("p", type=int, nargs="?", help=f"prime (default ${PRIME_ENV} or 2)")
    mode = pr.add_mutually_exclusive_group()
    mode.add_argument("--closed-form", dest="mode", action="store_const", const="closed_form")
    mode.add_argument("--engine", dest="mode", action="store_const", const="engine")
    mode.add_argument("--both", dest="mode", action="store_const", const="both")
    pr.add_argument("--xmax", type=int, help="x-power truncation for the engine (default n+8)")

    se = sub.add_parser("series", parents=[common], help="log, exp, fgl, [a]-series or Adams series")
    se.add_argument("kind", help="log | exp | fgl | nseries:a | adams:a")
    se.add_argument("p", type=int, nargs="?")
    se.add_argument("xmax", type=int, nargs="?", default=8)
    se.add_argument("jorder", type=int, nargs="?", default=2, help="work modulo J^jorder")

    ob = sub.add_parser("obstruct", parents=[common], help="evaluate all criteria for W(n,k) -> W(m,l)")
    for name in ("n", "k", "m", "l"):
        ob.add_argument(name, type=int)
    ob.add_argument("--derive", action="store_true", help="also derive the BP-Adams constraint")

    sc = sub.add_parser("scan", parents=[common], help="evaluate a box of queries, ranges as a:b")
    for name in ("n", "k", "m", "l"):
        sc.add_argument(name, type=parse_range)
    sc.add_argument("--csv", action="store_true", help="CSV instead of JSON")
    sc.add_argument("--workers", type=int, default=1)

    ck = sub.add_parser("selfcheck", parents=[common], help="run the built-in verification suites")
    ck.add_argument("--quick", action="store_true")
    ck.add_argument("--mutate-transgression", action="store_true",
                    help="corrupt a transgression coefficient (the engine suite must fail)")
    return parser


HANDLERS = {
    "present": present_payload,
    "series": series_payload,
    "obstruct": obstruct_payload,
    "scan": scan_payload,
    "selfcheck": selfcheck_payload,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "series":
        try:
            args.kind_text = args.kind
            args.kind = parse_kind(args.kind)
        except argparse.ArgumentTypeError as exc:
            parser.print_usage(sys.stderr)
            print(f"bpstiefel: error: kind: {exc}", file=sys.stderr)
            return 2
    try:
        payload, status = HANDLERS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bpstiefel: error: {exc}", file=sys.stderr)
        return 2
    except COMPUTATION_ERRORS as exc:
        print(f"bpstiefel: computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.pretty:
        text = render_pretty(args.command, payload)
    elif isinstance(payload, str):
        text = payload.rstrip("\n")
    else:
        text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return status
