"""Built-in verification suites, run by ``bpstiefel selfcheck``."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, List

from .algebra import CoeffPoly, ExtElement, MultiSeries, TruncationPolicy
from .fgl import (
    adams_apply, adams_series, alpha_closed_form, araki_check, fgl_sum,
    stiefel_adams_closed_form,
)
from .numcore import vp_binom, vp_binom_legendre, vp_int
from .obstruction import (
    MapQuery, Verdict, check_sq2, derive_constraint, evaluate, steenrod_family,
)
from .spectral import SsConfig, cross_check, presentation_closed_form


@dataclass
class SuiteResult:
    name: str
    ok: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name} ({self.seconds:.2f}s): {self.detail}"


def projective(quick: bool, mutate: bool) -> str:
    for p in (2, 3, 5):
        for n in range(1, 21):
            pres = presentation_closed_form(SsConfig(n, 1, p))
            if pres.ideal != ((1, n),) or pres.gamma_degrees:
                return f"(n,p)=({n},{p}): ideal {pres.ideal}, gammas {pres.gamma_degrees}"
    return ""


def engine(quick: bool, mutate: bool) -> str:
    top = 5 if quick else 10
    for p in (2, 3):
        for n in range(1, top + 1):
            for k in range(1, n + 1):
                cfg = SsConfig(n, k, p)
                if mutate:
                    bad = SsConfig(n, k, p, transgression=((cfg.low, p * cfg.coefficient(cfg.low)),))
                    report = cross_check(bad, reference=cfg)
                else:
                    report = cross_check(cfg)
                if not report.agree:
                    return f"(n,k,p)=({n},{k},{p}): {report.first_discrepancy}"
    return ""


def associativity_defects(F: MultiSeries) -> List[str]:
    pol = F.pol
    x, y, z = (MultiSeries.var(i, 3, pol) for i in range(3))
    out = []
    if F.substitute([MultiSeries.var(0, 1, pol), MultiSeries({}, 1, pol)]) != MultiSeries.var(0, 1, pol):
        out.append("unit")
    X, Y = MultiSeries.var(0, 2, pol), MultiSeries.var(1, 2, pol)
    if F.substitute([Y, X]) != F:
        out.append("commutativity")
    if F.substitute([F.substitute([x, y]), z]) != F.substitute([x, F.substitute([y, z])]):
        out.append("associativity")
    return out


def fgl_axioms(quick: bool, mutate: bool) -> str:
    jorders = (1,) if quick else (1, 2)
    for p in (2, 3):
        for jo in jorders:
            pol = TruncationPolicy(p, 6 if quick else 8, jo)
            bad = associativity_defects(fgl_sum(pol))
            if bad:
                return f"p={p}, jorder={jo}: {', '.join(bad)} fails"
    return ""


def araki(quick: bool, mutate: bool) -> str:
    for p in (2, 3):
        for jo in (1, 2):
            res = araki_check(TruncationPolicy(p, p * p, jo))
            if not res:
                return f"p={p}: mismatch at x^{res.first_failure}"
    return ""


def adams_closed_form(quick: bool, mutate: bool) -> str:
    psi = adams_series(3, TruncationPolicy(2, 8, 1))
    for i in range(1, 4):
        want = CoeffPoly.gen(i, alpha_closed_form(i))
        if psi[2 ** i] != want:
            return f"coefficient of x^{2 ** i} is {psi[2 ** i].render()}"
    if not psi.is_plocal():
        return "a coefficient is not 2-local"
    return ""


def coefficient_action(quick: bool, mutate: bool) -> str:
    pol = TruncationPolicy(2, 8, 1)
    for i in range(1, 4):
        got = adams_apply(3, CoeffPoly.gen(i), pol)
        if got != CoeffPoly.gen(i, 3 ** (2 ** i - 1)):
            return f"Psi^3(v{i}) = {got.render()}"
    return ""


def stiefel_adams(quick: bool, mutate: bool) -> str:
    got = adams_apply(3, ExtElement.y(6, 8, 3), TruncationPolicy(2, 8, 1))
    want = ExtElement({((6,), 0): 1, ((7,), 0): CoeffPoly.gen(1, 5)}, 8, 3)
    if got != want or got != stiefel_adams_closed_form(6, 8, 3):
        return f"Psi^3(y6) = {got.render()}"
    return ""


def obstructions(quick: bool, mutate: bool) -> str:
    expect = {(10, 10, 6, 5): ("bp_adams", {"s": 3}), (4, 2, 5, 3): ("divisibility", None),
              (5, 1, 9, 8): ("dimension", None)}
    for q, (name, witness) in expect.items():
        first = evaluate(q).first_firing
        if first is None or first.name != name or (witness and first.witness != witness):
            return f"{q}: expected {name}, got {first}"
    for n in range(1, (12 if quick else 30) + 1):
        for k in range(1, n + 1):
            for k2 in (k, k - 1):
                if k2 >= 1 and evaluate((n, k, n, k2)).verdict != Verdict.INCONCLUSIVE:
                    return f"({n},{k},{n},{k2}) should be inconclusive"
    q = steenrod_family(44)
    if q != MapQuery(699, 7, 702, 10) or not check_sq2(q).fires:
        return f"steenrod_family(44) = {q}"
    return ""


def constraint(quick: bool, mutate: bool) -> str:
    c = derive_constraint((10, 10, 6, 5), 3)
    a, b = c.normalized
    if a["beta"] != 1 or b["k_3"] != 2 * (1 - 2 ** 7):
        return f"constraint {c.equation()}"
    if not (c.lhs_valuation == 0 and c.rhs_valuation_at_least >= 1 and c.unsatisfiable):
        return "valuation contradiction not detected"
    return ""


def valuations(quick: bool, mutate: bool) -> str:
    top = 150 if quick else 2000
    for p in (2, 3, 5):
        for n in range(top + 1):
            direct = 0
            for k in range(n + 1):
                if k:
                    direct += vp_int(n - k + 1, p) - vp_int(k, p)
                a = vp_binom(n, k, p)
                if a != direct or a != vp_binom_legendre(n, k, p):
                    return f"vp(C({n},{k})) at p={p}: kummer {a}, direct {direct}"
    return ""


SUITES: List[Callable[[bool, bool], str]] = [
    projective, engine, fgl_axioms, araki, adams_closed_form, coefficient_action,
    stiefel_adams, obstructions, constraint, valuations,
]


def run(quick: bool = False, mutate_transgression: bool = False) -> List[SuiteResult]:
    results = []
    for suite in SUITES:
        t = time.perf_counter()
        try:
            problem = suite(quick, mutate_transgression)
        except Exception as exc:  # a crashing suite is a failing suite
            problem = f"{type(exc).__name__}: {exc}"
        results.append(SuiteResult(suite.__name__, not problem, problem or "ok",
                                   time.perf_counter() - t))
    return results
