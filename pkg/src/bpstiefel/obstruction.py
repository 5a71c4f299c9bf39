"""Criteria ruling out S^1-equivariant maps W(n,k) -> W(m,l).

Every criterion is a sufficient condition for non-existence; when none
fires the verdict is only "inconclusive".  The order in which criteria are
reported is fixed: dimension, divisibility, sq2, bp_adams.
"""
from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

from .algebra import CoeffPoly, ExtElement, TruncationPolicy
from .fgl import adams_apply, alpha_closed_form
from .numcore import binom, vp, vp_binom


class PreconditionFailed(ValueError):
    pass


class Verdict(str, Enum):
    RULED_OUT = "ruled_out"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, order=True)
class MapQuery:
    n: int
    k: int
    m: int
    l: int

    def __post_init__(self):
        for name in ("n", "k", "m", "l"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.k > self.n or self.l > self.m:
            raise ValueError(f"need k <= n and l <= m, got {tuple(self)}")

    def __iter__(self):
        return iter((self.n, self.k, self.m, self.l))


@dataclass(frozen=True)
class CriterionResult:
    name: str
    fires: bool
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        return {"name": self.name, "fires": self.fires, "witness": self.witness}


@dataclass(frozen=True)
class ObstructionReport:
    query: MapQuery
    criteria: Tuple[CriterionResult, ...]
    notes: Tuple[str, ...] = ()

    @property
    def verdict(self) -> Verdict:
        return Verdict.RULED_OUT if any(c.fires for c in self.criteria) else Verdict.INCONCLUSIVE

    @property
    def first_firing(self) -> Optional[CriterionResult]:
        return next((c for c in self.criteria if c.fires), None)

    def to_json(self) -> dict:
        n, k, m, l = self.query
        return {
            "n": n, "k": k, "m": m, "l": l,
            "verdict": self.verdict.value,
            "criteria": [c.to_json() for c in self.criteria],
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ObstructionReport":
        crit = tuple(CriterionResult(c["name"], c["fires"], c["witness"]) for c in d["criteria"])
        report = cls(MapQuery(d["n"], d["k"], d["m"], d["l"]), crit, tuple(d.get("notes", ())))
        if report.verdict.value != d["verdict"]:
            raise ValueError("verdict does not match the criteria")
        return report


def _q(q) -> MapQuery:
    return q if isinstance(q, MapQuery) else MapQuery(*q)


def check_dimension(q) -> CriterionResult:
    q = _q(q)
    fires = q.n - q.k > q.m - q.l
    return CriterionResult("dimension", fires, {"n-k": q.n - q.k, "m-l": q.m - q.l} if fires else None)


def check_divisibility(q) -> CriterionResult:
    q = _q(q)
    if q.n - q.k != q.m - q.l:
        return CriterionResult("divisibility", False)
    a = binom(q.n, q.n - q.k + 1)
    b = binom(q.m, q.m - q.l + 1)
    fires = b % a != 0
    return CriterionResult("divisibility", fires, {"divisor": a, "dividend": b} if fires else None)


def sq2_on_bottom_class(n: int, k: int) -> str:
    """Sq^2(y_{n-k+1}) = (n-k) y_{n-k+2} + n x y_{n-k+1} in H^*(PW(n,k); F_2)."""
    j = n - k + 1
    terms = []
    if (n - k) % 2 and k >= 2:
        terms.append(f"y{j + 1}")
    if n % 2:
        terms.append(f"x*y{j}")
    return " + ".join(terms) or "0"


def check_sq2(q) -> CriterionResult:
    """Proof conditions of the Steenrod-square argument, as a standalone criterion."""
    q = _q(q)
    n, k, m, l = q
    name = "sq2"
    if not (m % 2 == 0 and l % 2 == 0 and n % 2 == 1 and k % 2 == 1 and m - l == n - k):
        return CriterionResult(name, False)
    a = binom(n, n - k + 1)
    b = binom(m, m - l + 1)
    if vp_binom(n, n - k + 1, 2) != 1 or vp_binom(m, m - l + 1, 2) != 1 or b % a:
        return CriterionResult(name, False)
    witness = {"target": sq2_on_bottom_class(m, l), "source": sq2_on_bottom_class(n, k)}
    return CriterionResult(name, True, witness)


def bp_adams_exponent(q) -> Optional[int]:
    """Smallest s >= 1 with m < 2^s + m - l <= n, or None."""
    q = _q(q)
    s = 1
    while 2 ** s + q.m - q.l <= q.n:
        if q.m < 2 ** s + q.m - q.l:
            return s
        s += 1
    return None


def _bp_adams_conditions(q: MapQuery) -> Optional[str]:
    """None if all hypotheses hold, otherwise the first one that fails."""
    n, k, m, l = q
    if not n - k < m - l:
        return "n-k < m-l fails"
    if bp_adams_exponent(q) is None:
        return "no s with m < 2^s + m - l <= n"
    for j in range(n - k + 1, m - l + 1):
        if vp_binom(n, j, 2) < 1:
            return f"C({n},{j}) is odd"
    if vp_binom(m, m - l + 1, 2) != 0:
        return f"C({m},{m - l + 1}) is even"
    if (m - l) % 2 == 0:
        return "m-l is even"
    return None


def check_bp_adams(q) -> CriterionResult:
    q = _q(q)
    if _bp_adams_conditions(q) is not None:
        return CriterionResult("bp_adams", False)
    return CriterionResult("bp_adams", True, {"s": bp_adams_exponent(q)})


CRITERIA = (check_dimension, check_divisibility, check_sq2, check_bp_adams)


def evaluate(q) -> ObstructionReport:
    q = _q(q)
    results = tuple(c(q) for c in CRITERIA)
    notes = ()
    if not any(r.fires for r in results):
        notes = ("no criterion applies; existence of a map is not asserted",)
    return ObstructionReport(q, results, notes)


def _evaluate_tuple(t):
    return evaluate(MapQuery(*t))


def queries(n_range: Iterable[int], k_range: Iterable[int],
            m_range: Iterable[int], l_range: Iterable[int]) -> List[MapQuery]:
    out = []
    for n, k, m, l in itertools.product(n_range, k_range, m_range, l_range):
        if 1 <= k <= n and 1 <= l <= m:
            out.append(MapQuery(n, k, m, l))
    return sorted(out)


def scan(n_range, k_range, m_range, l_range, workers: int = 1) -> Iterator[ObstructionReport]:
    """Evaluate every valid query in the box, in lexicographic (n, k, m, l) order."""
    qs = queries(n_range, k_range, m_range, l_range)
    if workers <= 1 or len(qs) < 64:
        for q in qs:
            yield evaluate(q)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_evaluate_tuple, [tuple(q) for q in qs], chunksize=256)


def scan_csv(reports: Iterable[ObstructionReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "k", "m", "l", "verdict", "first_firing_criterion"])
    for r in reports:
        first = r.first_firing
        w.writerow([*r.query, r.verdict.value, first.name if first else ""])
    return buf.getvalue()


@dataclass(frozen=True)
class FamilyRejection:
    r: int
    reason: str


def steenrod_family(r: int) -> Union[MapQuery, FamilyRejection]:
    """(16r-5, 7, 16r-2, 10) when r = -1, -2, 3 mod 9 and r = 2, 1, -2 mod 7."""
    if r < 1:
        raise ValueError("r must be positive")
    if r % 9 not in (8, 7, 3):
        return FamilyRejection(r, f"r = {r % 9} mod 9, not in {{8, 7, 3}}")
    if r % 7 not in (2, 1, 5):
        return FamilyRejection(r, f"r = {r % 7} mod 7, not in {{2, 1, 5}}")
    q = MapQuery(16 * r - 5, 7, 16 * r - 2, 10)
    if not check_sq2(q).fires:
        raise AssertionError(f"sq2 criterion does not fire on {tuple(q)}")
    return q


class LinearForm:
    """A linear combination of named unknowns with rational coefficients."""

    def __init__(self, coeffs: Optional[Dict[str, Fraction]] = None):
        self.coeffs = {k: Fraction(v) for k, v in (coeffs or {}).items() if v}

    @classmethod
    def var(cls, name: str, c=1) -> "LinearForm":
        return cls({name: Fraction(c)})

    def __add__(self, other: "LinearForm") -> "LinearForm":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return LinearForm(out)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + other * -1

    def __mul__(self, c) -> "LinearForm":
        return LinearForm({k: v * Fraction(c) for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, LinearForm) and self.coeffs == other.coeffs

    def __getitem__(self, name: str) -> Fraction:
        return self.coeffs.get(name, Fraction(0))

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for name in sorted(self.coeffs, key=_unknown_order):
            c = self.coeffs[name]
            parts.append(f"{c}*{name}" if c != 1 else name)
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def _unknown_order(name: str):
    head, _, idx = name.partition("_")
    return ({"beta": 0, "k": 1, "nu": 2}.get(head, 3), int(idx or 0))


@dataclass
class Constraint:
    query: MapQuery
    s: int
    lhs: LinearForm        # coefficient of v_s y_{2^s+m-l} in Psi^3(g^* y)
    rhs: LinearForm        # the same coefficient in g^*(Psi^3 y)
    normalized: Tuple[LinearForm, LinearForm]
    lhs_valuation: int
    rhs_valuation_at_least: int
    notes: List[str] = field(default_factory=list)

    @property
    def unsatisfiable(self) -> bool:
        return self.lhs_valuation < self.rhs_valuation_at_least

    def equation(self) -> str:
        a, b = self.normalized
        return f"{a} = {b}"

    def to_json(self) -> dict:
        n, k, m, l = self.query
        return {
            "n": n, "k": k, "m": m, "l": l, "s": self.s,
            "coefficient_equation": f"{self.lhs} = {self.rhs}",
            "constraint": self.equation(),
            "closed_form": f"beta*(m-l) = 2*(1-2^{2 ** self.s - 1})*k_{self.s}",
            "lhs_valuation": self.lhs_valuation,
            "rhs_valuation_at_least": self.rhs_valuation_at_least,
            "unsatisfiable": self.unsatisfiable,
            "notes": self.notes,
        }


def _coefficient_forms(e_by_unknown: Dict[str, ExtElement], index: int, i: int) -> LinearForm:
    """Coefficient of v_i y_index, as a linear form in the unknowns."""
    out = LinearForm()
    for name, e in e_by_unknown.items():
        c = e.coefficient((index,))
        c = CoeffPoly.coerce(c).coefficient(((i, 1),))
        out = out + LinearForm.var(name, c)
    return out


def derive_constraint(q, s: int) -> Constraint:
    """Equate Psi^3 g^* and g^* Psi^3 on y_{m-l+1} at the class v_s y_{2^s+m-l}.

    g^*(y_{m-l+1}) = beta y_{m-l+1} + sum_j k_j v_j y_{2^j+m-l} (mod I^2 + J^2)
    with beta a 2-local unit, and g^*(v_i y_{2^i+m-l}) = nu_i v_i y_{2^i+m-l}.
    Both sides are expanded with the Adams action on BP^*(W) at p = 2.
    """
    q = _q(q)
    n, k, m, l = q
    failure = _bp_adams_conditions(q)
    if failure is not None:
        raise PreconditionFailed(failure)
    if s < 1 or not m < 2 ** s + m - l <= n:
        raise PreconditionFailed(f"s={s} does not satisfy m < 2^s + m - l <= n")
    base = m - l + 1
    js = [j for j in range(1, n.bit_length() + 1) if 2 ** j + m - l <= n]

    # Psi^3(g^* y_base) in BP^*(W(n,k)), one ExtElement per unknown
    pol = TruncationPolicy(2, max(n - 1, 1), 1)
    source: Dict[str, ExtElement] = {"beta": adams_apply(3, ExtElement.y(base, n, k), pol)}
    for j in js:
        gen = ExtElement({((2 ** j + m - l,), 0): CoeffPoly.gen(j)}, n, k)
        source[f"k_{j}"] = adams_apply(3, gen, pol)
    target = 2 ** s + m - l
    lhs = _coefficient_forms(source, target, s)

    # g^*(Psi^3 y_base): Psi^3 computed in BP^*(W(m,l)), then pulled back
    psi_target = adams_apply(3, ExtElement.y(base, m, l), TruncationPolicy(2, max(m - 1, 1), 1))
    rhs = LinearForm.var(f"k_{s}")  # from g^*(y_base)
    notes = []
    for i in range(1, m.bit_length() + 1):
        idx = 2 ** i + m - l
        if idx > m:
            continue
        c = CoeffPoly.coerce(psi_target.coefficient((idx,))).coefficient(((i, 1),))
        if i == s and c:
            rhs = rhs + LinearForm.var(f"nu_{i}", c)
    if 2 ** s + m - l > m:
        notes.append(f"y_{target} does not exist in W({m},{l}), so no nu_{s} term")

    # a*beta + b*k_s = 0, rescaled so that beta carries the coefficient m - l
    diff = lhs - rhs
    a, b = diff["beta"], diff[f"k_{s}"]
    if set(diff.coeffs) - {"beta", f"k_{s}"} or not a:
        raise PreconditionFailed("coefficient comparison did not reduce to beta and k_s")
    scale = Fraction(m - l) / a
    normalized = (LinearForm.var("beta", m - l), LinearForm.var(f"k_{s}", -b * scale))
    expected = 2 * (1 - 2 ** (2 ** s - 1))
    if normalized[1][f"k_{s}"] != expected:
        raise AssertionError("normalized constraint disagrees with 2(1-2^(2^s-1))")
    # check the alpha_s used implicitly by the Adams action
    assert lhs["beta"] == (m - l) * alpha_closed_form(s)
    lhs_val = vp(Fraction(m - l), 2)
    rhs_val = vp(Fraction(expected), 2)
    return Constraint(q, s, lhs, rhs, normalized, lhs_val, rhs_val, notes)
