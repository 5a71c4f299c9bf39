"""The p-typical formal group law of BP in Araki generators.

Everything is derived from the logarithm, whose coefficients solve

    p * l_n = sum_{0 <= i <= n} l_i * v_{n-i}^(p^i),   l_0 = 1, v_0 = p,

so l_n = (sum_{i<n} l_i v_{n-i}^(p^i)) / (p - p^(p^n)).  The exponential is
the compositional inverse, F(x, y) = exp(log x + log y), [a](x) =
exp(a log x) and the Adams operation is Psi^a(x) = a^{-1} [a](x).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Optional, Union

from .algebra import (
    CoeffPoly, ExtElement, MultiSeries, Series, TruncationPolicy, compose_multi,
    series_reverse,
)
from .numcore import NonPLocalResult, NonUnitParameter, is_unit


class UnsupportedContext(ValueError):
    """Adams action requested outside the case worked out for Stiefel manifolds."""


@dataclass(frozen=True)
class ArakiResult:
    ok: bool
    first_failure: Optional[int] = None  # x-degree of the first mismatch
    lhs: Optional[str] = None
    rhs: Optional[str] = None

    def __bool__(self):
        return self.ok


class FglContext:
    """Cached log, exp and formal sum for one truncation policy."""

    def __init__(self, pol: TruncationPolicy):
        self.pol = pol
        self.log = log_series_uncached(pol)
        self.exp = series_reverse(self.log)
        self.x = Series.x(pol)

    @cached_property
    def fgl(self) -> MultiSeries:
        lx = MultiSeries.from_series(self.log, 0, 2)
        ly = MultiSeries.from_series(self.log, 1, 2)
        return compose_multi(self.exp, lx + ly)

    def log_coefficient(self, n: int) -> CoeffPoly:
        return self.log[self.pol.p ** n]

    def formal_sum(self, *fs: Series) -> Series:
        """f_1 +_F f_2 +_F ... for series without constant term."""
        if not fs:
            return Series.zero(self.pol)
        total = self.log.compose(fs[0])
        for f in fs[1:]:
            total = total + self.log.compose(f)
        return self.exp.compose(total)

    def n_series(self, a) -> Series:
        return self.exp.compose(self.log * Fraction(a))

    def adams_series(self, a) -> Series:
        a = Fraction(a)
        p = self.pol.p
        if not is_unit(a, p):
            raise NonUnitParameter(f"{a} is not a unit in Z_({p})")
        psi = self.n_series(a) * (1 / a)
        for m, c in enumerate(psi.coeffs):
            if not c.is_plocal(p):
                raise NonPLocalResult(f"coefficient of x^{m} in Psi^{a}(x) is not {p}-local: {c}")
        return psi

    def araki_check(self) -> ArakiResult:
        p = self.pol.p
        lhs = self.n_series(p)
        parts = [self.x * p]
        i = 1
        while p ** i <= self.pol.max_xdeg and i <= self.pol.d:
            parts.append(Series.monomial(CoeffPoly.gen(i), p ** i, self.pol))
            i += 1
        rhs = self.formal_sum(*parts)
        for m, (a, b) in enumerate(zip(lhs.coeffs, rhs.coeffs)):
            if a != b:
                return ArakiResult(False, m, a.render(), b.render())
        return ArakiResult(True)

    def closed_form_diagnostic(self):
        """Compare computed l_n (mod J^2) with the two candidate closed forms.

        Rows are (n, computed, v_n/(p - p^(p^n)), v_n/(p - p^n) or None when
        that denominator vanishes).
        """
        p = self.pol.p
        rows = []
        n = 1
        while p ** n <= self.pol.max_xdeg and n <= self.pol.d:
            ln = self.log_coefficient(n).truncate(1)
            from_recursion = CoeffPoly.gen(n, Fraction(1, p - p ** (p ** n)))
            den = p - p ** n
            other = CoeffPoly.gen(n, Fraction(1, den)) if den else None
            rows.append((n, ln, from_recursion, other))
            n += 1
        return rows


@lru_cache(maxsize=64)
def context(pol: TruncationPolicy) -> FglContext:
    return FglContext(pol)


def log_series_uncached(pol: TruncationPolicy) -> Series:
    p, jo = pol.p, pol.max_jorder
    ls = [CoeffPoly.const(1)]
    n = 1
    while p ** n <= pol.max_xdeg and n <= pol.d:
        rhs = CoeffPoly()
        for i in range(n):
            vpow = CoeffPoly.gen(n - i).pow(p ** i, jo) if p ** i <= jo else CoeffPoly()
            rhs = rhs + ls[i].mul(vpow, jo)
        ls.append(rhs.scale(Fraction(1, p - p ** (p ** n))))
        n += 1
    coeffs = [CoeffPoly() for _ in range(pol.max_xdeg + 1)]
    for i, li in enumerate(ls):
        coeffs[p ** i] = li
    return Series(coeffs, pol)


def log_series(pol: TruncationPolicy) -> Series:
    return context(pol).log


def exp_series(pol: TruncationPolicy) -> Series:
    return context(pol).exp


def fgl_sum(pol: TruncationPolicy) -> MultiSeries:
    return context(pol).fgl


def n_series(a, pol: TruncationPolicy) -> Series:
    return context(pol).n_series(a)


def araki_check(pol: TruncationPolicy) -> ArakiResult:
    return context(pol).araki_check()


def adams_series(a, pol: TruncationPolicy) -> Series:
    return context(pol).adams_series(a)


def adams_on_coefficients(a, c: CoeffPoly, p: int) -> CoeffPoly:
    """v_i -> a^(p^i - 1) v_i, extended multiplicatively."""
    a = Fraction(a)
    return c.map_monomials(lambda m: a ** sum(e * (p ** i - 1) for i, e in m))


def adams_apply(a, e: Union[int, Fraction, CoeffPoly, Series, ExtElement],
                pol: TruncationPolicy):
    """Apply Psi^a to a coefficient, a series in x, or a Stiefel class.

    On a series both the coefficients and x are acted on.  On an
    ExtElement (a class in BP^*(W(n,k))) the result is computed modulo
    I^2 + J^2, I the ideal generated by the y_j, and only p = 2, a = 3 is
    supported.
    """
    a = Fraction(a)
    p = pol.p
    if not is_unit(a, p):
        raise NonUnitParameter(f"{a} is not a unit in Z_({p})")
    if isinstance(e, (int, Fraction)):
        return Fraction(e)
    if isinstance(e, CoeffPoly):
        return adams_on_coefficients(a, e, p).truncate(pol.max_jorder)
    if isinstance(e, Series):
        psi = adams_series(a, e.pol)
        acted = e.map_coeffs(lambda c: adams_on_coefficients(a, c, p))
        return acted.compose(psi)
    if isinstance(e, ExtElement):
        return _adams_on_stiefel(a, e, p)
    raise TypeError(f"cannot apply an Adams operation to {type(e).__name__}")


def stiefel_adams_generator(j: int, n: int, k: int) -> ExtElement:
    """Psi^3(y_j) in BP^*(W(n,k)) mod I^2 + J^2 at p = 2.

    Computed through y_m <-> suspension of x^(m-1): Psi^3(x^(j-1)) =
    Psi^3(x)^(j-1) mod J^2, with x^(m-1) read back as y_m for m <= n.
    """
    if not n - k + 1 <= j <= n:
        raise IndexError(f"y_{j} is not a generator of BP^*(W({n},{k}))")
    power = _psi3_powers(max(n - 1, 1))[j - 1]
    terms = {}
    for m in range(j, n + 1):
        c = power[m - 1]
        if c:
            terms[((m,), 0)] = c
    return ExtElement(terms, n, k)


@lru_cache(maxsize=32)
def _psi3_powers(top: int):
    """Psi^3(x)^e for e = 0..top at p = 2, mod J^2 and x^(top+1)."""
    psi_x = adams_series(3, TruncationPolicy(2, top, 1))
    powers = [Series([1], psi_x.pol)]
    for _ in range(top):
        powers.append(powers[-1] * psi_x)
    return powers


def _adams_on_stiefel(a: Fraction, e: ExtElement, p: int) -> ExtElement:
    if p != 2 or a != 3:
        raise UnsupportedContext("Adams action on Stiefel classes is only derived for p=2, a=3")
    out = ExtElement({}, e.n, e.k)
    for (S, t), c in e.terms.items():
        if t:
            raise UnsupportedContext("classes of W(n,k) carry no x")
        if len(S) >= 2:
            continue  # lies in I^2
        coeff = adams_on_coefficients(a, CoeffPoly.coerce(c), p).truncate(1)
        if not S:
            out = out + ExtElement.scalar(coeff, e.n, e.k)
            continue
        gen = stiefel_adams_generator(S[0], e.n, e.k)
        prod = {key: coeff.mul(CoeffPoly.coerce(v), 1) for key, v in gen.terms.items()}
        out = out + ExtElement(prod, e.n, e.k)
    return out


def alpha_closed_form(i: int) -> Fraction:
    """(1 - 3^(2^i - 1)) / (2 (1 - 2^(2^i - 1)))."""
    return Fraction(1 - 3 ** (2 ** i - 1), 2 * (1 - 2 ** (2 ** i - 1)))


def stiefel_adams_closed_form(j: int, n: int, k: int) -> ExtElement:
    """y_j + (j-1) sum_{i >= 1, 2^i + j - 1 <= n} alpha_i v_i y_{2^i + j - 1}."""
    terms = {((j,), 0): CoeffPoly.const(1)}
    i = 1
    while 2 ** i + j - 1 <= n:
        terms[((2 ** i + j - 1,), 0)] = CoeffPoly.gen(i, (j - 1) * alpha_closed_form(i))
        i += 1
    return ExtElement(terms, n, k)


__all__ = [
    "FglContext", "ArakiResult", "UnsupportedContext", "context", "log_series", "exp_series",
    "fgl_sum", "n_series", "araki_check", "adams_series", "adams_apply",
    "adams_on_coefficients", "stiefel_adams_generator", "alpha_closed_form",
    "stiefel_adams_closed_form",
]

