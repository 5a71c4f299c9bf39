"""Truncated coefficient rings, power series and exterior algebras.

* :class:`CoeffPoly` - polynomials in v_1..v_d over Q with J-adic truncation
  (J = (v_1, v_2, ...)); houses BP^*(pt) and its rationalisation.
* :class:`Series` - dense truncated power series in x over CoeffPoly.
* :class:`MultiSeries` - truncated series in several variables (total degree).
* :class:`ExtElement` - elements of Lambda(y_{n-k+1}, ..., y_n) (x) R[x].

All values are immutable.  Text rendering follows one grammar: signed
rationals in parentheses when not integral, ``*`` between factors,
generators ``v<i>``, ``x``, ``y``, ``y<j>`` and ``^`` for powers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple, Union

from .numcore import is_plocal, is_prime

VMonomial = Tuple[Tuple[int, int], ...]
ONE_MONO: VMonomial = ()


class NonzeroConstantTerm(ValueError):
    pass


class NotReversible(ValueError):
    pass


class MismatchedContext(ValueError):
    pass


@dataclass(frozen=True)
class TruncationPolicy:
    """Where the coefficient ring and series variables are cut off.

    ``max_jorder`` is the largest total v-exponent retained, so working
    modulo J^2 means ``max_jorder=1``.  ``d`` is the largest v-index; by
    default the largest i with p^i <= max_xdeg, since v_i first appears
    alongside x^(p^i).
    """

    p: int
    max_xdeg: int
    max_jorder: int = 1
    d: int = field(default=-1)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.max_xdeg < 1:
            raise ValueError("max_xdeg must be >= 1")
        if self.max_jorder < 1:
            raise ValueError("max_jorder must be >= 1")
        if self.d < 0:
            d = 0
            while self.p ** (d + 1) <= self.max_xdeg:
                d += 1
            object.__setattr__(self, "d", d)


def mono_mul(a: VMonomial, b: VMonomial) -> VMonomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for i, e in b:
        exps[i] = exps.get(i, 0) + e
    return tuple(sorted(exps.items()))


def mono_jorder(m: VMonomial) -> int:
    return sum(e for _, e in m)


def mono_degree(m: VMonomial, p: int) -> int:
    """Cohomological degree; |v_i| = -2(p^i - 1)."""
    return -2 * sum(e * (p ** i - 1) for i, e in m)


def mono_sort_key(m: VMonomial):
    return (mono_jorder(m), m)


def mono_str(m: VMonomial) -> str:
    return "*".join(f"v{i}" if e == 1 else f"v{i}^{e}" for i, e in m)


def fmt_scalar(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"({c.numerator}/{c.denominator})"


def render_terms(terms: Iterable[Tuple[Fraction, str]]) -> str:
    """Join (coefficient, monomial-string) pairs into a signed sum."""
    out = []
    for c, mono in terms:
        if c == 0:
            continue
        neg = c < 0
        a = -c if neg else c
        if mono:
            body = mono if a == 1 else f"{fmt_scalar(a)}*{mono}"
        else:
            body = fmt_scalar(a)
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out) if out else "0"


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class CoeffPoly:
    """Polynomial in v_1, v_2, ... with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[VMonomial, object] | None = None):
        t = {}
        if terms:
            for m, c in terms.items():
                c = _frac(c)
                if c:
                    t[m] = c
        self.terms: Dict[VMonomial, Fraction] = t

    @classmethod
    def const(cls, c) -> "CoeffPoly":
        return cls({ONE_MONO: c})

    @classmethod
    def gen(cls, i: int, c=1) -> "CoeffPoly":
        if i < 1:
            raise ValueError("v-generators are indexed from 1")
        return cls({((i, 1),): c})

    @staticmethod
    def coerce(x) -> "CoeffPoly":
        if isinstance(x, CoeffPoly):
            return x
        return CoeffPoly.const(x)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CoeffPoly.const(other)
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, (CoeffPoly, int, Fraction)):
            return NotImplemented
        other = CoeffPoly.coerce(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return CoeffPoly(t)

    __radd__ = __add__

    def __neg__(self):
        return CoeffPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, (CoeffPoly, int, Fraction)):
            return NotImplemented
        return self + (-CoeffPoly.coerce(other))

    def __rsub__(self, other):
        return CoeffPoly.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        return self.mul(other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c) -> "CoeffPoly":
        c = _frac(c)
        if not c:
            return CoeffPoly()
        return CoeffPoly({m: a * c for m, a in self.terms.items()})

    def mul(self, other: "CoeffPoly", max_jorder: int | None = None) -> "CoeffPoly":
        t: Dict[VMonomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            j1 = mono_jorder(m1)
            for m2, c2 in other.terms.items():
                if max_jorder is not None and j1 + mono_jorder(m2) > max_jorder:
                    continue
                m = mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return CoeffPoly(t)

    def pow(self, e: int, max_jorder: int | None = None) -> "CoeffPoly":
        out = CoeffPoly.const(1)
        for _ in range(e):
            out = out.mul(self, max_jorder)
        return out

    def truncate(self, max_jorder: int) -> "CoeffPoly":
        return CoeffPoly({m: c for m, c in self.terms.items()
                          if mono_jorder(m) <= max_jorder})

    def constant_term(self) -> Fraction:
        """Image under v_i -> 0."""
        return self.terms.get(ONE_MONO, Fraction(0))

    def coefficient(self, mono: VMonomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def jorder(self) -> int:
        return max((mono_jorder(m) for m in self.terms), default=0)

    def max_index(self) -> int:
        return max((i for m in self.terms for i, _ in m), default=0)

    def degree(self, p: int) -> int | None:
        """Common cohomological degree of all terms, or None if mixed/zero."""
        degs = {mono_degree(m, p) for m in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def is_plocal(self, p: int) -> bool:
        return all(is_plocal(c, p) for c in self.terms.values())

    def map_monomials(self, fn: Callable[[VMonomial], Fraction]) -> "CoeffPoly":
        """Scale each monomial m by fn(m)."""
        return CoeffPoly({m: c * fn(m) for m, c in self.terms.items()})

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: mono_sort_key(mc[0]))

    def render(self) -> str:
        return render_terms((c, mono_str(m)) for m, c in self.sorted_terms())

    def __repr__(self):
        return f"CoeffPoly({self.render()})"

    __str__ = render


def poly_mul(a: CoeffPoly, b: CoeffPoly, pol: TruncationPolicy) -> CoeffPoly:
    return a.mul(b, pol.max_jorder)


def _check_poly(c: CoeffPoly, pol: TruncationPolicy) -> CoeffPoly:
    return c.truncate(pol.max_jorder) if c.jorder() > pol.max_jorder else c


def _xstr(var: str, e: int) -> str:
    if e == 0:
        return ""
    return var if e == 1 else f"{var}^{e}"


def _join(*parts: str) -> str:
    return "*".join(p for p in parts if p)


class Series:
    """Truncated power series sum_{m <= max_xdeg} c_m x^m, c_m a CoeffPoly."""

    __slots__ = ("coeffs", "pol")

    def __init__(self, coeffs: Sequence, pol: TruncationPolicy):
        n = pol.max_xdeg + 1
        cs = [_check_poly(CoeffPoly.coerce(c), pol) for c in list(coeffs)[:n]]
        cs.extend(CoeffPoly() for _ in range(n - len(cs)))
        self.coeffs: Tuple[CoeffPoly, ...] = tuple(cs)
        self.pol = pol

    @classmethod
    def x(cls, pol: TruncationPolicy) -> "Series":
        return cls([0, 1], pol)

    @classmethod
    def monomial(cls, c, m: int, pol: TruncationPolicy) -> "Series":
        cs = [0] * (m + 1)
        cs[m] = c
        return cls(cs, pol)

    @classmethod
    def zero(cls, pol: TruncationPolicy) -> "Series":
        return cls([], pol)

    def __getitem__(self, m: int) -> CoeffPoly:
        return self.coeffs[m]

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def _same(self, other: "Series"):
        if other.pol != self.pol:
            raise MismatchedContext("series under different truncation policies")

    def __add__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        self._same(other)
        return Series([a + b for a, b in zip(self.coeffs, other.coeffs)], self.pol)

    def __neg__(self):
        return Series([-a for a in self.coeffs], self.pol)

    def __sub__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Series([a.scale(other) for a in self.coeffs], self.pol)
        if isinstance(other, CoeffPoly):
            jo = self.pol.max_jorder
            return Series([a.mul(other, jo) for a in self.coeffs], self.pol)
        if not isinstance(other, Series):
            return NotImplemented
        self._same(other)
        return Series(_dense_mul(self.coeffs, other.coeffs, self.pol), self.pol)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CoeffPoly)):
            return self * other
        return NotImplemented

    def __pow__(self, e: int):
        out = Series([1], self.pol)
        for _ in range(e):
            out = out * self
        return out

    def valuation(self) -> int | None:
        """Lowest x-degree with a nonzero coefficient."""
        for m, c in enumerate(self.coeffs):
            if c:
                return m
        return None

    def compose(self, g: "Series") -> "Series":
        return series_compose(self, g)

    def reverse(self) -> "Series":
        return series_reverse(self)

    def map_coeffs(self, fn: Callable[[CoeffPoly], CoeffPoly]) -> "Series":
        return Series([fn(c) for c in self.coeffs], self.pol)

    def specialize_zero(self) -> "Series":
        """Image under all v_i -> 0."""
        return self.map_coeffs(lambda c: CoeffPoly.const(c.constant_term()))

    def is_homogeneous(self, degree: int) -> bool:
        """Whether every term c_m x^m has cohomological degree ``degree`` (|x| = 2)."""
        p = self.pol.p
        return all(mono_degree(mono, p) + 2 * m == degree
                   for m, c in enumerate(self.coeffs) for mono in c.terms)

    def is_plocal(self) -> bool:
        return all(c.is_plocal(self.pol.p) for c in self.coeffs)

    def terms(self):
        """(coefficient, v-monomial, x-degree) triples in canonical order."""
        for m, c in enumerate(self.coeffs):
            for mono, a in c.sorted_terms():
                yield a, mono, m

    def render(self, var: str = "x") -> str:
        return render_terms((a, _join(mono_str(mono), _xstr(var, m)))
                            for a, mono, m in self.terms())

    def __repr__(self):
        return f"Series({self.render()})"

    __str__ = render


def _dense_mul(a: Sequence[CoeffPoly], b: Sequence[CoeffPoly],
               pol: TruncationPolicy) -> list:
    n = pol.max_xdeg + 1
    jo = pol.max_jorder
    out = [CoeffPoly() for _ in range(n)]
    nz_a = [(i, c) for i, c in enumerate(a) if c]
    nz_b = [(j, c) for j, c in enumerate(b) if c]
    for i, ca in nz_a:
        for j, cb in nz_b:
            if i + j >= n:
                break
            out[i + j] = out[i + j] + ca.mul(cb, jo)
    return out


def series_compose(f: Series, g: Series) -> Series:
    """f(g(x)) truncated; g must have zero constant term."""
    f._same(g)
    if g.coeffs[0]:
        raise NonzeroConstantTerm("inner series has a nonzero constant term")
    out = Series.zero(f.pol)
    for c in reversed(f.coeffs):
        out = out * g + Series([c], f.pol)
    return out


def series_reverse(f: Series) -> Series:
    """Compositional inverse of f = x + O(x^2)."""
    pol = f.pol
    if f.coeffs[0] or f.coeffs[1] != CoeffPoly.const(1):
        raise NotReversible("series must be x + higher order terms")
    n = pol.max_xdeg
    jo = pol.max_jorder
    g = [CoeffPoly() for _ in range(n + 1)]
    if n >= 1:
        g[1] = CoeffPoly.const(1)
    # pw[i][m] = coefficient of x^m in g^i, filled as g becomes known
    pw = [[CoeffPoly() for _ in range(n + 1)] for _ in range(n + 1)]
    pw[1][1] = CoeffPoly.const(1)
    for i in range(2, n + 1):
        pw[i][i] = CoeffPoly.const(1)
    for m in range(2, n + 1):
        # coefficient of x^m in g^i for i >= 2 needs g_1..g_{m-1} only
        for i in range(2, m + 1):
            acc = CoeffPoly()
            for j in range(1, m - i + 2):
                if g[j] and pw[i - 1][m - j]:
                    acc = acc + g[j].mul(pw[i - 1][m - j], jo)
            pw[i][m] = acc
        rest = CoeffPoly()
        for i in range(2, m + 1):
            if f.coeffs[i] and pw[i][m]:
                rest = rest + f.coeffs[i].mul(pw[i][m], jo)
        g[m] = -rest
        pw[1][m] = g[m]
    return Series(g, pol)


Exps = Tuple[int, ...]


class MultiSeries:
    """Truncated series in ``nvars`` variables, total degree <= max_xdeg."""

    __slots__ = ("coeffs", "pol", "nvars")

    def __init__(self, coeffs: Mapping[Exps, object], nvars: int, pol: TruncationPolicy):
        t = {}
        for e, c in coeffs.items():
            if len(e) != nvars:
                raise ValueError("exponent tuple of wrong length")
            if sum(e) > pol.max_xdeg:
                continue
            c = _check_poly(CoeffPoly.coerce(c), pol)
            if c:
                t[tuple(e)] = c
        self.coeffs: Dict[Exps, CoeffPoly] = t
        self.nvars = nvars
        self.pol = pol

    @classmethod
    def var(cls, i: int, nvars: int, pol: TruncationPolicy) -> "MultiSeries":
        e = [0] * nvars
        e[i] = 1
        return cls({tuple(e): 1}, nvars, pol)

    @classmethod
    def const(cls, c, nvars: int, pol: TruncationPolicy) -> "MultiSeries":
        return cls({(0,) * nvars: c}, nvars, pol)

    @classmethod
    def from_series(cls, f: Series, i: int, nvars: int) -> "MultiSeries":
        """f viewed as a series in the i-th of nvars variables."""
        t = {}
        for m, c in enumerate(f.coeffs):
            e = [0] * nvars
            e[i] = m
            t[tuple(e)] = c
        return cls(t, nvars, f.pol)

    def __getitem__(self, e: Exps) -> CoeffPoly:
        return self.coeffs.get(tuple(e), CoeffPoly())

    def __eq__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.nvars == other.nvars and self.coeffs == other.coeffs

    def _same(self, other: "MultiSeries"):
        if other.pol != self.pol or other.nvars != self.nvars:
            raise MismatchedContext("series in different contexts")

    def __add__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        self._same(other)
        t = dict(self.coeffs)
        for e, c in other.coeffs.items():
            t[e] = t[e] + c if e in t else c
        return MultiSeries(t, self.nvars, self.pol)

    def __neg__(self):
        return MultiSeries({e: -c for e, c in self.coeffs.items()}, self.nvars, self.pol)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return MultiSeries({e: c.scale(other) for e, c in self.coeffs.items()},
                               self.nvars, self.pol)
        if not isinstance(other, MultiSeries):
            return NotImplemented
        self._same(other)
        top = self.pol.max_xdeg
        jo = self.pol.max_jorder
        t: Dict[Exps, CoeffPoly] = {}
        for e1, c1 in self.coeffs.items():
            s1 = sum(e1)
            for e2, c2 in other.coeffs.items():
                if s1 + sum(e2) > top:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1.mul(c2, jo)
                t[e] = t[e] + prod if e in t else prod
        return MultiSeries(t, self.nvars, self.pol)

    __rmul__ = __mul__

    def has_constant_term(self) -> bool:
        return (0,) * self.nvars in self.coeffs

    def substitute(self, args: Sequence["MultiSeries"]) -> "MultiSeries":
        """self(args[0], ..., args[nvars-1]); args share a context and have no constant term."""
        if len(args) != self.nvars:
            raise ValueError("wrong number of arguments")
        for a in args:
            if a.has_constant_term():
                raise NonzeroConstantTerm("substituted series must vanish at 0")
            args[0]._same(a)
        nv, pol = args[0].nvars, args[0].pol
        top = pol.max_xdeg
        powers = []
        for a in args:
            pw = [MultiSeries.const(1, nv, pol)]
            for _ in range(top):
                pw.append(pw[-1] * a)
            powers.append(pw)
        out = MultiSeries({}, nv, pol)
        for e, c in self.coeffs.items():
            term = MultiSeries.const(1, nv, pol)
            for i, k in enumerate(e):
                if k:
                    term = term * powers[i][k]
            out = out + term * MultiSeries.const(c, nv, pol)
        return out

    def to_series(self) -> Series:
        if self.nvars != 1:
            raise ValueError("not univariate")
        return Series([self[(m,)] for m in range(self.pol.max_xdeg + 1)], self.pol)

    def render(self, names: Sequence[str] = ("x", "y", "z")) -> str:
        items = sorted(self.coeffs.items(), key=lambda ec: (sum(ec[0]), tuple(-k for k in ec[0])))
        terms = []
        for e, c in items:
            xs = _join(*(_xstr(names[i], k) for i, k in enumerate(e)))
            for mono, a in c.sorted_terms():
                terms.append((a, _join(mono_str(mono), xs)))
        return render_terms(terms)

    def __repr__(self):
        return f"MultiSeries({self.render()})"

    __str__ = render


def compose_multi(f: Series, g: MultiSeries) -> MultiSeries:
    """f(g) for univariate f and multivariate g without constant term."""
    if g.has_constant_term():
        raise NonzeroConstantTerm("inner series has a nonzero constant term")
    out = MultiSeries({}, g.nvars, g.pol)
    for c in reversed(f.coeffs):
        out = out * g + MultiSeries.const(c, g.nvars, g.pol)
    return out


def BiSeries(coeffs: Mapping[Tuple[int, int], object], pol: TruncationPolicy) -> MultiSeries:
    return MultiSeries(coeffs, 2, pol)


Subset = Tuple[int, ...]


def merge_sign(a: Subset, b: Subset) -> int:
    """Koszul sign of y_a * y_b -> y_{a u b} for odd-degree generators; 0 if they meet."""
    if set(a) & set(b):
        return 0
    inversions = 0
    for i in a:
        for j in b:
            if i > j:
                inversions += 1
    return -1 if inversions % 2 else 1


def subset_degree(S: Subset) -> int:
    return sum(2 * j - 1 for j in S)


class ExtElement:
    """Element of Lambda(y_{n-k+1..n}) (x) R[x], stored as {(S, t): coeff}.

    Coefficients are Fractions or CoeffPolys; |y_j| = 2j - 1, |x| = 2.
    """

    __slots__ = ("terms", "n", "k")

    def __init__(self, terms: Mapping[Tuple[Subset, int], object], n: int, k: int):
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
        lo = n - k + 1
        t = {}
        for (S, e), c in terms.items():
            S = tuple(S)
            if list(S) != sorted(set(S)):
                raise ValueError(f"subset {S} must be strictly increasing")
            if S and (S[0] < lo or S[-1] > n):
                raise ValueError(f"generator index out of range {lo}..{n}: {S}")
            if e < 0:
                raise ValueError("negative x-exponent")
            if isinstance(c, int):
                c = Fraction(c)
            if c:
                t[(S, e)] = c
        self.terms = t
        self.n = n
        self.k = k

    @classmethod
    def y(cls, j: int, n: int, k: int, c=1) -> "ExtElement":
        return cls({((j,), 0): c}, n, k)

    @classmethod
    def xpow(cls, e: int, n: int, k: int, c=1) -> "ExtElement":
        return cls({((), e): c}, n, k)

    @classmethod
    def scalar(cls, c, n: int, k: int) -> "ExtElement":
        return cls({((), 0): c}, n, k)

    def _ctx(self, other: "ExtElement"):
        if (self.n, self.k) != (other.n, other.k):
            raise MismatchedContext(f"W({self.n},{self.k}) vs W({other.n},{other.k})")

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, ExtElement):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and self.terms == other.terms

    def __add__(self, other):
        if not isinstance(other, ExtElement):
            return NotImplemented
        self._ctx(other)
        t = dict(self.terms)
        for key, c in other.terms.items():
            t[key] = t[key] + c if key in t else c
        return ExtElement(t, self.n, self.k)

    def __neg__(self):
        return ExtElement({key: -c for key, c in self.terms.items()}, self.n, self.k)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ExtElement):
            return ext_mul(self, other)
        if isinstance(other, (int, Fraction, CoeffPoly)):
            return ExtElement({key: c * other for key, c in self.terms.items()}, self.n, self.k)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CoeffPoly)):
            return ExtElement({key: other * c for key, c in self.terms.items()}, self.n, self.k)
        return NotImplemented

    def coefficient(self, S: Subset, e: int = 0):
        return self.terms.get((tuple(S), e), Fraction(0))

    def degree(self, p: int | None = None) -> int | None:
        """Total degree if homogeneous (v-degrees counted when p is given)."""
        degs = set()
        for (S, e), c in self.terms.items():
            base = subset_degree(S) + 2 * e
            if isinstance(c, CoeffPoly):
                if p is None:
                    degs.add(base)
                else:
                    degs.update(base + mono_degree(m, p) for m in c.terms)
            else:
                degs.add(base)
        return degs.pop() if len(degs) == 1 else None

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], len(kv[0][0]), kv[0][0]))

    def render(self) -> str:
        terms = []
        for (S, e), c in self.sorted_terms():
            ys = "*".join(f"y{j}" for j in S)
            xs = _xstr("x", e)
            if isinstance(c, CoeffPoly):
                for mono, a in c.sorted_terms():
                    terms.append((a, _join(mono_str(mono), xs, ys)))
            else:
                terms.append((c, _join(xs, ys)))
        return render_terms(terms)

    def __repr__(self):
        return f"ExtElement[W({self.n},{self.k})]({self.render()})"

    __str__ = render


def ext_mul(a: ExtElement, b: ExtElement) -> ExtElement:
    """Graded-commutative product with Koszul signs; y_j^2 = 0."""
    a._ctx(b)
    t: dict = {}
    for (S1, e1), c1 in a.terms.items():
        for (S2, e2), c2 in b.terms.items():
            sign = merge_sign(S1, S2)
            if not sign:
                continue
            key = (tuple(sorted(S1 + S2)), e1 + e2)
            c = c1 * c2 if sign > 0 else -(c1 * c2)
            t[key] = t[key] + c if key in t else c
    return ExtElement(t, a.n, a.k)


def truncate(e, pol: TruncationPolicy):
    """Drop the parts of ``e`` that ``pol`` discards; idempotent."""
    if isinstance(e, CoeffPoly):
        return e.truncate(pol.max_jorder)
    if isinstance(e, Series):
        return Series(e.coeffs, pol)
    if isinstance(e, MultiSeries):
        return MultiSeries(e.coeffs, e.nvars, pol)
    if isinstance(e, ExtElement):
        t = {}
        for (S, x), c in e.terms.items():
            if x > pol.max_xdeg:
                continue
            if isinstance(c, CoeffPoly):
                c = c.truncate(pol.max_jorder)
            t[(S, x)] = c
        return ExtElement(t, e.n, e.k)
    if isinstance(e, (int, Fraction)):
        return e
    raise TypeError(f"cannot truncate {type(e).__name__}")


def exterior_rank(gens: Iterable[int], degree: int) -> int:
    """Number of subsets of exterior generators (given by index j, |y_j| = 2j-1)
    whose degrees sum to ``degree``."""
    counts = {0: 1}
    for j in gens:
        d = 2 * j - 1
        new = dict(counts)
        for deg, c in counts.items():
            if deg + d <= degree:
                new[deg + d] = new.get(deg + d, 0) + c
        counts = new
    return counts.get(degree, 0)


__all__ = [
    "TruncationPolicy", "CoeffPoly", "Series", "MultiSeries", "BiSeries", "ExtElement",
    "poly_mul", "series_compose", "series_reverse", "compose_multi", "ext_mul", "truncate",
    "NonzeroConstantTerm", "NotReversible", "MismatchedContext", "render_terms",
    "mono_degree", "mono_jorder", "subset_degree", "merge_sign", "exterior_rank",
]

