from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from bpstiefel.algebra import CoeffPoly, ExtElement, MultiSeries, Series, TruncationPolicy
from bpstiefel.fgl import (
    UnsupportedContext, adams_apply, adams_series, alpha_closed_form, araki_check, context,
    exp_series, fgl_sum, log_series, n_series, stiefel_adams_closed_form, stiefel_adams_generator,
)
from bpstiefel.numcore import NonUnitParameter

MOD_J2 = TruncationPolicy(2, 8, 1)


def v(i, c=1):
    return CoeffPoly.gen(i, c)


def l_mod_j2(i, p):
    """l_i mod J^2 solved by hand from p l_i = l_0 v_i + l_i v_0^(p^i)."""
    return Fraction(1, p - p ** (p ** i))


def test_log_coefficients_mod_j2():
    log = log_series(MOD_J2)
    assert log[2] == v(1, Fraction(-1, 2))
    assert log[4] == v(2, Fraction(-1, 14))
    assert log[8] == v(3, Fraction(-1, 254))
    for m in (3, 5, 6, 7):
        assert not log[m]


def test_log_specializes_to_x():
    pol = TruncationPolicy(3, 9, 2)
    assert log_series(pol).specialize_zero() == Series.x(pol)
    assert exp_series(pol).specialize_zero() == Series.x(pol)


def test_exp_mod_j2():
    pol = TruncationPolicy(2, 4, 1)
    want = Series([0, 1, v(1, Fraction(1, 2)), 0, v(2, Fraction(1, 14))], pol)
    assert exp_series(pol) == want


@pytest.mark.parametrize("p,xmax,jo", [(2, 8, 1), (2, 8, 2), (3, 9, 1), (3, 9, 2)])
def test_exp_log_inverse(p, xmax, jo):
    pol = TruncationPolicy(p, xmax, jo)
    log, exp = log_series(pol), exp_series(pol)
    assert log.compose(exp) == Series.x(pol)
    assert exp.compose(log) == Series.x(pol)


def test_log_recursion_beyond_j2():
    # the recursion at n = 2, p = 2, mod J^3: 2 l2 = v2 + l1 v1^2 + 16 l2
    pol = TruncationPolicy(2, 4, 2)
    log = log_series(pol)
    l1 = log[2]
    rhs = v(2) + l1.mul(v(1).pow(2))
    assert log[4] * (2 - 16) == rhs.truncate(2)


@pytest.mark.parametrize("p", [2, 3])
def test_fgl_mod_j2_closed_form(p):
    pol = TruncationPolicy(p, p * p, 1)
    x, y = MultiSeries.var(0, 2, pol), MultiSeries.var(1, 2, pol)
    want = x + y
    i = 1
    while p ** i <= pol.max_xdeg:
        n = p ** i
        mixed = MultiSeries({(a, n - a): -comb(n, a) for a in range(1, n)}, 2, pol)
        want = want + mixed * MultiSeries.const(v(i, l_mod_j2(i, p)), 2, pol)
        i += 1
    assert fgl_sum(pol) == want


def test_fgl_low_degree():
    pol = TruncationPolicy(2, 2, 1)
    assert fgl_sum(pol).render(("x", "y")) == "x + y + v1*x*y"
    pol3 = TruncationPolicy(2, 6, 2)
    x, y = MultiSeries.var(0, 2, pol3), MultiSeries.var(1, 2, pol3)
    zero = MultiSeries({}, 2, pol3)
    F = fgl_sum(pol3)
    assert F.substitute([x, zero]) == x
    assert F.substitute([y, x]) == F


@pytest.mark.parametrize("p,jo", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_fgl_associative(p, jo):
    pol = TruncationPolicy(p, 8, jo)
    F = fgl_sum(pol)
    x, y, z = (MultiSeries.var(i, 3, pol) for i in range(3))
    assert F.substitute([F.substitute([x, y]), z]) == F.substitute([x, F.substitute([y, z])])


def test_fgl_additive_specialization():
    pol = TruncationPolicy(2, 6, 2)
    F = fgl_sum(pol)
    reduced = MultiSeries({e: CoeffPoly.const(c.constant_term()) for e, c in F.coeffs.items()}, 2, pol)
    assert reduced == MultiSeries.var(0, 2, pol) + MultiSeries.var(1, 2, pol)


def test_three_series_mod_j2():
    s = n_series(3, MOD_J2)
    want = [0, 3, v(1, 3), 0, v(2, Fraction(39, 7)), 0, 0, 0, v(3, Fraction(3279, 127))]
    assert s == Series(want, MOD_J2)
    for i in (1, 2, 3):
        assert s[2 ** i] == v(i, l_mod_j2(i, 2) * (3 - 3 ** (2 ** i)))


def test_n_series_basics():
    pol = TruncationPolicy(3, 9, 2)
    x = Series.x(pol)
    assert n_series(1, pol) == x
    assert n_series(4, pol).specialize_zero() == x * 4


@pytest.mark.parametrize("a", [2, 3, 4])
def test_n_series_by_repeated_formal_sum(a):
    pol = TruncationPolicy(2, 8, 2)
    x = Series.x(pol)
    assert n_series(a, pol) == context(pol).formal_sum(*([x] * a))


@pytest.mark.parametrize("a,b", [(a, b) for a in (-1, 1, 2, 3) for b in (-1, 1, 2, 3)])
def test_n_series_composition(a, b):
    pol = TruncationPolicy(2, 8, 2)
    assert n_series(a, pol).compose(n_series(b, pol)) == n_series(a * b, pol)
    assert n_series(a + b, pol) == context(pol).formal_sum(n_series(a, pol), n_series(b, pol))


@pytest.mark.parametrize("p,xmax", [(2, 4), (3, 9), (2, 8)])
def test_araki(p, xmax):
    for jo in (1, 2):
        assert araki_check(TruncationPolicy(p, xmax, jo))


def test_araki_detects_wrong_generators():
    ctx = context(TruncationPolicy(2, 4, 1))
    wrong = ctx.formal_sum(ctx.x * 2, Series.monomial(v(1, 2), 2, ctx.pol))
    assert ctx.n_series(2) != wrong


def test_closed_form_diagnostic():
    rows = context(MOD_J2).closed_form_diagnostic()
    n1, computed, recursion_form, other = rows[0]
    assert n1 == 1 and computed == recursion_form and other is None
    _, computed2, recursion2, other2 = rows[1]
    assert computed2 == recursion2 != other2


def test_adams_series_mod_j2():
    psi = adams_series(3, MOD_J2)
    assert psi.render() == "x + v1*x^2 + (13/7)*v2*x^4 + (1093/127)*v3*x^8"
    for i in (1, 2, 3):
        assert psi[2 ** i] == v(i, alpha_closed_form(i))
    assert [alpha_closed_form(i) for i in (1, 2, 3)] == [1, Fraction(13, 7), Fraction(1093, 127)]
    assert psi.is_plocal()


def test_adams_series_trivial_cases():
    pol = TruncationPolicy(2, 8, 2)
    assert adams_series(1, pol) == Series.x(pol)
    assert adams_series(3, pol).specialize_zero() == Series.x(pol)
    with pytest.raises(NonUnitParameter):
        adams_series(2, pol)
    with pytest.raises(NonUnitParameter):
        adams_series(Fraction(1, 3), TruncationPolicy(3, 9, 1))


def test_adams_on_coefficients():
    for i in (1, 2, 3):
        assert adams_apply(3, v(i), MOD_J2) == v(i, 3 ** (2 ** i - 1))
    assert adams_apply(3, Fraction(5), MOD_J2) == 5


def test_adams_composition_law():
    pol = TruncationPolicy(2, 8, 1)
    psi3 = adams_series(3, pol)
    assert adams_apply(3, psi3, pol) == adams_series(9, pol)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=9, max_size=9),
       st.lists(st.integers(-3, 3), min_size=9, max_size=9),
       st.sampled_from([None, 1, 2, 3]))
def test_adams_multiplicative(a, b, vi):
    pol = TruncationPolicy(2, 8, 2)
    f = Series([c if vi is None else v(vi, c) for c in a], pol)
    g = Series(b, pol)
    assert adams_apply(3, f * g, pol) == adams_apply(3, f, pol) * adams_apply(3, g, pol)


def test_stiefel_adams_example():
    got = adams_apply(3, ExtElement.y(6, 8, 3), MOD_J2)
    assert got == ExtElement({((6,), 0): 1, ((7,), 0): v(1, 5)}, 8, 3)
    assert adams_apply(3, ExtElement.y(8, 8, 3), MOD_J2) == ExtElement.y(8, 8, 3)


@pytest.mark.parametrize("n", range(2, 13))
def test_stiefel_adams_matches_closed_form(n):
    for k in range(1, n + 1):
        for j in range(n - k + 1, n + 1):
            assert stiefel_adams_generator(j, n, k) == stiefel_adams_closed_form(j, n, k)


def test_stiefel_adams_unsupported():
    with pytest.raises(UnsupportedContext):
        adams_apply(5, ExtElement.y(6, 8, 3), TruncationPolicy(3, 9, 1))
    with pytest.raises(UnsupportedContext):
        adams_apply(5, ExtElement.y(6, 8, 3), MOD_J2)
    with pytest.raises(IndexError):
        stiefel_adams_generator(3, 8, 3)
