"""Exact p-local arithmetic, p-adic valuations and binomial coefficients.

Scalars are :class:`fractions.Fraction` values.  The prime is passed
explicitly; a value is *p-local* when p does not divide its denominator.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Scalar = Union[int, Fraction]

#: valuation of zero
INF = math.inf


class NonPLocalResult(ArithmeticError):
    """A result that must lie in Z_(p) has p in its denominator."""


class NonUnitParameter(ValueError):
    """A parameter that must be a unit of Z_(p) is divisible by p."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def vp_int(n: int, p: int) -> float | int:
    """Exponent of p in the integer n (INF for n == 0)."""
    if n == 0:
        return INF
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def vp(a: Scalar, p: int) -> float | int:
    """p-adic valuation of a rational number; INF for zero."""
    a = Fraction(a)
    if a == 0:
        return INF
    return vp_int(a.numerator, p) - vp_int(a.denominator, p)


def is_plocal(a: Scalar, p: int) -> bool:
    return Fraction(a).denominator % p != 0


def is_unit(a: Scalar, p: int) -> bool:
    return a != 0 and vp(a, p) == 0


def check_plocal(a: Scalar, p: int) -> Fraction:
    a = Fraction(a)
    if a.denominator % p == 0:
        raise NonPLocalResult(f"{a} is not {p}-local")
    return a


def unit_part(a: Scalar, p: int) -> Fraction:
    """a / p^vp(a) for nonzero a."""
    a = Fraction(a)
    e = vp(a, p)
    return a / Fraction(p) ** e


def plocal_arith(a: Scalar, b: Scalar, op: str, p: int, *,
                 fraction_field: bool = False) -> Fraction:
    """Apply ``op`` in {'add', 'sub', 'mul', 'div'} exactly.

    In strict mode (the default) the result must be p-local, otherwise
    :class:`NonPLocalResult` is raised.  Division by zero raises
    :class:`ZeroDivisionError`.
    """
    a, b = Fraction(a), Fraction(b)
    if op == "add":
        r = a + b
    elif op == "sub":
        r = a - b
    elif op == "mul":
        r = a * b
    elif op == "div":
        if b == 0:
            raise ZeroDivisionError("division by zero in Z_(p)")
        r = a / b
    else:
        raise ValueError(f"unknown operation {op!r}")
    if not fraction_field:
        check_plocal(r, p)
    return r


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero outside 0 <= k <= n."""
    if k < 0 or k > n or n < 0:
        return 0
    return math.comb(n, k)


def vp_binom(n: int, k: int, p: int) -> int:
    """vp(C(n, k)) as the number of carries adding k and n-k in base p."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    a, b = k, n - k
    carry = 0
    carries = 0
    while a or b or carry:
        s = a % p + b % p + carry
        carry = 1 if s >= p else 0
        carries += carry
        a //= p
        b //= p
    return carries


def legendre(n: int, p: int) -> int:
    """vp(n!) = sum of floor(n / p^i)."""
    total = 0
    q = p
    while q <= n:
        total += n // q
        q *= p
    return total


def vp_binom_legendre(n: int, k: int, p: int) -> int:
    return legendre(n, p) - legendre(k, p) - legendre(n - k, p)
