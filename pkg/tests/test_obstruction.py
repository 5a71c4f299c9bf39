import json
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from bpstiefel.obstruction import (
    FamilyRejection, LinearForm, MapQuery, ObstructionReport, PreconditionFailed, Verdict,
    bp_adams_exponent, check_bp_adams, check_dimension, check_divisibility, check_sq2,
    derive_constraint, evaluate, scan, scan_csv, steenrod_family,
)


def v2(x):
    return (x & -x).bit_length() - 1


def test_dimension():
    assert check_dimension((5, 1, 9, 8)).fires
    assert not check_dimension((6, 3, 6, 3)).fires
    assert not check_dimension((4, 2, 5, 3)).fires


def test_divisibility():
    assert comb(4, 3) == 4 and comb(5, 4) == 5
    assert check_divisibility((4, 2, 5, 3)).fires
    assert not check_divisibility((7, 3, 7, 3)).fires
    assert not check_divisibility((2, 1, 3, 2)).fires
    assert not check_divisibility((4, 2, 6, 3)).fires  # not applicable


def test_sq2_example():
    n, k, m, l = 699, 7, 702, 10
    # the three conditions, checked directly
    assert m % 2 == l % 2 == 0 and n % 2 == k % 2 == 1 and m - l == n - k
    assert v2(comb(n, n - k + 1)) == 1 and v2(comb(m, m - l + 1)) == 1
    assert comb(m, m - l + 1) % comb(n, n - k + 1) == 0
    res = check_sq2((n, k, m, l))
    assert res.fires
    assert res.witness == {"target": "0", "source": "x*y693"}


def test_sq2_negative():
    assert not check_sq2((7, 3, 7, 3)).fires
    assert not check_sq2((4, 2, 5, 3)).fires


def test_bp_adams_example():
    res = check_bp_adams((10, 10, 6, 5))
    assert res.fires and res.witness == {"s": 3}
    assert 6 < 2 ** 3 + 1 <= 10 and comb(10, 1) % 2 == 0 and comb(6, 2) % 2 == 1


def test_bp_adams_negative():
    assert not check_bp_adams((10, 10, 6, 4)).fires  # m - l even
    assert not check_bp_adams((4, 2, 5, 3)).fires
    assert bp_adams_exponent((4, 2, 5, 3)) is None


def test_evaluate_examples():
    r = evaluate((10, 10, 6, 5))
    assert r.verdict == Verdict.RULED_OUT
    assert r.first_firing.name == "bp_adams" and r.first_firing.witness == {"s": 3}
    assert evaluate((5, 1, 9, 8)).first_firing.name == "dimension"
    assert evaluate((4, 2, 5, 3)).first_firing.name == "divisibility"
    assert evaluate((9, 4, 9, 4)).verdict == Verdict.INCONCLUSIVE
    assert [c.name for c in r.criteria] == ["dimension", "divisibility", "sq2", "bp_adams"]


def test_soundness_on_trivial_maps():
    for n in range(1, 31):
        for k in range(1, n + 1):
            for k2 in range(1, k + 1):
                r = evaluate((n, k, n, k2))
                assert r.verdict == Verdict.INCONCLUSIVE, (n, k, k2)


def test_steenrod_family():
    assert steenrod_family(44) == MapQuery(699, 7, 702, 10)
    assert isinstance(steenrod_family(1), FamilyRejection)
    rej = steenrod_family(3)
    assert isinstance(rej, FamilyRejection) and "mod 7" in rej.reason
    accepted = 0
    for r in range(1, 501):
        q = steenrod_family(r)
        ok = r % 9 in (8, 7, 3) and r % 7 in (2, 1, 5)
        assert isinstance(q, MapQuery) == ok
        if ok:
            accepted += 1
            assert check_sq2(q).fires
    # 9 admissible classes mod 63: 63 in seven full periods, 8 more in 442..500
    assert accepted == 71


def example_family(limit=64):
    for n in range(2, limit + 1, 2):
        for m in range(2, n + 1):
            if comb(m, 2) % 2 and any(m < 2 ** s + 1 <= n for s in range(1, 8)):
                yield MapQuery(n, n, m, m - 1)


def test_bp_adams_family():
    qs = list(example_family())
    assert qs
    for q in qs:
        res = check_bp_adams(q)
        assert res.fires, q
        c = derive_constraint(q, res.witness["s"])
        assert c.unsatisfiable


def test_derive_constraint_example():
    c = derive_constraint((10, 10, 6, 5), 3)
    lhs, rhs = c.normalized
    assert lhs == LinearForm.var("beta", 1)
    assert rhs == LinearForm.var("k_3", 2 * (1 - 2 ** 7)) == LinearForm.var("k_3", -254)
    alpha3 = Fraction(1 - 3 ** 7, 2 * (1 - 2 ** 7))
    assert c.lhs["beta"] == alpha3 and c.lhs["k_3"] == 3 ** 7
    assert c.rhs == LinearForm.var("k_3")
    assert c.lhs_valuation == 0 and c.rhs_valuation_at_least >= 1 and c.unsatisfiable
    assert c.equation() == "beta = -254*k_3"
    assert c.to_json()["closed_form"] == "beta*(m-l) = 2*(1-2^7)*k_3"


def test_derive_constraint_preconditions():
    with pytest.raises(PreconditionFailed):
        derive_constraint((4, 2, 5, 3), 1)
    with pytest.raises(PreconditionFailed):
        derive_constraint((10, 10, 6, 5), 2)  # 2^2 + 1 <= 6


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 40), st.integers(1, 40), st.integers(2, 40), st.integers(1, 40))
def test_constraint_agrees_with_criterion(n, k, m, l):
    if k > n or l > m:
        return
    q = MapQuery(n, k, m, l)
    fires = check_bp_adams(q).fires
    try:
        c = derive_constraint(q, bp_adams_exponent(q) or 1)
    except PreconditionFailed:
        assert not fires
        return
    assert fires and c.unsatisfiable
    s = c.s
    assert c.normalized[1][f"k_{s}"] == 2 * (1 - 2 ** (2 ** s - 1))


def test_report_json_roundtrip():
    r = evaluate((10, 10, 6, 5))
    d = json.loads(json.dumps(r.to_json()))
    assert list(d)[:6] == ["n", "k", "m", "l", "verdict", "criteria"]
    assert ObstructionReport.from_json(d) == r


def test_scan_order_and_csv():
    reports = list(scan(range(3, 5), range(1, 4), range(3, 6), range(1, 3)))
    keys = [tuple(r.query) for r in reports]
    assert keys == sorted(keys)
    assert all(k <= n and l <= m for n, k, m, l in keys)
    text = scan_csv(reports)
    lines = text.splitlines()
    assert lines[0] == "n,k,m,l,verdict,first_firing_criterion"
    assert len(lines) == len(reports) + 1


def test_scan_with_workers_matches_serial():
    box = (range(1, 7), range(1, 7), range(1, 8), range(1, 8))
    serial = [r.to_json() for r in scan(*box)]
    pooled = [r.to_json() for r in scan(*box, workers=2)]
    assert serial == pooled


def test_query_validation():
    with pytest.raises(ValueError):
        MapQuery(3, 4, 5, 5)
    with pytest.raises(ValueError):
        MapQuery(0, 0, 1, 1)
