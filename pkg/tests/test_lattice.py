from fractions import Fraction
from math import lcm

from hypothesis import given, settings, strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from bpstiefel.lattice import (
    ModuleStructure, Quotient, kernel, presentation_homology, smith, span_basis,
)
from bpstiefel.numcore import vp

F = Fraction


def oracle_cokernel(cols, dim, p):
    """Z_(p) structure of Z^dim / span(cols) via the integer Smith form."""
    if not cols:
        return ModuleStructure(dim, ())
    M = Matrix([[int(c[i]) for c in cols] for i in range(dim)])
    D = smith_normal_form(M, domain=ZZ)
    diag = [abs(D[i, i]) for i in range(min(D.shape)) if D[i, i] != 0]
    tors = tuple(sorted(vp(d, p) for d in diag if vp(d, p) > 0))
    return ModuleStructure(dim - len(diag), tors)


def identity(n):
    return [[F(int(i == j)) for i in range(n)] for j in range(n)]


def test_cyclic_quotient():
    q = Quotient([[F(1)]], [[F(4)]], 1, 2)
    assert q.structure == ModuleStructure(0, (2,))
    assert q.gens == [[F(1)]]
    assert Quotient([[F(1)]], [[F(3)]], 1, 2).structure.is_zero()


def test_module_structure_helpers():
    assert ModuleStructure.cyclic(None) == ModuleStructure(1, ())
    assert ModuleStructure.cyclic(0).is_zero()
    assert str(ModuleStructure(1, (1, 2))) == "Z(p) + Z/p^1 + Z/p^2"
    assert str(ModuleStructure()) == "0"
    assert ModuleStructure(1, (2,)) + ModuleStructure(0, (1,)) == ModuleStructure(1, (1, 2))


def test_smith_small():
    exps, L, Linv = smith([[F(2), F(6)], [F(0), F(4)]], 2, 2, 2)
    assert sorted(exps) == [1, 2]
    prod = [[sum(L[i][k] * Linv[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    assert prod == identity(2)


def test_kernel_is_saturated():
    # x + 2y = 0 over Z_(2): kernel spanned by (-2, 1), which is primitive
    ker = kernel([[F(1), F(2)]], 2, 2)
    assert len(ker) == 1
    a, b = ker[0]
    assert a + 2 * b == 0 and min(vp(a, 2), vp(b, 2)) == 0


mats = st.integers(1, 4).flatmap(lambda r: st.integers(0, 4).flatmap(
    lambda c: st.lists(st.lists(st.integers(-12, 12), min_size=r, max_size=r),
                       min_size=c, max_size=c).map(lambda cols: (r, cols))))


@settings(max_examples=80, deadline=None)
@given(mats, st.sampled_from([2, 3]))
def test_quotient_matches_integer_smith_form(rc, p):
    dim, cols = rc
    cols = [[F(x) for x in c] for c in cols]
    got = Quotient(identity(dim), cols, dim, p).structure
    assert got == oracle_cokernel(cols, dim, p)


@settings(max_examples=80, deadline=None)
@given(mats, st.sampled_from([2, 3]))
def test_kernel_annihilates_and_has_right_rank(rc, p):
    dim, cols = rc
    rows = [[F(x) for x in c] for c in cols]  # treat cols as rows of a matrix
    ker = kernel(rows, dim, p)
    rank = Matrix([[int(x) for x in r] for r in rows]).rank() if rows else 0
    assert len(ker) == dim - rank
    for v in ker:
        assert all(sum(r[j] * v[j] for j in range(dim)) == 0 for r in rows)
    # saturation: the kernel lattice is a direct summand, so the quotient is free
    if ker:
        assert not Quotient(identity(dim), ker, dim, p).structure.torsion


@settings(max_examples=60, deadline=None)
@given(mats, st.sampled_from([2, 3]))
def test_coords_roundtrip(rc, p):
    dim, cols = rc
    cols = [[F(x) for x in c] for c in cols]
    basis = span_basis(cols, dim, p)
    q = Quotient(basis, [], dim, p) if basis else None
    for c in cols:
        if q is None:
            continue
        coords = q.coords(c)
        back = [sum(coords[i] * q.gens[i][j] for i in range(len(q.gens))) for j in range(dim)]
        assert back == c


def test_presentation_homology_of_multiplication():
    # Z --4--> Z --0--> 0 at p = 2: homology Z/4
    h = presentation_homology([[F(4)]], [], [None], [None], [], 2)
    assert h == ModuleStructure(0, (2,))
    # Z/8 --4--> Z/8 --4--> Z/8: kernel 2Z/8, image 4Z/8
    h = presentation_homology([[F(4)]], [[F(4)]], [3], [3], [3], 2)
    assert h == ModuleStructure(0, (1,))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=3, max_size=3),
       st.sampled_from([2, 3]))
def test_presentation_homology_free_chain(rows, p):
    A = Matrix(rows)
    # rows of B span the left null space of A, so B A = 0
    B = []
    for w in A.T.nullspace():
        den = lcm(*[int(x.q) for x in w])
        B.append([F(int(x * den)) for x in w])
    Ai = [[F(int(A[i, j])) for j in range(3)] for i in range(3)]
    h = presentation_homology(Ai, B, [None] * 3, [None] * 3, [None] * len(B), p)
    ker = kernel(B, 3, p) if B else identity(3)
    cols = [[Ai[i][j] for i in range(3)] for j in range(3)]
    assert h == Quotient(ker, cols, 3, p).structure
