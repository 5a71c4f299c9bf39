"""Linear algebra over the local ring Z_(p).

Vectors are lists of Fractions whose denominators are prime to p.  Every
elimination step is invertible over Z_(p): pivots are chosen with minimal
p-adic valuation, so each multiplier b/pivot is itself p-local.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .numcore import INF, vp

Vec = List[Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


def _axpy(dst: Vec, lam: Fraction, src: Vec) -> None:
    """dst -= lam * src, in place."""
    for i, s in enumerate(src):
        if s:
            dst[i] -= lam * s


def kernel(rows: Sequence[Sequence[Fraction]], ncols: int, p: int) -> List[Vec]:
    """Z_(p)-basis of {v : M v = 0}, M given by rows; the result is saturated."""
    cols = [[Fraction(r[j]) for r in rows] for j in range(ncols)]
    units = [[ONE if i == j else ZERO for i in range(ncols)] for j in range(ncols)]
    active = list(range(ncols))
    for i in range(len(rows)):
        cand = [j for j in active if cols[j][i]]
        if not cand:
            continue
        piv = min(cand, key=lambda j: vp(cols[j][i], p))
        pv = cols[piv][i]
        for j in cand:
            if j == piv:
                continue
            lam = cols[j][i] / pv
            _axpy(cols[j], lam, cols[piv])
            _axpy(units[j], lam, units[piv])
        active.remove(piv)
    return [units[j] for j in active]


def span_basis(gens: Sequence[Vec], dim: int, p: int) -> List[Vec]:
    """Z_(p)-basis of the module spanned by ``gens`` in Z_(p)^dim."""
    cols = [list(g) for g in gens]
    basis = []
    active = list(range(len(cols)))
    for i in range(dim):
        cand = [j for j in active if cols[j][i]]
        if not cand:
            continue
        piv = min(cand, key=lambda j: vp(cols[j][i], p))
        pv = cols[piv][i]
        for j in cand:
            if j != piv:
                _axpy(cols[j], cols[j][i] / pv, cols[piv])
        active.remove(piv)
        basis.append(cols[piv])
    return basis


class Coordinates:
    """Solve B z = v for a full-column-rank basis B (columns)."""

    def __init__(self, basis: Sequence[Vec], dim: int):
        self.basis = [list(b) for b in basis]
        self.dim = dim
        r = len(basis)
        # reduce the r x dim matrix B^T by rows to find r pivot coordinates
        rows = [list(b) + [ONE if i == j else ZERO for j in range(r)] for i, b in enumerate(basis)]
        pivots = []
        used = [False] * r
        for c in range(dim):
            pr = next((i for i in range(r) if not used[i] and rows[i][c]), None)
            if pr is None:
                continue
            used[pr] = True
            pivots.append((c, pr))
            inv = 1 / rows[pr][c]
            rows[pr] = [x * inv for x in rows[pr]]
            for i in range(r):
                if i != pr and rows[i][c]:
                    lam = rows[i][c]
                    rows[i] = [a - lam * b for a, b in zip(rows[i], rows[pr])]
        if len(pivots) != r:
            raise ValueError("basis vectors are linearly dependent")
        # rows[pr] = (sum_i T[pr][i] b_i) with unit entry at pivot column c
        self.pivots = pivots
        self.transform = {pr: rows[pr][dim:] for _, pr in pivots}
        self.reduced = {pr: rows[pr][:dim] for _, pr in pivots}

    def solve(self, v: Sequence[Fraction]) -> Vec:
        r = len(self.basis)
        z = [ZERO] * r
        for c, pr in self.pivots:
            a = v[c]
            if a:
                t = self.transform[pr]
                for i in range(r):
                    if t[i]:
                        z[i] += a * t[i]
        check = [ZERO] * self.dim
        for i, b in enumerate(self.basis):
            if z[i]:
                for j, x in enumerate(b):
                    if x:
                        check[j] += z[i] * x
        if any(a != b for a, b in zip(check, v)):
            raise ValueError("vector is not in the span of the basis")
        return z


def smith(rows: Sequence[Sequence[Fraction]], nrows: int, ncols: int, p: int):
    """Smith form over Z_(p) of an nrows x ncols matrix X.

    Returns (exps, L, Linv) with L X R = diag(p^exps[0], ..., p^exps[rank-1])
    for some R; L is invertible over Z_(p).
    """
    A = [[Fraction(x) for x in r] for r in rows]
    L = [[ONE if i == j else ZERO for j in range(nrows)] for i in range(nrows)]
    Linv = [[ONE if i == j else ZERO for j in range(nrows)] for i in range(nrows)]
    exps = []
    for t in range(min(nrows, ncols)):
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if A[i][j]:
                    v = vp(A[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        e, i, j = best
        if i != t:
            A[t], A[i] = A[i], A[t]
            L[t], L[i] = L[i], L[t]
            for row in Linv:
                row[t], row[i] = row[i], row[t]
        if j != t:
            for row in A:
                row[t], row[j] = row[j], row[t]
        u = A[t][t] / Fraction(p) ** e
        A[t] = [x / u for x in A[t]]
        L[t] = [x / u for x in L[t]]
        for row in Linv:
            row[t] = row[t] * u
        pv = A[t][t]
        for i2 in range(t + 1, nrows):
            if A[i2][t]:
                lam = A[i2][t] / pv
                _axpy(A[i2], lam, A[t])
                _axpy(L[i2], lam, L[t])
                for row in Linv:
                    row[t] += lam * row[i2]
        for j2 in range(t + 1, ncols):
            A[t][j2] = ZERO
        exps.append(e)
    return exps, L, Linv


@dataclass(frozen=True)
class ModuleStructure:
    """Z_(p)^free (+) Z/p^e1 (+) Z/p^e2 (+) ...; torsion exponents sorted."""

    free: int = 0
    torsion: Tuple[int, ...] = ()

    @classmethod
    def cyclic(cls, e) -> "ModuleStructure":
        """Z_(p) for e = INF/None, Z/p^e otherwise (zero when e == 0)."""
        if e is None or e == INF:
            return cls(1, ())
        return cls(0, (e,) if e > 0 else ())

    def __add__(self, other: "ModuleStructure") -> "ModuleStructure":
        return ModuleStructure(self.free + other.free, tuple(sorted(self.torsion + other.torsion)))

    def is_zero(self) -> bool:
        return self.free == 0 and not self.torsion

    def to_json(self):
        return {"free": self.free, "torsion": list(self.torsion)}

    def __str__(self):
        parts = []
        if self.free:
            parts.append("Z(p)" if self.free == 1 else f"Z(p)^{self.free}")
        parts += [f"Z/p^{e}" for e in self.torsion]
        return " + ".join(parts) if parts else "0"


class Quotient:
    """The Z_(p)-module L1 / L2 for lattices L2 <= L1 <= Z_(p)^dim.

    ``gens`` are vectors of L1 whose classes generate L1/L2 with
    ``orders[i]`` = e (class of order p^e) or None (free).
    """

    def __init__(self, basis: Sequence[Vec], relations: Sequence[Vec], dim: int, p: int):
        self.p = p
        self.dim = dim
        r = len(basis)
        self._coords = Coordinates(basis, dim) if r else None
        X_cols = [self._coords.solve(g) for g in relations] if r else []
        for col in X_cols:
            for a in col:
                if a.denominator % p == 0:
                    raise ValueError("relation is not in the lattice over Z_(p)")
        X = [[col[i] for col in X_cols] for i in range(r)]
        exps, L, Linv = smith(X, r, len(X_cols), p)
        self._L = L
        adapted = []
        for c in range(r):
            v = [ZERO] * dim
            for i in range(r):
                a = Linv[i][c]
                if a:
                    _axpy(v, -a, basis[i])
            adapted.append(v)
        self.gens: List[Vec] = []
        self.orders: List[Optional[int]] = []
        self._slots: List[int] = []
        for c in range(r):
            e = exps[c] if c < len(exps) else None
            if e == 0:
                continue
            self.gens.append(adapted[c])
            self.orders.append(e)
            self._slots.append(c)

    @property
    def structure(self) -> ModuleStructure:
        free = sum(1 for e in self.orders if e is None)
        return ModuleStructure(free, tuple(sorted(e for e in self.orders if e is not None)))

    def coords(self, v: Sequence[Fraction]) -> Vec:
        """Coordinates of the class of v on ``gens`` (torsion entries only defined mod p^e)."""
        if self._coords is None:
            if any(v):
                raise ValueError("vector is not in the (zero) lattice")
            return []
        z = self._coords.solve(v)
        out = []
        for c in self._slots:
            row = self._L[c]
            out.append(sum((row[i] * z[i] for i in range(len(z)) if z[i]), ZERO))
        return out

    def is_zero_class(self, coords: Sequence[Fraction]) -> bool:
        return all(reduces_to_zero(a, e, self.p) for a, e in zip(coords, self.orders))


def reduces_to_zero(a: Fraction, e: Optional[int], p: int) -> bool:
    """Whether a is zero in Z_(p) (e None) or in Z/p^e."""
    if not a:
        return True
    if e is None:
        return False
    return vp(a, p) >= e


def presentation_homology(A: Sequence[Sequence[Fraction]], B: Sequence[Sequence[Fraction]],
                          orders_in: Sequence[Optional[int]], orders_mid: Sequence[Optional[int]],
                          orders_out: Sequence[Optional[int]], p: int) -> ModuleStructure:
    """Homology of M_in --A--> M --B--> M_out at M for cyclic-sum modules.

    Each module is sum Z_(p)/p^e (free when e is None); A is |M| x |M_in|,
    B is |M_out| x |M|, both given as matrices of representatives.
    """
    g = len(orders_mid)
    if g == 0:
        return ModuleStructure()
    tors_out = [i for i, e in enumerate(orders_out) if e is not None]
    rows = []
    for i in range(len(orders_out)):
        row = [Fraction(B[i][j]) for j in range(g)]
        row += [Fraction(-(p ** orders_out[i])) if i == t else ZERO for t in tors_out]
        rows.append(row)
    ker = kernel(rows, g + len(tors_out), p)
    kgens = [v[:g] for v in ker]
    kbasis = span_basis(kgens, g, p)
    rels = [[Fraction(A[i][j]) for i in range(g)] for j in range(len(orders_in))]
    for t, e in enumerate(orders_mid):
        if e is not None:
            rels.append([Fraction(p ** e) if i == t else ZERO for i in range(g)])
    return Quotient(kbasis, rels, g, p).structure
