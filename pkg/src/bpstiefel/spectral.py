"""The spectral sequence of W(n,k) -> PW(n,k) -> CP^oo over Z_(p).

E_2 = Z_(p)[x] (x) Lambda(y_{n-k+1}, ..., y_n), x in bidegree (2, 0) a
permanent cycle, y_j in bidegree (0, 2j-1) transgressing to C(n,j) x^j.

The pages are computed as the spectral sequence of the filtered
differential graded algebra C = Z_(p)[x]/(x^{xmax+1}) (x) Lambda(y) with
D(y_j) = C(n,j) x^j, D(x) = 0, extended by the Leibniz rule, filtered by
x-power.  Then

    E_r^s = Z_r^s / (Z_{r-1}^{s+1} + D Z_{r-1}^{s-r+1}),
    Z_r^s = {c in F^s : D c in F^{s+r}},

and d_r is induced by D.  The complex splits by total degree N and by the
number q of exterior factors (D lowers q by one), so all lattice work is
done block by block.  With x truncated at xmax, the pages agree with the
untruncated ones in total degrees <= 2*xmax.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Tuple

from .algebra import ExtElement, ext_mul, exterior_rank, subset_degree
from .lattice import (
    ModuleStructure, Quotient, Vec, kernel, presentation_homology, reduces_to_zero,
)
from .numcore import INF, binom, is_prime, vp, vp_int


class TruncationTooSmall(ValueError):
    """A bidegree outside the window where the truncated computation is exact."""


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class SsConfig:
    n: int
    k: int
    p: int = 2
    xmax: Optional[int] = None
    # optional replacement transgression coefficients, ((j, c), ...); used for mutation tests
    transgression: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.xmax is None:
            object.__setattr__(self, "xmax", self.n + 8)
        if self.xmax < self.n:
            raise ValueError(f"xmax={self.xmax} must be at least n={self.n}")

    @property
    def low(self) -> int:
        """Index of the lowest exterior generator, n - k + 1."""
        return self.n - self.k + 1

    @property
    def window(self) -> int:
        """Largest total degree on which truncated pages are exact."""
        return 2 * self.xmax

    def coefficient(self, j: int) -> int:
        for jj, c in self.transgression:
            if jj == j:
                return c
        return binom(self.n, j)


def transgress(cfg: SsConfig, j: int) -> ExtElement:
    """d_{2j}(y_j) = C(n,j) x^j (and d_r(y_j) = 0 for r < 2j)."""
    if not cfg.low <= j <= cfg.n:
        raise IndexOutOfRange(f"y_{j} is not a generator for W({cfg.n},{cfg.k})")
    return ExtElement.xpow(j, cfg.n, cfg.k, cfg.coefficient(j))


def differential_on_basis(cfg: SsConfig, S: Tuple[int, ...], a: int) -> Dict[Tuple[Tuple[int, ...], int], int]:
    """D(x^a y_S) in the truncated complex, as {(S', a'): coefficient}."""
    out = {}
    for pos, j in enumerate(S):
        e = a + j
        if e > cfg.xmax:
            continue
        c = cfg.coefficient(j)
        if not c:
            continue
        rest = S[:pos] + S[pos + 1:]
        out[(rest, e)] = -c if pos % 2 else c
    return out


def apply_differential(cfg: SsConfig, e: ExtElement) -> ExtElement:
    out: Dict = {}
    for (S, a), c in e.terms.items():
        for key, d in differential_on_basis(cfg, S, a).items():
            out[key] = out.get(key, 0) + c * d
    return ExtElement(out, cfg.n, cfg.k)


def leibniz_defects(cfg: SsConfig, max_degree: int) -> List[Tuple[ExtElement, ExtElement]]:
    """Pairs of basis monomials a, b (total degree of ab <= max_degree) with
    D(ab) != D(a) b + (-1)^|a| a D(b)."""
    lo = cfg.low
    monos = []
    for mask in range(1 << cfg.k):
        S = tuple(lo + i for i in range(cfg.k) if mask >> i & 1)
        for a in range(cfg.xmax + 1):
            if subset_degree(S) + 2 * a <= max_degree:
                monos.append(ExtElement({(S, a): 1}, cfg.n, cfg.k))
    bad = []
    for u in monos:
        du = apply_differential(cfg, u)
        sign = -1 if u.degree(cfg.p) % 2 else 1
        for w in monos:
            uw = ext_mul(u, w)
            if not uw.terms or uw.degree(cfg.p) > max_degree:
                continue
            lhs = apply_differential(cfg, uw)
            rhs = ext_mul(du, w) + ext_mul(u, apply_differential(cfg, w)) * sign
            if _truncated(lhs, cfg) != _truncated(rhs, cfg):
                bad.append((u, w))
    return bad


def _truncated(e: ExtElement, cfg: SsConfig) -> Dict:
    return {key: c for key, c in e.terms.items() if key[1] <= cfg.xmax and c}


@dataclass
class Slot:
    s: int
    t: int
    gens: List[ExtElement]
    orders: List[Optional[int]]

    @property
    def structure(self) -> ModuleStructure:
        free = sum(1 for e in self.orders if e is None)
        return ModuleStructure(free, tuple(sorted(e for e in self.orders if e is not None)))


@dataclass
class Page:
    """One page E_r restricted to total degrees <= window.

    ``diff[(s, t)]`` is the matrix of d_r out of slot (s, t) into slot
    (s + r, t - r + 1), rows indexed by target generators.
    """

    cfg: SsConfig
    r: int
    slots: Dict[Tuple[int, int], Slot]
    diff: Dict[Tuple[int, int], List[List[Fraction]]] = field(default_factory=dict)

    def module(self, s: int, t: int) -> ModuleStructure:
        if s + t > self.cfg.window:
            raise TruncationTooSmall(
                f"bidegree ({s},{t}) is beyond total degree {self.cfg.window}; raise xmax")
        slot = self.slots.get((s, t))
        return slot.structure if slot else ModuleStructure()

    def x_column(self) -> List[ModuleStructure]:
        """E_r^{2a,0} for 2a <= window."""
        return [self.module(2 * a, 0) for a in range(self.cfg.window // 2 + 1)]

    def exterior_column(self) -> List[ModuleStructure]:
        """E_r^{0,t} for t <= window."""
        return [self.module(0, t) for t in range(self.cfg.window + 1)]


Key = Tuple[Tuple[int, ...], int]


class SpectralSequence:
    """Page-by-page computation for one configuration."""

    def __init__(self, cfg: SsConfig):
        self.cfg = cfg
        self.top = cfg.window + 2
        self.blocks: Dict[Tuple[int, int], List[Key]] = {}
        self._build_basis()
        self._index = {b: {key: i for i, key in enumerate(keys)} for b, keys in self.blocks.items()}
        self._D: Dict[Tuple[int, int], List[Dict[int, int]]] = {}
        self._Z: Dict = {}
        self._E: Dict = {}
        self._dmat: Dict = {}

    def _build_basis(self):
        cfg = self.cfg
        gens = list(range(cfg.low, cfg.n + 1))
        subsets: List[Tuple[int, ...]] = []

        def walk(start, chosen, deg):
            subsets.append(tuple(chosen))
            for i in range(start, len(gens)):
                d = 2 * gens[i] - 1
                if deg + d > self.top:
                    break
                chosen.append(gens[i])
                walk(i + 1, chosen, deg + d)
                chosen.pop()

        walk(0, [], 0)
        for S in subsets:
            base = subset_degree(S)
            for a in range(cfg.xmax + 1):
                N = base + 2 * a
                if N > self.top:
                    break
                self.blocks.setdefault((N, len(S)), []).append((S, a))
        for keys in self.blocks.values():
            keys.sort(key=lambda key: (key[1], key[0]))

    def block(self, N: int, q: int) -> List[Key]:
        return self.blocks.get((N, q), [])

    def D(self, N: int, q: int) -> List[Dict[int, int]]:
        """Sparse columns of D: block (N, q) -> block (N+1, q-1)."""
        if (N, q) not in self._D:
            tgt = self._index.get((N + 1, q - 1), {})
            cols = []
            for S, a in self.block(N, q):
                col = {}
                for key, c in differential_on_basis(self.cfg, S, a).items():
                    col[tgt[key]] = c
                cols.append(col)
            self._D[(N, q)] = cols
        return self._D[(N, q)]

    def apply_D(self, N: int, q: int, v: Vec) -> Vec:
        out = [Fraction(0)] * len(self.block(N + 1, q - 1))
        for j, col in enumerate(self.D(N, q)):
            if v[j]:
                for i, c in col.items():
                    out[i] += v[j] * c
        return out

    def Z(self, N: int, q: int, s: int, target: int) -> List[Vec]:
        """Basis of {c in F^s C^N_q : D c in F^target}."""
        s = max(s, 0)
        target = min(target, 2 * self.cfg.xmax + 1)
        if target <= s + 2:
            target = s  # D raises filtration by at least 2
        key = (N, q, s, target)
        if key not in self._Z:
            keys = self.block(N, q)
            src = [i for i, (_, a) in enumerate(keys) if 2 * a >= s]
            tkeys = self.block(N + 1, q - 1)
            rows_idx = [i for i, (_, a) in enumerate(tkeys) if 2 * a < target]
            D = self.D(N, q) if q > 0 else [{} for _ in keys]
            rows = [[Fraction(D[j].get(i, 0)) for j in src] for i in rows_idx]
            ker = kernel(rows, len(src), self.cfg.p) if rows else [
                [Fraction(int(a == b)) for a in range(len(src))] for b in range(len(src))]
            basis = []
            for v in ker:
                full = [Fraction(0)] * len(keys)
                for pos, j in enumerate(src):
                    full[j] = v[pos]
                basis.append(full)
            self._Z[key] = basis
        return self._Z[key]

    def E(self, N: int, q: int, s: int, r: int) -> Quotient:
        key = (N, q, s, r)
        if key not in self._E:
            dim = len(self.block(N, q))
            num = self.Z(N, q, s, s + r)
            rels = list(self.Z(N, q, s + 1, s + r))
            if N >= 1 and (N - 1, q + 1) in self.blocks:
                for v in self.Z(N - 1, q + 1, s - r + 1, s):
                    rels.append(self.apply_D(N - 1, q + 1, v))
            self._E[key] = Quotient(num, rels, dim, self.cfg.p)
        return self._E[key]

    def d_matrix(self, N: int, q: int, s: int, r: int) -> List[List[Fraction]]:
        """Matrix of d_r: E_r(N, q, s) -> E_r(N+1, q-1, s+r), rows = target gens."""
        key = (N, q, s, r)
        if key not in self._dmat:
            src = self.E(N, q, s, r)
            if q == 0 or not src.gens:
                tgt_n = len(self.E(N + 1, q - 1, s + r, r).gens) if q > 0 else 0
                self._dmat[key] = [[Fraction(0)] * len(src.gens) for _ in range(tgt_n)]
            else:
                tgt = self.E(N + 1, q - 1, s + r, r)
                cols = [tgt.coords(self.apply_D(N, q, g)) for g in src.gens]
                self._dmat[key] = [[cols[j][i] for j in range(len(cols))]
                                   for i in range(len(tgt.gens))]
        return self._dmat[key]

    def to_ext(self, N: int, q: int, v: Vec) -> ExtElement:
        keys = self.block(N, q)
        return ExtElement({keys[i]: c for i, c in enumerate(v) if c}, self.cfg.n, self.cfg.k)

    def qs(self, N: int) -> List[int]:
        return [q for q in range(self.cfg.k + 1) if (N, q) in self.blocks]

    def page(self, r: int, with_diff: bool = True) -> Page:
        cfg = self.cfg
        slots: Dict[Tuple[int, int], Slot] = {}
        diff = {}
        for N in range(cfg.window + 1):
            for s in range(0, N + 1, 2):
                gens, orders, mats = [], [], []
                for q in self.qs(N):
                    E = self.E(N, q, s, r)
                    if not E.gens:
                        continue
                    gens += [self.to_ext(N, q, g) for g in E.gens]
                    orders += E.orders
                    if with_diff:
                        mats.append((q, self.d_matrix(N, q, s, r)))
                if gens:
                    slots[(s, N - s)] = Slot(s, N - s, gens, orders)
                if with_diff and mats and N + 1 <= cfg.window:
                    diff[(s, N - s)] = self._assemble(N, s, r, mats)
        return Page(cfg, r, slots, diff)

    def _assemble(self, N, s, r, mats):
        # block-diagonal by q into target slot ordering
        tgt_sizes = {q: len(self.E(N + 1, q, s + r, r).gens) for q in self.qs(N + 1)}
        tgt_offset, off = {}, 0
        for q in self.qs(N + 1):
            tgt_offset[q] = off
            off += tgt_sizes[q]
        ncols = sum(len(m[0]) if m else len(self.E(N, q, s, r).gens) for q, m in mats)
        out = [[Fraction(0)] * ncols for _ in range(off)]
        col = 0
        for q, m in mats:
            width = len(self.E(N, q, s, r).gens)
            base = tgt_offset.get(q - 1, 0)
            for i, row in enumerate(m):
                for j, a in enumerate(row):
                    out[base + i][col + j] = a
            col += width
        return out

    def check_page(self, r: int, max_degree: Optional[int] = None) -> List[str]:
        """Verify d_r o d_r = 0 and E_{r+1} = H(E_r, d_r); returns problems found."""
        cfg, p = self.cfg, self.cfg.p
        problems = []
        top = cfg.window if max_degree is None else max_degree
        for N in range(top + 1):
            for q in self.qs(N):
                for s in range(0, N + 1, 2):
                    M = self.E(N, q, s, r)
                    B = self.d_matrix(N, q, s, r)
                    out = self.E(N + 1, q - 1, s + r, r).orders if q > 0 else []
                    if s - r >= 0 and N >= 1:
                        Min = self.E(N - 1, q + 1, s - r, r)
                        A = self.d_matrix(N - 1, q + 1, s - r, r)
                        in_orders = Min.orders
                    else:
                        A, in_orders = [[] for _ in M.gens], []
                    for c in range(len(in_orders)):
                        for i in range(len(out)):
                            val = sum((B[i][j] * A[j][c] for j in range(len(M.gens))), Fraction(0))
                            if not reduces_to_zero(val, out[i], p):
                                problems.append(f"d{r}d{r} != 0 at N={N}, q={q}, s={s}")
                    H = presentation_homology(A, B, in_orders, M.orders, out, p)
                    nxt = self.E(N, q, s, r + 1).structure
                    if H != nxt:
                        problems.append(
                            f"H(E_{r}) = {H} but E_{r + 1} = {nxt} at N={N}, q={q}, s={s}")
        return problems

    def cycle_multiplier(self, j: int) -> float | int:
        """Least p-power multiple of y_j extending to a permanent cycle (INF if none)."""
        N = 2 * j - 1
        idx = self._index[(N, 1)][((j,), 0)]
        vals = [vp(v[idx], self.cfg.p) for v in self.Z(N, 1, 0, 2 * self.cfg.xmax + 1)]
        return min(vals, default=INF)

    @cached_property
    def einfty(self) -> Page:
        return self.page(2 * self.cfg.n + 1, with_diff=False)


def build_e2(cfg: SsConfig) -> Page:
    return SpectralSequence(cfg).page(2)


def iterate_pages(cfg: SsConfig):
    """Yield E_2, E_3, ..., E_{2n+1} with their differentials."""
    ss = SpectralSequence(cfg)
    for r in range(2, 2 * cfg.n + 2):
        yield ss.page(r)


def run_to_einfty(cfg: SsConfig, verify: bool = False) -> Page:
    """E_{2n+1} = E_oo; with ``verify`` every page is checked for d o d = 0
    and for E_{r+1} = H(E_r, d_r)."""
    ss = SpectralSequence(cfg)
    if verify:
        for r in range(2, 2 * cfg.n + 1, 2):
            problems = ss.check_page(r)
            if problems:
                raise AssertionError(problems[0])
    return ss.einfty


@dataclass(frozen=True)
class Presentation:
    """Lambda(gamma_{n-k+2}, ..., gamma_n) (x) Z_(p)[[x]]/I, I = (C(n,j) x^j : n-k < j <= n)."""

    n: int
    k: int
    p: int
    gamma_degrees: Tuple[int, ...]
    ideal: Tuple[Tuple[int, int], ...]
    staircase: Tuple[int, ...]
    minimal_generators: Tuple[int, ...]
    gamma_multipliers: Tuple[int, ...]

    def x_module(self, a: int) -> ModuleStructure:
        """Z_(p)[[x]]/I in x-degree a."""
        lo = self.n - self.k + 1
        if a < lo:
            return ModuleStructure(1, ())
        if a > self.n:
            return ModuleStructure()
        return ModuleStructure.cyclic(self.staircase[a - lo])

    def exterior_rank(self, t: int) -> int:
        return exterior_rank(range(self.n - self.k + 2, self.n + 1), t)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "p": self.p,
            "gamma_degrees": list(self.gamma_degrees),
            "ideal": [list(g) for g in self.ideal],
            "staircase": list(self.staircase),
            "minimal_generators": list(self.minimal_generators),
            "gamma_multipliers": list(self.gamma_multipliers),
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "Presentation":
        return cls(d["n"], d["k"], d["p"], tuple(d["gamma_degrees"]),
                   tuple(tuple(g) for g in d["ideal"]), tuple(d["staircase"]),
                   tuple(d["minimal_generators"]), tuple(d["gamma_multipliers"]))


def presentation_closed_form(cfg: SsConfig) -> Presentation:
    n, k, p = cfg.n, cfg.k, cfg.p
    lo = cfg.low
    coeffs = {j: cfg.coefficient(j) for j in range(lo, n + 1)}
    vals = {j: vp_int(c, p) for j, c in coeffs.items()}
    staircase = []
    running = INF
    minimal = []
    for j in range(lo, n + 1):
        if vals[j] < running:
            running = vals[j]
            minimal.append(j)
        staircase.append(running)
    multipliers = []
    for j in range(lo + 1, n + 1):
        prev = staircase[j - 1 - lo]
        multipliers.append(int(max(0, prev - vals[j])) if prev != INF else 0)
    return Presentation(
        n, k, p,
        gamma_degrees=tuple(2 * j - 1 for j in range(lo + 1, n + 1)),
        ideal=tuple((coeffs[j], j) for j in range(lo, n + 1)),
        staircase=tuple(staircase),
        minimal_generators=tuple(minimal),
        gamma_multipliers=tuple(multipliers),
    )


@dataclass
class CrossCheck:
    agree: bool
    checked: int
    first_discrepancy: Optional[str] = None
    x_column: List[ModuleStructure] = field(default_factory=list)
    exterior_column: List[ModuleStructure] = field(default_factory=list)
    engine_multipliers: List = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "agree": self.agree,
            "checked": self.checked,
            "first_discrepancy": self.first_discrepancy,
            "x_column": [m.to_json() for m in self.x_column],
            "exterior_column": [m.to_json() for m in self.exterior_column],
            "gamma_multipliers": [None if m == INF else m for m in self.engine_multipliers],
        }


def engine_summary(ss: SpectralSequence):
    cfg = ss.cfg
    page = ss.einfty
    mults = [ss.cycle_multiplier(j) for j in range(cfg.low + 1, cfg.n + 1)]
    return page.x_column(), page.exterior_column(), mults


def cross_check(cfg: SsConfig, reference: Optional[SsConfig] = None) -> CrossCheck:
    """Compare E_oo from page turning with the closed form.

    The closed form is evaluated for ``reference`` (default: ``cfg``
    without transgression overrides), so a corrupted engine configuration is
    reported against the true answer.
    """
    if reference is None:
        reference = SsConfig(cfg.n, cfg.k, cfg.p, cfg.xmax)
    pres = presentation_closed_form(reference)
    ss = SpectralSequence(cfg)
    xcol, extcol, mults = engine_summary(ss)
    checked = 0
    problem = None
    for a, got in enumerate(xcol):
        checked += 1
        want = pres.x_module(a)
        if got != want:
            problem = f"x-column, x^{a}: engine {got}, closed form {want}"
            break
    if problem is None:
        for t, got in enumerate(extcol):
            checked += 1
            want = ModuleStructure(pres.exterior_rank(t), ())
            if got != want:
                problem = f"exterior column, degree {t}: engine {got}, closed form {want}"
                break
    if problem is None:
        lo = cfg.low
        if ss.cycle_multiplier(lo) != INF:
            problem = f"y_{lo} has a multiple surviving to E_oo"
        for j, got, want in zip(range(lo + 1, cfg.n + 1), mults, pres.gamma_multipliers):
            checked += 1
            if problem is None and got != want:
                problem = f"gamma_{j}: engine multiplier p^{got}, closed form p^{want}"
    return CrossCheck(problem is None, checked, problem, xcol, extcol, mults)
