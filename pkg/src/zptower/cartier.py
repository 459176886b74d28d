"""Cartier operator on regular differentials of a tower level.

Regular differentials at level n have an explicit monomial basis
x^nu y_1^a_1 ... y_n^a_n dx indexed by the set where every a_i < p and
0 <= p^n nu <= sum_j p^(n-j) d_j (p-1-a_j) - p^n - 1, valid once the layers
are in standard form; its cardinality equals the genus, which is asserted on
every construction.

The operator is evaluated recursively: writing y_n^a = (y_n^p - f_n)^a and
expanding binomially pushes the computation down one level, since V(h^p w) =
h V(w).  Per level we precompute V on the p^(m+1) monomials with nu < p and
all a_i < p; V of anything else is a shifted, Frobenius-twisted combination
of those values.  Tables serialize to a per-(spec, level) cache so deeper
levels resume without recomputation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np

from ._slab import Slab, code_of, digits_of, mul as slab_mul, v_apply
from .linalg import DenseMatrix
from .poly import Monomial, PolyError, SparsePoly
from .tower import InternalConsistencyError, TowerState

TABLE_FORMAT_VERSION = 1

BasisIndex = Monomial


@dataclass(frozen=True)
class DifferentialForm:
    """poly * dx at a given tower level; poly is y-reduced."""

    poly: SparsePoly
    level: int

    def __post_init__(self):
        if not self.poly.is_reduced():
            raise PolyError("differential coefficient must be y-reduced")
        if self.poly.level != self.level:
            object.__setattr__(self, "poly", self.poly.at_level(self.level))

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        if other.level != self.level:
            raise PolyError("mixed-level differential addition")
        return DifferentialForm(self.poly + other.poly, self.level)

    def __eq__(self, other):
        return (isinstance(other, DifferentialForm) and other.level == self.level
                and other.poly == self.poly)

    def is_zero(self) -> bool:
        return self.poly.is_zero()


def base_cartier(f: SparsePoly) -> SparsePoly:
    """V on the projective line: sum a_i x^i dx -> sum sigma^-1(a_(pj-1)) x^(j-1) dx."""
    if f.level != 0:
        raise PolyError("base_cartier expects a polynomial in x only")
    p = f.ctx.p
    terms = {}
    for m, c in f.terms.items():
        if (m.nu + 1) % p == 0:
            terms[Monomial((m.nu + 1) // p - 1, ())] = c.frobenius_inverse()
    return SparsePoly(f.ctx, 0, terms)


# ---------------------------------------------------------------------------
# basis enumeration
# ---------------------------------------------------------------------------

def _basis_layout(state: TowerState, n: int):
    """(numax, offsets, genus): per y-code the largest admissible nu (or -1),
    and the starting column of that code's block in the basis ordering."""
    p = state.spec.p
    ram = state.ensure_ram(n)
    S = p ** n
    bound = np.full(S, -(p ** n) - 1, dtype=np.int64)
    for j in range(1, n + 1):
        dig = (np.arange(S) // p ** (j - 1)) % p
        bound += p ** (n - j) * ram.d[j - 1] * (p - 1 - dig)
    numax = np.where(bound >= 0, bound // p ** n, -1)
    counts = np.maximum(numax + 1, 0)
    offsets = np.concatenate(([0], np.cumsum(counts)))[:-1]
    total = int(counts.sum())
    if total != ram.genus(n):
        raise InternalConsistencyError(
            f"basis cardinality {total} != genus {ram.genus(n)} at level {n}")
    return numax, offsets, total


def differential_basis(state: TowerState, n: int) -> list[BasisIndex]:
    """The monomial basis of regular differentials at level n, in column order."""
    state.ensure_ram(n)
    numax, _, _ = _basis_layout(state, n)
    p = state.spec.p
    out = []
    for code in range(p ** n):
        for nu in range(int(numax[code]) + 1):
            out.append(Monomial(nu, digits_of(p, code, n)))
    return out


def is_regular(form: DifferentialForm, state: TowerState) -> bool:
    """Whether every monomial satisfies the basis inequality (regular at infinity)."""
    if form.level == 0:
        # on the projective line every nonzero polynomial differential has a
        # pole at infinity of order deg + 2
        return form.poly.is_zero()
    numax, _, _ = _basis_layout(state, form.level)
    p = state.spec.p
    for m in form.poly.terms:
        if m.nu > numax[code_of(p, m.a)]:
            return False
    return True


# ---------------------------------------------------------------------------
# precompute tables
# ---------------------------------------------------------------------------

class CartierTables:
    """Per-level values of V on the small monomial differentials.

    levels[m] maps (nu0, ycode) with 0 <= nu0 < p to the reduced slab of
    V(x^nu0 y^ycode dx) at level m.  Level m entries only need level m-1, so
    entries within a level are independent and could be computed in parallel;
    this implementation is sequential and deterministic.
    """

    def __init__(self, state: TowerState):
        self.state = state
        self.ctx = state.field
        p = self.ctx.p
        base = {}
        one = Slab.monomial(self.ctx, Monomial(0, ()))
        zero = Slab.zeros(self.ctx, 0)
        for nu0 in range(p):
            base[(nu0, 0)] = one if nu0 == p - 1 else zero
        self.levels: list[dict[tuple[int, int], Slab]] = [base]
        state.tables = self

    def table(self, m: int) -> dict[tuple[int, int], Slab]:
        self.ensure(m)
        return self.levels[m]

    def ensure(self, n: int) -> "CartierTables":
        self.state.build_to(n)
        for m in range(len(self.levels), n + 1):
            loaded = self._load_level(m)
            self.levels.append(loaded if loaded is not None else self._build_level(m))
            if loaded is None:
                self._store_level(m)
        return self

    def _build_level(self, m: int) -> dict[tuple[int, int], Slab]:
        state, ctx = self.state, self.ctx
        p = ctx.p
        chain = state.chain
        prev = self.levels[m - 1]
        S_low = p ** (m - 1)
        minus_f = state.layer_slab(m).scale(-1)
        fpow = [Slab.monomial(ctx, Monomial(0, ()))]
        for _ in range(1, p):
            fpow.append(slab_mul(fpow[-1], minus_f, chain).trim())
        inner: dict[tuple[int, int, int], Slab] = {}
        for lowcode in range(S_low):
            lowdig = digits_of(p, lowcode, m - 1)
            for nu0 in range(p):
                inner[(nu0, lowcode, 0)] = prev[(nu0, lowcode)]
                mono = Slab.monomial(ctx, Monomial(nu0, lowdig))
                for j in range(1, p):
                    g = slab_mul(mono, fpow[j], chain)
                    inner[(nu0, lowcode, j)] = v_apply(g, prev)
        table: dict[tuple[int, int], Slab] = {}
        for am in range(p):
            for lowcode in range(S_low):
                for nu0 in range(p):
                    acc = Slab.zeros(ctx, m)
                    for i in range(am + 1):
                        cmb = comb(am, i) % p
                        if cmb == 0:
                            continue
                        term = inner[(nu0, lowcode, am - i)]
                        acc.add_into(_embed_ym(term, i, m), scale=cmb)
                    table[(nu0, lowcode + am * S_low)] = acc.trim()
        return table

    # -- persistence ---------------------------------------------------------

    def _cache_path(self, m: int) -> Path | None:
        if self.state.cache_dir is None:
            return None
        h = self.state.spec.spec_hash()
        return Path(self.state.cache_dir) / "cartier" / h / f"tables_L{m}.txt"

    def _header(self, m: int) -> dict:
        return {"format_version": TABLE_FORMAT_VERSION, "p": self.ctx.p,
                "k": self.ctx.k, "spec_hash": self.state.spec.spec_hash(), "level": m}

    def _store_level(self, m: int) -> None:
        path = self._cache_path(m)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [json.dumps(self._header(m), sort_keys=True)]
        for (nu0, code), slab in sorted(self.levels[m].items()):
            codes, xs = np.nonzero(slab.arr.any(axis=1))
            lines.append(f"K {nu0} {code} {codes.size}")
            for yc, nu in zip(codes.tolist(), xs.tolist()):
                cvec = ",".join(str(int(v)) for v in slab.arr[yc, :, nu])
                lines.append(f"{yc} {nu} {cvec}")
        path.write_text("\n".join(lines) + "\n")

    def _load_level(self, m: int) -> dict | None:
        path = self._cache_path(m)
        if path is None or not path.exists():
            return None
        lines = path.read_text().splitlines()
        try:
            header = json.loads(lines[0])
        except (json.JSONDecodeError, IndexError):
            return None
        if header != self._header(m):
            return None  # version or spec mismatch: recompute
        p = self.ctx.p
        table: dict[tuple[int, int], Slab] = {}
        i = 1
        while i < len(lines):
            parts = lines[i].split()
            assert parts[0] == "K"
            nu0, code, count = int(parts[1]), int(parts[2]), int(parts[3])
            entries = []
            for row in lines[i + 1: i + 1 + count]:
                yc, nu, cvec = row.split()
                entries.append((int(yc), int(nu), [int(v) for v in cvec.split(",")]))
            xcap = max((nu for _, nu, _ in entries), default=0) + 1
            slab = Slab.zeros(self.ctx, m, xcap)
            for yc, nu, cv in entries:
                slab.arr[yc, :, nu] = cv
            table[(nu0, code)] = slab
            i += 1 + count
        return table


def _embed_ym(term: Slab, i: int, m: int) -> Slab:
    """term (level m-1) times y_m^i, as a level-m slab."""
    S_low = term.arr.shape[0]
    out = Slab.zeros(term.ctx, m, term.arr.shape[2])
    out.arr[i * S_low: (i + 1) * S_low] = term.arr
    return out


def precompute_tables(state: TowerState, m: int
                      ) -> dict[tuple[int, tuple[int, ...]], DifferentialForm]:
    """V on every x^nu y^a dx with nu < p and all a_i < p, keyed by (nu, a).

    Convenience view over the cached level-m table; heavy consumers work on
    the slabs directly.
    """
    p = state.spec.p
    tab = _tables_for(state).table(m)
    return {(nu0, digits_of(p, code, m)): DifferentialForm(slab.to_sparse().at_level(m), m)
            for (nu0, code), slab in tab.items()}


# ---------------------------------------------------------------------------
# application, matrix, trace
# ---------------------------------------------------------------------------

def _tables_for(state: TowerState) -> CartierTables:
    if state.tables is None:
        CartierTables(state)
    return state.tables


def cartier_apply(form: DifferentialForm, state: TowerState) -> DifferentialForm:
    """V applied to an arbitrary reduced differential at its level."""
    tables = _tables_for(state).table(form.level)
    slab = Slab.from_sparse(form.poly)
    return DifferentialForm(v_apply(slab, tables).to_sparse(), form.level)


@dataclass
class CartierMatrix:
    """g x g matrix of V in the regular-differential basis at one level.

    Column s holds the basis coordinates of V(omega_s).  The operator is
    sigma^-1-semilinear: V(sum c_s omega_s) has coordinates M @ sigma^-1(c),
    so kernel dimensions of V^r come from the twisted products
    M sigma^-1(M) ... sigma^-(r-1)(M).
    """

    level: int
    basis: list[BasisIndex]
    matrix: DenseMatrix

    @property
    def genus(self) -> int:
        return len(self.basis)


def cartier_matrix(state: TowerState, n: int) -> CartierMatrix:
    ctx = state.field
    p, k = ctx.p, ctx.k
    tables = _tables_for(state).table(n)
    numax, offsets, g = _basis_layout(state, n)
    M = DenseMatrix.zeros(ctx, g, g)
    # per table entry: rows/coefficients of the slab, reused by every shift
    pre: dict[tuple[int, int], tuple] = {}
    for key, slab in tables.items():
        ecodes, xs = np.nonzero(slab.arr.any(axis=1))
        coeffs = slab.arr[ecodes, :, xs]  # (N, k)
        pre[key] = (ecodes, xs, offsets[ecodes] + xs, coeffs)
    col = 0
    for code in range(p ** n):
        top = int(numax[code])
        for nu in range(top + 1):
            q, nu0 = divmod(nu, p)
            ecodes, xs, base_rows, coeffs = pre[(nu0, code)]
            if ecodes.size:
                if np.any(xs + q > numax[ecodes]):
                    raise InternalConsistencyError(
                        "V image leaves the regular basis: regularity not preserved")
                rows = base_rows + q
                if k == 1:
                    M.data[rows, col] = coeffs[:, 0]
                else:
                    M.data[rows, col] = coeffs
            col += 1
    assert col == g
    return CartierMatrix(n, differential_basis(state, n), M)


def trace_map(form: DifferentialForm) -> DifferentialForm:
    """Trace to the previous level: sum_i w_i y_n^i dx -> -w_(p-1) dx."""
    if form.level == 0:
        raise PolyError("no level below the base")
    p = form.poly.ctx.p
    parts = form.poly.y_coefficients(form.level)
    top = parts.get(p - 1)
    if top is None:
        poly = SparsePoly.zero(form.poly.ctx, form.level - 1)
    else:
        poly = (-top).at_level(form.level - 1)
    return DifferentialForm(poly, form.level - 1)


# ---------------------------------------------------------------------------
# formal differentials (runtime oracle support)
# ---------------------------------------------------------------------------

def function_differential(h: SparsePoly, state: TowerState) -> SparsePoly:
    """D(h) with dh = D(h) dx on the tower: D(x) = 1, D(y_j) = -D(f_j)."""
    state.build_to(h.level)
    slab = Slab.from_sparse(h)
    return _differential_slab(slab, state).to_sparse()


def _differential_slab(slab: Slab, state: TowerState) -> Slab:
    ctx = state.field
    p = ctx.p
    out = _x_derivative(slab)
    for j in range(1, slab.level + 1):
        dyj = _dy_slab(state, j)
        part = _y_derivative(slab, j)
        if part.is_zero() or dyj.is_zero():
            continue
        out = out + slab_mul(part, dyj, state.chain)
    return out.trim()


def _x_derivative(slab: Slab) -> Slab:
    p = slab.ctx.p
    arr = slab.arr
    out = np.zeros_like(arr)
    if arr.shape[2] > 1:
        mult = (np.arange(1, arr.shape[2]) % p)
        out[:, :, :-1] = arr[:, :, 1:] * mult[None, None, :]
    return Slab(slab.ctx, slab.level, out % p)


def _y_derivative(slab: Slab, j: int) -> Slab:
    p = slab.ctx.p
    out = Slab.zeros(slab.ctx, slab.level, slab.arr.shape[2])
    stride = p ** (j - 1)
    for code in slab.nonzero_codes().tolist():
        e = (code // stride) % p
        if e:
            out.arr[code - stride] += e * slab.arr[code]
    out.arr %= p
    return out


def _dy_slab(state: TowerState, j: int) -> Slab:
    cache = getattr(state, "_dy_cache", None)
    if cache is None:
        cache = {}
        state._dy_cache = cache
    got = cache.get(j)
    if got is None:
        got = _differential_slab(state.layer_slab(j), state).scale(-1)
        cache[j] = got
    return got
