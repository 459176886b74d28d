"""Dense kernel for y-reduced tower polynomials.

A Slab stores a reduced polynomial in x, y_1..y_level as an int64 array of
shape (p**level, k, X): one row per y-exponent tuple (coded little-endian in
base p), one coefficient vector of length k per power of x.  Entries are
residues in [0, p); all arithmetic is exact.

This is a private module: the public contract lives in poly.SparsePoly, and
every operation here is cross-checked against the sparse implementation in
the test suite.  Slabs exist because the tower pipeline multiplies and
reduces polynomials with ~10^4 terms, where dict arithmetic is too slow.
"""

from __future__ import annotations

from typing import Iterable, Protocol

import numpy as np

from .gf import FieldCtx
from .poly import Monomial, PolyError, SparsePoly


class Reducer(Protocol):
    """Provides the layer data needed to keep products y-reduced."""

    ctx: FieldCtx

    def layer_slab(self, j: int) -> "Slab":
        """Right-hand side f_j of y_j^p - y_j = f_j, reduced, at level j-1."""
        ...

    def mask_pow(self, digits: tuple[int, ...]) -> "Slab":
        """Reduced product of (y_j + f_j)^digits[j-1] over all j."""
        ...


class Slab:
    __slots__ = ("ctx", "level", "arr")

    def __init__(self, ctx: FieldCtx, level: int, arr: np.ndarray):
        self.ctx = ctx
        self.level = level
        self.arr = arr  # (p**level, k, X) int64, entries in [0, p)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zeros(cls, ctx: FieldCtx, level: int, xcap: int = 1) -> "Slab":
        return cls(ctx, level, np.zeros((ctx.p ** level, ctx.k, max(xcap, 1)), dtype=np.int64))

    @classmethod
    def monomial(cls, ctx: FieldCtx, m: Monomial, coeff=None, level: int | None = None) -> "Slab":
        level = len(m.a) if level is None else level
        m = m.pad(level)
        s = cls.zeros(ctx, level, m.nu + 1)
        c = ctx.one() if coeff is None else ctx.elem(coeff)
        s.arr[code_of(ctx.p, m.a), :, m.nu] = c.coeffs
        return s

    @classmethod
    def from_sparse(cls, f: SparsePoly, level: int | None = None) -> "Slab":
        level = f.level if level is None else level
        f = f.at_level(level)
        xcap = max((m.nu for m in f.terms), default=0) + 1
        s = cls.zeros(f.ctx, level, xcap)
        p = f.ctx.p
        for m, c in f.terms.items():
            s.arr[code_of(p, m.a), :, m.nu] = c.coeffs
        return s

    def to_sparse(self) -> SparsePoly:
        ctx, p = self.ctx, self.ctx.p
        terms = {}
        codes, xs = np.nonzero(self.arr.any(axis=1))
        for code, nu in zip(codes.tolist(), xs.tolist()):
            c = ctx.elem(tuple(int(v) for v in self.arr[code, :, nu]))
            terms[Monomial(nu, digits_of(p, code, self.level))] = c
        return SparsePoly(ctx, self.level, terms)

    # -- basic structure --------------------------------------------------------

    def copy(self) -> "Slab":
        return Slab(self.ctx, self.level, self.arr.copy())

    def is_zero(self) -> bool:
        return not self.arr.any()

    def trim(self) -> "Slab":
        nz = np.nonzero(self.arr.any(axis=(0, 1)))[0]
        xcap = int(nz[-1]) + 1 if nz.size else 1
        if xcap != self.arr.shape[2]:
            self.arr = np.ascontiguousarray(self.arr[:, :, :xcap])
        return self

    def at_level(self, level: int) -> "Slab":
        if level == self.level:
            return self
        if level < self.level:
            S = self.ctx.p ** level
            if self.arr[S:].any():
                raise PolyError("cannot lower slab level: higher variables present")
            return Slab(self.ctx, level, np.ascontiguousarray(self.arr[:S]))
        out = Slab.zeros(self.ctx, level, self.arr.shape[2])
        out.arr[: self.arr.shape[0]] = self.arr
        return out

    def nonzero_codes(self) -> np.ndarray:
        return np.nonzero(self.arr.any(axis=(1, 2)))[0]

    # -- additive arithmetic -----------------------------------------------------

    def add_into(self, other: "Slab", scale: int = 1) -> "Slab":
        """self += scale * other (in place; levels and X padded as needed)."""
        p = self.ctx.p
        if other.level > self.level:
            raise PolyError("add_into target level too small")
        ob = other.arr
        if ob.shape[2] > self.arr.shape[2]:
            grown = np.zeros((self.arr.shape[0], self.ctx.k, ob.shape[2]), dtype=np.int64)
            grown[:, :, : self.arr.shape[2]] = self.arr
            self.arr = grown
        view = self.arr[: ob.shape[0], :, : ob.shape[2]]
        view += scale % p * ob
        view %= p
        return self

    def __add__(self, other: "Slab") -> "Slab":
        lvl = max(self.level, other.level)
        out = self.at_level(lvl).copy()
        return out.add_into(other)

    def __sub__(self, other: "Slab") -> "Slab":
        lvl = max(self.level, other.level)
        out = self.at_level(lvl).copy()
        return out.add_into(other, scale=-1)

    def scale(self, c) -> "Slab":
        """Multiply by a field scalar."""
        c = self.ctx.elem(c)
        k, p = self.ctx.k, self.ctx.p
        if k == 1:
            return Slab(self.ctx, self.level, (self.arr * c.coeffs[0]) % p)
        out = _scalar_mul_block(self.arr, np.array(c.coeffs, dtype=np.int64), self.ctx)
        return Slab(self.ctx, self.level, out)

    def xshift(self, q: int) -> "Slab":
        """Multiply by x^q."""
        if q == 0:
            return self
        S, k, X = self.arr.shape
        out = np.zeros((S, k, X + q), dtype=np.int64)
        out[:, :, q:] = self.arr
        return Slab(self.ctx, self.level, out)

    def frobenius(self, e: int = 1) -> "Slab":
        """sigma^e applied to every coefficient (identity on prime fields)."""
        if self.ctx.k == 1 or e % self.ctx.k == 0:
            return self
        M = self.ctx.frob_matrix(e)
        out = np.tensordot(M, self.arr, axes=([1], [1])).transpose(1, 0, 2) % self.ctx.p
        return Slab(self.ctx, self.level, np.ascontiguousarray(out))

    # -- valuation data ------------------------------------------------------------

    def pole_data(self, profile, n: int):
        """(pole_order, code, nu, coeff tuple) of the deepest pole at level n; None if zero.

        Uses the distinct-valuation property of reduced monomials (asserted).
        """
        p = self.ctx.p
        nz = self.arr.any(axis=1)  # (S, X)
        rows = np.nonzero(nz.any(axis=1))[0]
        if rows.size == 0:
            return None
        lastnu = self.arr.shape[2] - 1 - nz[rows, ::-1].argmax(axis=1)
        weights = _code_weights(p, self.level, profile, n)[rows]
        poles = lastnu * p ** n + weights
        order = np.argsort(poles)[::-1]
        best = order[0]
        assert rows.size == 1 or poles[order[1]] != poles[best], \
            "tied pole orders: distinct-valuation property violated"
        code, nu = int(rows[best]), int(lastnu[best])
        return int(poles[best]), code, nu, tuple(int(v) for v in self.arr[code, :, nu])


def code_of(p: int, digits: Iterable[int]) -> int:
    code = 0
    for j, e in enumerate(digits):
        code += e * p ** j
    return code


def digits_of(p: int, code: int, level: int) -> tuple[int, ...]:
    out = []
    for _ in range(level):
        out.append(code % p)
        code //= p
    return tuple(out)


def _code_weights(p: int, level: int, profile, n: int) -> np.ndarray:
    """weights[code] = sum digits_j * d_j * p^(n-j) over j = 1..level."""
    S = p ** level
    w = np.zeros(S, dtype=np.int64)
    for j in range(1, level + 1):
        dig = (np.arange(S) // p ** (j - 1)) % p
        w += dig * profile[j - 1] * p ** (n - j)
    return w


# ---------------------------------------------------------------------------
# x-polynomial convolution over GF(p^k)
# ---------------------------------------------------------------------------

def xconv(u: np.ndarray, v: np.ndarray, ctx: FieldCtx) -> np.ndarray:
    """Product of two GF(p^k)[x] coefficient blocks of shape (k, X)."""
    p, k = ctx.p, ctx.k
    if k == 1:
        return np.convolve(u[0], v[0])[None, :] % p
    n = u.shape[1] + v.shape[1] - 1
    raw = np.zeros((2 * k - 1, n), dtype=np.int64)
    for i in range(k):
        if not u[i].any():
            continue
        for j in range(k):
            if v[j].any():
                raw[i + j] += np.convolve(u[i], v[j])
    out = raw[:k]
    red = ctx.reduction_matrix  # (k-1, k)
    for s in range(k - 1):
        if raw[k + s].any():
            out += red[s][:, None] * raw[k + s][None, :]
    return out % p


def _scalar_mul_block(arr: np.ndarray, cvec: np.ndarray, ctx: FieldCtx) -> np.ndarray:
    """arr (S, k, X) times the scalar with coefficient vector cvec."""
    p, k = ctx.p, ctx.k
    raw = np.zeros((arr.shape[0], 2 * k - 1, arr.shape[2]), dtype=np.int64)
    for i in range(k):
        if cvec[i]:
            raw[:, i : i + k] += cvec[i] * arr
    out = raw[:, :k]
    red = ctx.reduction_matrix
    for s in range(k - 1):
        out += red[s][None, :, None] * raw[:, k + s][:, None, :]
    return out % p


# ---------------------------------------------------------------------------
# multiplication with y-reduction
# ---------------------------------------------------------------------------

def mul(a: Slab, b: Slab, reducer: Reducer) -> Slab:
    """Reduced product of two reduced slabs, rewriting y_j^p -> y_j + f_j."""
    ctx = a.ctx
    lvl = max(a.level, b.level)
    acc: dict[tuple[int, ...], np.ndarray] = {}
    ca, cb = a.nonzero_codes(), b.nonzero_codes()
    p = ctx.p
    for sa in ca.tolist():
        da = digits_of(p, sa, a.level)
        ra = a.arr[sa]
        for sb in cb.tolist():
            db = digits_of(p, sb, b.level)
            dig = tuple((da[j] if j < len(da) else 0) + (db[j] if j < len(db) else 0)
                        for j in range(lvl))
            block = xconv(ra, b.arr[sb], ctx)
            prev = acc.get(dig)
            acc[dig] = block if prev is None else _grow_add(prev, block)
    return _finish_reduce(acc, ctx, lvl, reducer)


def mul_many(factors: list[Slab], reducer: Reducer) -> Slab:
    out = factors[0]
    for f in factors[1:]:
        out = mul(out, f, reducer)
    return out


def _grow_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] < b.shape[1]:
        a, b = b, a
    a = a.copy() if a.base is not None else a
    a[:, : b.shape[1]] += b
    return a


def _merge_block(into: dict, dig: tuple[int, ...], block: np.ndarray) -> None:
    prev = into.get(dig)
    into[dig] = block if prev is None else _grow_add(prev, block)


def _materialize(ctx: FieldCtx, lvl: int, blocks: dict[tuple[int, ...], np.ndarray]) -> Slab:
    xcap = max((b.shape[1] for b in blocks.values()), default=1)
    out = Slab.zeros(ctx, lvl, xcap)
    for dig, block in blocks.items():
        out.arr[code_of(ctx.p, dig), :, : block.shape[1]] += block
    out.arr %= ctx.p
    return out.trim()


def _finish_reduce(acc: dict[tuple[int, ...], np.ndarray], ctx: FieldCtx, lvl: int,
                   reducer: Reducer) -> Slab:
    """Drain a {digit tuple: (k, X) block} accumulator into a reduced slab.

    Digits can exceed p-1 after a single multiplication; each overflow splits
    via y_j^p = y_j + f_j, whose f_j factor only touches digits below j, so the
    rewriting terminates (lexicographic descent on reversed digit tuples).
    Blocks are coalesced by digit tuple between waves; without that the splits
    recombine exponentially.
    """
    p = ctx.p
    done: dict[tuple[int, ...], np.ndarray] = {}
    pending = dict(acc)
    while pending:
        nxt: dict[tuple[int, ...], np.ndarray] = {}
        for dig, block in pending.items():
            block %= p
            if not block.any():
                continue
            for j in range(lvl, 0, -1):
                if dig[j - 1] >= p:
                    break
            else:
                _merge_block(done, dig, block)
                continue
            base = dig[: j - 1] + (dig[j - 1] - p,) + dig[j:]
            fj = reducer.layer_slab(j)
            for sf in fj.nonzero_codes().tolist():
                df = digits_of(p, sf, fj.level)
                nd = tuple(base[t] + (df[t] if t < len(df) else 0) for t in range(lvl))
                _merge_block(nxt, nd, xconv(block, fj.arr[sf], ctx))
            # merge last: _merge_block may fold the accumulator into `block`
            # in place, so `block` must not be read afterwards
            _merge_block(nxt, base[: j - 1] + (base[j - 1] + 1,) + base[j:], block)
        pending = nxt
    return _materialize(ctx, lvl, done)


def _one_slice_slab(ctx: FieldCtx, lvl: int, dig: tuple[int, ...], block: np.ndarray) -> Slab:
    s = Slab.zeros(ctx, lvl, block.shape[1])
    s.arr[code_of(ctx.p, dig)] = block
    return s


def pth_power(a: Slab, reducer: Reducer) -> Slab:
    """Reduced p-th power: Frobenius on coefficients, x-exponents times p,
    and y_j^(p*e) rewritten through the cached (y_j + f_j)^e products."""
    ctx = a.ctx
    p, k = ctx.p, ctx.k
    out = Slab.zeros(ctx, a.level)
    frob = a.frobenius()
    for code in a.nonzero_codes().tolist():
        dig = digits_of(p, code, a.level)
        row = frob.arr[code]  # (k, X)
        xb = np.zeros((k, (row.shape[1] - 1) * p + 1), dtype=np.int64)
        xb[:, ::p] = row
        mp = reducer.mask_pow(dig)  # level <= a.level since dig comes from a
        for mc in mp.nonzero_codes().tolist():
            piece = xconv(xb, mp.arr[mc], ctx)
            out.add_into(_one_slice_slab(ctx, a.level, digits_of(p, mc, a.level), piece))
    return out.trim()


# ---------------------------------------------------------------------------
# Cartier application
# ---------------------------------------------------------------------------

def v_apply(g: Slab, tables: dict[tuple[int, int], Slab]) -> Slab:
    """Apply the Cartier operator to g*dx at g's level.

    tables maps (nu0, ycode) with nu0 < p to the reduced value of V on
    x^nu0 y^code dx at the same level.  Each group of monomials congruent to
    x^nu0 mod p in a slice contributes conv(sigma^{-1}(h), table entry) where
    h collects the p-th-root cofactors.
    """
    ctx = g.ctx
    p, k = ctx.p, ctx.k
    finv = ctx.inv_frob_matrix()
    acc: dict[int, np.ndarray] = {}
    for code in g.nonzero_codes().tolist():
        row = g.arr[code]
        for nu0 in range(min(p, row.shape[1])):
            sub = row[:, nu0::p]
            if not sub.any():
                continue
            h = sub if k == 1 else (finv @ sub) % p
            entry = tables[(nu0, code)]
            for ecode in entry.nonzero_codes().tolist():
                block = xconv(h, entry.arr[ecode], ctx)
                prev = acc.get(ecode)
                acc[ecode] = block if prev is None else _grow_add(prev, block)
    return _materialize(ctx, g.level,
                        {digits_of(p, ec, g.level): b for ec, b in acc.items()})
