"""Truncated Witt vector arithmetic over polynomial coefficient rings.

Addition is not componentwise: it is governed by universal polynomials
determined by the ghost components w_m(u) = sum_i p^i u_i^(p^(m-i)).  All
arithmetic here runs through a single ghost/unghost engine working modulo
p^(m+1) per component, which determines every output component mod p exactly
(congruence x = x' mod p^a implies x^(p^b) = x'^(p^b) mod p^(a+b)) and makes
every integrality check exact since divisibility by p^m is decided mod
p^(m+1).

Three consumers share the engine:
  * universal addition polynomials S_0..S_{len-1} (cached per (p, len)),
  * universal "peel" polynomials giving each layer equation of a tower as
    y_m^p - y_m + G_m(y_1..y_{m-1}),
  * concrete vector arithmetic (add, negate, multiply by p, Frobenius) used
    to assemble tower right-hand sides.

Concrete vectors lift coefficients of GF(p^k) to integer tuples reduced by an
integer lift of the field modulus; functoriality of Witt arithmetic under the
reduction map makes the mod-p result independent of the lift.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .gf import FieldCtx
from .poly import Monomial, SparsePoly

#: Deepest supported truncation per characteristic (levels computed anywhere
#: in the pipeline are bounded by these).
LENGTH_CAP = {2: 8, 3: 6, 5: 4, 7: 2, 11: 2, 13: 2}

CACHE_FORMAT_VERSION = 1


class WittError(ValueError):
    pass


def _check_length(p: int, length: int) -> None:
    cap = LENGTH_CAP.get(p)
    if cap is None:
        raise WittError(f"unsupported characteristic {p}")
    if not 1 <= length <= cap:
        raise WittError(f"Witt length {length} out of supported range 1..{cap} for p={p}")


# ---------------------------------------------------------------------------
# coefficient ring for lifted arithmetic: Z/mod, or (Z/mod)[t]/(lifted field
# modulus) when k > 1.  Coefficients are ints (k = 1) or k-tuples.
# ---------------------------------------------------------------------------

class _LiftRing:
    def __init__(self, p: int, k: int = 1, modulus: Sequence[int] = ()):
        self.p = p
        self.k = k
        self.modulus = tuple(modulus)

    def zero(self):
        return 0 if self.k == 1 else (0,) * self.k

    def is_zero(self, a) -> bool:
        return a == 0 if self.k == 1 else not any(a)

    def add(self, a, b, mod):
        if self.k == 1:
            return (a + b) % mod
        return tuple((x + y) % mod for x, y in zip(a, b))

    def scale(self, a, s, mod):
        if self.k == 1:
            return (a * s) % mod
        return tuple((x * s) % mod for x in a)

    def mul(self, a, b, mod):
        if self.k == 1:
            return (a * b) % mod
        k = self.k
        raw = [0] * (2 * k - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    raw[i + j] += x * y
        for s in range(2 * k - 2, k - 1, -1):
            c = raw[s] % mod
            if c:
                # t^s = t^(s-k) * t^k with t^k = -modulus
                for j in range(k):
                    raw[s - k + j] -= c * self.modulus[j]
        return tuple(v % mod for v in raw[:k])

    def divexact(self, a, pm: int, mod: int):
        """a / p^m, asserting exact divisibility (decided exactly mod `mod`)."""
        if self.k == 1:
            if a % pm:
                raise WittError("ghost component not divisible by p^m: integrality violated")
            return (a // pm) % (mod // pm)
        out = []
        for x in a:
            if x % pm:
                raise WittError("ghost component not divisible by p^m: integrality violated")
            out.append((x // pm) % (mod // pm))
        return tuple(out)


# ---------------------------------------------------------------------------
# dict polynomials {exponent tuple: ring coefficient}
# ---------------------------------------------------------------------------

def _dp_add_into(acc: dict, other: dict, ring: _LiftRing, mod: int, sign: int = 1) -> None:
    for e, c in other.items():
        if sign != 1:
            c = ring.scale(c, sign, mod)
        prev = acc.get(e)
        v = c if prev is None else ring.add(prev, c, mod)
        if ring.is_zero(v):
            acc.pop(e, None)
        else:
            acc[e] = v


def _dp_mul(a: dict, b: dict, ring: _LiftRing, mod: int) -> dict:
    if ring.k == 1 and len(a) * len(b) >= 1 << 14:
        fast = _dp_mul_packed(a, b, mod)
        if fast is not None:
            return fast
    out: dict = {}
    if len(a) > len(b):
        a, b = b, a
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            v = ring.mul(ca, cb, mod)
            prev = out.get(e)
            v = v if prev is None else ring.add(prev, v, mod)
            if ring.is_zero(v):
                out.pop(e, None)
            else:
                out[e] = v
    return out


def _dp_mul_packed(a: dict, b: dict, mod: int) -> dict | None:
    """Vectorized product for big integer-coefficient polynomials.

    Exponent tuples are packed into int64 codes with per-variable capacities
    sized for this one product; the deep powers that need this path live in
    few variables, so the packing fits comfortably.  Falls back (None) when
    it would not, or when the modulus is large enough to threaten the exact
    integer range of the accumulation (chunk pairs * mod stays below 2^44).
    """
    import numpy as np

    if mod > 1 << 20:
        return None
    nvars = len(next(iter(a)))
    ea = np.array(list(a.keys()), dtype=np.int64).reshape(len(a), nvars)
    eb = np.array(list(b.keys()), dtype=np.int64).reshape(len(b), nvars)
    caps = ea.max(axis=0) + eb.max(axis=0) + 1
    strides = np.ones(nvars, dtype=np.int64)
    for j in range(1, nvars):
        strides[j] = strides[j - 1] * caps[j - 1]
    if float(strides[-1]) * float(caps[-1]) >= 2 ** 62:
        return None
    ca = np.fromiter(a.values(), dtype=np.int64, count=len(a))
    cb = np.fromiter(b.values(), dtype=np.int64, count=len(b))
    codes_a = ea @ strides
    codes_b = eb @ strides
    chunk = max(1, (1 << 24) // max(len(b), 1))
    pieces_codes, pieces_vals = [], []
    for i0 in range(0, len(a), chunk):
        codes = (codes_a[i0:i0 + chunk, None] + codes_b[None, :]).ravel()
        vals = (ca[i0:i0 + chunk, None] * cb[None, :] % mod).ravel()
        uniq, inv = np.unique(codes, return_inverse=True)
        summed = np.bincount(inv, weights=vals.astype(np.float64),
                             minlength=uniq.size).astype(np.int64) % mod
        pieces_codes.append(uniq)
        pieces_vals.append(summed)
    codes = np.concatenate(pieces_codes)
    vals = np.concatenate(pieces_vals)
    uniq, inv = np.unique(codes, return_inverse=True)
    summed = np.bincount(inv, weights=vals.astype(np.float64),
                         minlength=uniq.size).astype(np.int64) % mod
    keep = np.nonzero(summed)[0]
    out = {}
    for code, v in zip(uniq[keep].tolist(), summed[keep].tolist()):
        e = []
        for j in range(nvars):
            e.append(int((code // strides[j]) % caps[j]))
        out[tuple(e)] = int(v)
    return out


def _dp_pow(a: dict, e: int, ring: _LiftRing, mod: int) -> dict:
    nvars = len(next(iter(a))) if a else 0
    one = 1 if ring.k == 1 else (1,) + (0,) * (ring.k - 1)
    result = {(0,) * nvars: one}
    base = a
    while e:
        if e & 1:
            result = _dp_mul(result, base, ring, mod)
        e >>= 1
        if e:
            base = _dp_mul(base, base, ring, mod)
    return result


def _dp_scale(a: dict, s: int, ring: _LiftRing, mod: int) -> dict:
    out = {}
    for e, c in a.items():
        v = ring.scale(c, s, mod)
        if not ring.is_zero(v):
            out[e] = v
    return out


# ---------------------------------------------------------------------------
# ghost / unghost engine
# ---------------------------------------------------------------------------

class _PowerChain:
    """Memoized Frobenius-power chain f, f^p, f^(p^2), ... at one modulus.

    Components are known exactly (input lifts) or mod p (recovered outputs);
    in either case x = x' (mod p^a) gives x^(p^b) = x'^(p^b) (mod p^(a+b)),
    so one chain at modulus p^length serves every later precision demand.
    """

    def __init__(self, base: dict, p: int, ring: _LiftRing, modmax: int):
        self.p = p
        self.ring = ring
        self.modmax = modmax
        self.chain = [base]

    def power(self, b: int) -> dict:
        while len(self.chain) <= b:
            self.chain.append(_dp_pow(self.chain[-1], self.p, self.ring, self.modmax))
        return self.chain[b]


def _combine(vecs: list[tuple[int, list[dict]]], length: int, p: int,
             ring: _LiftRing) -> list[dict]:
    """Witt sum of signed vectors: components of (+-)u (+) (+-)v (+) ... mod p.

    Each z_m is (ghost target_m - sum_{i<m} p^i z_i^(p^(m-i))) / p^m with the
    divisibility checked exactly; ghost components use the memoized chains.
    """
    modmax = p ** length
    in_chains = [[_PowerChain(comp, p, ring, modmax) for comp in vec]
                 for _, vec in vecs]
    z_chains: list[_PowerChain] = []
    zs: list[dict] = []
    for m in range(length):
        mod = p ** (m + 1)
        num: dict = {}
        for (sign, vec), chains in zip(vecs, in_chains):
            for i in range(min(m + 1, len(vec))):
                t = chains[i].power(m - i)
                _dp_add_into(num, _dp_scale(t, sign * p ** i, ring, mod), ring, mod)
        for i in range(m):
            t = z_chains[i].power(m - i)
            _dp_add_into(num, _dp_scale(t, p ** i, ring, mod), ring, mod, sign=-1)
        zm = {}
        for e, c in num.items():
            v = ring.divexact(c, p ** m, mod)
            if not ring.is_zero(v):
                zm[e] = v
        zs.append(zm)
        z_chains.append(_PowerChain(zm, p, ring, modmax))
    return zs


# ---------------------------------------------------------------------------
# universal polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WittPolynomial:
    """Universal polynomial over GF(p): exponent tuples -> coefficients in [0, p)."""

    nvars: int
    terms: tuple[tuple[tuple[int, ...], int], ...]

    @classmethod
    def from_dict(cls, nvars: int, d: dict) -> "WittPolynomial":
        return cls(nvars, tuple(sorted((e, int(c)) for e, c in d.items())))

    def as_dict(self) -> dict:
        return dict(self.terms)

    def evaluate(self, values: Sequence[SparsePoly], ctx: FieldCtx) -> SparsePoly:
        """Substitute SparsePoly values for the variables (test/cross-check path)."""
        if len(values) != self.nvars:
            raise WittError(f"expected {self.nvars} values, got {len(values)}")
        level = max((v.level for v in values), default=0)
        out = SparsePoly.zero(ctx, level)
        for e, c in self.terms:
            term = SparsePoly.constant(ctx, c, level)
            for v, ei in zip(values, e):
                if ei:
                    term = term * v ** ei
            out = out + term
        return out

    def render(self, names: Sequence[str]) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            factors = [f"{names[i]}^{ei}" if ei > 1 else names[i]
                       for i, ei in enumerate(e) if ei]
            body = "*".join(factors)
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts)


def _var(nvars: int, i: int, power: int = 1) -> dict:
    e = [0] * nvars
    e[i] = power
    return {tuple(e): 1}


def addition_polynomials(p: int, length: int, cache_dir: str | os.PathLike | None = None
                         ) -> list[WittPolynomial]:
    """Universal S_0..S_{length-1} in X_0..X_{length-1}, Y_0..Y_{length-1}.

    S_m satisfies w_m(S_0..S_m) = w_m(X) + w_m(Y); results are cached in
    memory per (p, length) and optionally on disk under cache_dir.
    """
    _check_length(p, length)
    cached = _load_universal(p, length, "add", cache_dir)
    if cached is not None:
        _ensure_on_disk(p, length, "add", cached, cache_dir)
        return cached
    ring = _LiftRing(p)
    nv = 2 * length
    xs = [_var(nv, i) for i in range(length)]
    ys = [_var(nv, length + i) for i in range(length)]
    comps = _combine([(1, xs), (1, ys)], length, p, ring)
    polys = [WittPolynomial.from_dict(nv, c) for c in comps]
    _store_universal(p, length, "add", polys, cache_dir)
    return polys


def peel_polynomials(p: int, length: int, cache_dir: str | os.PathLike | None = None
                     ) -> list[WittPolynomial]:
    """G_1..G_length with (F(Y) - Y)_m = y_m^p - y_m + G_m(y_1..y_{m-1}).

    G_m is returned in variables y_1..y_{m-1} (nvars = m - 1); G_1 = 0.
    Subtracting G_m from the m-th right-hand-side component yields the m-th
    layer equation of a tower.
    """
    _check_length(p, length)
    cached = _load_universal(p, length, "peel", cache_dir)
    if cached is not None:
        _ensure_on_disk(p, length, "peel", cached, cache_dir)
        return cached
    ring = _LiftRing(p)
    nv = length
    fy = [_var(nv, i, power=p) for i in range(length)]
    ys = [_var(nv, i) for i in range(length)]
    comps = _combine([(1, fy), (-1, ys)], length, p, ring)
    polys = []
    for m, comp in enumerate(comps, start=1):
        g = dict(comp)
        # remove y_m^p - y_m, keep the lower-variable remainder
        _dp_add_into(g, _var(nv, m - 1, power=p), ring, p, sign=-1)
        _dp_add_into(g, _var(nv, m - 1), ring, p, sign=1)
        trimmed = {}
        for e, c in g.items():
            if any(e[m - 1:]):
                raise WittError("peel polynomial touches y_m or higher: engine bug")
            trimmed[e[: m - 1]] = c
        polys.append(WittPolynomial.from_dict(m - 1, trimmed))
    _store_universal(p, length, "peel", polys, cache_dir)
    return polys


# -- universal cache (memory + versioned text files) -------------------------

_UNIVERSAL_MEM: dict[tuple, list[WittPolynomial]] = {}


def _cache_path(p: int, length: int, kind: str, cache_dir) -> Path | None:
    if cache_dir is None:
        return None
    return Path(cache_dir) / f"witt_{kind}_p{p}_len{length}.txt"


def _ensure_on_disk(p, length, kind, polys, cache_dir):
    path = _cache_path(p, length, kind, cache_dir)
    if path is not None and not path.exists():
        _store_universal(p, length, kind, polys, cache_dir)


def _load_universal(p, length, kind, cache_dir):
    key = (p, length, kind)
    if key in _UNIVERSAL_MEM:
        return _UNIVERSAL_MEM[key]
    path = _cache_path(p, length, kind, cache_dir)
    if path is None or not path.exists():
        return None
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != _cache_header(p, length, kind):
        return None  # version or key mismatch: recompute
    polys = []
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        nv_s, body = line.split(" ", 1)
        nv = int(nv_s)
        terms = {}
        if body != "0":
            for chunk in body.split(";"):
                c_s, e_s = chunk.split(":")
                e = tuple(int(v) for v in e_s.split(",")) if e_s else ()
                terms[e] = int(c_s)
        polys.append(WittPolynomial.from_dict(nv, terms))
    _UNIVERSAL_MEM[key] = polys
    return polys


def _cache_header(p, length, kind) -> str:
    return f"# zptower-witt v{CACHE_FORMAT_VERSION} kind={kind} p={p} len={length}"


def _store_universal(p, length, kind, polys, cache_dir):
    _UNIVERSAL_MEM[(p, length, kind)] = polys
    path = _cache_path(p, length, kind, cache_dir)
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [_cache_header(p, length, kind)]
    for poly in polys:
        if not poly.terms:
            lines.append(f"{poly.nvars} 0")
            continue
        body = ";".join(f"{c}:{','.join(map(str, e))}" for e, c in poly.terms)
        lines.append(f"{poly.nvars} {body}")
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# concrete Witt vectors
# ---------------------------------------------------------------------------

class WittCtx:
    """Truncation parameters; immutable and shareable across threads.

    Concrete vector arithmetic works at any modest length (the ghost engine
    is cheap on concrete components); only the universal polynomials enforce
    the per-characteristic LENGTH_CAP, since those are the expensive objects.
    """

    __slots__ = ("p", "length", "cache_dir")

    def __init__(self, p: int, length: int, cache_dir: str | os.PathLike | None = None):
        if p not in LENGTH_CAP:
            raise WittError(f"unsupported characteristic {p}")
        if not 1 <= length <= 16:
            raise WittError(f"Witt length {length} out of range 1..16")
        self.p = p
        self.length = length
        self.cache_dir = cache_dir

    def addition_polynomials(self) -> list[WittPolynomial]:
        return addition_polynomials(self.p, self.length, self.cache_dir)

    def peel_polynomials(self) -> list[WittPolynomial]:
        return peel_polynomials(self.p, self.length, self.cache_dir)

    def __repr__(self):
        return f"WittCtx(p={self.p}, length={self.length})"


@dataclass(frozen=True)
class WittVector:
    """Length-n vector of SparsePoly components over one field context."""

    ctx: WittCtx
    components: tuple[SparsePoly, ...]

    def __post_init__(self):
        if len(self.components) != self.ctx.length:
            raise WittError(
                f"expected {self.ctx.length} components, got {len(self.components)}")

    @property
    def field(self) -> FieldCtx:
        return self.components[0].ctx

    def __add__(self, other: "WittVector") -> "WittVector":
        if other.ctx.p != self.ctx.p or other.ctx.length != self.ctx.length:
            raise WittError("Witt length/characteristic mismatch")
        return witt_add(self, other)

    def __neg__(self) -> "WittVector":
        return witt_negate(self)

    def __sub__(self, other: "WittVector") -> "WittVector":
        return self + (-other)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        return (isinstance(other, WittVector) and other.ctx.p == self.ctx.p
                and other.ctx.length == self.ctx.length
                and all(a == b for a, b in zip(self.components, other.components)))


def witt_zero(ctx: WittCtx, field: FieldCtx, level: int = 0) -> WittVector:
    return WittVector(ctx, tuple(SparsePoly.zero(field, level) for _ in range(ctx.length)))


def teichmuller(ctx: WittCtx, f: SparsePoly) -> WittVector:
    """[f] = (f, 0, ..., 0)."""
    comps = (f,) + tuple(SparsePoly.zero(f.ctx, f.level) for _ in range(ctx.length - 1))
    return WittVector(ctx, comps)


def poly_pth_power(f: SparsePoly, times: int = 1) -> SparsePoly:
    """p-th power in the free polynomial ring: exponents scale, coefficients Frobenius."""
    q = f.ctx.p ** times
    terms = {Monomial(m.nu * q, tuple(e * q for e in m.a)): c ** q
             for m, c in f.terms.items()}
    return SparsePoly(f.ctx, f.level, terms)


def witt_frobenius(w: WittVector) -> WittVector:
    return WittVector(w.ctx, tuple(poly_pth_power(c) for c in w.components))


def mul_by_p(w: WittVector, times: int = 1) -> WittVector:
    """p * w = (0, w_0^p, w_1^p, ...), iterated `times` times."""
    comps = list(w.components)
    field = w.field
    level = comps[0].level
    for _ in range(times):
        comps = [SparsePoly.zero(field, level)] + [poly_pth_power(c) for c in comps[:-1]]
    return WittVector(w.ctx, tuple(comps))


def _lift_vector(w: WittVector, ring: _LiftRing) -> list[dict]:
    out = []
    for comp in w.components:
        d = {}
        for m, c in comp.terms.items():
            key = (m.nu,) + m.a
            d[key] = c.coeffs[0] if ring.k == 1 else tuple(c.coeffs)
        out.append(d)
    return out


def _restore_vector(comps: list[dict], ctx: WittCtx, field: FieldCtx, level: int) -> WittVector:
    polys = []
    for comp in comps:
        terms = {}
        for key, c in comp.items():
            m = Monomial(key[0], tuple(key[1:]))
            fe = field.elem(c if isinstance(c, tuple) else int(c))
            if not fe.is_zero():
                terms[m.pad(level)] = fe
        polys.append(SparsePoly(field, level, terms))
    return WittVector(ctx, tuple(polys))


def _ring_for(field: FieldCtx) -> _LiftRing:
    return _LiftRing(field.p, field.k, field.modulus)


def _aligned(u: WittVector, v: WittVector) -> int:
    level = max(u.components[0].level, v.components[0].level)
    return level


def witt_add(u: WittVector, v: WittVector) -> WittVector:
    field = u.field
    if field != v.field:
        raise WittError("mixed-field Witt addition")
    level = _aligned(u, v)
    u = WittVector(u.ctx, tuple(c.at_level(level) for c in u.components))
    v = WittVector(v.ctx, tuple(c.at_level(level) for c in v.components))
    ring = _ring_for(field)
    comps = _combine([(1, _lift_vector(u, ring)), (1, _lift_vector(v, ring))],
                     u.ctx.length, u.ctx.p, ring)
    return _restore_vector(comps, u.ctx, field, level)


def witt_negate(w: WittVector) -> WittVector:
    field = w.field
    ring = _ring_for(field)
    comps = _combine([(-1, _lift_vector(w, ring))], w.ctx.length, w.ctx.p, ring)
    return _restore_vector(comps, w.ctx, field, w.components[0].level)


def witt_sum(ctx: WittCtx, vectors: Sequence[WittVector], field: FieldCtx,
             level: int = 0) -> WittVector:
    acc = witt_zero(ctx, field, level)
    for v in vectors:
        acc = acc + v
    return acc


def rhs_assemble(terms: Sequence[tuple[int, object, int]], ctx: WittCtx,
                 field: FieldCtx) -> WittVector:
    """Right-hand side sum of p^v * [c x^i] over the given (v, c, i) terms."""
    acc = witt_zero(ctx, field)
    for v, c, i in terms:
        c = field.elem(c)
        if v < 0 or i < 1 or c.is_zero():
            raise WittError(f"bad term (v={v}, c={c}, i={i})")
        t = teichmuller(ctx, SparsePoly.x_power(field, i, c))
        acc = acc + mul_by_p(t, v) if v else acc + t
    return acc
