"""Tower model: right-hand-side normalization, ramification breaks, conductors,
genus, monodromy classification, and layer equations.

A tower over the projective line, totally ramified over the point at infinity
and unramified elsewhere, is specified by terms (v, c, i) standing for
p^v * [c x^i] on the right-hand side of F(y) - y = sum of terms.  Layer m is
the Artin-Schreier extension y_m^p - y_m = f_m, where f_m is the m-th
right-hand-side component minus a universal correction in y_1..y_{m-1}.
TowerState keeps the layers in standard form (pole order at infinity equal to
the lower break), tracking the change of variables so that deeper corrections
are evaluated consistently.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import standard_form as _sf
from ._slab import Slab, mul as slab_mul
from .gf import FieldCtx, FieldElement
from .poly import Monomial, PoleProfile, SparsePoly
from .witt import (LENGTH_CAP, WittCtx, mul_by_p, peel_polynomials,
                   rhs_assemble, teichmuller, witt_zero)


class TowerError(ValueError):
    pass


class InternalConsistencyError(RuntimeError):
    """A structural invariant failed; indicates a bug, not bad input."""


@dataclass(frozen=True)
class Term:
    v: int
    c: FieldElement
    i: int

    def serialize(self):
        return {"v": self.v, "c": self.c.serialize(), "i": self.i}


@dataclass(frozen=True)
class TowerSpec:
    """Right-hand-side data over a fixed field, plus a display name."""

    field: FieldCtx
    terms: tuple[Term, ...]
    name: str = ""

    def __post_init__(self):
        # geometric/total-ramification itself is checked where breaks are
        # computed, since exact Witt sums may cancel valuation-0 terms anyway
        for t in self.terms:
            if t.v < 0 or t.i < 1:
                raise TowerError(f"term (v={t.v}, i={t.i}) out of range")
            if t.c.is_zero():
                raise TowerError("zero coefficient in tower term")

    @classmethod
    def make(cls, field: FieldCtx, terms: Sequence[tuple[int, object, int]],
             name: str = "") -> "TowerSpec":
        return cls(field, tuple(Term(v, field.elem(c), i) for v, c, i in terms), name)

    @property
    def p(self) -> int:
        return self.field.p

    def normalize(self) -> "TowerSpec":
        """Make every exponent coprime to p: p^v [c x^(pm)] -> p^v [c^(1/p) x^m].

        The replacement differs from the original by an element of the image
        of F - 1, so the generated extension at every level is unchanged.
        """
        p = self.p
        out = []
        for t in self.terms:
            c, i = t.c, t.i
            while i % p == 0:
                i //= p
                c = c.frobenius_inverse()
            out.append(Term(t.v, c, i))
        out.sort(key=lambda t: (t.i, t.v, t.c.to_int()))
        return TowerSpec(self.field, tuple(out), self.name)

    @property
    def is_normalized(self) -> bool:
        return all(t.i % self.p for t in self.terms)

    @property
    def is_basic(self) -> bool:
        """All coefficients in the field itself (every term has valuation 0)."""
        return all(t.v == 0 for t in self.terms)

    @property
    def ramification_invariant(self) -> int:
        """d = s(1): largest exponent among valuation-0 terms (normalized spec)."""
        return max(t.i for t in self.terms if t.v == 0)

    def spec_hash(self) -> str:
        spec = self.normalize()
        blob = json.dumps({
            "p": spec.p,
            "k": spec.field.k,
            "modulus": list(spec.field.modulus),
            "terms": [[t.v, t.c.serialize(), t.i] for t in spec.terms],
        }, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def max_level(self) -> int:
        return LENGTH_CAP[self.p]

    def serialize(self) -> dict:
        out = {"p": self.p, "k": self.field.k, "name": self.name,
               "terms": [t.serialize() for t in self.terms]}
        if self.field.k > 1:
            out["modulus"] = list(self.field.modulus)
        return out


def euler_phi_prime_power(p: int, j: int) -> int:
    return p ** j - p ** (j - 1)


def coefficient_valuations(spec: TowerSpec, n: int) -> dict[int, int]:
    """p-adic valuation of the total Witt coefficient per exponent, capped at n.

    Terms sharing an exponent are summed exactly in W_n(k); cancellations are
    therefore detected (never approximated by a min of valuations).  A value
    of n means "no contribution below level n".
    """
    if not spec.is_normalized:
        spec = spec.normalize()
    wctx = WittCtx(spec.p, n)
    groups: dict[int, list[Term]] = {}
    for t in spec.terms:
        groups.setdefault(t.i, []).append(t)
    out = {}
    for i, terms in groups.items():
        acc = witt_zero(wctx, spec.field)
        for t in terms:
            tv = teichmuller(wctx, SparsePoly.constant(spec.field, t.c))
            acc = acc + (mul_by_p(tv, t.v) if t.v else tv)
        v = n
        for idx, comp in enumerate(acc.components):
            if not comp.is_zero():
                v = idx
                break
        out[i] = v
    return out


def breaks_and_conductor(spec: TowerSpec, n: int) -> tuple[list[int], list[int]]:
    """(s(1..n), u(1..n)): u(m) = 1 + max over i with v(c_i) < m of i p^(m-1-v)."""
    spec = spec.normalize()
    vals = coefficient_valuations(spec, n)
    s, u = [], []
    for m in range(1, n + 1):
        candidates = [i * spec.p ** (m - 1 - v) for i, v in vals.items() if v < m]
        if not candidates:
            raise TowerError(f"tower not totally ramified at level {m}")
        um = 1 + max(candidates)
        u.append(um)
        s.append(um - 1)
    return s, u


def lower_breaks(p: int, s: Sequence[int]) -> list[int]:
    """d(n) = p^(n-1) s(n) - sum_{j<n} phi(p^j) s(j), from the upper breaks."""
    d = []
    for m in range(1, len(s) + 1):
        if m > 1 and s[m - 1] < p * s[m - 2]:
            raise TowerError(f"malformed break sequence: s({m}) < p*s({m-1})")
        dm = p ** (m - 1) * s[m - 1] - sum(
            euler_phi_prime_power(p, j) * s[j - 1] for j in range(1, m))
        if dm <= 0:
            raise TowerError("nonpositive lower break: malformed sequence")
        d.append(dm)
    return d


def genus_from_breaks(p: int, s: Sequence[int], n: int) -> int:
    """2g - 2 = -2 p^n + sum phi(p^i)(s(i) + 1) over the projective line, one branch point."""
    val = -2 * p ** n + sum(euler_phi_prime_power(p, i) * (s[i - 1] + 1)
                            for i in range(1, n + 1))
    assert val % 2 == 0, "odd Riemann-Hurwitz total"
    return val // 2 + 1


@dataclass(frozen=True)
class RamificationData:
    """Per-level breaks, conductor exponents, and genera for levels 1..n."""

    p: int
    s: tuple[int, ...]
    u: tuple[int, ...]
    d: tuple[int, ...]
    g: tuple[int, ...]

    @classmethod
    def compute(cls, spec: TowerSpec, n: int) -> "RamificationData":
        s, u = breaks_and_conductor(spec, n)
        d = lower_breaks(spec.p, s)
        g = [genus_from_breaks(spec.p, s, m) for m in range(1, n + 1)]
        for m in range(1, len(d)):
            assert d[m] >= (spec.p ** 2 - spec.p + 1) * d[m - 1], \
                "lower-break growth bound violated"
        return cls(spec.p, tuple(s), tuple(u), tuple(d), tuple(g))

    @property
    def levels(self) -> int:
        return len(self.s)

    def genus(self, m: int) -> int:
        return 0 if m == 0 else self.g[m - 1]

    def profile(self, m: int | None = None) -> PoleProfile:
        m = self.levels if m is None else m
        return PoleProfile(self.p, self.d[:m])


def genus(spec: TowerSpec, n: int) -> int:
    if n == 0:
        return 0
    return RamificationData.compute(spec, n).g[n - 1]


def p_rank(spec: TowerSpec, n: int) -> int:
    """Always 0 here: base genus 0, one totally ramified branch point, so the
    Deuring-Shafarevich count p^n (d_0 + |S| - 1) - (|S| - 1) vanishes."""
    return 0


def closed_form_basic(p: int, d: int, n: int) -> tuple[int, int, int]:
    """(genus, lower break, upper break) of a basic tower at level n."""
    if d % p == 0:
        raise TowerError(f"ramification invariant {d} divisible by p={p}")
    g = Fraction(d, 2 * (p + 1)) * p ** (2 * n) - Fraction(p ** n, 2) \
        + Fraction(p + 1 - d, 2 * (p + 1))
    d_low = Fraction(d * (p ** (2 * n - 1) + 1), p + 1)
    s = d * p ** (n - 1)
    assert g.denominator == 1 and d_low.denominator == 1
    return int(g), int(d_low), s


@dataclass(frozen=True)
class MonodromyClass:
    kind: str  # "stable" | "periodic" | "unclassified"
    d: Fraction | None = None
    c: tuple[Fraction, ...] | None = None  # constants per residue class mod period
    period: int = 0

    def describe(self) -> str:
        if self.kind == "stable":
            return f"stable: s(n) = {self.c[0]} + {self.d} * p^(n-1)"
        if self.kind == "periodic":
            cs = ", ".join(f"n%{self.period}={r}: {c}" for r, c in enumerate(self.c))
            return f"periodic (m={self.period}): s(n) = c(n) + {self.d} * p^(n-1) with {cs}"
        return "unclassified"


def classify_monodromy(spec: TowerSpec, N: int) -> MonodromyClass:
    """Detect s(n) = c(n mod m) + d p^(n-1) exactly on a trailing window.

    Exact rational arithmetic only; smallest period m <= N//2 wins, with
    m = 1 reported as stable.  Requires N >= 4 observed levels.
    """
    if N < 4:
        raise TowerError("classification needs at least 4 levels")
    p = spec.p
    s, _ = breaks_and_conductor(spec, N)
    for m in range(1, N - 1):
        assert s[m] > s[m - 1], "upper breaks must strictly increase"
    for m in range(1, N // 2 + 1):
        d = Fraction(s[N - 1] - s[N - 1 - m], p ** (N - 1) - p ** (N - 1 - m))
        resid = [Fraction(s[i]) - d * p ** i for i in range(N)]
        window = max(2 * m, 3)
        if all(resid[i] == resid[i + m] for i in range(N - window, N - m)):
            # c[r] is the constant applying to levels n = r (mod m)
            c = [Fraction(0)] * m
            for i in range(N - m, N):
                c[(i + 1) % m] = resid[i]
            return MonodromyClass("stable" if m == 1 else "periodic",
                                  d=d, c=tuple(c), period=m)
    return MonodromyClass("unclassified")


# ---------------------------------------------------------------------------
# layer equations
# ---------------------------------------------------------------------------

class _LayerChain:
    """Level-by-level layer construction over the dense kernel.

    When standardize is set, each layer is rewritten so its pole order equals
    the lower break, and the accumulated substitution y_m -> y_m + Z_m is
    remembered: subs[m-1] is the original variable expressed in the current
    ones, which is what deeper universal corrections must be evaluated at.
    Also serves as the Reducer giving products their y-reduction data.
    """

    def __init__(self, spec: TowerSpec, standardize: bool, cache_dir=None):
        self.spec = spec
        self.ctx = spec.field
        self.standardize = standardize
        self.cache_dir = cache_dir
        self.layers: list[Slab] = []
        self.subs: list[Slab] = []
        self.d: list[int] = []
        self._mask_cache: dict[tuple[int, ...], Slab] = {}
        self._upow_cache: dict[tuple[int, int], Slab] = {}

    # Reducer protocol -------------------------------------------------------

    def layer_slab(self, j: int) -> Slab:
        return self.layers[j - 1]

    def mask_pow(self, digits: tuple[int, ...]) -> Slab:
        while digits and digits[-1] == 0:
            digits = digits[:-1]
        if not digits:
            return Slab.monomial(self.ctx, Monomial(0, ()))
        got = self._mask_cache.get(digits)
        if got is not None:
            return got
        j = len(digits)
        prev = self.mask_pow(digits[:-1] + (digits[-1] - 1,))
        yj_plus_fj = Slab.monomial(self.ctx, Monomial(0, (0,) * (j - 1) + (1,))) \
            + self.layers[j - 1]
        out = slab_mul(prev, yj_plus_fj, self).trim()
        self._mask_cache[digits] = out
        return out

    # construction -------------------------------------------------------------

    def _upow(self, j: int, e: int) -> Slab:
        if e == 0:
            return Slab.monomial(self.ctx, Monomial(0, ()))
        if e == 1:
            return self.subs[j - 1]
        got = self._upow_cache.get((j, e))
        if got is None:
            got = slab_mul(self._upow(j, e - 1), self.subs[j - 1], self).trim()
            self._upow_cache[(j, e)] = got
        return got

    def _eval_terms(self, items: list[tuple[tuple[int, ...], int]], t: int) -> Slab:
        if not items:
            return Slab.zeros(self.ctx, 0)
        if t == 0:
            ((_, c),) = items
            return Slab.monomial(self.ctx, Monomial(0, ()), coeff=c)
        groups: dict[int, list] = {}
        for e, c in items:
            groups.setdefault(e[t - 1], []).append((e[: t - 1], c))
        out: Slab | None = None
        for et in sorted(groups):
            inner = self._eval_terms(groups[et], t - 1)
            if et:
                inner = slab_mul(self._upow(t, et), inner, self)
            out = inner if out is None else (out + inner)
        return out.trim()

    def build_level(self, m: int, rhs_component: SparsePoly, d_m: int) -> None:
        assert len(self.layers) == m - 1, "levels must be built in order"
        peel = peel_polynomials(self.spec.p, m, self.cache_dir)[m - 1]
        raw = Slab.from_sparse(rhs_component, level=0)
        correction = self._eval_terms(list(peel.as_dict().items()), m - 1)
        f = (raw.at_level(m - 1) - correction).trim()
        y_m = Slab.monomial(self.ctx, Monomial(0, (0,) * (m - 1) + (1,)))
        if self.standardize:
            profile = PoleProfile(self.spec.p, self.d)
            f, shift = _sf.reduce_slab(f, self, profile, d_m)
            u_m = (y_m - shift.at_level(m)).trim()
        else:
            u_m = y_m
        self.d.append(d_m)
        self.layers.append(f)
        self.subs.append(u_m)


class TowerState:
    """Spec plus everything derived, built level by level (single-threaded);
    read-only and freely shareable once built."""

    def __init__(self, spec: TowerSpec, cache_dir=None):
        self.spec = spec.normalize()
        self.field = self.spec.field
        self.cache_dir = cache_dir
        self.ram: RamificationData | None = None
        self.chain = _LayerChain(self.spec, standardize=True, cache_dir=cache_dir)
        self.tables = None  # attached by cartier.CartierTables

    @property
    def level(self) -> int:
        return len(self.chain.layers)

    def ensure_ram(self, n: int) -> RamificationData:
        if self.ram is None or self.ram.levels < n:
            self.ram = RamificationData.compute(self.spec, n)
        return self.ram

    def build_to(self, n: int) -> "TowerState":
        if n > self.spec.max_level():
            raise TowerError(
                f"level {n} beyond supported Witt length {self.spec.max_level()} for p={self.spec.p}")
        if n <= self.level:
            return self
        ram = self.ensure_ram(n)
        comps = rhs_assemble([(t.v, t.c, t.i) for t in self.spec.terms],
                             WittCtx(self.spec.p, n), self.field).components
        profile_all = ram.profile(n)
        for m in range(self.level + 1, n + 1):
            self.chain.build_level(m, comps[m - 1], ram.d[m - 1])
            pole = self.chain.layers[m - 1].pole_data(profile_all, m - 1)[0]
            if pole != ram.d[m - 1]:
                raise InternalConsistencyError(
                    f"layer {m} pole order {pole}, expected lower break {ram.d[m-1]}")
        return self

    def profile(self, m: int | None = None) -> PoleProfile:
        return self.ram.profile(self.level if m is None else m)

    def layer_slab(self, m: int) -> Slab:
        return self.chain.layers[m - 1]

    def layer(self, m: int) -> SparsePoly:
        """Standard-form f_m as a sparse polynomial."""
        return self.layer_slab(m).to_sparse()

    def genus(self, m: int) -> int:
        return self.ensure_ram(max(m, 1)).genus(m)

    def lower_break(self, m: int) -> int:
        return self.ensure_ram(m).d[m - 1]


def layer_equations(spec: TowerSpec, n: int) -> list[SparsePoly]:
    """Pre-standard-form layers f_1..f_n (reduced against each other).

    Adjoining roots of f_1..f_m yields the degree-p^m stage of the tower.
    """
    spec = spec.normalize()
    if n > spec.max_level():
        raise TowerError(f"level {n} beyond supported Witt length for p={spec.p}")
    ram = RamificationData.compute(spec, n)
    comps = rhs_assemble([(t.v, t.c, t.i) for t in spec.terms],
                         WittCtx(spec.p, n), spec.field).components
    chain = _LayerChain(spec, standardize=False)
    for m in range(1, n + 1):
        chain.build_level(m, comps[m - 1], ram.d[m - 1])
    return [s.to_sparse() for s in chain.layers]
