"""Closed-form invariants, growth-law constants, residual fitting, and the
proven characteristic-two evaluators and checkers.

All arithmetic here is exact rational (fractions.Fraction); nothing is ever
estimated in floating point.  Fits are reports, not truth claims: a FitReport
records the level from which its formula reproduces the observed values and
the discrepancy set before that, and never extrapolates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .cartier import DifferentialForm, cartier_apply, cartier_matrix, trace_map
from .linalg import kernel_basis
from .poly import SparsePoly
from .tower import RamificationData, TowerState


class AnalysisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# growth-law constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjectureConstants:
    """alpha(r, p) with its denominator split into p-part and prime-to-p part."""

    r: int
    p: int
    alpha: Fraction
    D: int
    D_prime: int
    m: int


def _multiplicative_order(a: int, n: int) -> int:
    a %= n
    if math.gcd(a, n) != 1:
        raise AnalysisError(f"{a} not invertible mod {n}")
    order, x = 1, a
    while x != 1:
        x = x * a % n
        order += 1
    return order


def constants(r: int, p: int) -> ConjectureConstants:
    """alpha(r,p) = r(p-1) / (2(p+1)((p-1)r + (p+1))), D its denominator,
    D' the prime-to-p part, m = ord(p^2 mod D') (0 when D' = 1)."""
    if r < 1:
        raise AnalysisError("r must be positive")
    alpha = Fraction(r * (p - 1), 2 * (p + 1) * ((p - 1) * r + (p + 1)))
    D = alpha.denominator
    D_prime = D
    while D_prime % p == 0:
        D_prime //= p
    m = _multiplicative_order(p * p, D_prime) if D_prime > 1 else 0
    return ConjectureConstants(r, p, alpha, D, D_prime, m)


def alpha1_formula(p: int) -> Fraction:
    """(p-1) / (4p(p+1)), the r = 1 specialization."""
    return Fraction(p - 1, 4 * p * (p + 1))


# ---------------------------------------------------------------------------
# residuals, discrepancies, lambda
# ---------------------------------------------------------------------------

def delta_values(a_list: Sequence[int], d: int, p: int, r: int = 1,
                 lam: Fraction = Fraction(0)) -> list[Fraction]:
    """Residuals of the kernel dimensions against the conjectured main term.

    r = 1, lam = 0: delta_d(n) = a(n) - alpha(1,p) d (p^2n - p^2).
    Otherwise:      delta_{d,r}(n, lam) = a^(r)(n) - (alpha(r,p) d p^2n + lam n).
    Levels are 1-based: a_list[0] is level 1.
    """
    alpha = constants(r, p).alpha
    out = []
    for idx, a in enumerate(a_list):
        n = idx + 1
        if r == 1 and lam == 0:
            out.append(a - alpha * d * (p ** (2 * n) - p * p))
        else:
            out.append(a - (alpha * d * p ** (2 * n) + lam * n))
    return out


def discrepancies(delta_list: Sequence[Fraction], m: int) -> set[int]:
    """{n > m : delta(n) != delta(n - m)}, levels 1-based."""
    if m < 1:
        raise AnalysisError("discrepancies need a period m >= 1")
    return {n for n in range(m + 1, len(delta_list) + 1)
            if delta_list[n - 1] != delta_list[n - 1 - m]}


def estimate_lambda(a_list: Sequence[int], d: int, p: int, r: int) -> Fraction:
    """Two-level difference quotient at the deepest level:
    ((a(N) - alpha d p^2N) - (a(N-m) - alpha d p^2(N-m))) / m."""
    cc = constants(r, p)
    if cc.m < 1:
        raise AnalysisError("lambda estimation needs m(r,p) >= 1")
    N = len(a_list)
    if N < cc.m + 1:
        raise AnalysisError(f"need at least {cc.m + 1} levels, got {N}")
    hi = a_list[N - 1] - cc.alpha * d * p ** (2 * N)
    lo = a_list[N - 1 - cc.m] - cc.alpha * d * p ** (2 * (N - cc.m))
    return Fraction(hi - lo, cc.m)


@dataclass
class FitReport:
    """Exact-rational fit a^(r)(n) ~ alpha d p^2n + lambda n + c(n mod period).

    valid_from is the first level from which the reported formula reproduces
    every observed value; discrepancy levels before it are listed.  A report
    with fitted = False means no stabilization was observed in the data.
    """

    r: int
    p: int
    d: int
    leading: Fraction  # alpha(r, p) * d
    lam: Fraction
    period: int
    c: dict[int, Fraction]  # residue of n mod period -> constant
    discrepancy_set: set[int]
    valid_from: int
    fitted: bool
    levels: int

    def predict(self, n: int) -> Fraction:
        return self.leading * self.p ** (2 * n) + self.lam * n + self.c[n % self.period]


def _fit_with(a_list, d, p, r, period, lam):
    """(discrepancies, c, valid_from) for one (period, lambda) candidate."""
    alpha = constants(r, p).alpha
    N = len(a_list)
    deltas = [a_list[i] - (alpha * d * p ** (2 * (i + 1)) + lam * (i + 1))
              for i in range(N)]
    disc = discrepancies(deltas, period)
    c = {(i + 1) % period: deltas[i] for i in range(max(N - period, 0), N)}
    valid_from = N + 1
    for n in range(N, 0, -1):
        if n % period in c and deltas[n - 1] == c[n % period]:
            valid_from = n
        else:
            break
    return disc, c, valid_from


def fit_periodic(a_list: Sequence[int], d: int, p: int, r: int) -> FitReport:
    """Best exact periodic fit; reports rather than asserts.

    Period is m(r,p) when that is >= 1; for the edge case m = 0 trial periods
    1..3 are tried (period and lambda may genuinely depend on the tower
    there).  lambda = 0 is preferred whenever the residuals stabilize with it,
    and a fit counts as such only when the clean stretch covers at least one
    full period beyond its first level.
    """
    if len(a_list) < 4:
        raise AnalysisError("fitting needs at least 4 levels")
    cc = constants(r, p)
    N = len(a_list)
    candidates: list[tuple[int, Fraction]] = []
    periods = [cc.m] if cc.m >= 1 else [1, 2, 3]
    for period in periods:
        candidates.append((period, Fraction(0)))
        if N >= period + 1:
            hi = a_list[N - 1] - cc.alpha * d * p ** (2 * N)
            lo = a_list[N - 1 - period] - cc.alpha * d * p ** (2 * (N - period))
            lam = Fraction(hi - lo, period)
            if lam != 0:
                candidates.append((period, lam))
    best = None
    for period, lam in candidates:
        disc, c, valid_from = _fit_with(a_list, d, p, r, period, lam)
        score = (valid_from, period, abs(lam))
        if best is None or score < best[0]:
            best = (score, period, lam, disc, c, valid_from)
    _, period, lam, disc, c, valid_from = best
    fitted = valid_from <= N - period
    return FitReport(r=r, p=p, d=d, leading=cc.alpha * d, lam=lam, period=period,
                     c=c, discrepancy_set=disc, valid_from=valid_from, fitted=fitted,
                     levels=N)


# ---------------------------------------------------------------------------
# module structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelProfile:
    """a^(r) for r = 1..R at one level, plus the genus."""

    level: int
    genus: int
    a: tuple[int, ...]

    @property
    def stabilized(self) -> bool:
        return len(self.a) >= 2 and self.a[-1] == self.a[-2]


def elementary_divisors(profile: KernelProfile) -> list[int]:
    """Multiplicities m(i) of k[V]/V^i in the V-nilpotent module.

    m(i) = 2 a^(i) - a^(i-1) - a^(i+1) with a^(0) = 0 and the sequence
    extended constant past stabilization; sum i*m(i) recovers the stabilized
    kernel dimension.  Requires a stabilized profile.
    """
    if not profile.stabilized:
        raise AnalysisError("kernel profile not stabilized: extend r")
    a = [0] + list(profile.a)
    a.append(a[-1])
    out = []
    for i in range(1, len(a) - 1):
        m_i = 2 * a[i] - a[i - 1] - a[i + 1]
        if m_i < 0:
            raise AnalysisError(f"negative multiplicity m({i}): inconsistent profile")
        out.append(m_i)
    while out and out[-1] == 0:
        out.pop()
    assert sum(i * m for i, m in enumerate(out, start=1)) == profile.a[-1]
    return out


# ---------------------------------------------------------------------------
# proven closed forms in characteristic two
# ---------------------------------------------------------------------------

def _check_p2_breaks(d_list: Sequence[int]) -> None:
    for d in d_list:
        if d < 1 or d % 2 == 0:
            raise AnalysisError(f"characteristic-2 break {d} must be odd and positive")


def anumber_cover_p2(d_list: Sequence[int]) -> int:
    """a-number of a Z/2Z cover from its breaks (hypothesis checked by caller):
    sum (d-1)/4 over d = 1 mod 4 plus sum (d+1)/4 over d = 3 mod 4."""
    _check_p2_breaks(d_list)
    return sum((d - 1) // 4 if d % 4 == 1 else (d + 1) // 4 for d in d_list)


def anumber_basic_p2(d: int, n: int) -> int:
    """a-number of level n >= 2 of any basic characteristic-2 tower:
    (d/24) 2^2n + (d + 3)/12 for d = 1 mod 4, (d/24) 2^2n + (d - 3)/12 otherwise."""
    _check_p2_breaks([d])
    if n < 2:
        if n == 1:
            return anumber_cover_p2([d])
        raise AnalysisError("closed form applies to levels n >= 1")
    shift = 3 if d % 4 == 1 else -3
    val = Fraction(d, 24) * 2 ** (2 * n) + Fraction(d + shift, 12)
    assert val.denominator == 1
    return int(val)


def kernel_power_level1_p2(d_list: Sequence[int], r: int) -> int:
    """a^(r) at level 1 of a characteristic-2 tower over the projective line:
    deg D - sum ceil((d+1)/2^(r+1)) with D = sum (d+1)/2 [Q]."""
    _check_p2_breaks(d_list)
    if r < 1:
        raise AnalysisError("r must be positive")
    deg_D = sum((d + 1) // 2 for d in d_list)
    return deg_D - sum(-((d + 1) // -(2 ** (r + 1))) for d in d_list)


def kernel2_level2_p2(d_list: Sequence[int]) -> int:
    """a^(2) at level 2 when every second break is 3x the first and
    sum (d-3)/2 > -4: sum (floor((3d+1)/4) + floor((7d+7)/16))."""
    _check_p2_breaks(d_list)
    if not sum(Fraction(d - 3, 2) for d in d_list) > -4:
        raise AnalysisError("level-2 closed form hypothesis fails: breaks too small")
    return sum((3 * d + 1) // 4 + (7 * d + 7) // 16 for d in d_list)


# ---------------------------------------------------------------------------
# ramification hypothesis and trace checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RamHypothesisReport:
    """Delta_n = sum_Q (d_Q(n+1) - ceil(d_Q(n+1)/p)) - (2g(n) - 2) per level,
    with the flag for the trace-vanishing criterion at each level."""

    p: int
    delta: tuple[int, ...]      # Delta_n for n = 0..N-1
    holds: tuple[bool, ...]


def ramification_hypothesis(ram: RamificationData | None = None, *,
                            p: int | None = None,
                            d_lists: Sequence[Sequence[int]] | None = None,
                            g_list: Sequence[int] | None = None) -> RamHypothesisReport:
    """Evaluate the trace-vanishing hypothesis level by level.

    Either pass the single-branch-point RamificationData of a tower, or give
    per-level break lists (one entry per branch point) with the genus list
    for multi-point data.  holds(n) allows equality when some break at level
    n+1 satisfies the strictness exemption d = floor(d/p) mod p.
    """
    if ram is not None:
        p = ram.p
        d_lists = [[d] for d in ram.d]
        g_list = [0] + list(ram.g)
    else:
        if p is None or d_lists is None or g_list is None:
            raise AnalysisError("need p, d_lists and g_list without RamificationData")
        g_list = list(g_list)
    deltas, holds = [], []
    for n in range(len(d_lists)):
        ds = d_lists[n]  # breaks of level n+1
        total = sum(d - -(d // -p) for d in ds)
        delta_n = total - (2 * g_list[n] - 2)
        strict_exempt = any(d % p == (d // p) % p for d in ds)
        deltas.append(delta_n)
        holds.append(delta_n > 0 or (delta_n == 0 and strict_exempt))
    return RamHypothesisReport(p, tuple(deltas), tuple(holds))


@dataclass
class TraceCheck:
    index: int
    trace_poly: SparsePoly
    order_at_infinity: Fraction | float
    bound: int
    strict: bool
    trace_must_vanish: bool
    passed: bool


@dataclass
class TraceBoundReport:
    p: int
    d: int
    kernel_dimension: int
    checks: list[TraceCheck] = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def trace_bound_check(state: TowerState) -> TraceBoundReport:
    """Verify the trace-order bound for every V-killed regular differential at
    level 1, and exact trace vanishing whenever the degree criterion applies.

    A failure here would contradict a proven statement and is therefore an
    implementation bug, not a property of the tower.
    """
    state.build_to(1)
    ram = state.ensure_ram(1)
    p, d = state.spec.p, ram.d[0]
    cm = cartier_matrix(state, 1)
    basis = cm.basis
    ctx = state.field
    # kernel of the semilinear operator: V(sum c_s w_s) = M sigma^-1(c), so
    # kernel vectors are sigma of the matrix nullspace
    vecs = kernel_basis(cm.matrix)
    bound = d - -(d // -p)
    strict = d % p == (d // p) % p
    # over the projective line the degree criterion always holds at level 1:
    # sum (d - ceil(d/p)) >= 0 > -2 = 2g - 2
    must_vanish = True
    report = TraceBoundReport(p=p, d=d, kernel_dimension=len(vecs))
    for idx, vec in enumerate(vecs):
        terms = {}
        for s, m in enumerate(basis):
            comp = vec[s]
            c = ctx.elem(int(comp) if ctx.k == 1 else tuple(int(v) for v in comp))
            c = c.frobenius()
            if not c.is_zero():
                terms[m] = c
        eta = DifferentialForm(SparsePoly(ctx, 1, terms), 1)
        assert cartier_apply(eta, state).is_zero(), "kernel vector not killed by V"
        tr = trace_map(eta).poly
        if tr.is_zero():
            order = math.inf
        else:
            order = -tr.x_degree() - 2  # ord at infinity of h dx on the line
        ok = (order > bound) if strict else (order >= bound)
        if must_vanish:
            ok = ok and tr.is_zero()
        report.checks.append(TraceCheck(idx, tr, order, bound, strict, must_vanish, ok))
    return report


# ---------------------------------------------------------------------------
# asymptotic ratio sanity
# ---------------------------------------------------------------------------

def kernel_genus_ratio_gap(a_r: int, genus: int, r: int, p: int) -> Fraction:
    """|a^(r)/g - r(p-1)/((p-1)r + (p+1))| at one level (reported, not asserted)."""
    target = Fraction(r * (p - 1), (p - 1) * r + (p + 1))
    return abs(Fraction(a_r, genus) - target)
