"""Difference operators sum_s g_s Lambda^s with DiffPoly coefficients.

``Lambda = exp(eps d/dx)``; composition uses
``Lambda^s o f = f(x + s eps) Lambda^s`` expanded to the epsilon truncation
order.  Operators carry a completeness window: inside ``[lo, hi]`` every
coefficient is exact, outside it coefficients are unknown (not zero).  A bound
of ``None`` means the operator is finite on that side, so nothing is missing.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Any, Iterator

from .diff_poly import DiffPoly
from .exact_algebra import EpsSeries, gen_binomial, is_zero

INF = float("inf")


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class LaxParams:
    m: int
    n: int
    G: int = 1

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if gcd(self.m, self.n) != 1:
            raise ValueError(f"m={self.m} and n={self.n} are not coprime")
        if self.G < 0:
            raise ValueError("G must be >= 0")

    @property
    def h(self) -> int:
        return self.m + self.n

    @property
    def order(self) -> int:
        return 2 * self.G


class ShiftOp:
    __slots__ = ("terms", "lo", "hi", "order")

    def __init__(self, terms: dict, order: int, lo=None, hi=None):
        self.order = order
        self.lo = lo
        self.hi = hi
        self.terms = {}
        for s, c in terms.items():
            s = Fraction(s)
            if (lo is not None and s < lo) or (hi is not None and s > hi):
                continue
            c = c.with_order(order) if c.order is None else c.truncate(order)
            if c:
                self.terms[s] = c

    def __repr__(self):
        return f"ShiftOp(window=[{self.lo}, {self.hi}], order={self.order}, {len(self.terms)} terms)"

    def exponents(self) -> list:
        return sorted(self.terms)

    def top(self):
        """Largest exponent that can carry a coefficient (inf if unknown above)."""
        if self.hi is not None:
            return INF
        return max(self.terms, default=-INF)

    def bottom(self):
        if self.lo is not None:
            return -INF
        return min(self.terms, default=INF)

    def in_window(self, s) -> bool:
        return (self.lo is None or s >= self.lo) and (self.hi is None or s <= self.hi)

    def coeff(self, s) -> DiffPoly:
        s = Fraction(s)
        if not self.in_window(s):
            raise WindowError(f"window underflow: Lambda^{s} outside [{self.lo}, {self.hi}]")
        return self.terms.get(s, DiffPoly.zero(self.order))

    def __add__(self, other: "ShiftOp") -> "ShiftOp":
        order = min(self.order, other.order)
        lo = _max_bound(self.lo, other.lo)
        hi = _min_bound(self.hi, other.hi)
        out = dict(self.terms)
        for s, c in other.terms.items():
            out[s] = out[s] + c if s in out else c
        return ShiftOp(out, order, lo, hi)

    def __neg__(self):
        return ShiftOp({s: -c for s, c in self.terms.items()}, self.order, self.lo, self.hi)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ShiftOp):
            return op_mul(self, other)
        return ShiftOp({s: c * other for s, c in self.terms.items()}, self.order, self.lo, self.hi)

    def same_as(self, other: "ShiftOp", lo=None, hi=None) -> bool:
        """Coefficientwise equality on the common window (optionally clipped)."""
        lo = _max_bound(_max_bound(self.lo, other.lo), lo)
        hi = _min_bound(_min_bound(self.hi, other.hi), hi)
        order = min(self.order, other.order)
        for s in set(self.terms) | set(other.terms):
            if (lo is not None and s < lo) or (hi is not None and s > hi):
                continue
            a = self.terms.get(s, DiffPoly.zero(order)).truncate(order)
            b = other.terms.get(s, DiffPoly.zero(order)).truncate(order)
            if a != b:
                return False
        return True

    def dump(self) -> str:
        lines = []
        for s in self.exponents():
            lines.append(f"{s}\t{self.terms[s].render()}")
        return "\n".join(lines)


def _max_bound(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _min_bound(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def identity(order: int) -> ShiftOp:
    return ShiftOp({0: DiffPoly.const(1, order)}, order)


def monomial_op(s, coeff: DiffPoly, order: int) -> ShiftOp:
    return ShiftOp({s: coeff}, order)


def lax_L(params: LaxParams, order: int | None = None) -> ShiftOp:
    """L = Lambda^m + e^u Lambda^{-n}."""
    order = params.order if order is None else order
    return ShiftOp({params.m: DiffPoly.const(1, order), -params.n: DiffPoly.exp(1, order)}, order)


def op_mul(A: ShiftOp, B: ShiftOp, lo_cut=None, hi_cut=None) -> ShiftOp:
    """Composition A o B, restricted to the provably complete window.

    ``lo_cut`` / ``hi_cut`` additionally limit which exponents are computed.
    """
    order = min(A.order, B.order)
    lo = None
    if A.lo is not None or B.lo is not None:
        cands = []
        if A.lo is not None:
            cands.append(A.lo + B.top())
        if B.lo is not None:
            cands.append(B.lo + A.top())
        lo = max(cands)
    hi = None
    if A.hi is not None or B.hi is not None:
        cands = []
        if A.hi is not None:
            cands.append(A.hi + B.bottom())
        if B.hi is not None:
            cands.append(B.hi + A.bottom())
        hi = min(cands)
    if lo == INF or hi == -INF:
        raise WindowError("product has an empty completeness window")
    lo = _max_bound(lo, lo_cut)
    hi = _min_bound(hi, hi_cut)
    out: dict = {}
    shifted: dict = {}
    for sa, a in A.terms.items():
        for sb, b in B.terms.items():
            s = sa + sb
            if (lo is not None and s < lo) or (hi is not None and s > hi):
                continue
            if (sa, sb) not in shifted:
                shifted[(sa, sb)] = b.truncate(order).shift(sa)
            term = (a * shifted[(sa, sb)]).truncate(order)
            out[s] = out[s] + term if s in out else term
    return ShiftOp(out, order, lo, hi)


def res_lambda3(A: ShiftOp) -> DiffPoly:
    """Coefficient of Lambda^0."""
    return A.coeff(0)


def split_pm(A: ShiftOp) -> tuple[ShiftOp, ShiftOp]:
    """(A_+, A_-): exponents >= 0 and < 0; Lambda^0 goes to the plus part."""
    plus = {s: c for s, c in A.terms.items() if s >= 0}
    minus = {s: c for s, c in A.terms.items() if s < 0}
    p_lo = None if (A.lo is None or A.lo <= 0) else A.lo
    m_hi = None if (A.hi is None or A.hi >= -1) else A.hi
    return (ShiftOp(plus, A.order, p_lo, A.hi), ShiftOp(minus, A.order, A.lo, m_hi))


def power_int(A: ShiftOp, k: int, lo_cut=None, hi_cut=None) -> ShiftOp:
    if k < 1:
        raise ValueError("k must be >= 1")
    result = None
    base = A
    while True:
        if k & 1:
            result = base if result is None else op_mul(result, base, lo_cut, hi_cut)
        k >>= 1
        if not k:
            break
        base = op_mul(base, base)
    return result


def half_shift_apply(f: DiffPoly, s: Any) -> DiffPoly:
    """f(x + s eps)."""
    return f.shift(s)


def commutator(A: ShiftOp, B: ShiftOp) -> ShiftOp:
    return op_mul(A, B) - op_mul(B, A)


# ---------------------------------------------------------------------------
# roots of L^h

def _leading_negative(params: LaxParams, order: int) -> DiffPoly:
    """E with (E Lambda^{-h})^n = product of shifted e^u factors of L^h at Lambda^{-nh}.

    log E = Q(eps d/dx) u with Q(t) = sum_{i<h} e^{-i n t} / sum_{i<n} e^{-i h t}.
    """
    m, n, h = params.m, params.n, params.h

    def expsum(count, step):
        return EpsSeries(tuple(sum(Fraction((-i * step) ** k) for i in range(count)) / _fact(k)
                               for k in range(order + 1)), order)

    Q = expsum(h, n) * expsum(n, h).inverse()
    assert Q[0] == Fraction(h, n)
    arg = DiffPoly.zero(order)
    for k in range(1, order + 1):
        if Q[k]:
            arg = arg + DiffPoly.jet(k, order).mul_eps(k).with_order(order).scale(Q[k])
    factor = arg.exp_nilpotent() if arg else DiffPoly.const(1, order)
    return factor.mul_exp(Fraction(h, n))


def _fact(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def _coefficient_of_power(R: ShiftOp, k: int, s) -> DiffPoly:
    """Coefficient of Lambda^s in R^k for a finite operator R."""
    s = Fraction(s)
    top, bot = max(R.terms), min(R.terms)
    P = R
    for i in range(2, k + 1):
        rest = k - i
        P = op_mul(P, R, lo_cut=s - rest * top, hi_cut=s - rest * bot)
    return P.terms.get(s, DiffPoly.zero(R.order))


def root_of_Lh(params: LaxParams, branch: str, depth: int, order: int | None = None) -> ShiftOp:
    """m-th (positive) or n-th (negative) root of L^h on the Lambda^h lattice.

    positive: R = Lambda^h + sum_{j=0}^{depth} b_j Lambda^{-jh}, complete down to -depth*h.
    negative: S = E Lambda^{-h} + sum_{j=0}^{depth} c_j Lambda^{jh}, complete up to depth*h.
    """
    order = params.order if order is None else order
    m, n, h = params.m, params.n, params.h
    if depth < 0:
        raise ValueError("depth must be >= 0")
    Lh = power_int(lax_L(params, order), h)
    if branch == "positive":
        k, sign = m, -1
        lead_s, lead = Fraction(h), DiffPoly.const(1, order)
        inv_kappa = Fraction(0)
    elif branch == "negative":
        k, sign = n, 1
        lead_s, lead = Fraction(-h), _leading_negative(params, order)
        inv_kappa = -Fraction((n - 1) * h, n)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    if k == 1:
        return Lh

    terms = {lead_s: lead}
    for j in range(0, depth + 1):
        s = Fraction(sign * j * h)
        target_s = (k - 1) * lead_s + s
        target = Lh.terms.get(target_s, DiffPoly.zero(order))
        c = DiffPoly.zero(order)
        for _ in range(order + 2):
            trial = ShiftOp({**terms, s: c}, order)
            resid = target - _coefficient_of_power(trial, k, target_s)
            if not resid:
                break
            c = c + resid.mul_exp(inv_kappa).scale(Fraction(1, k))
        else:
            trial = ShiftOp({**terms, s: c}, order)
            if target != _coefficient_of_power(trial, k, target_s):
                raise ArithmeticError("root recursion did not converge")
        terms[s] = c
    if branch == "positive":
        return ShiftOp(terms, order, lo=Fraction(-depth * h))
    return ShiftOp(terms, order, hi=Fraction(depth * h))


def lambda_class(params: LaxParams, lam) -> tuple[bool, bool]:
    """(lam in I_1, lam in I_2) with I_1 = Z_{>0}/m and I_2 = Z_{>0}/n."""
    lam = Fraction(lam)
    if lam <= 0:
        return (False, False)
    return ((lam * params.m).denominator == 1, (lam * params.n).denominator == 1)


def frac_power(params: LaxParams, lam, depth: int = 0, order: int | None = None,
               branch: str | None = None) -> ShiftOp:
    """L^{lam h}, complete down to Lambda^{-depth h} (I_1) or up to Lambda^{depth h} (I_2)."""
    order = params.order if order is None else order
    lam = Fraction(lam)
    in1, in2 = lambda_class(params, lam)
    if not (in1 or in2):
        raise ValueError(f"lambda={lam} is not in I for (m, n)=({params.m}, {params.n})")
    if branch is None:
        branch = "positive" if in1 else "negative"
    if branch == "positive":
        if not in1:
            raise ValueError(f"lambda={lam} not in I_1")
        k = int(lam * params.m)
    else:
        if not in2:
            raise ValueError(f"lambda={lam} not in I_2")
        k = int(lam * params.n)
    h = params.h
    root = root_of_Lh(params, branch, k - 1 + depth, order)
    if branch == "positive":
        return power_int(root, k, lo_cut=Fraction(-depth * h))
    return power_int(root, k, hi_cut=Fraction(depth * h))


def leading_binomial(params: LaxParams, lam, k: int) -> tuple[Fraction, Fraction]:
    """(coefficient, kappa) of the eps^0 part of res(L^{lam h} Lambda_3^{-k})."""
    lam = Fraction(lam)
    in1, in2 = lambda_class(params, lam)
    h, m, n = params.h, params.m, params.n
    if in1:
        return gen_binomial(lam * h, int(lam * m) - k), lam * m - k
    return gen_binomial(lam * h, int(lam * n) + k), lam * m - k


def iter_lattice(op: ShiftOp, h: int) -> Iterator[tuple[int, DiffPoly]]:
    for s in op.exponents():
        if (s / h).denominator == 1:
            yield int(s / h), op.terms[s]
