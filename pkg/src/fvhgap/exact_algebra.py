"""Exact arithmetic: rationals, rational functions in (m, n, lam, x),
truncated epsilon-series, Bernoulli numbers and an exact linear solver.

Rationals are :class:`fractions.Fraction`.  Multivariate polynomials and
rational functions are sympy's sparse ``PolyElement`` / ``FracElement`` over
QQ with graded-lex order on the fixed variable list ``(m, n, lam, x)``; these
are kept reduced (gcd removed, denominator normalised) by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Any, Sequence

from sympy import QQ
from sympy.polys.fields import FracElement, field
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement

VARIABLES = ("m", "n", "lam", "x")

FIELD, M, N, LAM, X = field(",".join(VARIABLES), QQ, grlex)
RING = FIELD.ring

BigRational = Fraction
MPoly = PolyElement
RatFunc = FracElement


class NonNilpotentError(ValueError):
    pass


# ---------------------------------------------------------------------------
# scalars

def is_zero(c: Any) -> bool:
    return c == 0


def to_field(c: Any) -> RatFunc:
    """Lift an int, Fraction or field element into ``FIELD``."""
    if isinstance(c, FracElement):
        return c
    if isinstance(c, PolyElement):
        return FIELD(c)
    if isinstance(c, Fraction):
        return FIELD(QQ(c.numerator, c.denominator))
    return FIELD(c)


def ratfunc(num: Any, den: Any = 1) -> RatFunc:
    return to_field(num) / to_field(den)


def normalize(r: RatFunc) -> RatFunc:
    """Canonical form of a rational function.

    Field elements are already reduced; this recomputes the gcd so that the
    result does not depend on how ``r`` was built.
    """
    r = to_field(r)
    num, den = r.numer, r.denom
    g = num.gcd(den)
    num, den = num.quo(g), den.quo(g)
    lc = den.LC
    return FIELD.new(num.quo_ground(lc), den.quo_ground(lc))


def as_fraction(c: Any) -> Fraction:
    """Convert a constant field element (or number) to a Fraction."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, FracElement):
        if not (c.numer.is_ground and c.denom.is_ground):
            raise ValueError(f"not a constant: {c}")
        num = c.numer.LC if c.numer else QQ(0)
        den = c.denom.LC
        q = QQ.to_sympy(num / den)
        return Fraction(int(q.p), int(q.q))
    q = QQ.to_sympy(c)
    return Fraction(int(q.p), int(q.q))


def substitute(r: Any, **values: Any) -> Any:
    """Evaluate a rational function at numeric values of some variables.

    Returns a Fraction when every occurring variable is fixed, else a field
    element.
    """
    if isinstance(r, PolyElement):
        r = FIELD(r)
    if not isinstance(r, FracElement):
        return r
    num, den = r.numer, r.denom
    for name, v in values.items():
        gen = RING.gens[VARIABLES.index(name)]
        v = Fraction(v)
        q = QQ(v.numerator, v.denominator)
        num = num.subs(gen, q) if num else num
        den = den.subs(gen, q)
    if not den:
        raise ZeroDivisionError(f"denominator of {r} vanishes at {values}")
    res = FIELD.new(num, den) if num else FIELD(0)
    if res.numer.is_ground and res.denom.is_ground:
        return as_fraction(res)
    return res


def sort_key(c: Any):
    """Deterministic ordering key for scalars of either kind."""
    if isinstance(c, (int, Fraction)):
        return (0, Fraction(c), "")
    return (1, Fraction(0), str(c))


def scalar_str(c: Any) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return str(c)


# ---------------------------------------------------------------------------
# combinatorics

def bernoulli(N: int) -> list[Fraction]:
    """Bernoulli numbers B_0..B_N with B_1 = -1/2 (generating function t/(e^t - 1))."""
    if N < 0:
        raise ValueError("N must be non-negative")
    B = [Fraction(1)]
    for k in range(1, N + 1):
        s = sum(comb(k + 1, j) * B[j] for j in range(k))
        B.append(-s / (k + 1))
    return B


def gen_binomial(a: Any, k: int) -> Any:
    """a(a-1)...(a-k+1)/k! for a in any commutative ring containing QQ."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out: Any = 1
    for i in range(k):
        out = out * (a - i)
    return out * Fraction(1, factorial(k)) if k else out


# ---------------------------------------------------------------------------
# truncated epsilon-series

@dataclass(frozen=True)
class EpsSeries:
    """Truncated power series sum_{k<=order} coeffs[k] eps^k over a ring.

    Ring elements only need ``+ - *`` with each other and with ints, plus
    multiplication by Fraction for :func:`series_exp` / :func:`series_log`.
    """

    coeffs: tuple
    order: int
    parity: str = "any"

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")
        c = tuple(self.coeffs[: self.order + 1])
        c = c + (0,) * (self.order + 1 - len(c))
        object.__setattr__(self, "coeffs", c)
        if self.parity == "even" and any(not is_zero(v) for v in c[1::2]):
            raise ValueError("parity_hint=even but an odd coefficient is nonzero")

    @classmethod
    def from_list(cls, coeffs: Sequence, order: int | None = None, parity: str = "any"):
        if order is None:
            order = len(coeffs) - 1
        return cls(tuple(coeffs), order, parity)

    @classmethod
    def constant(cls, c, order: int):
        return cls((c,), order, "even")

    def __getitem__(self, k: int):
        if k > self.order:
            raise IndexError(f"eps^{k} beyond truncation order {self.order}")
        return self.coeffs[k]

    def __len__(self):
        return self.order + 1

    def _other(self, other) -> "EpsSeries":
        if isinstance(other, EpsSeries):
            return other
        return EpsSeries.constant(other, self.order)

    @staticmethod
    def _parity(a: "EpsSeries", b: "EpsSeries") -> str:
        return "even" if a.parity == b.parity == "even" else "any"

    def __add__(self, other):
        other = self._other(other)
        E = min(self.order, other.order)
        return EpsSeries(tuple(self.coeffs[k] + other.coeffs[k] for k in range(E + 1)),
                         E, self._parity(self, other))

    __radd__ = __add__

    def __neg__(self):
        return EpsSeries(tuple(-c for c in self.coeffs), self.order, self.parity)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, EpsSeries):
            return EpsSeries(tuple(c * other for c in self.coeffs), self.order, self.parity)
        E = min(self.order, other.order)
        out = []
        for k in range(E + 1):
            acc = 0
            for i in range(k + 1):
                a, b = self.coeffs[i], other.coeffs[k - i]
                if is_zero(a) or is_zero(b):
                    continue
                acc = acc + a * b
            out.append(acc)
        return EpsSeries(tuple(out), E, self._parity(self, other))

    def __rmul__(self, other):
        return EpsSeries(tuple(other * c for c in self.coeffs), self.order, self.parity)

    def __eq__(self, other):
        if not isinstance(other, EpsSeries):
            return NotImplemented
        E = min(self.order, other.order)
        return all(is_zero(self.coeffs[k] - other.coeffs[k]) for k in range(E + 1))

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def is_even(self) -> bool:
        return all(is_zero(c) for c in self.coeffs[1::2])

    def truncate(self, order: int) -> "EpsSeries":
        return EpsSeries(self.coeffs, min(order, self.order), self.parity)

    def map(self, f) -> "EpsSeries":
        return EpsSeries(tuple(f(c) for c in self.coeffs), self.order)

    def inverse(self) -> "EpsSeries":
        """1/s for s with an invertible scalar constant term."""
        c0 = self.coeffs[0]
        inv0 = 1 / c0 if not isinstance(c0, int) else Fraction(1, c0)
        out = [inv0]
        for k in range(1, self.order + 1):
            acc = 0
            for i in range(1, k + 1):
                acc = acc + self.coeffs[i] * out[k - i]
            out.append(-acc * inv0)
        return EpsSeries(tuple(out), self.order)


def series_exp(s: EpsSeries) -> EpsSeries:
    """exp(s) for s with zero constant term."""
    if not is_zero(s.coeffs[0]):
        raise NonNilpotentError("non-nilpotent exponent")
    f: list = [1]
    for k in range(1, s.order + 1):
        acc = 0
        for j in range(1, k + 1):
            if is_zero(s.coeffs[j]):
                continue
            acc = acc + (s.coeffs[j] * j) * f[k - j]
        f.append(acc * Fraction(1, k))
    return EpsSeries(tuple(f), s.order)


def series_log(s: EpsSeries) -> EpsSeries:
    """log(s) for s with constant term 1."""
    if not is_zero(s.coeffs[0] - 1):
        raise ValueError("series_log needs constant term 1")
    out: list = [0]
    for k in range(1, s.order + 1):
        acc = s.coeffs[k] * k
        for j in range(1, k):
            acc = acc - (out[j] * j) * s.coeffs[k - j]
        out.append(acc * Fraction(1, k))
    return EpsSeries(tuple(out), s.order)


# ---------------------------------------------------------------------------
# exact linear algebra

@dataclass(frozen=True)
class LinearSystem:
    matrix: tuple
    rhs: tuple

    def __post_init__(self):
        rows = len(self.matrix)
        if rows != len(self.rhs):
            raise ValueError("matrix and rhs row counts differ")
        if rows and len({len(r) for r in self.matrix}) != 1:
            raise ValueError("ragged matrix")

    @classmethod
    def of(cls, matrix, rhs):
        return cls(tuple(tuple(r) for r in matrix), tuple(rhs))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.matrix), (len(self.matrix[0]) if self.matrix else 0)


@dataclass(frozen=True)
class RankReport:
    rank: int
    consistent: bool
    cols: int


def _integer_row(row: list) -> list:
    """Scale a row of Fractions to integers (keeps other scalars untouched)."""
    if not all(isinstance(v, (int, Fraction)) for v in row):
        return row
    den = 1
    for v in row:
        if isinstance(v, Fraction):
            den = den * v.denominator // _gcd(den, v.denominator)
    return [Fraction(v * den) for v in row]


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def solve_exact(sys: LinearSystem):
    """Fraction-free (Bareiss) elimination.

    Returns a tuple with the unique solution when the system is consistent
    with full column rank, otherwise a :class:`RankReport`.
    """
    rows, cols = sys.shape
    A = [_integer_row(list(r) + [b]) for r, b in zip(sys.matrix, sys.rhs)]
    prev: Any = 1
    rank = 0
    pivots = []
    for c in range(cols):
        p = next((r for r in range(rank, rows) if not is_zero(A[r][c])), None)
        if p is None:
            continue
        A[rank], A[p] = A[p], A[rank]
        piv = A[rank][c]
        for r in range(rank + 1, rows):
            f = A[r][c]
            A[r] = [(piv * A[r][j] - f * A[rank][j]) / prev for j in range(cols + 1)]
        pivots.append(c)
        prev = piv
        rank += 1
        if rank == rows:
            break
    consistent = all(is_zero(A[r][cols]) for r in range(rank, rows))
    if rank < cols or not consistent:
        return RankReport(rank, consistent, cols)
    x: list = [0] * cols
    for i in reversed(range(rank)):
        c = pivots[i]
        acc = A[i][cols]
        for j in range(c + 1, cols):
            if not is_zero(A[i][j]):
                acc = acc - A[i][j] * x[j]
        x[c] = acc / A[i][c]
    return tuple(x)


def matvec(matrix: Sequence[Sequence], vec: Sequence) -> list:
    out = []
    for row in matrix:
        acc = 0
        for a, b in zip(row, vec):
            acc = acc + a * b
        out.append(acc)
    return out
