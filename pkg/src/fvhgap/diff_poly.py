"""Differential polynomials with exponential factors.

A :class:`DiffPoly` is a finite sum of terms ``c * eps^e * e^{kappa u} * u^{(J)}``
where ``J`` is a partition of jet orders (all >= 1).  The epsilon power is kept
as part of the key ("epsilon-flattened"), and the whole polynomial carries a
truncation order ``order`` (``None`` = exact, no truncation).
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from math import factorial
from typing import Any, Callable, Iterable, Mapping

from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from .exact_algebra import EpsSeries, as_fraction, is_zero, scalar_str, series_exp, sort_key

Key = tuple  # (eps_power, kappa, jets)


class MissingJetError(KeyError):
    pass


def norm_kappa(k: Any) -> Any:
    """Exponential weights are Fractions unless genuinely symbolic."""
    if isinstance(k, (int, Fraction)):
        return Fraction(k)
    if isinstance(k, PolyElement):
        return as_fraction(k.LC if k else 0) if k.is_ground else k
    if isinstance(k, FracElement):
        return as_fraction(k) if (k.numer.is_ground and k.denom.is_ground) else k
    return as_fraction(k)


def merge_jets(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b, reverse=True))


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _low(p) -> float:
    # first eps power that may be nonzero; a truncated zero is O(eps^{order+1})
    if p.terms:
        return min(e for (e, _, _) in p.terms)
    return float("inf") if p.order is None else p.order + 1


def _product_order(a, b):
    bounds = [a.order + _low(b) if a.order is not None else None,
              b.order + _low(a) if b.order is not None else None]
    bounds = [x for x in bounds if x is not None and x != float("inf")]
    if not bounds:
        return None
    return int(min(bounds))


class DiffPoly:
    __slots__ = ("terms", "order")

    def __init__(self, terms: Mapping | None = None, order: int | None = None):
        self.order = order
        clean = {}
        if terms:
            for (e, k, J), c in terms.items():
                if order is not None and e > order:
                    continue
                if not is_zero(c):
                    clean[(e, norm_kappa(k), tuple(J))] = c
        self.terms = clean

    @classmethod
    def _raw(cls, terms: dict, order):
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.order = order
        return obj

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, order: int | None = None) -> "DiffPoly":
        return cls._raw({}, order)

    @classmethod
    def const(cls, c: Any, order: int | None = None) -> "DiffPoly":
        return cls({(0, Fraction(0), ()): c}, order)

    @classmethod
    def exp(cls, kappa: Any, order: int | None = None, coeff: Any = 1) -> "DiffPoly":
        return cls({(0, kappa, ()): coeff}, order)

    @classmethod
    def jet(cls, k: int, order: int | None = None, coeff: Any = 1) -> "DiffPoly":
        if k < 1:
            raise ValueError("bare u has no polynomial representative; use exp weights")
        return cls({(0, Fraction(0), (k,)): coeff}, order)

    @classmethod
    def monomial(cls, J: Iterable[int] = (), kappa: Any = 0, eps: int = 0, coeff: Any = 1,
                 order: int | None = None) -> "DiffPoly":
        return cls({(eps, kappa, tuple(sorted(J, reverse=True))): coeff}, order)

    # -- basic protocol ----------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) and other == 0:
            return not self.terms
        if not isinstance(other, DiffPoly):
            return NotImplemented
        d = self - other
        return not d.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"DiffPoly({self.render()}, order={self.order})"

    def copy_order(self, order) -> "DiffPoly":
        return self.truncate(order)

    def truncate(self, order: int | None) -> "DiffPoly":
        order = _min_order(self.order, order)
        if order is None:
            return self
        return DiffPoly._raw({k: c for k, c in self.terms.items() if k[0] <= order}, order)

    def with_order(self, order: int | None) -> "DiffPoly":
        """Reinterpret an exact polynomial at a given truncation order."""
        return DiffPoly._raw({k: c for k, c in self.terms.items()
                              if order is None or k[0] <= order}, order)

    # -- ring operations ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, DiffPoly):
            if is_zero(other):
                return self
            other = DiffPoly.const(other)
        order = _min_order(self.order, other.order)
        out = dict(self.terms) if order is None else {k: c for k, c in self.terms.items() if k[0] <= order}
        for k, c in other.terms.items():
            if order is not None and k[0] > order:
                continue
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                v = v + c
                if is_zero(v):
                    del out[k]
                else:
                    out[k] = v
        return DiffPoly._raw(out, order)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly._raw({k: -c for k, c in self.terms.items()}, self.order)

    def __sub__(self, other):
        if not isinstance(other, DiffPoly):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Any) -> "DiffPoly":
        if is_zero(c):
            return DiffPoly.zero(self.order)
        return DiffPoly._raw({k: v * c for k, v in self.terms.items()}, self.order)

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        order = _product_order(self, other)
        out: dict = {}
        for (e1, k1, J1), c1 in self.terms.items():
            for (e2, k2, J2), c2 in other.terms.items():
                e = e1 + e2
                if order is not None and e > order:
                    continue
                key = (e, norm_kappa(k1 + k2), merge_jets(J1, J2))
                v = out.get(key)
                out[key] = c1 * c2 if v is None else v + c1 * c2
        return DiffPoly._raw({k: v for k, v in out.items() if not is_zero(v)}, order)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = DiffPoly.const(1, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def mul_exp(self, kappa: Any) -> "DiffPoly":
        """Multiply by e^{kappa u}."""
        return DiffPoly._raw({(e, norm_kappa(k + kappa), J): c for (e, k, J), c in self.terms.items()},
                             self.order)

    def mul_eps(self, k: int) -> "DiffPoly":
        """Multiply by eps^k (k may be negative when the low orders vanish)."""
        if k < 0 and any(e + k < 0 for (e, _, _) in self.terms):
            raise ValueError(f"cannot divide by eps^{-k}: low-order terms present")
        order = None if self.order is None else self.order + k
        return DiffPoly._raw({(e + k, kap, J): c for (e, kap, J), c in self.terms.items()}, order)

    def map_coeffs(self, f: Callable[[Any], Any]) -> "DiffPoly":
        return DiffPoly({k: f(c) for k, c in self.terms.items()}, self.order)

    # -- epsilon structure -------------------------------------------------
    def eps_part(self, e: int) -> "DiffPoly":
        """The eps^e coefficient as an exact (eps-free) DiffPoly."""
        return DiffPoly._raw({(0, k, J): c for (ee, k, J), c in self.terms.items() if ee == e}, None)

    def eps_powers(self) -> set[int]:
        return {e for (e, _, _) in self.terms}

    def min_eps(self) -> int | None:
        return min((e for (e, _, _) in self.terms), default=None)

    def odd_part(self) -> "DiffPoly":
        return DiffPoly._raw({k: c for k, c in self.terms.items() if k[0] % 2}, self.order)

    def to_series(self, order: int | None = None) -> EpsSeries:
        order = _min_order(self.order, order)
        if order is None:
            order = max(self.eps_powers(), default=0)
        return EpsSeries(tuple(self.eps_part(e) for e in range(order + 1)), order)

    @classmethod
    def from_series(cls, s: EpsSeries) -> "DiffPoly":
        out = DiffPoly.zero(s.order)
        for e, c in enumerate(s.coeffs):
            if isinstance(c, DiffPoly):
                out = out + c.with_order(None).mul_eps(e).with_order(s.order)
            elif not is_zero(c):
                out = out + DiffPoly.const(c, s.order).mul_eps(e).with_order(s.order)
        return out.with_order(s.order)

    def coeff_series(self, kappa: Any, J: Iterable[int]) -> EpsSeries:
        """Coefficient of e^{kappa u} u^{(J)} as a series in eps (JetTerm view)."""
        J = tuple(sorted(J, reverse=True))
        kappa = norm_kappa(kappa)
        order = self.order if self.order is not None else max(self.eps_powers(), default=0)
        coeffs = [self.terms.get((e, kappa, J), 0) for e in range(order + 1)]
        return EpsSeries(tuple(coeffs), order)

    def jet_terms(self) -> dict:
        """Map (kappa, J) -> EpsSeries coefficient."""
        keys = sorted({(k, J) for (_, k, J) in self.terms}, key=lambda t: (sort_key(t[0]), t[1]))
        return {key: self.coeff_series(*key) for key in keys}

    def coeff(self, kappa: Any = 0, J: Iterable[int] = (), eps: int = 0) -> Any:
        return self.terms.get((eps, norm_kappa(kappa), tuple(sorted(J, reverse=True))), 0)

    def kappas(self) -> set:
        return {k for (_, k, _) in self.terms}

    def exp_nilpotent(self) -> "DiffPoly":
        """exp(self) for self with no eps^0 part."""
        if self.order is None:
            raise ValueError("exp of an untruncated polynomial")
        if any(e == 0 for (e, _, _) in self.terms):
            raise ValueError("non-nilpotent exponent")
        s = series_exp(EpsSeries(tuple(self.eps_part(e) if e else 0 for e in range(self.order + 1)),
                                 self.order))
        return DiffPoly.from_series(s)

    # -- calculus ----------------------------------------------------------
    def dx(self) -> "DiffPoly":
        """Total x-derivative (Leibniz, chain rule through e^{kappa u})."""
        out: dict = defaultdict(int)
        for (e, k, J), c in self.terms.items():
            if not is_zero(k):
                out[(e, k, merge_jets(J, (1,)))] += c * k
            prev = None
            for i, j in enumerate(J):
                if j == prev:
                    continue
                prev = j
                mult = J.count(j)
                newJ = list(J)
                newJ[i] = j + 1
                out[(e, k, tuple(sorted(newJ, reverse=True)))] += c * mult
        return DiffPoly._raw({k: v for k, v in out.items() if not is_zero(v)}, self.order)

    def dxn(self, k: int) -> "DiffPoly":
        out = self
        for _ in range(k):
            out = out.dx()
        return out

    def partial_jet(self, k: int) -> "DiffPoly":
        """d/du^{(k)} with u, u', u'', ... independent (k=0 acts on e^{kappa u})."""
        out: dict = defaultdict(int)
        for (e, kap, J), c in self.terms.items():
            if k == 0:
                if not is_zero(kap):
                    out[(e, kap, J)] += c * kap
                continue
            mult = J.count(k)
            if mult:
                newJ = list(J)
                newJ.remove(k)
                out[(e, kap, tuple(newJ))] += c * mult
        return DiffPoly._raw({key: v for key, v in out.items() if not is_zero(v)}, self.order)

    def max_jet(self) -> int:
        return max((J[0] for (_, _, J) in self.terms if J), default=0)

    def shift(self, s: Any) -> "DiffPoly":
        """f(x + s eps) = sum_k (s eps)^k/k! d^k f, truncated at self.order."""
        if is_zero(s):
            return self
        if self.order is None:
            raise ValueError("shift needs a truncation order")
        out = self
        cur = self
        sk: Any = 1
        low = self.min_eps() or 0
        for k in range(1, self.order - low + 1):
            cur = cur.truncate(self.order - k).dx()
            sk = sk * s
            out = out + cur.mul_eps(k).scale(sk * Fraction(1, factorial(k))).with_order(self.order)
        return out

    # -- grading -----------------------------------------------------------
    def grade_deg(self):
        """Homogeneous degree (sum J - eps power), or a sorted list of all degrees."""
        degs = {sum(J) - e for (e, _, J) in self.terms}
        if len(degs) <= 1:
            return degs.pop() if degs else 0
        return GradeReport(sorted(degs, reverse=True))

    # -- evaluation --------------------------------------------------------
    def substitute_jets(self, jet_values: Mapping[int, EpsSeries], u_value: EpsSeries | None = None,
                        exp_u: Callable[[Any], Any] | None = None) -> EpsSeries:
        """Evaluate on concrete jets.

        ``jet_values[k]`` is the series standing for u^{(k)}.  Exponentials use
        ``exp_u(kappa)`` when given, else ``series_exp(kappa * u_value)``
        (which needs ``u_value`` without constant term).
        """
        orders = [s.order for s in jet_values.values()]
        if u_value is not None:
            orders.append(u_value.order)
        if self.order is not None:
            orders.append(self.order)
        order = min(orders) if orders else 0
        total: Any = EpsSeries((0,), order)
        exp_cache: dict = {}
        pow_cache: dict = {}
        for (e, kap, J), c in sorted(self.terms.items(), key=lambda t: _key_sort(t[0])):
            if e > order:
                continue
            term: Any = EpsSeries((c,), order)
            if not is_zero(kap):
                if kap not in exp_cache:
                    if exp_u is not None:
                        exp_cache[kap] = exp_u(kap)
                    elif u_value is not None:
                        exp_cache[kap] = series_exp(u_value * kap)
                    else:
                        raise ValueError("exponential factor present but no u value supplied")
                term = term * exp_cache[kap]
            for j in set(J):
                if j not in jet_values:
                    raise MissingJetError(f"missing jet order {j}")
                p = J.count(j)
                if (j, p) not in pow_cache:
                    base = jet_values[j]
                    acc = base
                    for _ in range(p - 1):
                        acc = acc * base
                    pow_cache[(j, p)] = acc
                term = term * pow_cache[(j, p)]
            if e:
                term = EpsSeries((0,) * e + tuple(term.coeffs[: order + 1 - e]), order)
            total = total + term
        return total

    # -- rendering ---------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _key_sort(t[0]))

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (e, k, J), c in self.sorted_terms():
            s = f"({scalar_str(c)})"
            if e:
                s += f"*eps^{e}"
            s += f"*e^{{{scalar_str(k)}u}}"
            for j in sorted(set(J), reverse=True):
                p = J.count(j)
                s += f"*u{j}" + (f"^{p}" if p > 1 else "")
            parts.append(s)
        return " + ".join(parts)


def _key_sort(key):
    e, k, J = key
    return (e, sort_key(k), J)


class GradeReport(list):
    """Degrees found in a non-homogeneous DiffPoly (highest first)."""

    homogeneous = False


def partitions(n: int, max_part: int | None = None) -> list[tuple]:
    """Partitions of n as non-increasing tuples, in reverse-lex order."""
    if max_part is None:
        max_part = n
    if n == 0:
        return [()]
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            out.append((first,) + rest)
    return out


def chain_rule_T(f: DiffPoly, flow: DiffPoly, order: int | None = None) -> DiffPoly:
    """Time derivative of f along du/dT = flow: sum_k d^k(flow) * df/du^{(k)}."""
    order = _min_order(_min_order(f.order, flow.order), order)
    out = DiffPoly.zero(order)
    for k in range(f.max_jet() + 1):
        part = f.partial_jet(k)
        if not part:
            continue
        low = part.min_eps() or 0
        cur = flow if order is None else flow.truncate(order - low)
        for _ in range(k):
            cur = cur.dx()
        out = out + (part * cur).with_order(order)
    return out


def jet(k: int, order: int | None = None) -> DiffPoly:
    return DiffPoly.jet(k, order)


def exp_u(kappa: Any, order: int | None = None) -> DiffPoly:
    return DiffPoly.exp(kappa, order)
