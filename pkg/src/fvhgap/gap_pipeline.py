"""P_g, C_k and R_g for coprime (m, n), and the interpolated R_g(sigma_1, sigma_3).

The unknown correction ``V = (1/m) log x + sum eps^{2g} P_g x^{-2g}`` is found
order by order from ``(sum eps^{2g} M_1^[g](V', V'', ...)) e^{mV} = x``.
Every term is homogeneous in eps/x, so each order reduces to an identity in
the single series variable ``s = eps^2 / x^2``.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial, gcd
from typing import Any

from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from .exact_algebra import (
    FIELD, EpsSeries, LinearSystem, RankReport, bernoulli, gen_binomial, is_zero,
    series_exp, solve_exact, substitute, to_field,
)
from .fvh_core import symbolic_M1, tau_symmetry_M
from .shift_ops import LaxParams

WORKERS_ENV = "FVHGAP_WORKERS"


class AnsatzViolated(ArithmeticError):
    pass


class InterpolationError(ArithmeticError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class VSolution:
    m: Any
    n: Any
    G: int
    P: list  # P[g-1] = P_g


@dataclass
class GapRecord:
    m: int
    n: int
    sigma1: Fraction
    sigma3: Fraction
    C: list
    P: list
    R: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "sigma1": rational_json(self.sigma1),
            "sigma3": rational_json(self.sigma3),
            "C": [rational_json(c) for c in self.C],
            "P": [rational_json(p) for p in self.P],
            "R": {str(g): rational_json(r) for g, r in sorted(self.R.items())},
        }


@dataclass
class RgPolynomial:
    g: int
    coefficients: dict  # (k, l) -> Fraction
    diagnostics: dict = field(default_factory=dict)

    def __call__(self, sigma1, sigma3) -> Fraction:
        return sum((c * Fraction(sigma3) ** k * Fraction(sigma1) ** l
                    for (k, l), c in self.coefficients.items()), Fraction(0))

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "coefficients": [{"k": k, "l": l, "coeff": rational_json(c)}
                             for (k, l), c in sorted(self.coefficients.items())],
            "diagnostics": self.diagnostics,
        }


def rational_json(c) -> dict:
    c = Fraction(c)
    return {"num": str(c.numerator), "den": str(c.denominator)}


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# C_k

def _sinhc(a: Any, K: int) -> EpsSeries:
    # sinh(a z/2)/(a z/2) in powers of z^2
    return EpsSeries(tuple((a * Fraction(1, 2)) ** (2 * k) * Fraction(1, factorial(2 * k + 1))
                           for k in range(K + 1)), K)


def c_k_series(params, K: int) -> list:
    """C_0..C_K from n h z^2 / (4 sinh(nz/2) sinh(hz/2)) = sum C_k z^{2k}."""
    m, n = _mn(params)
    h = m + n
    return list((_sinhc(n, K) * _sinhc(h, K)).inverse().coeffs)


def c_k_closed(params, k: int) -> Any:
    """Double Bernoulli sum for C_k (with B_1 = -1/2)."""
    m, n = _mn(params)
    h = m + n
    B = bernoulli(2 * k)
    total: Any = Fraction(0)
    for k1 in range(2 * k + 1):
        for k2 in range(2 * k - k1 + 1):
            k3 = 2 * k - k1 - k2
            w = (-1) ** k2 * B[k2] * B[k3] / (2**k1 * factorial(k1) * factorial(k2) * factorial(k3))
            if w:
                total = total + (m**k1) * (n**k2) * (h**k3) * w
    return total


def _mn(params) -> tuple:
    if isinstance(params, LaxParams):
        return Fraction(params.m), Fraction(params.n)
    m, n = params
    if isinstance(m, int):
        m = Fraction(m)
    if isinstance(n, int):
        n = Fraction(n)
    return m, n


# ---------------------------------------------------------------------------
# P_g

def _falling(a: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= a - i
    return out


def _jet_series(m: Any, P: list, k: int, G: int) -> EpsSeries:
    """x^k V^{(k)} as a series in s = eps^2/x^2."""
    lead = Fraction((-1) ** (k - 1) * factorial(k - 1)) / m
    coeffs: list = [lead]
    for g in range(1, G + 1):
        coeffs.append(P[g - 1] * _falling(-2 * g, k))
    return EpsSeries(tuple(coeffs), G)


def _vform_residual(m: Any, Ms: list, P: list, G: int) -> EpsSeries:
    """x^{-1}(sum eps^{2g} M^[g](V)) e^{mV} - 1 as a series in s."""
    max_jet = max((M.max_jet() for M in Ms), default=0)
    jets = {k: _jet_series(m, P, k, G) for k in range(1, max_jet + 1)}
    total = EpsSeries.constant(1, G)
    for g, M in enumerate(Ms, start=1):
        if g > G:
            break
        val = M.substitute_jets(jets)
        shifted = (0,) * g + tuple(val.coeffs[: G + 1 - g])
        total = total + EpsSeries(shifted, G)
    expo = series_exp(EpsSeries((0,) + tuple(m * p for p in P[:G]), G))
    return total * expo - 1


def _m1_for(m: Any, n: Any, G: int, symbolic: bool) -> list:
    if symbolic:
        return [M.map_coeffs(to_field) for M in symbolic_M1(G)]
    return _numeric_m1(Fraction(m), Fraction(n), G)


@lru_cache(maxsize=256)
def _numeric_m1_cached(m: Fraction, n: Fraction, G: int) -> tuple:
    sym = symbolic_M1(G)
    return tuple(M.map_coeffs(lambda c: substitute(c, m=m, n=n)) for M in sym)


def _numeric_m1(m: Fraction, n: Fraction, G: int) -> list:
    return list(_numeric_m1_cached(m, n, G))


def solve_V(params, G: int, mode: str = "numeric_mn", m1_source: str = "symbolic") -> VSolution:
    """Solve for P_1..P_G.

    ``mode="symbolic_mn"`` works in QQ(m, n); ``params`` is then ignored
    except for validation.  ``m1_source="tau"`` recomputes M_1^[g] at the
    numeric point by the tau-symmetry recursion instead of evaluating the
    cached symbolic result.
    """
    if mode == "symbolic_mn":
        m, n = FIELD.gens[0], FIELD.gens[1]
        Ms = _m1_for(m, n, G, True)
    elif mode == "numeric_mn":
        m, n = _mn(params)
        if m1_source == "tau":
            Ms = tau_symmetry_M(m, n, Fraction(1), G)
        else:
            Ms = _m1_for(m, n, G, False)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    P: list = []
    for g in range(1, G + 1):
        trial = P + [0] * (G - len(P))
        res = _vform_residual(m, Ms, trial, g)
        for k in range(g):
            if not is_zero(res.coeffs[k]):
                raise AnsatzViolated(f"ansatz violated at order s^{k}")
        P.append(-res.coeffs[g] / m)
    final = _vform_residual(m, Ms, P, G)
    if any(not is_zero(c) for c in final.coeffs):
        raise AnsatzViolated("ansatz violated: residual survives after solving")
    if mode == "symbolic_mn":
        for g, p in enumerate(P, start=1):
            if not _denominator_is_m_power(p):
                raise AnsatzViolated(f"P_{g} has a denominator that is not a power of m")
    return VSolution(m, n, G, P)


def _denominator_is_m_power(p: Any) -> bool:
    if not isinstance(p, FracElement):
        return True
    den = p.denom
    terms = den.terms()
    if len(terms) != 1:
        return False
    (monom, _), = terms
    return all(e == 0 for i, e in enumerate(monom) if i != 0)


# ---------------------------------------------------------------------------
# difference equation

@dataclass
class ResidualReport:
    ok: bool
    first_failing_order: int | None
    residual: list

    def to_json(self) -> dict:
        return {"ok": self.ok, "first_failing_order": self.first_failing_order,
                "residual": [rational_json(c) for c in self.residual]}


def _binomial_power(c: Fraction, a: Fraction, order: int) -> EpsSeries:
    return EpsSeries(tuple(gen_binomial(a, k) * c**k for k in range(order + 1)), order)


def verify_difference_equation(params: LaxParams, G: int, solution: VSolution | None = None) -> ResidualReport:
    """Check sum over 0<=a_1<=...<=a_m<=n of exp sum_j V(x + a_j m eps - (j-1/2) n eps) = binom(h, m) x.

    With t = eps/x each summand is x prod_j (1 + c_j t)^{1/m} times
    exp(sum_{j,g} P_g t^{2g} (1 + c_j t)^{-2g}); the identity is compared in QQ[[t]].
    """
    m, n, h = params.m, params.n, params.h
    sol = solution or solve_V(params, G)
    P = [Fraction(p) for p in sol.P]
    order = 2 * G
    inv_m = Fraction(1, m)
    total = EpsSeries.constant(Fraction(0), order)
    for alphas in combinations_with_replacement(range(n + 1), m):
        cs = [Fraction(a * m) - Fraction(2 * j - 1, 2) * n for j, a in enumerate(alphas, start=1)]
        prod = EpsSeries.constant(Fraction(1), order)
        for c in cs:
            prod = prod * _binomial_power(c, inv_m, order)
        # the x-exponent of the product is m * (1/m) = 1
        expo = EpsSeries.constant(Fraction(0), order)
        for c in cs:
            for g, p in enumerate(P, start=1):
                if 2 * g > order:
                    break
                tail = _binomial_power(c, Fraction(-2 * g), order - 2 * g)
                expo = expo + EpsSeries((0,) * (2 * g) + tuple(p * v for v in tail.coeffs), order)
        total = total + prod * series_exp(expo)
    target = EpsSeries.constant(Fraction(comb(h, m)), order)
    diff = total - target
    first = next((k for k, c in enumerate(diff.coeffs) if c != 0), None)
    return ResidualReport(first is None, first, list(diff.coeffs))


# ---------------------------------------------------------------------------
# R_g

def sigma_pair(m: int, n: int) -> tuple[Fraction, Fraction]:
    h = m + n
    s1 = Fraction(1, h) - Fraction(1, m) - Fraction(1, n)
    s3 = Fraction(2, h**3) - Fraction(2, m**3) - Fraction(2, n**3)
    return s1, s3


def r_g_value(params: LaxParams, g: int, P: list | None = None, C: list | None = None) -> Fraction:
    """R_g = ((2g-3)!/(mnh)^g) (m sum_k C_{g-k} P_k/(2k-1)! - C_g)."""
    if g < 2:
        raise ValueError("R_g is defined here for g >= 2")
    m, n, h = params.m, params.n, params.h
    if P is None:
        P = solve_V(params, g).P
    if C is None:
        C = c_k_series(params, g)
    s = sum((Fraction(C[g - k]) * Fraction(P[k - 1]) / factorial(2 * k - 1) for k in range(1, g + 1)),
            Fraction(0))
    return Fraction(factorial(2 * g - 3), (m * n * h) ** g) * (m * s - Fraction(C[g]))


def gap_record(m: int, n: int, G: int) -> GapRecord:
    params = LaxParams(m, n)
    P = [Fraction(p) for p in solve_V(params, G).P]
    C = [Fraction(c) for c in c_k_series(params, G)]
    s1, s3 = sigma_pair(m, n)
    R = {g: r_g_value(params, g, P, C) for g in range(2, G + 1)}
    return GapRecord(m, n, s1, s3, C, P, R)


def coprime_pairs():
    """Coprime (m, n) with m <= n by increasing m + n, then m."""
    s = 2
    while True:
        for m in range(1, s // 2 + 1):
            n = s - m
            if gcd(m, n) == 1:
                yield m, n
        s += 1


def ansatz_indices(g: int) -> list[tuple[int, int]]:
    return [(k, l) for k in range(g) for l in range(3 * g - 3 - 3 * k + 1)]


def _record_job(args):
    m, n, g = args
    return gap_record(m, n, g)


def gap_records(pairs, G: int, workers: int | None = None) -> list[GapRecord]:
    workers = worker_count() if workers is None else workers
    jobs = [(m, n, G) for m, n in pairs]
    if workers <= 1:
        return [_record_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_record_job, jobs))


def r_g_polynomial(g: int, pair_budget: int = 200, oversample: Fraction = Fraction(3, 2),
                   workers: int | None = None) -> RgPolynomial:
    """Interpolate R_g = sum R_{g;k,l} sigma_3^k sigma_1^l from exact values."""
    if g < 2:
        raise ValueError("g must be >= 2")
    idx = ansatz_indices(g)
    need = -(-len(idx) * oversample.numerator // oversample.denominator)
    pairs: list = []
    seen: set = set()
    for mn in coprime_pairs():
        if len(pairs) >= pair_budget:
            break
        sig = sigma_pair(*mn)
        if sig in seen:
            continue
        seen.add(sig)
        pairs.append(mn)
        if len(pairs) >= need:
            break
    while True:
        records = gap_records(pairs, g, workers)
        matrix = [[r.sigma3**k * r.sigma1**l for (k, l) in idx] for r in records]
        rhs = [r.R[g] for r in records]
        sol = solve_exact(LinearSystem.of(matrix, rhs))
        diag = {"pairs": [list(p) for p in pairs], "unknowns": len(idx), "rows": len(matrix)}
        if isinstance(sol, RankReport):
            diag.update(rank=sol.rank, consistent=sol.consistent)
            if not sol.consistent:
                raise InterpolationError("ansatz mismatch", diag)
            if len(pairs) >= pair_budget:
                raise InterpolationError("insufficient sigma-separation", diag)
            extra = []
            for mn in coprime_pairs():
                sig = sigma_pair(*mn)
                if sig not in seen and len(pairs) + len(extra) < pair_budget:
                    seen.add(sig)
                    extra.append(mn)
                if len(extra) >= len(idx) // 2 + 1 or len(pairs) + len(extra) >= pair_budget:
                    break
            pairs = pairs + extra
            continue
        coeffs = {key: c for key, c in zip(idx, sol) if c != 0}
        poly = RgPolynomial(g, coeffs)
        surplus = [poly(r.sigma1, r.sigma3) - r.R[g] for r in records]
        diag.update(rank=len(idx), consistent=True,
                    surplus_rows=len(records) - len(idx),
                    surplus_residual_zero=all(v == 0 for v in surplus))
        if not diag["surplus_residual_zero"]:
            raise InterpolationError("ansatz mismatch", diag)
        poly.diagnostics = diag
        return poly


def rg_from_sigma_basis(terms: dict) -> dict:
    """Re-expand sum c_{a,b} sigma_1^a s^b, s = sigma_1^3 - sigma_3/2, into (k, l) -> coeff."""
    out: dict = {}
    for (a, b), c in terms.items():
        for i in range(b + 1):
            # s^b = sum_i binom(b, i) sigma_1^{3(b-i)} (-sigma_3/2)^i
            w = Fraction(c) * comb(b, i) * Fraction(-1, 2) ** i
            key = (i, a + 3 * (b - i))
            out[key] = out.get(key, Fraction(0)) + w
    return {k: v for k, v in out.items() if v != 0}
