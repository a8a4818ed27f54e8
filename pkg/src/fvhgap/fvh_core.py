"""FVH quantities built on the operator calculus.

Residues in normal form ``c_lam e^{lam m u} (1 + sum eps^{2g} M_lam^[g])``,
the tau-symmetry recursion that produces ``M_lam^[g]`` without fractional
powers (and with symbolic ``m, n, lam`` if wanted), flows by two routes,
flow coefficients and the two-point functions ``Omega_{lam, mu}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Any

from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from .diff_poly import DiffPoly, chain_rule_T, partitions
from .exact_algebra import (
    FIELD, RING, EpsSeries, LinearSystem, RankReport, gen_binomial, is_zero, solve_exact, to_field,
)
from .shift_ops import (
    LaxParams, ShiftOp, commutator, frac_power, lambda_class, lax_L, res_lambda3, split_pm,
)


class EvennessError(ArithmeticError):
    pass


class RouteMismatchError(ArithmeticError):
    pass


@dataclass
class NormalFormResidue:
    lam: Any
    c: Any
    M: list = field(default_factory=list)  # M[g-1] = M_lam^[g]

    def genus(self, g: int) -> DiffPoly:
        return DiffPoly.const(1) if g == 0 else self.M[g - 1]

    def coefficient(self, g: int, J) -> Any:
        return self.genus(g).coeff(0, J)


@dataclass
class FlowRHS:
    lam: Any
    rhs: DiffPoly


def as_lambda(params: LaxParams, lam) -> Fraction:
    """Parse a lambda selector: Fraction/int, or strings 'k/m', 'k/n', 'k', 'a/b'."""
    if isinstance(lam, str):
        s = lam.strip()
        if s.endswith("/m"):
            lam = Fraction(int(s[:-2]), params.m)
        elif s.endswith("/n"):
            lam = Fraction(int(s[:-2]), params.n)
        else:
            lam = Fraction(s)
    lam = Fraction(lam)
    in1, in2 = lambda_class(params, lam)
    if not (in1 or in2):
        raise ValueError(f"lambda={lam} is not in I for (m, n)=({params.m}, {params.n})")
    return lam


def c_mu(params: LaxParams, mu) -> Fraction:
    """c_mu = binom(mu h, mu m) on I_1, binom(mu h, mu n) on I_2."""
    mu = Fraction(mu)
    in1, in2 = lambda_class(params, mu)
    if in1:
        return Fraction(gen_binomial(mu * params.h, int(mu * params.m)))
    if in2:
        return Fraction(gen_binomial(mu * params.h, int(mu * params.n)))
    raise ValueError(f"mu={mu} is not in I")


# ---------------------------------------------------------------------------
# direct residues

@lru_cache(maxsize=64)
def _frac_power_cached(m: int, n: int, lam: Fraction, depth: int, order: int, branch):
    return frac_power(LaxParams(m, n), lam, depth, order, branch)


def frac_power_of(params: LaxParams, lam, depth: int = 0, order: int | None = None,
                  branch: str | None = None) -> ShiftOp:
    order = params.order if order is None else order
    return _frac_power_cached(params.m, params.n, Fraction(lam), depth, order, branch)


def shifted_residue(params: LaxParams, lam, order: int | None = None) -> DiffPoly:
    """Lambda_1^{-1/2} res L^{lam h} (all eps powers, odd ones included)."""
    order = params.order if order is None else order
    r = res_lambda3(frac_power_of(params, lam, 0, order))
    return r.shift(Fraction(-params.n, 2))


def residue_normal_form(params: LaxParams, lam, G: int | None = None) -> NormalFormResidue:
    G = params.G if G is None else G
    lam = as_lambda(params, lam)
    r = shifted_residue(params, lam, 2 * G)
    odd = r.odd_part()
    if odd:
        raise EvennessError(f"evenness violated: {odd.render()}")
    c = c_mu(params, lam)
    kappa = lam * params.m
    stripped = r.mul_exp(-kappa).scale(1 / c)
    M = []
    for g in range(0, G + 1):
        part = stripped.eps_part(2 * g)
        if any(not is_zero(k) for k in part.kappas()):
            raise ArithmeticError(f"unexpected exponential weight in M^[{g}]")
        if g == 0:
            if part != DiffPoly.const(1):
                raise ArithmeticError(f"M^[0] != 1: {part.render()}")
            continue
        M.append(part)
    return NormalFormResidue(lam, c, M)


# ---------------------------------------------------------------------------
# tau-symmetry recursion

def _sinhc_series(a: Any, order: int) -> EpsSeries:
    """sinh(a t/2)/(a t/2) as a series in t (even powers only)."""
    coeffs = []
    for k in range(order + 1):
        if k % 2:
            coeffs.append(0)
        else:
            coeffs.append((a * Fraction(1, 2)) ** k * Fraction(1, factorial(k + 1)))
    return EpsSeries(tuple(coeffs), order)


def _apply_even_operator(series: EpsSeries, f: DiffPoly, extra: int, order: int) -> DiffPoly:
    """sum_k series[k] eps^k d^{k+extra} f, truncated at order."""
    out = DiffPoly.zero(order)
    low = f.min_eps() or 0
    cur = f.truncate(order)
    for _ in range(extra):
        cur = cur.dx()
    for k in range(0, order - low + 1):
        if k:
            cur = cur.truncate(order - k).dx()
        c = series[k]
        if is_zero(c):
            continue
        out = out + cur.mul_eps(k).with_order(order).scale(c)
    return out


def seed_residue(m: Any, n: Any, order: int) -> DiffPoly:
    """(m/h) Lambda_1^{-1/2} res L^{h/m} = [sinhc(h t)/sinhc(m t)] e^u with t = eps d/dx."""
    h = m + n
    ratio = _sinhc_series(h, order) * _sinhc_series(m, order).inverse()
    return _apply_even_operator(ratio, DiffPoly.exp(1, order), 0, order)


def flow_from_residue(n: Any, X: DiffPoly, order: int) -> DiffPoly:
    """eps^{-1}(Lambda_1^{1/2} - Lambda_1^{-1/2}) X = n * sinhc(n t) d/dx X."""
    return _apply_even_operator(_sinhc_series(n, order), X, 1, order).scale(n)


def _tau_residual(X: DiffPoly, Y: DiffPoly, n: Any, order: int) -> DiffPoly:
    phi = flow_from_residue(n, Y, order)
    psi = flow_from_residue(n, X, order)
    return chain_rule_T(X, phi, order) - chain_rule_T(Y, psi, order)


def _as_poly(c: Any) -> Any:
    if isinstance(c, FracElement) and c.denom.is_ground:
        return c.numer.quo_ground(c.denom.LC)
    return c


def tau_symmetry_M(m: Any, n: Any, lam: Any, G: int) -> list:
    """M_lam^[1..G] (with c_lam divided out) from the tau-symmetry condition.

    ``m, n, lam`` may be numbers or elements of the polynomial ring
    ``RING`` (symbolic).  Solves one linear system per genus.
    """
    kappa = lam * m
    order = 2 * G
    Y = seed_residue(m, n, order)
    X = DiffPoly.exp(kappa, order)
    Ms: list = []
    symbolic = any(isinstance(v, (PolyElement, FracElement)) for v in (m, n, lam))
    for g in range(1, G + 1):
        o = 2 * g
        base = _tau_residual(X.truncate(o), Y.truncate(o), n, o)
        low = base.truncate(o - 1)
        if low:
            raise ArithmeticError(f"tau-symmetry residual nonzero below eps^{o}")
        Js = partitions(o)
        cols = []
        for J in Js:
            Z = DiffPoly.monomial(J, kappa, o, 1, order=o)
            cols.append(_tau_residual(Z, Y.truncate(o), n, o).eps_part(o))
        rows_keys = set()
        for col in cols:
            rows_keys |= set(col.terms)
        rows_keys |= set(base.eps_part(o).terms)
        rows_keys = sorted(rows_keys, key=lambda k: (str(k[1]), k[2]))
        conv = to_field if symbolic else (lambda v: v)
        matrix = [[conv(col.terms.get(k, 0)) for col in cols] for k in rows_keys]
        rhs = [conv(-base.eps_part(o).terms.get(k, 0)) for k in rows_keys]
        sol = solve_exact(LinearSystem.of(matrix, rhs))
        if isinstance(sol, RankReport):
            raise ArithmeticError(f"tau-symmetry system at genus {g} not uniquely solvable: {sol}")
        Mg = DiffPoly({(0, 0, J): _as_poly(a) for J, a in zip(Js, sol)})
        Ms.append(Mg)
        X = X + Mg.mul_exp(kappa).mul_eps(o).with_order(order)
    return Ms


def m_coeffs_via_tau_symmetry(params: LaxParams, lam, G: int | None = None) -> NormalFormResidue:
    G = params.G if G is None else G
    lam = as_lambda(params, lam)
    Ms = tau_symmetry_M(Fraction(params.m), Fraction(params.n), lam, G)
    return NormalFormResidue(lam, c_mu(params, lam), Ms)


@lru_cache(maxsize=8)
def symbolic_M1(G: int) -> tuple:
    """M_1^[1..G] with m, n symbolic (coefficients in QQ[m, n])."""
    m, n = RING.gens[0], RING.gens[1]
    return tuple(tau_symmetry_M(m, n, Fraction(1), G))


def symbolic_M_lambda(G: int) -> tuple:
    """M_lam^[1..G] with m, n and lam all symbolic."""
    m, n, lam = RING.gens[0], RING.gens[1], RING.gens[2]
    return tuple(tau_symmetry_M(m, n, lam, G))


def normal_form_to_residue(nf: NormalFormResidue, params: LaxParams, order: int) -> DiffPoly:
    """c e^{lam m u} sum eps^{2g} M^[g] as a truncated DiffPoly."""
    kappa = nf.lam * params.m
    out = DiffPoly.exp(kappa, order, nf.c)
    for g, Mg in enumerate(nf.M, start=1):
        if 2 * g > order:
            break
        out = out + Mg.mul_exp(kappa).scale(nf.c).mul_eps(2 * g).with_order(order)
    return out


# ---------------------------------------------------------------------------
# flows

def flow_rhs(params: LaxParams, lam, G: int | None = None, route: str = "tau_symmetric") -> FlowRHS:
    G = params.G if G is None else G
    lam = as_lambda(params, lam)
    order = 2 * G
    if route == "tau_symmetric":
        X = normal_form_to_residue(residue_normal_form(params, lam, G), params, order)
        return FlowRHS(lam, flow_from_residue(Fraction(params.n), X, order))
    if route == "lax_commutator":
        return FlowRHS(lam, _lax_flow(params, lam, order))
    raise ValueError(f"unknown route {route!r}")


def _lax_flow(params: LaxParams, lam: Fraction, order: int) -> DiffPoly:
    """du/dT from eps dL/dT = [(L^{lam h})_+, L] (I_1) or -[(L^{lam h})_-, L] (I_2)."""
    in1, _ = lambda_class(params, lam)
    E = order + 1
    B = frac_power_of(params, lam, 0, E, "positive" if in1 else "negative")
    L = lax_L(params, E)
    plus, minus = split_pm(B)
    if in1:
        C = commutator(plus, L)
    else:
        C = -commutator(minus, L)
    coeff = C.coeff(-params.n)
    for s, c in C.terms.items():
        if s != -params.n and c:
            raise ArithmeticError(f"commutator has a Lambda^{s} component")
    if coeff.eps_part(0):
        raise ArithmeticError("eps^0 part of the commutator does not vanish")
    return coeff.mul_exp(-1).mul_eps(-1).truncate(order)


def check_flow_routes(params: LaxParams, lam, G: int | None = None) -> FlowRHS:
    a = flow_rhs(params, lam, G, "tau_symmetric")
    b = flow_rhs(params, lam, G, "lax_commutator")
    if a.rhs != b.rhs:
        raise RouteMismatchError("flow route disagreement")
    return a


def flow_coeff_CJ(params: LaxParams, lam, J, G: int | None = None, flow: FlowRHS | None = None):
    """Coefficient of e^{lam m u} u^{(J)} in du/dT_lam divided by lam m n c_lam."""
    J = tuple(sorted(J, reverse=True))
    w = sum(J)
    if w % 2 == 0:
        raise ValueError("|J| must be odd")
    g = (w - 1) // 2
    lam = as_lambda(params, lam)
    if flow is None:
        flow = flow_rhs(params, lam, max(g, params.G if G is None else G))
    norm = lam * params.m * params.n * c_mu(params, lam)
    return Fraction(flow.rhs.coeff(lam * params.m, J, 2 * g)) / norm


def flow_coeff_table(params: LaxParams, lam, G: int, flow: FlowRHS | None = None) -> dict:
    lam = as_lambda(params, lam)
    flow = flow_rhs(params, lam, G) if flow is None else flow
    table = {}
    for g in range(0, G + 1):
        for J in partitions(2 * g + 1):
            table[J] = flow_coeff_CJ(params, lam, J, G, flow)
    return table


# ---------------------------------------------------------------------------
# two-point functions

def _lattice_coeff(op: ShiftOp, j: int, h: int) -> DiffPoly:
    return op.coeff(Fraction(j * h))


def omega(params: LaxParams, lam, mu, G: int | None = None, branch: str | None = None) -> DiffPoly:
    """Omega_{lam, mu}; ``branch`` picks the I_1 or I_2 formula when lam is in both."""
    G = params.G if G is None else G
    order = 2 * G
    lam = as_lambda(params, lam)
    mu = as_lambda(params, mu)
    m, n, h = params.m, params.n, params.h
    in1, in2 = lambda_class(params, lam)
    if branch is None:
        branch = "I1" if in1 else "I2"
    if (branch == "I1" and not in1) or (branch == "I2" and not in2):
        raise ValueError(f"lambda={lam} not in {branch}")
    mu_in1, _ = lambda_class(params, mu)
    top = int(lam * m) if branch == "I1" else int(lam * n)
    A = frac_power_of(params, lam, top, order, "positive" if branch == "I1" else "negative")
    B = frac_power_of(params, mu, top, order, "positive" if mu_in1 else "negative")
    total = DiffPoly.zero(order)
    for j in range(1, top + 1):
        if branch == "I1":
            left = _lattice_coeff(A, j, h).shift(-j * h)
            right = _lattice_coeff(B, -j, h)
        else:
            left = _lattice_coeff(A, -j, h)
            right = _lattice_coeff(B, j, h).shift(-j * h)
        prod = left * right
        acc = DiffPoly.zero(order)
        for i in range(j):
            acc = acc + prod.shift(i * h)
        total = total + acc
    return total.shift(Fraction(m, 2))


def omega_leading(params: LaxParams, lam, mu) -> DiffPoly:
    """(mn/h)(lam mu/(lam + mu)) c_lam c_mu e^{(lam + mu) m u}."""
    lam = as_lambda(params, lam)
    mu = as_lambda(params, mu)
    m, n, h = params.m, params.n, params.h
    c = Fraction(m * n, h) * lam * mu / (lam + mu) * c_mu(params, lam) * c_mu(params, mu)
    return DiffPoly.exp((lam + mu) * m, None, c)


def orproperty_sides(params: LaxParams, lam, mu, G: int | None = None) -> tuple[DiffPoly, DiffPoly]:
    """Both sides of (Lambda_3 - 1) Lambda_2^{-1/2} Omega = eps d/dT_lam res L^{mu h}."""
    G = params.G if G is None else G
    order = 2 * G
    lam = as_lambda(params, lam)
    mu = as_lambda(params, mu)
    Om = omega(params, lam, mu, G).shift(Fraction(-params.m, 2))
    lhs = Om.shift(params.h) - Om
    res_mu = res_lambda3(frac_power_of(params, mu, 0, order))
    flow = flow_rhs(params, lam, G).rhs
    rhs = chain_rule_T(res_mu, flow, order).mul_eps(1).truncate(order)
    return lhs, rhs


def elementary_identity_sides(params: LaxParams, lam, mu) -> tuple[Fraction, Fraction]:
    """sum_j j binom(lam h, lam m - j) binom(mu h, mu m + j) vs (mn/h)(lam mu/(lam+mu)) c c."""
    lam, mu = Fraction(lam), Fraction(mu)
    m, n, h = params.m, params.n, params.h
    k = int(lam * m)
    lhs = sum(j * gen_binomial(lam * h, k - j) * gen_binomial(mu * h, int(mu * m) + j)
              for j in range(1, k + 1))
    rhs = Fraction(m * n, h) * lam * mu / (lam + mu) * c_mu(params, lam) * c_mu(params, mu)
    return Fraction(lhs), rhs
