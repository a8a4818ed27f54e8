"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (visible even
under output capture) naming any failing sub-check, then asserts.
"""
from fractions import Fraction

import pytest

from fvhgap import fvh_core as core
from fvhgap import gap_pipeline as gp
from fvhgap import genus0 as g0
from fvhgap.diff_poly import DiffPoly
from fvhgap.exact_algebra import FIELD, substitute
from fvhgap.reference import (
    FLOW_J, R_SIGMA_S, c_closed_forms, flow_coefficient_closed_form, m1_closed_forms,
    p_closed_forms,
)
from fvhgap.shift_ops import LaxParams, frac_power, leading_binomial

LAMBDAS = ("1/m", "2/m", "1/n", "1")
PAIRS = ((1, 2), (2, 3))


def report(capsys, number, checks):
    failed = [name for name, ok in checks if not ok]
    status = "PASS" if not failed else "FAIL"
    line = f"criterion {number}: {status} ({len(checks) - len(failed)}/{len(checks)} sub-checks)"
    if failed:
        line += " failing: " + "; ".join(failed)
    with capsys.disabled():
        print("\n" + line)
    assert not failed, line


def test_criterion_1_p_series(capsys):
    sol = gp.solve_V(None, 4, "symbolic_mn")
    reference = p_closed_forms()
    checks = [(f"P_{g} equals reference form", sol.P[g - 1] == reference[g]) for g in range(1, 5)]
    report(capsys, 1, checks)


def test_criterion_2_m_coefficients(capsys):
    checks = []
    reference = m1_closed_forms()
    for m, n in PAIRS + ((3, 2),):
        nf = core.residue_normal_form(LaxParams(m, n, 2), 1)
        for g, table in reference.items():
            for J, expr in table.items():
                checks.append((f"M_1^[{g}] u^{list(J)} at ({m},{n})",
                               nf.coefficient(g, J) == substitute(expr, m=m, n=n)))
    for m, n in PAIRS:
        p = LaxParams(m, n, 2)
        for lam in LAMBDAS:
            a = core.residue_normal_form(p, lam)
            b = core.m_coeffs_via_tau_symmetry(p, lam)
            checks.append((f"tau route = residue route ({m},{n}) lambda={lam}", a.M == b.M))
    report(capsys, 2, checks)


def test_criterion_3_r_polynomials(capsys):
    checks = []
    for g in (2, 3, 4):
        poly = gp.r_g_polynomial(g)
        d = poly.diagnostics
        checks.append((f"R_{g} rank = unknowns", d["rank"] == d["unknowns"]))
        checks.append((f"R_{g} surplus residual zero", d["surplus_rows"] > 0 and d["surplus_residual_zero"]))
        checks.append((f"R_{g} equals reference form",
                       poly.coefficients == gp.rg_from_sigma_basis(R_SIGMA_S[g])))
    report(capsys, 3, checks)


def test_criterion_4_c_coefficients(capsys):
    checks = []
    for m, n in ((1, 2), (2, 3), (3, 4)):
        series = gp.c_k_series((m, n), 8)
        for k in range(9):
            checks.append((f"C_{k} two routes ({m},{n})", series[k] == gp.c_k_closed((m, n), k)))
    sym = gp.c_k_series((FIELD.gens[0], FIELD.gens[1]), 2)
    for k, expr in c_closed_forms().items():
        checks.append((f"C_{k} equals reference form", FIELD(sym[k]) == expr))
    report(capsys, 4, checks)


def test_criterion_5_flow_coefficients(capsys):
    checks = []
    for m, n in PAIRS:
        p = LaxParams(m, n, 2)
        for lam in LAMBDAS:
            lv = core.as_lambda(p, lam)
            flow = core.flow_rhs(p, lv, 2)
            for J in FLOW_J:
                got = core.flow_coeff_CJ(p, lv, J, 2, flow)
                want = flow_coefficient_closed_form(J, Fraction(1, m), Fraction(1, n), lv)
                checks.append((f"C_bar_{''.join(map(str, J))} ({m},{n}) lambda={lam}", got == want))
    report(capsys, 5, checks)


def test_criterion_6_difference_equation(capsys):
    checks = []
    for m, n in ((1, 2), (1, 3), (2, 3)):
        rep = gp.verify_difference_equation(LaxParams(m, n), 2)
        checks.append((f"residual zero through eps^4 ({m},{n})", rep.ok))
    report(capsys, 6, checks)


def test_criterion_7_property_suites(capsys):
    checks = []
    for m, n in PAIRS:
        p = LaxParams(m, n, 2)
        for lam in LAMBDAS:
            lv = core.as_lambda(p, lam)
            r = core.shifted_residue(p, lv)
            checks.append((f"evenness ({m},{n}) {lam}", r.odd_part().is_zero()))
            checks.append((f"residue degree 0 ({m},{n}) {lam}", r.grade_deg() == 0))
            checks.append((f"flow routes ({m},{n}) {lam}",
                           core.flow_rhs(p, lv, 2, "tau_symmetric").rhs
                           == core.flow_rhs(p, lv, 2, "lax_commutator").rhs))
            A = frac_power(p, lv, depth=2, order=0)
            for k in range(-2, 3):
                try:
                    c, kappa = leading_binomial(p, lv, k)
                except ValueError:
                    c, kappa = 0, 0
                want = DiffPoly.exp(kappa, coeff=c) if c else DiffPoly.zero()
                checks.append((f"leading term ({m},{n}) {lam} k={k}",
                               A.coeff(k * p.h).eps_part(0) == want))
        for lam, mu in (("1/m", "1/n"), ("1/m", "1"), ("2/m", "1/n"), ("1", "1")):
            om = core.omega(p, lam, mu)
            lhs, rhs = core.orproperty_sides(p, lam, mu)
            checks.append((f"Omega symmetric ({m},{n}) {lam},{mu}", om == core.omega(p, mu, lam)))
            checks.append((f"Omega gradient identity ({m},{n}) {lam},{mu}", lhs == rhs))
            checks.append((f"Omega degree 0 ({m},{n}) {lam},{mu}", om.grade_deg() == 0))
        for a in range(1, 5):
            for b in range(1, 5):
                lhs, rhs = core.elementary_identity_sides(p, Fraction(a, m), Fraction(b, m))
                checks.append((f"elementary identity ({m},{n}) {a}/m,{b}/m", lhs == rhs))
    report(capsys, 7, checks)


def test_criterion_8_genus_zero_and_one(capsys):
    checks = []
    for m, n in PAIRS:
        params = LaxParams(m, n)
        for r in g0.genus0_suite(params, D=3):
            checks.append((f"{r['identity']} ({m},{n})", r["status"] == "pass"))
        for r in g0.genus1_quasitrivial_check(params, ("1/m", "1")):
            checks.append((f"{r['identity']} ({m},{n})", r["status"] == "pass"))
    report(capsys, 8, checks)


def test_criterion_9_f1_report(capsys):
    checks = []
    for m, n in PAIRS:
        rep = g0.check_F1_relation(LaxParams(m, n)).to_json()
        checks.append((f"F1 report emitted ({m},{n})",
                       {"z0_coefficient", "discrepancy", "match"} <= set(rep) and bool(rep["notes"])))
    report(capsys, 9, checks)
