from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fvhgap import fvh_core as core
from fvhgap.diff_poly import DiffPoly
from fvhgap.exact_algebra import LAM, RING, LinearSystem, solve_exact, substitute
from fvhgap.reference import m1_closed_forms
from fvhgap.shift_ops import LaxParams

PAIRS = [(1, 2), (2, 3), (2, 1)]
SELECTORS = ("1/m", "2/m", "1/n", "1")


def params(m, n, G=2):
    return LaxParams(m, n, G)


class TestLambdaSelectors:
    def test_parse(self):
        p = params(2, 3)
        assert core.as_lambda(p, "1/m") == Fraction(1, 2)
        assert core.as_lambda(p, "2/n") == Fraction(2, 3)
        assert core.as_lambda(p, "1") == 1
        assert core.as_lambda(p, Fraction(3, 2)) == Fraction(3, 2)

    def test_reject_outside_index_set(self):
        with pytest.raises(ValueError):
            core.as_lambda(params(2, 3), "1/5")

    def test_c_mu(self):
        p = params(2, 3)
        assert core.c_mu(p, Fraction(1, 2)) == Fraction(5, 2)  # binom(5/2, 1)
        assert core.c_mu(p, 1) == 10
        assert core.c_mu(p, Fraction(1, 3)) == Fraction(5, 3)


class TestResidues:
    @pytest.mark.parametrize("m,n", PAIRS)
    @pytest.mark.parametrize("lam", SELECTORS)
    def test_even_and_degree_zero(self, m, n, lam):
        p = params(m, n)
        r = core.shifted_residue(p, core.as_lambda(p, lam))
        assert r.odd_part().is_zero()
        assert r.grade_deg() == 0
        nf = core.residue_normal_form(p, lam)
        assert [M.grade_deg() for M in nf.M] == [2, 4]

    @pytest.mark.parametrize("m,n", [(3, 2), (1, 3)])
    @pytest.mark.parametrize("lam", SELECTORS)
    def test_tau_route_matches_residue_route(self, m, n, lam):
        p = params(m, n)
        a = core.residue_normal_form(p, lam)
        b = core.m_coeffs_via_tau_symmetry(p, lam)
        assert a.M == b.M

    @pytest.mark.parametrize("m,n", PAIRS)
    def test_genus_one_closed_form(self, m, n):
        nf = core.residue_normal_form(params(m, n, 1), 1)
        for J, expr in m1_closed_forms()[1].items():
            assert nf.coefficient(1, J) == substitute(expr, m=m, n=n)

    def test_hand_computed_residue(self):
        # (1, 2): res L^3 = e^u(x) + e^u(x+eps) + e^u(x+2eps); shifted by -1 and divided by 3
        nf = core.residue_normal_form(params(1, 2), 1)
        assert nf.c == 3
        assert nf.coefficient(1, (2,)) == Fraction(1, 3)
        assert nf.coefficient(1, (1, 1)) == Fraction(1, 3)
        assert nf.coefficient(2, (4,)) == Fraction(1, 36)

    def test_symbolic_m1_specialises(self):
        sym = core.symbolic_M1(2)
        for m, n in PAIRS:
            nf = core.residue_normal_form(params(m, n), 1)
            for g in (1, 2):
                assert sym[g - 1].map_coeffs(lambda c: substitute(c, m=m, n=n)) == nf.M[g - 1]

    def test_lambda_degree_bound(self):
        for M in core.symbolic_M_lambda(2):
            for (_, _, J), c in M.terms.items():
                assert c.degree(RING.gens[2]) <= len(J) + sum(J) // 2

    def test_lambda_degree_bound_by_interpolation(self):
        # a_{1,(1,1)}(lambda) at (m, n) = (1, 2), sampled on lambda = k/m, k/n
        p = params(1, 2, 1)
        J = (1, 1)
        bound = len(J) + sum(J) // 2
        lams = [Fraction(k, 2) for k in range(1, bound + 4)]
        vals = [core.residue_normal_form(p, l, 1).coefficient(1, J) for l in lams]
        A = [[l**d for d in range(bound + 1)] for l in lams]
        sol = solve_exact(LinearSystem.of(A, vals))
        assert isinstance(sol, tuple)
        sym = core.symbolic_M_lambda(1)[0].coeff(0, J)
        assert substitute(sym, m=1, n=2, lam=Fraction(5, 3)) == sum(
            c * Fraction(5, 3) ** d for d, c in enumerate(sol))


class TestFlows:
    @pytest.mark.parametrize("m,n", PAIRS)
    @pytest.mark.parametrize("lam", SELECTORS)
    def test_two_routes_agree(self, m, n, lam):
        p = params(m, n)
        assert core.check_flow_routes(p, lam).rhs.grade_deg() == 1

    def test_unknown_route(self):
        with pytest.raises(ValueError):
            core.flow_rhs(params(1, 2), 1, route="nope")

    @pytest.mark.parametrize("m,n", PAIRS)
    def test_first_order_coefficient_normalised(self, m, n):
        p = params(m, n)
        for lam in SELECTORS:
            assert core.flow_coeff_CJ(p, lam, (1,), 2) == 1

    @pytest.mark.parametrize("m,n", PAIRS)
    def test_cube_of_derivative_ratio(self, m, n):
        # at lambda = 1/m the eps^2 part is proportional to D^3 e^u
        p = params(m, n)
        t = core.flow_coeff_table(p, "1/m", 1)
        assert t[(2, 1)] == 3 * t[(3,)]
        assert t[(1, 1, 1)] == t[(3,)]

    def test_even_weight_rejected(self):
        with pytest.raises(ValueError):
            core.flow_coeff_CJ(params(1, 2), 1, (2,))


class TestOmega:
    CASES = [("1/m", "1/n"), ("1/m", "1"), ("1", "1"), ("2/m", "1/n")]

    @pytest.mark.parametrize("m,n", PAIRS)
    @pytest.mark.parametrize("lam,mu", CASES)
    def test_identities(self, m, n, lam, mu):
        p = params(m, n)
        om = core.omega(p, lam, mu)
        assert om == core.omega(p, mu, lam)
        assert om.eps_part(0) == core.omega_leading(p, lam, mu)
        assert om.grade_deg() == 0
        assert om.odd_part().is_zero()
        lhs, rhs = core.orproperty_sides(p, lam, mu)
        assert lhs == rhs

    @pytest.mark.parametrize("m,n", PAIRS)
    def test_branches_agree_on_overlap(self, m, n):
        p = params(m, n)
        for mu in ("1/m", "1/n", "1"):
            assert core.omega(p, 1, mu, branch="I1") == core.omega(p, 1, mu, branch="I2")

    def test_branches_agree_at_two(self):
        p = params(1, 2)
        assert core.omega(p, 2, "1/n", branch="I1") == core.omega(p, 2, "1/n", branch="I2")

    def test_branch_must_contain_lambda(self):
        with pytest.raises(ValueError):
            core.omega(params(2, 3), "1/m", "1", branch="I2")


@given(st.sampled_from([(1, 2), (2, 3), (3, 2), (1, 3), (3, 4), (2, 1)]),
       st.integers(1, 4), st.integers(1, 4))
def test_elementary_identity(mn, a, b):
    m, n = mn
    p = LaxParams(m, n)
    lhs, rhs = core.elementary_identity_sides(p, Fraction(a, m), Fraction(b, m))
    assert lhs == rhs


def test_normal_form_roundtrip():
    p = params(2, 3)
    nf = core.residue_normal_form(p, "1/m")
    X = core.normal_form_to_residue(nf, p, 4)
    assert X == core.shifted_residue(p, Fraction(1, 2))
