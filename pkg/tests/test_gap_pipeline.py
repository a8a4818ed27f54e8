import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fvhgap import gap_pipeline as gp
from fvhgap.exact_algebra import FIELD, substitute
from fvhgap.reference import R_SIGMA_S, p_closed_forms
from fvhgap.shift_ops import LaxParams

PAIRS_C = [(1, 2), (2, 3), (3, 4)]


class TestCk:
    @pytest.mark.parametrize("m,n", PAIRS_C)
    def test_series_equals_bernoulli_sum(self, m, n):
        series = gp.c_k_series((m, n), 8)
        assert series == [gp.c_k_closed((m, n), k) for k in range(9)]

    def test_symbolic_low_orders(self):
        m, n = FIELD.gens[0], FIELD.gens[1]
        h = m + n
        C = gp.c_k_series((m, n), 2)
        assert C[0] == 1
        assert C[1] == -(n**2 + h**2) / 24
        assert C[2] == (7 * n**4 + 10 * n**2 * h**2 + 7 * h**4) / 5760
        assert gp.c_k_closed((m, n), 2) == C[2]

    def test_accepts_params(self):
        assert gp.c_k_series(LaxParams(1, 2), 1) == gp.c_k_series((1, 2), 1)


class TestSolveV:
    def test_symbolic_denominators_are_powers_of_m(self):
        sol = gp.solve_V(None, 3, "symbolic_mn")
        for p in sol.P:
            assert gp._denominator_is_m_power(p)

    def test_reference_low_genus(self):
        sol = gp.solve_V(None, 2, "symbolic_mn")
        reference = p_closed_forms()
        assert sol.P[0] == reference[1] and sol.P[1] == reference[2]

    @pytest.mark.parametrize("m,n", [(1, 2), (2, 3), (3, 1)])
    def test_numeric_matches_symbolic(self, m, n):
        sym = gp.solve_V(None, 3, "symbolic_mn")
        num = gp.solve_V(LaxParams(m, n), 3)
        assert num.P == [substitute(p, m=m, n=n) for p in sym.P]

    def test_tau_source_agrees(self):
        p = LaxParams(2, 3)
        assert gp.solve_V(p, 3, m1_source="tau").P == gp.solve_V(p, 3).P

    @given(st.integers(1, 3), st.fractions(min_value=-3, max_value=3, max_denominator=7).filter(bool))
    def test_linear_step_is_unique(self, g, delta):
        # perturbing P_g moves the s^g residual by exactly m * delta
        m, n = 2, 3
        sol = gp.solve_V(LaxParams(m, n), 3)
        Ms = gp._numeric_m1(Fraction(m), Fraction(n), 3)
        P = list(sol.P)
        P[g - 1] += delta
        res = gp._vform_residual(Fraction(m), Ms, P, 3)
        assert all(res.coeffs[k] == 0 for k in range(g))
        assert res.coeffs[g] == m * delta

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            gp.solve_V(LaxParams(1, 2), 1, mode="bogus")


class TestDifferenceEquation:
    @pytest.mark.parametrize("m,n", [(1, 2), (1, 3), (2, 3), (3, 2)])
    def test_residual_vanishes(self, m, n):
        rep = gp.verify_difference_equation(LaxParams(m, n), 3)
        assert rep.ok and rep.first_failing_order is None
        assert all(c == 0 for c in rep.residual)

    def test_detects_wrong_coefficient(self):
        p = LaxParams(2, 3)
        sol = gp.solve_V(p, 2)
        sol.P[1] += Fraction(1, 1000)
        rep = gp.verify_difference_equation(p, 2, sol)
        assert not rep.ok and rep.first_failing_order == 4

    def test_report_json(self):
        rep = gp.verify_difference_equation(LaxParams(1, 2), 1)
        assert json.loads(json.dumps(rep.to_json())) == rep.to_json()


class TestRg:
    def test_sigma_pair(self):
        s1, s3 = gp.sigma_pair(1, 2)
        assert s1 == Fraction(1, 3) - 1 - Fraction(1, 2)
        assert s3 == Fraction(2, 27) - 2 - Fraction(1, 4)

    def test_sigma_pairs_distinct(self):
        pairs = []
        for mn in gp.coprime_pairs():
            pairs.append(mn)
            if len(pairs) == 60:
                break
        assert pairs[:3] == [(1, 1), (1, 2), (1, 3)]
        assert len({gp.sigma_pair(*mn) for mn in pairs}) == 60

    @pytest.mark.parametrize("g", [2, 3])
    @pytest.mark.parametrize("m,n", [(1, 2), (2, 5), (3, 4)])
    def test_value_matches_reference_polynomial(self, g, m, n):
        expected = gp.RgPolynomial(g, gp.rg_from_sigma_basis(R_SIGMA_S[g]))
        assert gp.r_g_value(LaxParams(m, n), g) == expected(*gp.sigma_pair(m, n))

    def test_ansatz_size(self):
        assert [len(gp.ansatz_indices(g)) for g in (2, 3, 4)] == [5, 12, 22]

    @pytest.mark.parametrize("g", [2, 3])
    def test_interpolation(self, g):
        poly = gp.r_g_polynomial(g)
        d = poly.diagnostics
        assert d["rank"] == d["unknowns"] and d["surplus_rows"] > 0 and d["surplus_residual_zero"]
        assert poly.coefficients == gp.rg_from_sigma_basis(R_SIGMA_S[g])

    def test_interpolation_with_workers(self):
        assert gp.r_g_polynomial(2, workers=2).coefficients == gp.r_g_polynomial(2).coefficients

    def test_insufficient_pairs(self):
        with pytest.raises(gp.InterpolationError) as exc:
            gp.r_g_polynomial(3, pair_budget=5)
        assert exc.value.diagnostics["rank"] <= 5

    def test_genus_one_rejected(self):
        with pytest.raises(ValueError):
            gp.r_g_polynomial(1)

    def test_record_json(self):
        rec = gp.gap_record(2, 3, 3)
        data = rec.to_json()
        assert json.loads(json.dumps(data)) == data
        assert set(data["R"]) == {"2", "3"}
        assert data["sigma1"] == {"num": str(rec.sigma1.numerator), "den": str(rec.sigma1.denominator)}

    def test_worker_env(self, monkeypatch):
        monkeypatch.setenv(gp.WORKERS_ENV, "3")
        assert gp.worker_count() == 3
        monkeypatch.setenv(gp.WORKERS_ENV, "junk")
        assert gp.worker_count() == 1


def test_sigma_basis_reexpansion():
    # sigma_1 * s with s = sigma_1^3 - sigma_3/2
    assert gp.rg_from_sigma_basis({(1, 1): Fraction(2)}) == {(0, 4): 2, (1, 1): -1}


@pytest.mark.parametrize("m,n", [(1, 2), (2, 3)])
def test_reference_p3_violates_difference_equation(m, n):
    p = LaxParams(m, n)
    computed = gp.solve_V(p, 4)
    assert gp.verify_difference_equation(p, 4, computed).ok
    reference = [substitute(e, m=m, n=n) for _, e in sorted(p_closed_forms().items())]
    rep = gp.verify_difference_equation(p, 3, gp.VSolution(m, n, 3, reference[:3]))
    assert rep.first_failing_order == 6
