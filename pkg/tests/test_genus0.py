import json
from fractions import Fraction

import pytest
import sympy as sp

from fvhgap import genus0 as g0
from fvhgap.shift_ops import LaxParams

PAIRS = [(1, 2), (2, 3), (3, 2)]


@pytest.fixture(scope="module", params=PAIRS, ids=lambda p: f"{p[0]}-{p[1]}")
def data(request):
    d = g0.solve_v_top(LaxParams(*request.param), D=3)
    g0.build_F0(d)
    return d


def test_shift_constant():
    assert g0.shift_constant(LaxParams(2, 3)) == Fraction(1 * 2, 120)


def test_euler_lagrange(data):
    assert g0.euler_lagrange_residual(data).truncate(3).is_zero()


def test_all_identities_pass(data):
    reports = g0.check_v_top(data) + g0.check_F0(data) + g0.check_string_dilaton(data)
    names = {r["identity"] for r in reports}
    assert {"euler-lagrange", "dxdx-F0", "string-F0", "dilaton-F0"} <= names
    assert [r for r in reports if r["status"] != "pass"] == []
    assert json.loads(json.dumps(reports)) == reports


def test_perturbed_solution_fails():
    d = g0.solve_v_top(LaxParams(2, 3), D=2)
    lam = d.ring.times[0]
    d.delta = d.delta + d.ring.time(lam).scale(Fraction(1, 7))
    rep = g0.check_v_top(d)[0]
    assert rep["status"] == "fail" and "first_failure" in rep


def test_time_one_always_active():
    ring = g0.TSeriesRing(LaxParams(2, 3), ("1/m",), 2)
    assert Fraction(1) in ring.times


def test_single_time_suite():
    out = g0.genus0_suite(LaxParams(1, 2), S=("1",), D=2)
    assert all(r["status"] == "pass" for r in out)


class TestGenusOne:
    @pytest.mark.parametrize("m,n", PAIRS)
    def test_quasitriviality(self, m, n):
        out = g0.genus1_quasitrivial_check(LaxParams(m, n))
        assert [r["identity"] for r in out][:3] == [
            "A1 = d^2 tilde F1", "tilde F1 quasi-homogeneity", "A1 homogeneity"]
        assert all(r["status"] == "pass" for r in out)
        assert len(out) == 3 + len({Fraction(1, m), Fraction(1)})

    def test_wrong_a1_fails(self):
        params = LaxParams(2, 3)
        A1 = g0.a1_expr(params) * 2
        assert g0._quasitrivial_flow(params, "1", A1)["status"] == "fail"

    def test_total_derivative(self):
        z = g0._Z
        assert sp.expand(g0.total_derivative(z[1] ** 2) - 2 * z[1] * z[2]) == 0


class TestF1Report:
    @pytest.mark.parametrize("m,n", PAIRS)
    def test_values(self, m, n):
        h = m + n
        rep = g0.check_F1_relation(LaxParams(m, n))
        assert rep.z0_coeff_relation == -Fraction(n * n + h * m, 24 * n * h)
        assert rep.z0_coeff_reference == -Fraction(n * h + n * n, 24 * n * h)
        assert rep.discrepancy == Fraction(h * (n - m), 24 * n * h)
        assert rep.log_coeff_relation == rep.log_coeff_reference == Fraction(1, 24)
        data = rep.to_json()
        assert data["match"] is False and data["notes"]

    def test_agrees_when_m_equals_n(self):
        assert g0.check_F1_relation(LaxParams(1, 1)).to_json()["match"] is True
