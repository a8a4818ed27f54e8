from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fvhgap.diff_poly import DiffPoly, GradeReport, MissingJetError, chain_rule_T, partitions
from fvhgap.exact_algebra import EpsSeries, series_exp

from conftest import small_fractions


@st.composite
def diff_polys(draw, max_terms=3, order=4, homogeneous=None):
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        if homogeneous is None:
            J = tuple(sorted(draw(st.lists(st.integers(1, 3), max_size=3)), reverse=True))
            e = draw(st.integers(0, 2))
        else:
            J = draw(st.sampled_from(partitions(homogeneous)))
            e = 0
        kappa = draw(st.sampled_from([Fraction(0), Fraction(1), Fraction(1, 2), Fraction(-2, 3)]))
        key = (e, kappa, J)
        terms[key] = terms.get(key, 0) + draw(small_fractions.filter(lambda f: f != 0))
    return DiffPoly(terms, order)


def u_series(order):
    """u(x) = x + x^2/2 + x^3/3 ... expanded as a series in x (the 'eps' slot)."""
    return EpsSeries(tuple(Fraction(1, k) if k else 0 for k in range(order + 1)), order)


def derivative(s: EpsSeries) -> EpsSeries:
    return EpsSeries(tuple(k * s.coeffs[k] for k in range(1, s.order + 1)), s.order - 1)


class TestCalculus:
    @given(diff_polys(), diff_polys())
    def test_dx_is_a_derivation(self, f, g):
        assert (f * g).dx() == f.dx() * g + f * g.dx()

    @given(diff_polys(homogeneous=2), diff_polys(homogeneous=3))
    def test_grade_additive(self, f, g):
        assert (f * g).grade_deg() == f.grade_deg() + g.grade_deg()

    def test_grade_report_for_inhomogeneous(self):
        f = DiffPoly.jet(1) + DiffPoly.jet(2)
        assert isinstance(f.grade_deg(), GradeReport)
        assert list(f.grade_deg()) == [2, 1]

    def test_exponential_chain_rule(self):
        f = DiffPoly.exp(Fraction(1, 2))
        assert f.dx() == DiffPoly.monomial((1,), Fraction(1, 2), coeff=Fraction(1, 2))

    @given(diff_polys(order=6), st.sampled_from([Fraction(1), Fraction(-1, 2), Fraction(3, 2)]),
           st.sampled_from([Fraction(1), Fraction(2, 3)]))
    def test_shift_composes(self, f, a, b):
        assert f.shift(a).shift(b) == f.shift(a + b)

    @given(diff_polys())
    def test_substitute_commutes_with_dx(self, f):
        order = 8
        u = u_series(order + 6)
        d = [u]
        for _ in range(8):
            d.append(derivative(d[-1]))
        jets = {k: d[k] for k in range(1, 8)}
        f = f.with_order(None).eps_part(0)
        lhs = f.dx().substitute_jets(jets, u_value=u.truncate(order))
        rhs = derivative(f.substitute_jets(jets, u_value=u.truncate(order + 1)))
        assert lhs.truncate(order - 1) == rhs.truncate(order - 1)

    def test_missing_jet_raises(self):
        with pytest.raises(MissingJetError):
            DiffPoly.jet(3).substitute_jets({1: EpsSeries((1,), 0)})

    def test_product_keeps_cross_terms(self):
        a = DiffPoly.monomial((), 0, 2, 1, order=4)
        b = DiffPoly.const(1, order=2) + DiffPoly.monomial((2,), 0, 2, 1, order=2)
        prod = a * b
        assert prod.order == 4
        assert prod.coeff(0, (2,), 4) == 1

    def test_chain_rule(self):
        # f = e^u u', flow = u''  -> d/dT f = e^u u' u'' + e^u u'''
        f = DiffPoly.monomial((1,), 1)
        out = chain_rule_T(f, DiffPoly.jet(2))
        assert out == DiffPoly.monomial((2, 1), 1) + DiffPoly.monomial((3,), 1)

    def test_exp_nilpotent(self):
        a = DiffPoly.monomial((1,), 0, 1, 1, order=3)
        e = a.exp_nilpotent()
        assert e.coeff(0, (1, 1), 2) == Fraction(1, 2)
        assert e.coeff(0, (1, 1, 1), 3) == Fraction(1, 6)

    def test_render_is_stable(self):
        f = DiffPoly.monomial((2,), 0, coeff=Fraction(1, 24)) + DiffPoly.monomial((1, 1), 0, coeff=3)
        assert f.render() == f.render()
        assert "u2" in f.render() and "u1^2" in f.render()

    def test_untruncated_shift_rejected(self):
        with pytest.raises(ValueError):
            DiffPoly.jet(1).shift(1)


def test_partitions_counts():
    assert [len(partitions(k)) for k in range(8)] == [1, 1, 2, 3, 5, 7, 11, 15]
    assert partitions(4) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_series_exp_matches_substitution():
    u = EpsSeries((0, 1, 0, 0), 3)
    f = DiffPoly.exp(Fraction(2))
    assert f.substitute_jets({}, u_value=u) == series_exp(u * 2)
