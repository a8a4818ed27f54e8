from fractions import Fraction

from hypothesis import settings, strategies as st

settings.register_profile("fvhgap", max_examples=40, deadline=None)
settings.load_profile("fvhgap")

small_fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
nonzero_fractions = small_fractions.filter(lambda f: f != 0)


def coprime_pair_strategy(max_value=5):
    from math import gcd
    return st.tuples(st.integers(1, max_value), st.integers(1, max_value)).filter(
        lambda t: gcd(*t) == 1)


F = Fraction
