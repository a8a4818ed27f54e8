"""Reference closed forms used as golden values by the fixture checks.

Polynomials are built in ``FIELD`` (variables m, n); ``R_g`` tables are
keyed by ``(a, b)`` meaning ``sigma_1^a s^b`` with ``s = sigma_1^3 - sigma_3/2``.
"""
from __future__ import annotations

from fractions import Fraction as F

from .exact_algebra import FIELD

_m, _n = FIELD.gens[0], FIELD.gens[1]
_h = _m + _n


def p_closed_forms() -> dict:
    m, n, h = _m, _n, _h
    return {
        1: (m * n * h - n * h) / (24 * m),
        2: -(4 * m**2 * n**2 * h**2 + m * n * h * (3 * m**2 - 7 * m * n - 7 * n**2)
             - n * h * (4 * m**2 - 3 * m * n - 3 * n**2) + m * n * h) / (960 * m),
        3: (8 * m**3 * n**3 * h**3
            + 4 * m**2 * n**2 * h**3 * (44 * m**2 - 19 * m * n - 19 * n**2)
            + m * n * h * (95 * m**4 - 251 * m**3 * n - 156 * m**2 * n**2 + 190 * m * n**3 + 95 * n**4)
            - n * h * (144 * m**4 - 88 * m**3 * n - 61 * m**2 * n**2 + 54 * m * n**3 + 27 * n**4)
            + m * n * h * (50 * m**2 - 13 * m * n - 13 * n**2) - m * n * h) / (72576 * m),
        4: (3376 * m**4 * n**4 * h**4
            - 32 * m**3 * n**3 * h**3 * (87 * m**2 + 62 * m * n + 62 * n**2)
            - 40 * m**2 * n**2 * h**2 * (312 * m**4 - 68 * m**3 * n - 7 * m**2 * n**2
                                         + 122 * m * n**3 + 61 * n**4)
            - m * n * h * (5257 * m**6 - 15689 * m**5 * n - 13203 * m**4 * n**2 + 3699 * m**3 * n**3
                           - 1333 * m**2 * n**4 - 3819 * m * n**5 - 1273 * n**6)
            + n * h * (8640 * m**6 - 3312 * m**5 * n - 344 * m**4 * n**2 + 5711 * m**3 * n**3
                       + 2293 * m**2 * n**4 - 675 * m * n**5 - 225 * n**6)
            - 2 * m * n * h * (1764 * m**4 - 232 * m**3 * n - 23 * m**2 * n**2 + 418 * m * n**3 + 209 * n**4)
            - 408 * m**2 * n**2 * h**2 + m * n * h * (147 * m**2 + 47 * m * n + 47 * n**2)
            - 2 * m * n * h) / (4147200 * m),
    }


def m1_closed_forms() -> dict:
    """Reference M_1^[1], M_1^[2] as {genus: {J: coefficient}}."""
    m, n, h = _m, _n, _h
    return {
        1: {(2,): m * n * (2 * m * h - n) / 24,
            (1, 1): m**3 * n * (h + 1) / 24},
        2: {(4,): m * n * (m**2 * n * h**2 - 4 * m * h * (2 * m**2 + 2 * m * n + 7 * n**2) + 7 * n**3) / 5760,
            (3, 1): m**3 * n * (h + 1) * (12 * m * n * h - 4 * m**2 - 6 * m * n - 9 * n**2) / 1440,
            (2, 2): m**2 * n * (36 * m**2 * n * h**2 - 4 * m * h * (3 * m**2 - 2 * m * n + 8 * n**2)
                                - 12 * m**3 - 8 * m**2 * n - 12 * m * n**2 + 5 * n**3) / 5760,
            (2, 1, 1): m**4 * n * (h + 1) * (22 * m * n * h - (8 * m**2 + 13 * n**2) - 4 * h) / 2880,
            (1, 1, 1, 1): m**5 * n * (h + 1) * (5 * m * n * h - (2 * m**2 - 3 * m * n + 2 * n**2) - 2 * h) / 5760},
    }


def m1_u4_corrected():
    """u'''' coefficient of M_1^[2] as produced by both residue routes."""
    m, n, h = _m, _n, _h
    return m * n * (24 * m**2 * n * h**2 - 4 * m * h * (2 * m**2 + 2 * m * n + 7 * n**2) + 7 * n**3) / 5760


def c_closed_forms() -> dict:
    n, h = _n, _h
    return {0: FIELD(1), 1: -(n**2 + h**2) / 24, 2: (7 * n**2 + 10 * n * h + 7 * h**2) / 5760}


R_SIGMA_S = {
    2: {(0, 0): F(-1, 1440), (1, 0): F(13, 5760), (2, 0): F(-7, 5760), (0, 1): F(1, 17280)},
    3: {(0, 0): F(1, 181440), (1, 0): F(-107, 362880), (2, 0): F(145, 290304),
        (3, 0): F(-31, 161280), (0, 1): F(-31, 1088640), (1, 1): F(113, 4354560),
        (0, 2): F(-1, 13063680)},
    4: {(0, 0): F(211, 10886400), (1, 0): F(1, 48600), (2, 0): F(-1193, 4354560),
        (3, 0): F(18629, 58060800), (4, 0): F(-127, 1290240),
        (0, 1): F(83, 3870720), (1, 1): F(-1657, 32659200), (2, 1): F(6469, 261273600),
        (0, 2): F(17, 65318400), (1, 2): F(247, 1567641600), (0, 3): F(-1, 2351462400)},
}


def flow_coefficient_closed_form(J, p: F, q: F, lam: F) -> F:
    """Closed forms of the normalised flow coefficients in p = 1/m, q = 1/n."""
    J = tuple(J)
    s = p + q
    if J == (1,):
        return F(1)
    if J == (3,):
        return s * lam / (12 * p**2 * q**2)
    if J == (2, 1):
        return s * lam * (2 * lam + p) / (12 * p**3 * q**2)
    if J == (1, 1, 1):
        return s * lam**2 * (lam + p) / (12 * p**4 * q**2)
    if J == (5,):
        return s * lam * (3 * s * lam - (p**2 + p * q + q**2)) / (720 * p**4 * q**4)
    if J == (4, 1):
        return (s * lam * (9 * s * lam**2 + (2 * p**2 + 2 * p * q - 3 * q**2) * lam
                           - p * (p**2 + p * q + 2 * q**2)) / (720 * p**5 * q**4))
    if J == (3, 2):
        return (s * lam * (3 * s * lam**2 + (p**2 + p * q - q**2) * lam - p * q**2)
                / (144 * p**5 * q**4))
    raise KeyError(f"no closed form for J={J}")


FLOW_J = ((3,), (2, 1), (1, 1, 1), (5,), (4, 1), (3, 2))
