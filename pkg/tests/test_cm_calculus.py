import math
import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import corpus
from cmfib.cm_calculus import (
    FibrationData,
    alpha_degree,
    ch_expand,
    cm_degree,
    compute_s,
    hilbert_poly,
    morita_genus,
    pushforward_degree_poly,
    twist,
)
from cmfib.errors import InconsistentDataError
from cmfib.formal_poly import FormalPoly

GENUS2 = FibrationData(n=1, v=2, kl_fibre=2, ell=8, k=8)
P2 = FibrationData(n=2, v=1, kl_fibre=-3, ell=6, k=6)
ELLIPTIC = FibrationData(n=1, v=1, kl_fibre=0, ell=0, k=0)


def sympy_combination(data: FibrationData) -> dict[int, Fraction]:
    """Expand the Cornalba-Harris combination with sympy, straight from the formulas."""
    m = sp.Symbol("m")
    n = data.n
    Q = lambda q: sp.Rational(q.numerator, q.denominator)  # noqa: E731
    v, ell, k, kl = Q(data.v), Q(data.ell), Q(data.k), Q(data.kl_fibre)
    s = -n * kl / v
    h = v * (m**n / sp.factorial(n) + s * m ** (n - 1) / (2 * sp.factorial(n)))
    h += sum(Q(c) * m**j for j, c in enumerate(data.lower_order_h or ()))
    push = ell * m ** (n + 1) / sp.factorial(n + 1) - k * m**n / (2 * sp.factorial(n))
    push += sum(Q(c) * m**j for j, c in enumerate(data.lower_order_push or ()))
    expr = sp.expand(h * m ** (n + 1) * ell - m**n * (n + 1) * v * push)
    poly = sp.Poly(expr, m)
    return {e[0]: Fraction(int(c.p), int(c.q)) for e, c in zip(poly.monoms(), poly.coeffs()) if c != 0}


# --- compute_s ---------------------------------------------------------------

@pytest.mark.parametrize("data, expected", [(GENUS2, -1), (ELLIPTIC, 0), (P2, 6)])
def test_compute_s_examples(data, expected):
    assert compute_s(data) == expected


def test_constructor_rejects_inconsistent_s():
    FibrationData(n=2, v=1, kl_fibre=-3, ell=6, k=6, expected_s=6)
    with pytest.raises(InconsistentDataError, match="disagrees"):
        FibrationData(n=2, v=1, kl_fibre=-3, ell=6, k=6, expected_s=3)


@pytest.mark.parametrize("kwargs", [
    dict(n=1, v=0, kl_fibre=0, ell=0, k=0),
    dict(n=1, v=-2, kl_fibre=0, ell=0, k=0),
    dict(n=0, v=1, kl_fibre=0, ell=0, k=0),
    dict(n=1, v=1, kl_fibre=0, ell=0, k=0, lower_order_h=[1]),
    dict(n=2, v=1, kl_fibre=0, ell=0, k=0, lower_order_push=[1, 2, 3]),
])
def test_constructor_rejects_invalid(kwargs):
    with pytest.raises(InconsistentDataError):
        FibrationData(**kwargs)


def test_json_round_trip_and_errors():
    payload = {"n": 2, "v": "3/2", "kl_fibre": "-1/2", "ell": 7, "k": "-5/3",
               "lower_order_h": ["1/7"], "lower_order_push": None}
    data = FibrationData.from_json(payload)
    assert data.v == Fraction(3, 2) and data.lower_order_h == (Fraction(1, 7),)
    assert FibrationData.from_json(data.to_json()) == data
    with pytest.raises(InconsistentDataError, match="unknown"):
        FibrationData.from_json({**payload, "extra": 1})
    with pytest.raises(InconsistentDataError, match="missing"):
        FibrationData.from_json({"n": 1})
    with pytest.raises(InconsistentDataError):
        FibrationData.from_json({**payload, "v": 0.5})


# --- hilbert_poly / pushforward ----------------------------------------------

def test_hilbert_poly_examples():
    assert hilbert_poly(GENUS2) == FormalPoly({1: 2, 0: -1})
    assert hilbert_poly(ELLIPTIC) == FormalPoly({1: 1})
    assert hilbert_poly(P2) == FormalPoly({2: Fraction(1, 2), 1: Fraction(3, 2)})
    assert hilbert_poly(P2).degree == 2


@pytest.mark.parametrize("g", range(2, 9))
def test_hilbert_poly_matches_riemann_roch(g):
    # canonical polarisation of a genus-g curve: deg K = 2g - 2
    data = FibrationData(n=1, v=2 * g - 2, kl_fibre=2 * g - 2, ell=0, k=0)
    h = hilbert_poly(data)
    for m in range(1, 12):
        assert h(m) == m * (2 * g - 2) + 1 - g  # deg(mK) + 1 - g
        assert h(m) == (2 * m - 1) * (g - 1)


def test_hilbert_poly_with_lower_terms():
    data = FibrationData(n=3, v=6, kl_fibre=-4, ell=0, k=0, lower_order_h=[5, "1/3"])
    assert hilbert_poly(data) == FormalPoly({3: 1, 2: 1, 1: Fraction(1, 3), 0: 5})  # s = 2


def test_pushforward_examples():
    assert pushforward_degree_poly(GENUS2) == FormalPoly({2: 4, 1: -4})
    assert pushforward_degree_poly(ELLIPTIC).is_zero()
    assert pushforward_degree_poly(P2) == FormalPoly({3: 1, 2: Fraction(-3, 2)})
    with_lower = FibrationData(n=1, v=2, kl_fibre=2, ell=8, k=8, lower_order_push=[-3])
    assert pushforward_degree_poly(with_lower) == FormalPoly({2: 4, 1: -4, 0: -3})


# --- cm_degree / alpha_degree ------------------------------------------------

def test_cm_and_alpha_examples():
    assert cm_degree(GENUS2) == 32
    assert alpha_degree(GENUS2) == 2
    assert cm_degree(ELLIPTIC) == 0 and alpha_degree(ELLIPTIC) == 0
    assert alpha_degree(P2) == 18


@pytest.mark.parametrize("k", [8, 1, Fraction(-7, 3), 0, 100])
def test_relative_canonical_polarisation_gives_4k(k):
    data = FibrationData(n=1, v=2, kl_fibre=2, ell=k, k=k)
    assert compute_s(data) == -1
    assert cm_degree(data) == 4 * k


def test_alpha_is_cm_over_normaliser():
    rng = random.Random(3)
    for data in (corpus.fibration_data(rng) for _ in range(50)):
        n = data.n
        assert alpha_degree(data) * 2 ** (n + 1) * (n + 1) * data.v == cm_degree(data)


# --- ch_expand ---------------------------------------------------------------

def test_ch_expand_genus2():
    rep = ch_expand(GENUS2)
    assert rep.combination == FormalPoly({2: 8})
    assert rep.top_vanishes
    assert rep.m2n_coefficient == 8
    assert rep.alpha_degree == 2
    assert rep.nef_sign == "positive"
    assert rep.to_json() == {"combination": {"2": "8"}, "top_vanishes": True,
                             "m2n_coefficient": "8", "alpha_degree": "2", "nef_sign": "positive"}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ch_expand_matches_sympy_expansion(n):
    rng = random.Random(100 + n)
    for _ in range(15):
        data = corpus.fibration_data(rng, n)
        rep = ch_expand(data)
        assert rep.combination.coeffs == sympy_combination(data)
        assert rep.combination.coeff(2 * n + 1) == 0
        assert rep.m2n_coefficient == (n + 1) * data.v**2 * alpha_degree(data) / (2 * math.factorial(n))


def test_ch_expand_nef_signs():
    neg = FibrationData(n=1, v=2, kl_fibre=2, ell=-8, k=-8)
    assert ch_expand(neg).nef_sign == "negative"
    assert ch_expand(ELLIPTIC).nef_sign == "zero"


def test_lower_order_terms_do_not_reach_top_coefficients():
    base = FibrationData(n=3, v=2, kl_fibre=1, ell=5, k=-2)
    extra = FibrationData(n=3, v=2, kl_fibre=1, ell=5, k=-2,
                          lower_order_h=[9, -4], lower_order_push=[1, 2, 3])
    a, b = ch_expand(base).combination, ch_expand(extra).combination
    assert a.coeff(7) == b.coeff(7) == 0
    assert a.coeff(6) == b.coeff(6)
    assert a != b


# --- twist -------------------------------------------------------------------

def test_twist_genus2_example():
    t = twist(GENUS2, 3)
    assert (t.ell, t.k) == (20, 14)
    assert (t.n, t.v, t.kl_fibre) == (GENUS2.n, GENUS2.v, GENUS2.kl_fibre)
    assert cm_degree(t) == 32


def test_identity_twist():
    rng = random.Random(5)
    for _ in range(20):
        data = corpus.fibration_data(rng)
        t = twist(data, 0)
        assert pushforward_degree_poly(t) == pushforward_degree_poly(data)
        assert (t.ell, t.k, t.lower_order_h) == (data.ell, data.k, data.lower_order_h)


@settings(max_examples=200)
@given(st.integers(0, 10**6), st.fractions(max_denominator=100).filter(lambda q: abs(q) <= 100))
def test_twist_invariance_property(seed, deg_a):
    data = corpus.fibration_data(random.Random(seed))
    t = twist(data, deg_a)
    assert cm_degree(t) == cm_degree(data)
    assert alpha_degree(t) == alpha_degree(data)
    # pi_*(L + pi^*A)^m has degree deg pi_* L^m + m deg_a h(m)
    expected = pushforward_degree_poly(data) + hilbert_poly(data).shift(1) * deg_a
    assert pushforward_degree_poly(t) == expected


# --- morita_genus ------------------------------------------------------------

@pytest.mark.parametrize("g, m, expected", [(2, 1, 2), (2, 2, 6), (3, 2, 10)])
def test_morita_examples(g, m, expected):
    assert morita_genus(g, m) == expected


@given(st.integers(2, 500), st.integers(1, 60))
def test_morita_bounds(g, m):
    gp = morita_genus(g, m)
    assert gp >= 2
    assert Fraction(gp) == m * m * g - Fraction(m * (m + 1), 2) + 1
    assert morita_genus(g, 1) == g


@pytest.mark.parametrize("g, m", [(1, 2), (0, 1), (2, 0), (2, -1), (2.0, 1)])
def test_morita_rejects(g, m):
    with pytest.raises(InconsistentDataError):
        morita_genus(g, m)
