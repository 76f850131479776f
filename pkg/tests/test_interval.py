import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hessbound.errors import DomainViolation
from hessbound.interval import (
    ZERO,
    Box,
    Interval,
    IntervalMatrix,
    IntervalVector,
    add,
    add_const,
    exp_i,
    inflate,
    lambda_aat,
    lambda_abba,
    ln_i,
    mul,
    mul_by_const,
    one_over,
    pow_nat,
    sqrt_i,
)

I = Interval
finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


@st.composite
def interval_with_point(draw, lo=-50.0, hi=50.0):
    a, b = sorted((draw(st.floats(lo, hi)), draw(st.floats(lo, hi))))
    t = draw(st.floats(0, 1))
    return Interval(a, b), min(max(a + t * (b - a), a), b)


# --- examples -------------------------------------------------------------------


@pytest.mark.parametrize(
    "a, b, expected",
    [((1, 2), (3, 5), (4, 7)), ((0, 0), (-3, 2), (-3, 2)), ((-1, 1), (-2, 3), (-3, 4))],
)
def test_add_examples(a, b, expected):
    assert add(I(*a), I(*b)) == I(*expected)


@pytest.mark.parametrize(
    "a, b, expected",
    [((-1, 2), (3, 4), (-4, 8)), ((0, 0), (-7, 5), (0, 0)), ((-2, -1), (-3, -2), (2, 6))],
)
def test_mul_examples(a, b, expected):
    r = mul(I(*a), I(*b))
    assert (r.lo, r.hi) == expected


def test_one_over():
    assert one_over(I(2, 4)) == I(0.25, 0.5)
    assert one_over(I(-4, -2)) == I(-0.5, -0.25)
    for bad in (I(-1, 1), I(0, 1), I(-1, 0)):
        with pytest.raises(DomainViolation):
            one_over(bad)


def test_constants():
    assert add_const(I(1, 2), 3) == I(4, 5)
    assert mul_by_const(I(1, 2), -2) == I(-4, -2)
    r = mul_by_const(I(-3, 7), 0)
    assert (r.lo, r.hi) == (0, 0)


def test_pow_nat_branches():
    assert pow_nat(I(-2, 1), 2) == I(0, 4)
    assert pow_nat(I(-2, 1), 3) == I(-8, 1)
    assert pow_nat(I(2, 3), 2) == I(4, 9)
    assert pow_nat(I(-3, -2), 4) == I(16, 81)
    with pytest.raises(ValueError):
        pow_nat(I(1, 2), -1)


def test_elementary():
    assert sqrt_i(I(4, 9)) == I(2, 3)
    assert exp_i(I(0, 0)) == I(1, 1)
    r = ln_i(I(1, math.e))
    assert r.lo == 0 and r.hi == pytest.approx(1)
    with pytest.raises(DomainViolation):
        sqrt_i(I(-0.1, 1))
    with pytest.raises(DomainViolation):
        ln_i(I(0, 1))
    with pytest.raises(DomainViolation):
        exp_i(I(0, 1000))


def test_construction_rejects_bad_endpoints():
    with pytest.raises(ValueError):
        I(2, 1)
    with pytest.raises(ValueError):
        I(0, math.inf)
    with pytest.raises(ValueError):
        I(math.nan, 0)


def test_inflate_widens_outward():
    r = inflate(I(-2, 4), 0.01)
    assert r.lo == pytest.approx(-2.04) and r.hi == pytest.approx(4.04)
    assert inflate(I(1, 2), 0.0) == I(1, 2)


# --- rank-structure eigenvalue bounds --------------------------------------------


def _vec(*pairs):
    return IntervalVector.from_intervals(I(*p) for p in pairs)


def test_lambda_aat_examples():
    assert lambda_aat(_vec((1, 1), (0, 0), (0, 0))) == I(0, 1)
    assert lambda_aat(_vec((-2, 1), (0, 3))) == I(0, 13)
    assert lambda_aat(_vec((0, 0), (0, 0))) == ZERO


def test_lambda_abba_examples():
    assert lambda_abba(_vec((1, 1)), _vec((1, 1))) == I(0, 2)
    assert lambda_abba(_vec((1, 1), (0, 0)), _vec((0, 0), (1, 1))) == I(-1, 1)
    assert lambda_abba(_vec((0, 0), (0, 0)), _vec((-1, 3), (2, 5))) == ZERO
    with pytest.raises(ValueError):
        lambda_abba(_vec((1, 1)), _vec((1, 1), (0, 0)))


def test_rank_bounds_contain_sampled_spectra():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        alo, ahi = np.sort(rng.uniform(-3, 3, (2, n)), axis=0)
        blo, bhi = np.sort(rng.uniform(-3, 3, (2, n)), axis=0)
        A, B = IntervalVector(alo, ahi), IntervalVector(blo, bhi)
        laat, labba = lambda_aat(A), lambda_abba(A, B)
        assert laat.lo == 0.0
        assert lambda_abba(B, A) == labba
        for _ in range(20):
            a = alo + (ahi - alo) * rng.random(n)
            b = blo + (bhi - blo) * rng.random(n)
            for ev in np.linalg.eigvalsh(np.outer(a, a)):
                assert laat.contains(ev) or abs(ev) < 1e-12
            for ev in np.linalg.eigvalsh(np.outer(a, b) + np.outer(b, a)):
                assert labba.lo - 1e-12 <= ev <= labba.hi + 1e-12


# --- enclosure and monotonicity ---------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(interval_with_point(), interval_with_point())
def test_binary_ops_enclose_point_results(ap, bp):
    (a, x), (b, y) = ap, bp
    assert add(a, b).contains(x + y)
    r = mul(a, b)
    assert r.lo - 1e-12 * abs(r.lo) <= x * y <= r.hi + 1e-12 * abs(r.hi)


@settings(max_examples=300, deadline=None)
@given(interval_with_point(-5, 5), st.integers(2, 7), finite)
def test_unary_ops_enclose_point_results(ap, m, c):
    a, x = ap
    assert pow_nat(a, m).contains(x**m)
    assert add_const(a, c).contains(x + c)
    r = mul_by_const(a, c)
    assert r.lo <= c * x <= r.hi or math.isclose(c * x, r.lo) or math.isclose(c * x, r.hi)
    assert exp_i(a).contains(math.exp(x))


@settings(max_examples=200, deadline=None)
@given(interval_with_point(0.01, 50))
def test_positive_domain_ops_enclose(ap):
    a, x = ap
    assert one_over(a).lo <= 1 / x * (1 + 1e-15) and 1 / x <= one_over(a).hi * (1 + 1e-15)
    assert sqrt_i(a).contains(math.sqrt(x))
    r = ln_i(a)
    assert r.lo - 1e-15 <= math.log(x) <= r.hi + 1e-15


@settings(max_examples=200, deadline=None)
@given(interval_with_point(), interval_with_point(), st.floats(0, 5), st.floats(0, 5), st.integers(2, 6))
def test_inclusion_monotonicity(ap, bp, wa, wb, m):
    a, _ = ap
    b, _ = bp
    a2, b2 = I(a.lo - wa, a.hi + wa), I(b.lo - wb, b.hi + wb)
    assert add(a, b).issubset(add(a2, b2))
    assert mul(a, b).issubset(mul(a2, b2))
    assert pow_nat(a, m).issubset(pow_nat(a2, m))


def test_sampled_enclosure_bulk():
    rng = np.random.default_rng(11)
    lo, hi = np.sort(rng.uniform(-4, 4, (2, 10_000)), axis=0)
    t = rng.random(10_000)
    x = lo + t * (hi - lo)
    lo2, hi2 = np.sort(rng.uniform(-4, 4, (2, 10_000)), axis=0)
    y = lo2 + rng.random(10_000) * (hi2 - lo2)
    for i in range(10_000):
        a, b = I(lo[i], hi[i]), I(lo2[i], hi2[i])
        assert mul(a, b).contains(x[i] * y[i])
        assert pow_nat(a, 2).contains(x[i] ** 2)
        if not (lo2[i] <= 0 <= hi2[i]):
            r = one_over(b)
            assert r.lo * (1 - 1e-15) <= 1 / y[i] <= r.hi * (1 + 1e-15) or r.contains(1 / y[i])


# --- vectors, matrices, boxes -------------------------------------------------------


def test_interval_matrix_symmetry_and_access():
    M = IntervalMatrix.from_intervals([[(0, 1), (-1, 2)], [(-1, 2), (3, 4)]])
    assert M.is_symmetric()
    assert M[0, 1] == I(-1, 2)
    assert np.allclose(M.midpoint(), [[0.5, 0.5], [0.5, 3.5]])
    with pytest.raises(ValueError):
        IntervalMatrix(np.array([[1.0]]), np.array([[0.0]]))


def test_outer_self_uses_square_rule_on_diagonal():
    a = _vec((-1, 2), (1, 3))
    M = a.outer_self()
    assert M[0, 0] == I(0, 4)
    assert M[0, 1] == mul(I(-1, 2), I(1, 3))


def test_box_helpers():
    b = Box.from_bounds([0, -1], [1, 1])
    assert b.n == 2
    assert b.contains_point([0.5, 0])
    assert not b.contains_point([2, 0])
    assert len(list(b.vertices())) == 4
    assert Box.from_point([1, 2]).issubset(Box.from_bounds([0, 0], [3, 3]))
