from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathtriple.cfcore import (
    ContinuedFraction,
    KSequence,
    cf_from_k,
    convergents,
    effros_shen_system,
    k_sequence_from_cf,
    max_fill_length,
    parse_input,
    theta_from_k,
)
from pathtriple.errors import LengthError

cf_terms = st.tuples(st.integers(0, 9)).flatmap(
    lambda a0: st.lists(st.integers(1, 9), min_size=1, max_size=10).map(lambda rest: a0 + tuple(rest))
)


def test_golden_convergents():
    t = convergents(ContinuedFraction((0, 1, 1, 1, 1)))
    assert t.q == (1, 1, 2, 3, 5)
    assert t.p == (0, 1, 1, 2, 3)


def test_single_term_seed():
    t = convergents([7])
    assert (t.p, t.q) == ((7,), (1,))


@given(cf_terms)
def test_determinant_identity(terms):
    t = convergents(terms)
    for n in range(1, min(len(t), 7)):
        assert t.determinant(n) == (-1) ** (n + 1)


@given(cf_terms)
def test_last_convergent_is_value(terms):
    cf = ContinuedFraction(terms)
    assert convergents(cf).fraction(len(cf) - 1) == cf.value()


def test_bad_terms_rejected():
    with pytest.raises(ValueError):
        ContinuedFraction((1, 0, 2))
    with pytest.raises(ValueError):
        ContinuedFraction(())


def test_k_from_cf_example():
    assert k_sequence_from_cf([7, 2, 5, 3, 4], 9, 7).values == (9, 7, 0, 5, 0, 0, 4)


def test_k_from_cf_unit_odd_terms_have_no_zeros():
    assert k_sequence_from_cf([3, 1, 4, 1, 5], 2, 4).values == (2, 3, 4, 5)


def test_k1_zero_allowed():
    assert k_sequence_from_cf([1, 1, 1], 0, 3).values[0] == 0


def test_k_from_cf_too_short():
    with pytest.raises(LengthError):
        k_sequence_from_cf([7, 2], 9, 6)
    assert max_fill_length([7, 2, 5, 3, 4], 9) == 7


@given(st.integers(0, 5), st.lists(st.integers(1, 6), min_size=2, max_size=12))
def test_cf_k_round_trip(k1, c):
    n = max_fill_length(c, k1)
    k = k_sequence_from_cf(c, k1, n)
    nonzero = [v for v in k.values[1:] if v]
    assert nonzero == [t for t in c[0:len(c):2] if t][: len(nonzero)]
    runs, run = [], 0
    for v in k.values[2:]:
        if v:
            runs.append(run)
            run = 0
        else:
            run += 1
    assert runs == [t - 1 for t in c[1::2]][: len(runs)]


def test_cf_from_k_inverts_placement():
    k1, c = cf_from_k([9, 7, 0, 5, 0, 0, 4])
    assert (k1, c) == (9, [7, 2, 5, 3, 4])


def test_theta_golden():
    cf, val = theta_from_k(KSequence.from_list([1]), 30)
    assert cf.terms[:6] == (0, 1, 1, 1, 1, 1)
    assert val == pytest.approx((5 ** 0.5 - 1) / 2, abs=1e-12)


def test_theta_twos_independent_value():
    cf, val = theta_from_k(KSequence.from_list([2]), 30)
    assert cf.terms[:6] == (0, 1, 2, 1, 2, 1)
    mpmath.mp.dps = 30
    x = mpmath.mpf(0)
    for _ in range(200):
        x = 1 / (1 + 1 / (2 + x))
    assert float(x) == pytest.approx(0.7320508075688772, abs=1e-15)
    assert val == pytest.approx(0.7320508075688772, abs=1e-12)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4))
def test_theta_within_convergent_bound(k):
    seq = KSequence.from_list(k)
    cf, val = theta_from_k(seq, 12)
    deep, _ = theta_from_k(seq, 40)
    exact = deep.value()
    t = convergents(cf)
    n = len(cf) - 1
    assert abs(Fraction(t.p[n], t.q[n]) - exact) <= Fraction(1, t.q[n] * t.q[n - 1])


def test_effros_shen_golden_levels():
    es = effros_shen_system([0, 1, 1, 1, 1])
    assert es.levels == ((1, 1, 1), (2, 1, 1), (3, 2, 1), (5, 3, 1))
    assert es.dimensions() == (1, 1, 2, 3, 5)


@given(cf_terms)
def test_effros_shen_recurrence(terms):
    es = effros_shen_system(terms)
    for i, (qn, qprev, an) in enumerate(es.levels):
        assert an == terms[i + 1]
        if i:
            assert qn == an * es.levels[i - 1][0] + es.levels[i - 1][1]


def test_periodic_extension_and_positions():
    k = KSequence.from_list([2, 1, 0, 3, 1])
    assert [k.at(i) for i in range(1, 11)] == [2, 1, 0, 3, 1] * 2
    assert k.nonzero_positions(4) == (0, 1, 2, 4, 5)
    assert k.p(3) == 4


def test_parse_input_forms():
    assert parse_input('{"k": [1, 2]}').prefix(4) == (1, 2, 1, 2)
    assert parse_input({"cf": [7, 2, 5, 3, 4], "k1": 9}).values == (9, 7, 0, 5, 0, 0, 4)
