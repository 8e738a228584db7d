from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GOLDEN, MIXED, TWOS
from pathtriple.cfcore import KSequence
from pathtriple.cylinders import empty, full, q_cells
from pathtriple.errors import HorizonError
from pathtriple.measure import depth_measures, measure_cell, measure_set

R = (3 - math.sqrt(5)) / 2


def test_golden_closed_form():
    t = depth_measures(GOLDEN, 20)
    assert t[0] == 1.0
    assert t[1] == pytest.approx(0.3819660113, abs=1e-10)
    for h in range(21):
        assert t[h] == pytest.approx(R ** h, rel=1e-12)


def test_horizon_error():
    t = depth_measures(GOLDEN, 5)
    with pytest.raises(HorizonError):
        t[6]


@given(st.lists(st.integers(0, 5), min_size=1, max_size=6).filter(any))
def test_recurrence_and_positivity(vals):
    k = KSequence.from_list(vals)
    t = depth_measures(k, 12)
    assert t[0] == 1.0
    for h in range(11):
        assert 0 < t[h + 1] < t[h]
    for h in range(10):
        lhs = t[h]
        rhs = (2 + k.at(h + 1)) * t[h + 1] - t[h + 2]
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-15)


@pytest.mark.parametrize("k", [GOLDEN, MIXED, TWOS], ids=["golden", "mixed", "twos"])
def test_partition_additivity(k):
    t = depth_measures(k, 40)
    for m in (1, 2, 3):
        for n in range(-1, 4):
            total = sum(measure_cell(c, t) for c in q_cells(m, n, k))
            assert total == pytest.approx(t[m - 1], abs=1e-9)
            for c in q_cells(m, n, k)[:6]:
                assert measure_cell(c, t) > 0


def test_full_and_empty_sets():
    t = depth_measures(MIXED, 20)
    assert measure_set(full(3, MIXED), t) == pytest.approx(t[2])
    assert measure_set(empty(3, MIXED), t) == 0
