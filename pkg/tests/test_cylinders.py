from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GOLDEN, MIXED, TWOS, paths
from pathtriple.boundary import classes, prefix, set_contains, shift
from pathtriple.cylinders import (
    Cell,
    alpha_shift,
    beta_unshift,
    cylinder,
    empty,
    from_cells,
    full,
    intersect,
    parent_cell,
    q_cells,
    refine_cell,
    shift_set,
    prefix_set,
    subtract,
    translate,
    union,
)
from pathtriple.errors import DomainError
from pathtriple.paths import Path, gamma, lambda1


def test_golden_partition_sizes():
    assert [len(q_cells(1, n, GOLDEN)) for n in range(-1, 6)] == [1, 4, 12, 33, 88, 232, 609]
    assert len(q_cells(2, 0, GOLDEN)) == 4
    assert q_cells(3, -1, MIXED) == (Cell(3, -1, (), ("Z",)),)


def test_level_zero_cells():
    got = {c.core for c in q_cells(1, 0, TWOS)}
    assert got == {("P1", 0), ("P2", 0), ("P4",), ("P3", 0, 0, 1), ("P3", 0, 0, 2)}


@pytest.mark.parametrize("k", [GOLDEN, MIXED], ids=["golden", "mixed"])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_partition_against_oracle(k, m):
    for n in range(0, 3):
        cells = q_cells(m, n, k)
        for x in classes(m, n + 1, k):
            assert sum(set_contains(from_cells([c], k), x) for c in cells) == 1


@pytest.mark.parametrize("k", [GOLDEN, MIXED], ids=["golden", "mixed"])
def test_refinement_and_parent_agree(k):
    for n in range(-1, 3):
        for c in q_cells(2, n, k):
            kids = refine_cell(c, k)
            assert all(parent_cell(g) == c for g in kids)
            assert from_cells(kids, k) == from_cells([c], k)
        assert set(q_cells(2, n + 1, k)) == {g for c in q_cells(2, n, k) for g in refine_cell(c, k)}


def test_special_refinements():
    p4 = Cell(1, 1, (), ("P4",))
    kinds = sorted(c.core[0] for c in refine_cell(p4, MIXED))
    assert kinds == ["P1", "P2", "P3", "P4"]  # corner gamma sits at v5, k_5 = 1
    deep = Cell(1, 1, (), ("P3", 2, 0, 1))
    assert refine_cell(deep, GOLDEN) == (Cell(1, 2, (), ("P3", 2, 0, 1)),)


def test_full_partition_collapses():
    for n in range(0, 3):
        assert from_cells(q_cells(1, n, GOLDEN), GOLDEN) == full(1, GOLDEN)
    some = q_cells(1, 1, GOLDEN)[:2]
    assert from_cells(some, GOLDEN).level == 1


def test_set_identities():
    a = cylinder(lambda1(1, 1, 0), GOLDEN)
    assert intersect(a, a) == a
    x, y = q_cells(1, 0, GOLDEN)[:2]
    assert intersect(from_cells([x], GOLDEN), from_cells([y], GOLDEN)).is_empty
    rest = subtract(full(1, GOLDEN), cylinder(lambda1(1, 1, 1), GOLDEN))
    assert rest.cells == frozenset(c for c in q_cells(1, 0, GOLDEN) if c.core != ("P4",))


cell_subsets = st.lists(st.sampled_from(q_cells(1, 2, GOLDEN)), max_size=8)


@given(cell_subsets, cell_subsets)
def test_set_algebra_against_oracle(xs, ys):
    a = from_cells(xs, GOLDEN, vertex=1)
    b = from_cells(ys, GOLDEN, vertex=1)
    u, i, d = union(a, b), intersect(a, b), subtract(a, b)
    for x in classes(1, 3, GOLDEN):
        ia, ib = set_contains(a, x), set_contains(b, x)
        assert set_contains(u, x) == (ia or ib)
        assert set_contains(i, x) == (ia and ib)
        assert set_contains(d, x) == (ia and not ib)


def test_translate_gamma_covers_cylinder():
    s = from_cells(q_cells(2, 0, GOLDEN), GOLDEN)
    assert translate(gamma(1), s).level == 1
    assert from_cells(translate(gamma(1), s).cells, GOLDEN) == cylinder(gamma(1), GOLDEN)
    assert translate(Path(2), s) == s
    with pytest.raises(DomainError):
        translate(lambda1(1, 1, 0), full(2, GOLDEN))


@given(st.data())
def test_translate_adds_path_length_to_level(data):
    k = data.draw(st.sampled_from([GOLDEN, MIXED]))
    theta = data.draw(paths(k, max_blocks=2, max_deg=1))
    theta = Path(theta.m, theta.closed, (0, 0))
    cells = data.draw(st.lists(st.sampled_from(q_cells(theta.source, 1, k)), min_size=1, max_size=4))
    s = from_cells(cells, k)
    t = translate(theta, s)
    assert t.level == max(s.level, 0) + theta.length
    assert from_cells(t.cells, k) == prefix_set(theta, s)


def _oracle_depth(*sets):
    return max(max(s.level for s in sets), 0) + 2


@given(st.data())
def test_prefix_and_shift_against_oracle(data):
    k = data.draw(st.sampled_from([GOLDEN, MIXED]))
    zeta = data.draw(paths(k, max_blocks=1, max_deg=1))
    cells = data.draw(st.lists(st.sampled_from(q_cells(zeta.source, 1, k)), max_size=4))
    s = from_cells(cells, k, vertex=zeta.source)
    pre = prefix_set(zeta, s)
    assert pre.level <= max(s.level, 0) + zeta.length
    for x in classes(1, _oracle_depth(pre) + zeta.length, k):
        y = shift(zeta, x)
        assert set_contains(pre, x) == (y is not None and set_contains(s, y))
    back = shift_set(zeta, pre)
    assert back == s.canonical()
    base = from_cells(data.draw(st.lists(st.sampled_from(q_cells(1, 1, k)), max_size=4)), k, vertex=1)
    sh = shift_set(zeta, base)
    for y in classes(zeta.source, _oracle_depth(sh, base), k):
        assert set_contains(sh, y) == set_contains(base, prefix(zeta, y))


def test_beta_shift_cases():
    m = 2
    p1 = from_cells([Cell(m, 0, (), ("P1", 0))], GOLDEN)
    assert beta_unshift(1, p1).is_empty
    assert beta_unshift(2, cylinder(lambda1(m, 0, 2), GOLDEN)) == full(m + 2, GOLDEN)
    assert alpha_shift(1, full(3, GOLDEN)) == cylinder(lambda1(2, 1, 0), GOLDEN)
    assert shift_set(lambda1(2, 0, 1), empty(2, GOLDEN)).is_empty
