from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GOLDEN, MIXED, TWOS, ks, paths
from pathtriple.errors import ComposabilityError, DomainError
from pathtriple.paths import (
    PairClass,
    Path,
    check_path,
    classify_pair,
    common_suffix,
    compose,
    enumerate_paths,
    enumerate_phi,
    enumerate_S,
    enumerate_S_jl,
    extends,
    gamma,
    has_common_suffix,
    identity,
    join,
    lambda1,
    left_shift,
    minimal_common_extension,
    parse,
    render,
    right_quotient,
)

A = lambda1(1, 1, 0)
B = lambda1(1, 0, 1)


def test_alpha_beta_merge():
    assert compose(A, lambda1(2, 0, 1)) == lambda1(1, 1, 1)
    assert render(compose(A, lambda1(2, 0, 1))) == "v1.a^1b^1"


def test_gamma_then_alpha_stays_two_blocks():
    p = compose(gamma(1), lambda1(2, 1, 0))
    assert [kind for kind, _ in p.blocks()] == ["L2", "L1"]


def test_identity_neutral():
    p = parse("v1.a^2b^1.g(4,1).a^1")
    assert compose(identity(1), p) == p
    assert compose(p, identity(p.source)) == p


def test_compose_mismatch():
    with pytest.raises(ComposabilityError):
        compose(A, A)


def test_join_alpha_beta():
    z1, z2 = minimal_common_extension(A, B)
    assert (z1, z2) == (lambda1(2, 0, 1), lambda1(2, 1, 0))
    assert join(A, B) == lambda1(1, 1, 1)


def test_parallel_gammas_never_meet():
    assert minimal_common_extension(gamma(1, 1), gamma(1, 2)) is None


def test_left_shift_examples():
    assert left_shift(A, lambda1(1, 1, 1)) == lambda1(2, 0, 1)
    p = parse("v1.a^1.g(2,1)")
    assert left_shift(identity(1), p) == p
    assert left_shift(p, p) == identity(p.source)
    with pytest.raises(DomainError):
        left_shift(B, A)


@st.composite
def chains(draw):
    k = draw(ks)
    a = draw(paths(k))
    b = draw(paths(k, a.source))
    c = draw(paths(k, b.source))
    return a, b, c


@given(chains())
def test_compose_associative(abc):
    a, b, c = abc
    assert compose(compose(a, b), c) == compose(a, compose(b, c))
    assert compose(a, b).length == a.length + b.length


@given(chains())
def test_cancellation(abc):
    a, b, _ = abc
    ab = compose(a, b)
    assert extends(ab, a)
    assert left_shift(a, ab) == b
    assert right_quotient(ab, b) == a


@given(ks.flatmap(lambda k: st.tuples(st.just(k), paths(k))))
def test_render_parse_round_trip(kp):
    k, p = kp
    check_path(p, k)
    assert parse(render(p)) == p


def _all_paths(k, max_len):
    return [p for n in range(max_len + 1) for p in enumerate_paths(1, n, k)]


@pytest.mark.parametrize("k", [GOLDEN, TWOS], ids=["golden", "twos"])
def test_mce_is_minimal_by_brute_force(k):
    pool = _all_paths(k, 4)
    small = [p for p in pool if p.length <= 2]
    for mu in small:
        for nu in small:
            common = [lam for lam in pool if extends(lam, mu) and extends(lam, nu)]
            res = minimal_common_extension(mu, nu)
            if res is None:
                assert not common
                continue
            z1, z2 = res
            top = compose(mu, z1)
            assert top == compose(nu, z2)
            assert top in common
            assert all(extends(lam, top) for lam in common)


@given(ks.flatmap(lambda k: st.tuples(paths(k), paths(k))))
def test_mce_extension_property(pair):
    mu, nu = pair
    res = minimal_common_extension(mu, nu)
    if res is not None:
        top = compose(mu, res[0])
        assert extends(top, mu) and extends(top, nu)


def test_common_suffix_examples():
    d = parse("v1.a^1.g(2,1)")
    e = parse("v1.b^1.g(2,1)")
    assert has_common_suffix(d, e)
    assert common_suffix(d, e) == gamma(2)
    assert not has_common_suffix(lambda1(1, 2, 0), lambda1(1, 0, 2))
    assert has_common_suffix(d, d)


@given(chains())
def test_common_suffix_contains_shared_tail(abc):
    a, b, _ = abc
    d = compose(a, b)
    e = compose(lambda1(1, a.length, 0), b)
    z = common_suffix(d, e)
    assert z.length >= b.length
    assert compose(right_quotient(d, z), z) == d
    assert compose(right_quotient(e, z), z) == e


def test_phi_examples():
    assert enumerate_phi(3, 0, GOLDEN) == (identity(3),)
    assert set(enumerate_phi(1, 1, GOLDEN)) == {identity(1), gamma(1)}
    for n in range(3):
        assert set(enumerate_phi(1, n, MIXED)) <= set(enumerate_phi(1, n + 1, MIXED))


def test_s_examples():
    g = gamma(1)
    assert set(enumerate_S(1, GOLDEN)) == {(g, g), (g, identity(1)), (identity(1), g)}
    assert [(pc.delta, pc.epsilon) for pc in enumerate_S_jl(0, 0, GOLDEN)] == [(identity(1), identity(1))]
    for l in (1, 2, 3):
        got = {(pc.delta, pc.epsilon) for pc in enumerate_S_jl(0, l, GOLDEN)}
        assert got == {(lambda1(1, l, 0), lambda1(1, 0, l)), (lambda1(1, 0, l), lambda1(1, l, 0))}
    assert len(enumerate_S_jl(1, 0, GOLDEN)) == 4
    assert len(enumerate_S_jl(2, 0, GOLDEN)) == 30


@pytest.mark.parametrize("k", [GOLDEN, MIXED], ids=["golden", "mixed"])
def test_s_pairs_are_suffix_free_and_classified(k):
    for j in range(3):
        for l in range(3):
            for pc in enumerate_S_jl(j, l, k):
                assert isinstance(pc, PairClass)
                assert not has_common_suffix(pc.delta, pc.epsilon)
                assert pc.delta.source == pc.epsilon.source == k.p(j) + l + 1
                assert classify_pair(pc.delta, pc.epsilon, k) == (j, l)


def test_check_path_rejects_missing_edge():
    with pytest.raises(DomainError):
        check_path(parse("v1.g(1,3)"), GOLDEN)
    with pytest.raises(ValueError):
        parse("v1.g(2,1)")
