from __future__ import annotations

import numpy as np
import pytest

from conftest import GOLDEN, MIXED
from pathtriple import algebra as alg
from pathtriple.cylinders import Cell, from_cells, q_cells
from pathtriple.errors import ConfigError
from pathtriple.paths import enumerate_S_jl, lambda1
from pathtriple.spectral import (
    Context,
    Truncation,
    apply_and_project,
    bandwidth,
    block_dimension,
    commutator_norm,
    decompose,
    dirac_eigenvalue,
    dirac_net_violations,
    h_block_basis,
    resolvent_spectrum,
)

CTX = Context(GOLDEN)
A = lambda1(1, 1, 0)
B = lambda1(1, 0, 1)


def gram(vs, ws, ctx):
    ev = [v.element(ctx.k) for v in vs]
    ew = [w.element(ctx.k) for w in ws]
    return np.array([[alg.gns_inner(a, b, ctx.table) for b in ew] for a in ev])


def test_eigenvalue_examples():
    assert dirac_eigenvalue(1, 0, -2) == 1
    assert dirac_eigenvalue(2, 3, 5) == 12
    assert 1 / (1 + dirac_eigenvalue(2, 3, 5) ** 2) == pytest.approx(1 / 145)


def test_resolvent_spectrum_and_tail():
    t = Truncation(2, 1, 1)
    rows = resolvent_spectrum(t, GOLDEN)
    assert rows[0] == (0.5, 1, 5)
    assert [c for _, c, _ in rows] == sorted(c for _, c, _ in rows)
    assert sum(m for _, _, m in rows) == sum(block_dimension(*lab, GOLDEN) for lab in t.labels())
    assert t.min_excluded_eigenvalue() == 3
    assert dirac_net_violations(t) == 0


def test_bad_caps():
    with pytest.raises(ConfigError):
        Truncation(0, 1, 1)


def test_small_dimensions():
    assert block_dimension(1, 0, -2, GOLDEN) == 1 + len(enumerate_S_jl(1, 0, GOLDEN))
    assert CTX.k_basis(Cell(2, -1, (), ("Z",))).shape[1] == len(q_cells(2, 0, GOLDEN)) - 1


@pytest.mark.parametrize("label", [(1, 0, -2), (1, 0, -1), (1, 1, 0), (2, 0, -1)])
def test_block_basis_orthonormal(label):
    basis = h_block_basis(*label, CTX)
    assert basis.dimension == block_dimension(*label, GOLDEN)
    vs = basis.vectors[:40]
    assert np.allclose(gram(vs, vs, CTX), np.eye(len(vs)), atol=1e-9)


def test_blocks_mutually_orthogonal():
    labels = [(1, 0, -2), (1, 0, -1), (1, 0, 0), (1, 1, -1), (2, 0, -2)]
    bases = {lab: h_block_basis(*lab, CTX).vectors[:15] for lab in labels}
    for i, x in enumerate(labels):
        for y in labels[i + 1:]:
            assert np.abs(gram(bases[x], bases[y], CTX)).max() < 1e-9


def test_unit_sits_on_first_line():
    d = decompose(alg.unit(GOLDEN), Truncation(1, 0, 0), CTX)
    assert set(d.coords) == {(1, 0, -2)}
    assert d.norm2 == pytest.approx(1)
    assert abs(d.residual) < 1e-12


@pytest.mark.parametrize("k", [GOLDEN, MIXED], ids=["golden", "mixed"])
def test_cell_vectors_decompose_completely(k):
    ctx = Context(k)
    for n in range(0, 2):
        for F in q_cells(2, n + 1, k)[:6]:
            v = alg.basic(A, B, from_cells([F], k))
            d = decompose(v, Truncation(1, 1, n + 1), ctx)
            assert not d.flagged
            assert abs(d.residual) < 1e-9
            assert sum(d.block_norm2.values()) == pytest.approx(d.norm2, abs=1e-9)


def test_out_of_cap_components_flagged():
    v = alg.basic(A, B, from_cells([q_cells(2, 2, GOLDEN)[0]], GOLDEN))
    d = decompose(v, Truncation(1, 1, 0), CTX)
    assert d.flagged
    assert d.residual == pytest.approx(sum(d.out_of_range.values()), abs=1e-12)


def test_unit_acts_as_identity():
    for label in [(1, 0, -1), (2, 1, 0)]:
        res = apply_and_project(alg.unit(GOLDEN), label, Truncation(2, 1, 1), CTX)
        assert res["leak"] < 1e-12
        M = res["matrices"][label]
        assert all(np.abs(X).max() < 1e-9 for lab, X in res["matrices"].items() if lab != label)
        assert np.allclose(M, np.eye(M.shape[0]), atol=1e-9)


def test_fast_bandwidth_matches_generic_projection():
    gen = next(g for g in alg.b0_generators(1, 2, GOLDEN) if (g.delta, g.epsilon) == (A, B))
    src = (2, 1, 1)
    t = Truncation(3, 3, 4)
    res = apply_and_project(gen.element, src, t, CTX)
    for window in (0, 1):
        off = res["leak"] + sum(
            float(np.linalg.norm(M) ** 2)
            for (j, l, n), M in res["matrices"].items()
            if j != src[0] or abs(l - src[1]) > window or abs(n - src[2]) > window
        )
        row = bandwidth(gen, *src, CTX, window=window)
        assert row.leak ** 2 == pytest.approx(off, abs=1e-9)
    assert bandwidth(gen, *src, CTX).leak < 1e-8
    assert bandwidth(gen, *src, CTX, window=0).leak > 1


def test_commutator_of_unit_vanishes():
    out = commutator_norm(alg.unit(GOLDEN), Truncation(1, 1, 1), CTX)
    assert out["norm"] < 1e-12


def test_commutator_bounded_for_alpha_beta():
    a = alg.basic(A, B, k=GOLDEN)
    small = commutator_norm(a, Truncation(1, 1, 1), CTX)["norm"]
    large = commutator_norm(a, Truncation(2, 1, 1), CTX)["norm"]
    assert small <= large + 1e-9
    assert large <= 4 + 1e-9
