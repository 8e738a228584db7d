"""Finite-dimensional pieces of the GNS space, the Dirac operator and its commutators.

For a suffix-free pair Delta = (delta, epsilon) with source v_m, the vectors eta_{Delta,F}
(F compact open in Z_m) span a copy of L^2(Z_m); ||eta_{Delta,F}||^2 is the measure of F.
The block K_Delta(E)_{n+1} (E a cell of Q_n^m) is the span of eta_{Delta,G} over the cells
G of Q_{n+1}^m inside E, orthogonal to eta_{Delta,E}. These are martingale differences, so
projections are computed from cell integrals:

    coordinate on G inside E = sqrt(m(G)) * (W(G)/m(G) - W(E)/m(E)),   W(X) = <f, 1_X>

in the orthonormal frame eta_{Delta,G}/sqrt(m(G)). H_{j,l,n} gathers these blocks over
Delta in S_{j,l} (for j = 1 also S_{0,l}) and E in Q_n^m, plus the lines eta_{Delta,Z_m}
at n = -2. The Dirac operator is j + l + n + 2 on H_{j,l,n}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from . import algebra as alg
from .cfcore import KSequence
from .cylinders import Cell, CellSet, full, parent_cell, prefix_set, q_cells, refine_cell, shift_set
from .errors import ConfigError, DomainError
from .measure import MeasureTable, depth_measures, measure_cell
from .paths import (
    Path,
    PairClass,
    classify_pair,
    common_suffix,
    compose,
    enumerate_S_jl,
    minimal_common_extension,
    render,
    right_quotient,
)

RANK_TOL = 1e-9

Label = tuple[int, int, int]
Pair = tuple[Path, Path]


def dirac_eigenvalue(j: int, l: int, n: int) -> int:
    return j + l + n + 2


@dataclass(frozen=True)
class Truncation:
    J: int
    L: int
    N: int

    def __post_init__(self):
        if self.J < 1 or self.L < 0 or self.N < -2:
            raise ConfigError("caps", "need J >= 1, L >= 0, N >= -2")

    def labels(self) -> Iterator[Label]:
        for j in range(1, self.J + 1):
            for l in range(self.L + 1):
                for n in range(-2, self.N + 1):
                    yield (j, l, n)

    def contains(self, label: Label) -> bool:
        j, l, n = label
        return 1 <= j <= self.J and 0 <= l <= self.L and -2 <= n <= self.N

    def min_excluded_eigenvalue(self) -> int:
        return min(dirac_eigenvalue(self.J + 1, 0, -2), dirac_eigenvalue(1, self.L + 1, -2),
                   dirac_eigenvalue(1, 0, self.N + 1))


def block_pairs(j: int, l: int, k: KSequence) -> tuple[PairClass, ...]:
    """Pairs indexing H_{j,l,.}: S_{j,l}, and for j = 1 also S_{0,l}."""
    if j < 1:
        raise DomainError("blocks start at j = 1")
    if j == 1:
        return enumerate_S_jl(0, l, k) + enumerate_S_jl(1, l, k)
    return enumerate_S_jl(j, l, k)


def pair_label(delta: Path, epsilon: Path, k: KSequence) -> tuple[int, int]:
    """(block j, l) of a suffix-free pair; S_{0,l} pairs live in the j = 1 blocks."""
    j, l = classify_pair(delta, epsilon, k)
    return max(j, 1), l


class Context:
    """k-sequence, measure table and the caches shared by spectral computations."""

    def __init__(self, k: KSequence, table: Optional[MeasureTable] = None, horizon: int = 64):
        self.k = k
        self.table = table or depth_measures(k, horizon)
        self._measure: dict[Cell, float] = {}
        self._basis: dict[Cell, np.ndarray] = {}
        self._frame: dict[tuple[int, int], tuple] = {}
        self._components: dict = {}

    def measure(self, c: Cell) -> float:
        v = self._measure.get(c)
        if v is None:
            v = self._measure[c] = measure_cell(c, self.table)
        return v

    def k_basis(self, E: Cell) -> np.ndarray:
        """Orthonormal basis of K(E) in the frame of E's children (columns)."""
        B = self._basis.get(E)
        if B is None:
            kids = refine_cell(E, self.k)
            u = np.sqrt([self.measure(G) for G in kids])
            u /= np.linalg.norm(u)
            gram = np.eye(len(kids)) - np.outer(u, u)
            vals, vecs = np.linalg.eigh(gram)
            keep = vals > RANK_TOL * max(vals.max(), 1.0)
            B = vecs[:, keep]
            # deterministic signs
            for col in range(B.shape[1]):
                idx = int(np.argmax(np.abs(B[:, col])))
                if B[idx, col] < 0:
                    B[:, col] = -B[:, col]
            self._basis[E] = B
        return B


# ---------------------------------------------------------------- cell integrals

def integrals(weights: dict[Cell, complex], level: int, ctx: Context) -> dict[int, dict[Cell, complex]]:
    """W(X) for every ancestor X of the given level-`level` cells, keyed by level."""
    out: dict[int, dict[Cell, complex]] = {level: dict(weights)}
    cur = out[level]
    for lv in range(level, -1, -1):
        up: dict[Cell, complex] = {}
        for c, w in cur.items():
            p = parent_cell(c)
            up[p] = up.get(p, 0) + w
        out[lv - 1] = up
        cur = up
    return out


def function_weights(support_terms: Iterable[tuple[CellSet, complex]], ctx: Context) -> tuple[dict[Cell, complex], int]:
    """Cell integrals of f = sum w 1_S at the finest support level."""
    items = [(s, w) for s, w in support_terms if not s.is_empty]
    if not items:
        return {}, -1
    level = max(s.level for s, _ in items)
    acc: dict[Cell, complex] = {}
    for s, w in items:
        for c in s.at_level(level):
            acc[c] = acc.get(c, 0) + w * ctx.measure(c)
    return acc, level


def components(weights: dict[Cell, complex], level: int, ctx: Context) -> dict[int, dict[Cell, np.ndarray]]:
    """Martingale components of f from its cell integrals.

    Level -2 maps the Z cell to a length-1 array; level n >= -1 maps each E in Q_n^m to the
    coordinates on its children (normalized frame)."""
    if not weights:
        return {}
    W = integrals(weights, level, ctx)
    out: dict[int, dict[Cell, np.ndarray]] = {}
    (zc, wz), = W[-1].items()
    out[-2] = {zc: np.array([wz / math.sqrt(ctx.measure(zc))])}
    for n in range(-1, level):
        finer = W[n + 1]
        comp: dict[Cell, np.ndarray] = {}
        for E, wE in W[n].items():
            kids = refine_cell(E, ctx.k)
            mE = ctx.measure(E)
            x = np.array([math.sqrt(ctx.measure(G)) * (finer.get(G, 0) / ctx.measure(G) - wE / mE) for G in kids])
            if np.any(np.abs(x) > 0):
                comp[E] = x
        if comp:
            out[n] = comp
    return out


# ---------------------------------------------------------------- bases

@dataclass(frozen=True)
class BasisVector:
    pair: Pair
    cell: Optional[Cell]          # E, or None for the eta_{Delta, Z_m} line
    coefficients: tuple[tuple[Cell, float], ...]   # eta_{Delta, G} weights

    def element(self, k: KSequence) -> alg.AlgebraElement:
        d, e = self.pair
        terms = [(alg.Bisection(d, e, CellSet(d.source, G.n, frozenset((G,)), k)), w) for G, w in self.coefficients]
        return alg.make_element(terms, k)


@dataclass
class SubspaceBasis:
    label: Label
    vectors: list[BasisVector]
    pairs: tuple[PairClass, ...]

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    @property
    def eigenvalue(self) -> int:
        return dirac_eigenvalue(*self.label)


def block_dimension(j: int, l: int, n: int, k: KSequence) -> int:
    """|pairs| * (|Q_{n+1}^m| - |Q_n^m|), with the n = -2 line counted once per pair."""
    dim = 0
    for pc in block_pairs(j, l, k):
        m = pc.vertex
        dim += 1 if n == -2 else len(q_cells(m, n + 1, k)) - len(q_cells(m, n, k))
    return dim


def h_block_basis(j: int, l: int, n: int, ctx: Context) -> SubspaceBasis:
    """Orthonormal basis of H_{j,l,n}, one group per (Delta, E)."""
    vecs: list[BasisVector] = []
    pairs = block_pairs(j, l, ctx.k)
    for pc in pairs:
        m = pc.vertex
        if n == -2:
            z = q_cells(m, -1, ctx.k)[0]
            vecs.append(BasisVector((pc.delta, pc.epsilon), None, ((z, 1 / math.sqrt(ctx.measure(z))),)))
            continue
        for E in q_cells(m, n, ctx.k):
            kids = refine_cell(E, ctx.k)
            B = ctx.k_basis(E)
            scale = np.array([1 / math.sqrt(ctx.measure(G)) for G in kids])
            for col in range(B.shape[1]):
                coef = B[:, col] * scale
                vecs.append(BasisVector((pc.delta, pc.epsilon), E, tuple(zip(kids, map(float, coef)))))
    return SubspaceBasis((j, l, n), vecs, pairs)


# ---------------------------------------------------------------- decomposition

@dataclass
class Decomposition:
    coords: dict[Label, dict[tuple[Pair, Optional[Cell]], np.ndarray]]
    block_norm2: dict[Label, float]
    out_of_range: dict[Label, float]
    norm2: float
    residual: float

    @property
    def flagged(self) -> bool:
        return bool(self.out_of_range)


def pair_components(pair: Pair, supports: Iterable[tuple[CellSet, complex]], ctx: Context):
    weights, level = function_weights(supports, ctx)
    return components(weights, level, ctx)


def decompose(v: alg.AlgebraElement, t: Truncation, ctx: Context, norm2: Optional[float] = None) -> Decomposition:
    """Orthogonal projections of eta(v) onto the blocks H_{j,l,n} within the truncation.

    Components outside the caps are reported in ``out_of_range`` and left in the residual."""
    grouped: dict[Pair, list[tuple[CellSet, complex]]] = {}
    for b, w in v.terms:
        grouped.setdefault((b.delta, b.epsilon), []).append((b.support, w))
    coords: dict[Label, dict] = {}
    norms: dict[Label, float] = {}
    outside: dict[Label, float] = {}
    for pair, supports in grouped.items():
        j, l = pair_label(pair[0], pair[1], ctx.k)
        comps = pair_components(pair, supports, ctx)
        for n, per_cell in comps.items():
            label = (j, l, n)
            for E, x in per_cell.items():
                sq = float(np.vdot(x, x).real)
                if not t.contains(label):
                    outside[label] = outside.get(label, 0.0) + sq
                    continue
                if n == -2:
                    c = x
                else:
                    c = ctx.k_basis(E).T @ x
                coords.setdefault(label, {})[(pair, None if n == -2 else E)] = c
                norms[label] = norms.get(label, 0.0) + sq
    if norm2 is None:
        norm2 = alg.gns_inner(v, v, ctx.table).real
    residual = norm2 - sum(norms.values())
    return Decomposition(coords, norms, outside, norm2, residual)


# ---------------------------------------------------------------- action of generators

def apply_term(b: alg.Bisection, pair: Pair, G: CellSet) -> Optional[alg.Bisection]:
    """[b] * [delta, epsilon, G] in suffix-free form, or None."""
    prod = alg.product_terms(b, alg.Bisection(pair[0], pair[1], G))
    if prod is None:
        return None
    return alg.strip_suffix(prod.delta, prod.epsilon, prod.support)


def apply_and_project(a: alg.AlgebraElement, label: Label, t: Truncation, ctx: Context,
                      basis: Optional[SubspaceBasis] = None) -> dict[str, object]:
    """Coordinates of a * b for every basis vector b of the block, by target block.

    Returns {"matrices": {target: array (rows: (pair, E) coordinates, cols: source vectors)},
    "leak": squared norm landing outside the truncation}."""
    basis = basis or h_block_basis(*label, ctx)
    cols: list[Decomposition] = []
    for vec in basis.vectors:
        img = alg.convolve(a, vec.element(ctx.k))
        cols.append(decompose(img, t, ctx))
    index: dict[Label, dict] = {}
    for d in cols:
        for lab, per in d.coords.items():
            slots = index.setdefault(lab, {})
            for key, c in per.items():
                slots.setdefault(key, len(c))
    mats: dict[Label, np.ndarray] = {}
    for lab, slots in index.items():
        keys = sorted(slots, key=lambda kk: (render(kk[0][0]), render(kk[0][1]), kk[1] or ()))
        offs, pos = {}, 0
        for kk in keys:
            offs[kk] = pos
            pos += slots[kk]
        M = np.zeros((pos, len(cols)), dtype=complex)
        for ci, d in enumerate(cols):
            for kk, c in d.coords.get(lab, {}).items():
                M[offs[kk]:offs[kk] + len(c), ci] = c
        mats[lab] = M
    leak = sum(sum(d.out_of_range.values()) for d in cols)
    return {"matrices": mats, "leak": leak}


# ---------------------------------------------------------------- bandwidth

@dataclass
class BandwidthRow:
    generator: str
    window: int
    source: Label
    leak: float
    pairs: int
    zero_images: int


def _image_components(m: int, G: Cell, z2: Path, zeta: Path, ctx: Context):
    key = (m, G, z2, zeta)
    got = ctx._components.get(key)
    if got is None:
        s = CellSet(m, G.n, frozenset((G,)), ctx.k)
        img = prefix_set(zeta, shift_set(z2, s))
        weights = {c: ctx.measure(c) for c in img.cells}
        got = ctx._components[key] = components(weights, img.level, ctx) if weights else {}
    return got


def _block_leak(m: int, n: int, z2: Path, zeta: Path, off_levels: Optional[tuple[int, int]], ctx: Context) -> float:
    """Squared Frobenius norm of the off-window part of the image of the block at (m, n).

    off_levels is the allowed level window, or None when the whole image is off-window."""
    total = 0.0
    for E in q_cells(m, n, ctx.k):
        kids = refine_cell(E, ctx.k)
        B = ctx.k_basis(E)
        scale = np.array([1 / math.sqrt(ctx.measure(G)) for G in kids])
        C = B * scale[:, None]
        per_level: dict[tuple[int, Cell], np.ndarray] = {}
        for fi, G in enumerate(kids):
            comps = _image_components(m, G, z2, zeta, ctx)
            for lv, per in comps.items():
                if off_levels is not None and off_levels[0] <= lv <= off_levels[1]:
                    continue
                for X, x in per.items():
                    acc = per_level.get((lv, X))
                    if acc is None:
                        acc = per_level[(lv, X)] = np.zeros((len(x), C.shape[1]))
                    acc += np.outer(x.real, C[fi])
        for acc in per_level.values():
            total += float(np.sum(acc * acc))
    return total


def bandwidth(gen: alg.Generator, j_src: int, l: int, n: int, ctx: Context, window: Optional[int] = None) -> BandwidthRow:
    """Off-window leakage of gen * H_{j_src, l, n} (Frobenius norm, an upper bound on the operator norm)."""
    w = gen.length if window is None else window
    term = alg.Bisection(gen.delta, gen.epsilon, full(gen.epsilon.source, ctx.k))
    total = 0.0
    zero = 0
    cache: dict = {}
    pairs = block_pairs(j_src, l, ctx.k)
    for pc in pairs:
        ext = minimal_common_extension(gen.epsilon, pc.delta)
        if ext is None:
            zero += 1
            continue
        z1, z2 = ext
        d2, e2 = compose(gen.delta, z1), compose(pc.epsilon, z2)
        zeta = common_suffix(d2, e2)
        d3, e3 = right_quotient(d2, zeta), right_quotient(e2, zeta)
        j2, l2 = pair_label(d3, e3, ctx.k)
        in_window = j2 == j_src and abs(l2 - l) <= w
        key = (pc.vertex, z2, zeta, in_window)
        if key not in cache:
            lv = (n - w, n + w) if in_window else None
            cache[key] = _block_leak(pc.vertex, n, z2, zeta, lv, ctx)
        total += cache[key]
    return BandwidthRow(str(gen), w, (j_src, l, n), math.sqrt(total), len(pairs), zero)


# ---------------------------------------------------------------- Dirac operator

def resolvent_spectrum(t: Truncation, k: KSequence) -> list[tuple[float, int, int]]:
    """(1/(1+c^2), c, multiplicity) sorted by decreasing resolvent eigenvalue."""
    mult: dict[int, int] = {}
    for lab in t.labels():
        d = block_dimension(*lab, k)
        if d:
            c = dirac_eigenvalue(*lab)
            mult[c] = mult.get(c, 0) + d
    return [(1 / (1 + c * c), c, mult[c]) for c in sorted(mult)]


def dirac_net_violations(t: Truncation) -> int:
    """Count failures of positivity, strict monotonicity and the window bound for c(j,l,n)."""
    bad = 0
    labs = list(t.labels())
    idx = [(j - 1, l, n + 2) for j, l, n in labs]
    c = {i: i[0] + 1 + i[1] + i[2] for i in idx}
    for i in idx:
        bad += c[i] != dirac_eigenvalue(i[0] + 1, i[1], i[2] - 2)
        bad += c[i] < 1
        for d in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            nxt = (i[0] + d[0], i[1] + d[1], i[2] + d[2])
            if nxt in c and not c[i] < c[nxt]:
                bad += 1
    for kwin in ((0, 1, 1), (1, 1, 1), (0, 2, 2), (1, 2, 3)):
        M = kwin[0] + 1 + kwin[1] + kwin[2]
        for i0 in idx:
            for i in idx:
                if all(abs(a - b) <= w for a, b, w in zip(i, i0, kwin)) and abs(c[i] - c[i0]) > M:
                    bad += 1
    return bad


class Frame:
    """Normalized frame eta_G/sqrt(m(G)), G in Q_{N+1}^m, with the Dirac matrix of one pair."""

    def __init__(self, pair: Pair, t: Truncation, ctx: Context):
        self.pair = pair
        self.m = pair[0].source
        self.j, self.l = pair_label(pair[0], pair[1], ctx.k)
        top = t.N + 1
        self.cells = q_cells(self.m, top, ctx.k)
        self.index = {c: i for i, c in enumerate(self.cells)}
        sq = np.sqrt([ctx.measure(c) for c in self.cells])
        self.sqrt_measure = sq
        # projector onto functions measurable at level s, s = -1..top
        proj = {}
        for s in range(-1, top + 1):
            P = np.zeros((len(self.cells), len(self.cells)))
            groups: dict[Cell, list[int]] = {}
            for i, c in enumerate(self.cells):
                anc = c
                while anc.n > s:
                    anc = parent_cell(anc)
                groups.setdefault(anc, []).append(i)
            for idxs in groups.values():
                v = sq[idxs]
                P[np.ix_(idxs, idxs)] = np.outer(v, v) / float(v @ v)
            proj[s] = P
        D = dirac_eigenvalue(self.j, self.l, -2) * proj[-1]
        for n in range(-1, top):
            D += dirac_eigenvalue(self.j, self.l, n) * (proj[n + 1] - proj[n])
        self.D = D

    def __len__(self) -> int:
        return len(self.cells)


def _overlaps(X: CellSet, frame: Frame, ctx: Context) -> np.ndarray:
    """Vector of m(X & G) over frame cells G."""
    top = frame.cells[0].n
    out = np.zeros(len(frame))
    if X.is_empty:
        return out
    if X.level <= top:
        for c in X.at_level(top):
            out[frame.index[c]] += ctx.measure(c)
        return out
    for c in X.cells:
        anc = c
        while anc.n > top:
            anc = parent_cell(anc)
        out[frame.index[anc]] += ctx.measure(c)
    return out


def commutator_norm(a: alg.AlgebraElement, t: Truncation, ctx: Context) -> dict[str, object]:
    """Largest singular value of the truncated [D, a], with the block structure used."""
    sources: list[Pair] = []
    for j in range(1, t.J + 1):
        for l in range(t.L + 1):
            sources += [(pc.delta, pc.epsilon) for pc in block_pairs(j, l, ctx.k)]
    frames: dict[Pair, Frame] = {}

    def frame(p: Pair) -> Frame:
        f = frames.get(p)
        if f is None:
            f = frames[p] = Frame(p, t, ctx)
        return f

    blocks: dict[tuple[Pair, Pair], np.ndarray] = {}
    for src in sources:
        fs = frame(src)
        for b, w in a.terms:
            for G in fs.cells:
                img = apply_term(b, src, CellSet(fs.m, G.n, frozenset((G,)), ctx.k))
                if img is None:
                    continue
                tgt = (img.delta, img.epsilon)
                j2, l2 = pair_label(tgt[0], tgt[1], ctx.k)
                if not (j2 <= t.J and l2 <= t.L):
                    continue
                ft = frame(tgt)
                col = _overlaps(img.support, ft, ctx) / (ft.sqrt_measure * math.sqrt(ctx.measure(G)))
                A = blocks.get((tgt, src))
                if A is None:
                    A = blocks[(tgt, src)] = np.zeros((len(ft), len(fs)), dtype=complex)
                A[:, fs.index[G]] += w * col
    # connected components of the bipartite source/target graph
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for tgt, src in blocks:
        ra, rb = find(("t", tgt)), find(("s", src))
        if ra != rb:
            parent[ra] = rb
    comps: dict = {}
    for tgt, src in blocks:
        comps.setdefault(find(("s", src)), []).append((tgt, src))
    best = 0.0
    for members in comps.values():
        tg = sorted({tg for tg, _ in members}, key=lambda p: (render(p[0]), render(p[1])))
        sr = sorted({s for _, s in members}, key=lambda p: (render(p[0]), render(p[1])))
        ro = np.cumsum([0] + [len(frame(p)) for p in tg])
        co = np.cumsum([0] + [len(frame(p)) for p in sr])
        X = np.zeros((ro[-1], co[-1]), dtype=complex)
        ti = {p: i for i, p in enumerate(tg)}
        si = {p: i for i, p in enumerate(sr)}
        for tgt, src in members:
            A = blocks[(tgt, src)]
            X[ro[ti[tgt]]:ro[ti[tgt] + 1], co[si[src]]:co[si[src] + 1]] = frame(tgt).D @ A - A @ frame(src).D
        if X.size:
            best = max(best, float(np.linalg.norm(X, 2)))
    return {"norm": best, "components": len(comps), "pairs": len(sources)}


def commutator_ceiling(gen: alg.Generator) -> float:
    """M_K * ||a|| with K = (j, m, m), j = max(j_gen, 1), m = |delta| and M_K = j + 1 + 2m."""
    j = max(gen.j, 1)
    m = gen.length
    return (j + 1 + 2 * m) * gen.element.norm_estimate()
