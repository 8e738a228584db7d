"""Compact-open subsets of Z_m as unions of cells of the partitions Q_n^m.

A cell is a prefix (closed triples of a path in Phi_n^m) followed by a core at vertex
m' = m + |prefix| and core level n' = n - |prefix|:

    ("Z",)            all of Z_m, only at level -1
    ("P1", j)         next alpha/beta block has a >= n'+1 and b == j
    ("P2", i)         a == i and b >= n'+1
    ("P3", i, j, br)  next block is exactly alpha^i beta^j followed by gamma branch br
    ("P4",)           a >= n'+1 and b >= n'+1

Set algebra runs through *patterns*: a vertex, exact closed triples, and a constraint on the
degree of the following block. Patterns are closed under intersection, prefixing by a path
and left shifting, which makes translation and alpha/beta shifts exact. A pattern is turned
back into cells by adaptive refinement.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Optional

from .cfcore import KSequence
from .errors import DomainError
from .paths import Path, enumerate_phi, render

EQ, GE = 0, 1


class Cell(NamedTuple):
    m: int
    n: int
    prefix: tuple[tuple[int, int, int], ...]
    core: tuple

    @property
    def prefix_length(self) -> int:
        return sum(p + q + 1 for p, q, _ in self.prefix)

    @property
    def core_vertex(self) -> int:
        return self.m + self.prefix_length

    @property
    def core_level(self) -> int:
        return self.n - self.prefix_length

    def prefix_path(self) -> Path:
        return Path(self.m, self.prefix, (0, 0))

    def __str__(self) -> str:
        return render_cell(self)


class Pattern(NamedTuple):
    m: int
    closed: tuple[tuple[int, int, int], ...]
    ca: tuple[int, int]
    cb: tuple[int, int]


def render_cell(c: Cell) -> str:
    mc, nc = c.core_vertex, c.core_level
    kind = c.core[0]
    if kind == "Z":
        core = f"Z{mc}"
    elif kind == "P1":
        core = f"Z{mc}[a^{nc + 1}b^{c.core[1]} \\ +b]"
    elif kind == "P2":
        core = f"Z{mc}[a^{c.core[1]}b^{nc + 1} \\ +a]"
    elif kind == "P3":
        _, i, j, br = c.core
        core = f"Z{mc}[a^{i}b^{j}g({mc + i + j},{br})]"
    else:
        core = f"Z{mc}[a^{nc + 1}b^{nc + 1}]"
    if c.prefix:
        return f"{render(c.prefix_path())} {core}"
    return core


# ---------------------------------------------------------------- cells of Q_n^m

def _cores(m: int, n: int, k: KSequence) -> list[tuple]:
    """Cores of P_{m,n} for n >= 0."""
    out: list[tuple] = [("P1", j) for j in range(n + 1)]
    out += [("P2", i) for i in range(n + 1)]
    for i in range(n + 1):
        for j in range(max(0, n - i), n + 1):
            out += [("P3", i, j, br) for br in range(1, k.at(m + i + j) + 1)]
    out.append(("P4",))
    return out


@lru_cache(maxsize=None)
def q_cells(m: int, n: int, k: KSequence) -> tuple[Cell, ...]:
    """The partition Q_n^m of Z_m."""
    if n < -1:
        raise DomainError("partition levels start at -1")
    if n == -1:
        return (Cell(m, -1, (), ("Z",)),)
    out = []
    for theta in enumerate_phi(m, n, k):
        nn = n - theta.length
        out += [Cell(m, n, theta.closed, core) for core in _cores(theta.source, nn, k)]
    return tuple(sorted(out))


def _check_cell(c: Cell, k: KSequence) -> None:
    nc = c.core_level
    kind = c.core[0]
    ok = nc >= 0 or (kind == "Z" and c.n == -1 and not c.prefix)
    if kind in ("P1", "P2"):
        ok = ok and 0 <= c.core[1] <= nc
    elif kind == "P3":
        _, i, j, br = c.core
        ok = ok and 0 <= i <= nc and 0 <= j <= nc <= i + j and 1 <= br <= k.at(c.core_vertex + i + j)
    if not ok:
        raise DomainError(f"invalid cell {c}")


@lru_cache(maxsize=None)
def refine_cell(c: Cell, k: KSequence) -> tuple[Cell, ...]:
    """Cells of Q_{n+1}^m whose union is c."""
    m, n, prefix, core = c
    kind = core[0]
    if kind == "Z":
        return q_cells(m, 0, k)
    mc, nc = c.core_vertex, c.core_level

    def mk(*cores: tuple) -> tuple[Cell, ...]:
        return tuple(Cell(m, n + 1, prefix, cr) for cr in cores)

    if kind == "P1":
        j = core[1]
        return mk(("P1", j), *(("P3", nc + 1, j, br) for br in range(1, k.at(mc + nc + 1 + j) + 1)))
    if kind == "P2":
        i = core[1]
        return mk(("P2", i), *(("P3", i, nc + 1, br) for br in range(1, k.at(mc + nc + 1 + i) + 1)))
    if kind == "P4":
        corner = ("P3", nc + 1, nc + 1)
        gam = tuple(corner + (br,) for br in range(1, k.at(mc + 2 * nc + 2) + 1))
        return mk(("P1", nc + 1), ("P2", nc + 1), *gam, ("P4",))
    _, i, j, br = core
    if i + j > nc:
        return mk(core)
    inner = prefix + ((i, j, br),)
    return tuple(Cell(m, n + 1, inner, cr) for cr in _cores(mc + i + j + 1, 0, k))


def parent_cell(c: Cell) -> Cell:
    """The unique cell of Q_{n-1}^m containing c (n >= 0)."""
    m, n, prefix, core = c
    if n == 0:
        return Cell(m, -1, (), ("Z",))
    nc = c.core_level
    if nc == 0:
        i, j, br = prefix[-1]
        return Cell(m, n - 1, prefix[:-1], ("P3", i, j, br))
    kind = core[0]
    if kind == "P1":
        new = ("P1", core[1]) if core[1] <= nc - 1 else ("P4",)
    elif kind == "P2":
        new = ("P2", core[1]) if core[1] <= nc - 1 else ("P4",)
    elif kind == "P4":
        new = core
    else:
        _, i, j, br = core
        if i <= nc - 1 and j <= nc - 1:
            new = core
        elif i == nc:
            new = ("P1", j) if j < nc else ("P4",)
        else:
            new = ("P2", i)
    return Cell(m, n - 1, prefix, new)


@lru_cache(maxsize=None)
def refine_to(c: Cell, level: int, k: KSequence) -> frozenset[Cell]:
    if level < c.n:
        raise DomainError("cannot refine to a coarser level")
    if level == c.n:
        return frozenset((c,))
    out: set[Cell] = set()
    for child in refine_cell(c, k):
        out |= refine_to(child, level, k)
    return frozenset(out)


def _canonical_cells(cells: frozenset[Cell], level: int, k: KSequence) -> tuple[frozenset[Cell], int]:
    while cells and level >= 0:
        groups: dict[Cell, int] = {}
        for c in cells:
            par = parent_cell(c)
            groups[par] = groups.get(par, 0) + 1
        if any(len(refine_cell(par, k)) != count for par, count in groups.items()):
            break
        cells = frozenset(groups)
        level -= 1
    if not cells:
        level = -1
    return cells, level


# ---------------------------------------------------------------- patterns

def cell_pattern(c: Cell) -> Pattern:
    nc = c.core_level
    kind = c.core[0]
    if kind == "Z":
        return Pattern(c.m, c.prefix, (GE, 0), (GE, 0))
    if kind == "P1":
        return Pattern(c.m, c.prefix, (GE, nc + 1), (EQ, c.core[1]))
    if kind == "P2":
        return Pattern(c.m, c.prefix, (EQ, c.core[1]), (GE, nc + 1))
    if kind == "P3":
        return Pattern(c.m, c.prefix + (c.core[1:],), (GE, 0), (GE, 0))
    return Pattern(c.m, c.prefix, (GE, nc + 1), (GE, nc + 1))


def _meet(x: tuple[int, int], y: tuple[int, int]) -> Optional[tuple[int, int]]:
    if x[0] == GE and y[0] == GE:
        return (GE, max(x[1], y[1]))
    if x[0] == EQ and y[0] == EQ:
        return x if x[1] == y[1] else None
    eq, ge = (x, y) if x[0] == EQ else (y, x)
    return eq if eq[1] >= ge[1] else None


def _admits(c: tuple[int, int], v: int) -> bool:
    return v == c[1] if c[0] == EQ else v >= c[1]


def _closed_len(closed) -> int:
    return sum(p + q + 1 for p, q, _ in closed)


def pattern_meet(P: Pattern, Q: Pattern, k: KSequence) -> Optional[Pattern]:
    """Intersection of two patterns, or None when it is empty."""
    if P.m != Q.m:
        raise DomainError("patterns live at different vertices")
    if len(P.closed) > len(Q.closed):
        P, Q = Q, P
    n = len(P.closed)
    if Q.closed[:n] != P.closed:
        return None
    if len(Q.closed) > n:
        p, q, _ = Q.closed[n]
        return Q if _admits(P.ca, p) and _admits(P.cb, q) else None
    ca, cb = _meet(P.ca, Q.ca), _meet(P.cb, Q.cb)
    if ca is None or cb is None:
        return None
    if ca[0] == EQ and cb[0] == EQ:
        # an exact finite block must be followed by a gamma edge
        if k.at(P.m + _closed_len(P.closed) + ca[1] + cb[1]) == 0:
            return None
    return Pattern(P.m, P.closed, ca, cb)


def path_pattern(mu: Path) -> Pattern:
    """Z(mu) as a pattern."""
    return Pattern(mu.m, mu.closed, (GE, mu.tail[0]), (GE, mu.tail[1]))


def pattern_prefix(zeta: Path, P: Pattern) -> Pattern:
    """zeta . P, a pattern at the range vertex of zeta."""
    if zeta.source != P.m:
        raise DomainError("path does not end where the pattern starts")
    tp, tq = zeta.tail
    if P.closed:
        p, q, br = P.closed[0]
        return Pattern(zeta.m, zeta.closed + ((p + tp, q + tq, br),) + P.closed[1:], P.ca, P.cb)
    return Pattern(zeta.m, zeta.closed, (P.ca[0], P.ca[1] + tp), (P.cb[0], P.cb[1] + tq))


def pattern_shift(zeta: Path, P: Pattern, k: KSequence) -> Optional[Pattern]:
    """sigma^zeta(P meet Z(zeta)), a pattern at the source of zeta, or None."""
    R = pattern_meet(P, path_pattern(zeta), k)
    if R is None:
        return None
    n = len(zeta.closed)
    tp, tq = zeta.tail
    if len(R.closed) > n:
        p, q, br = R.closed[n]
        return Pattern(zeta.source, ((p - tp, q - tq, br),) + R.closed[n + 1:], R.ca, R.cb)
    ca = (R.ca[0], R.ca[1] - tp) if R.ca[0] == EQ else (GE, max(R.ca[1] - tp, 0))
    cb = (R.cb[0], R.cb[1] - tq) if R.cb[0] == EQ else (GE, max(R.cb[1] - tq, 0))
    return Pattern(zeta.source, (), ca, cb)


@lru_cache(maxsize=None)
def pattern_cells(P: Pattern, k: KSequence) -> tuple[frozenset[Cell], int]:
    """Exact cell decomposition of a pattern, canonicalized."""
    guard = _closed_len(P.closed) + max(P.ca[1], P.cb[1]) + 4
    found: list[Cell] = []
    stack = [Cell(P.m, -1, (), ("Z",))]
    while stack:
        c = stack.pop()
        inter = pattern_meet(cell_pattern(c), P, k)
        if inter is None:
            continue
        if inter == cell_pattern(c):
            found.append(c)
            continue
        if c.n >= guard:
            raise DomainError(f"pattern {P} did not resolve by level {guard}")
        stack.extend(refine_cell(c, k))
    if not found:
        return frozenset(), -1
    level = max(c.n for c in found)
    cells: set[Cell] = set()
    for c in found:
        cells |= refine_to(c, level, k)
    return _canonical_cells(frozenset(cells), level, k)


# ---------------------------------------------------------------- cell sets

@dataclass(frozen=True)
class CellSet:
    """A compact-open subset of Z_vertex stored as cells of Q_level^vertex."""

    vertex: int
    level: int
    cells: frozenset[Cell]
    k: KSequence

    def __post_init__(self):
        for c in self.cells:
            if c.m != self.vertex or c.n != self.level:
                raise DomainError(f"cell {c} does not belong to Q_{self.level}^{self.vertex}")

    @property
    def is_empty(self) -> bool:
        return not self.cells

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(sorted(self.cells))

    def at_level(self, level: int) -> frozenset[Cell]:
        if level == self.level:
            return self.cells
        out: set[Cell] = set()
        for c in self.cells:
            out |= refine_to(c, level, self.k)
        return frozenset(out)

    def canonical(self) -> "CellSet":
        cells, level = _canonical_cells(self.cells, self.level, self.k)
        return CellSet(self.vertex, level, cells, self.k)

    def __str__(self) -> str:
        if not self.cells:
            return f"empty(Z{self.vertex})"
        return " + ".join(render_cell(c) for c in self)

    def to_json(self) -> dict:
        return {"vertex": self.vertex, "level": self.level, "cells": [render_cell(c) for c in self]}


def from_cells(cells: Iterable[Cell], k: KSequence, vertex: Optional[int] = None) -> CellSet:
    cells = frozenset(cells)
    if not cells:
        if vertex is None:
            raise DomainError("vertex required for an empty cell set")
        return empty(vertex, k)
    levels = {c.n for c in cells}
    verts = {c.m for c in cells}
    if len(verts) != 1:
        raise DomainError("cells from different vertices")
    level = max(levels)
    out: set[Cell] = set()
    for c in cells:
        _check_cell(c, k)
        out |= refine_to(c, level, k)
    return CellSet(verts.pop(), level, frozenset(out), k).canonical()


def empty(m: int, k: KSequence) -> CellSet:
    return CellSet(m, -1, frozenset(), k)


def full(m: int, k: KSequence) -> CellSet:
    return CellSet(m, -1, frozenset((Cell(m, -1, (), ("Z",)),)), k)


def from_pattern(P: Pattern, k: KSequence) -> CellSet:
    cells, level = pattern_cells(P, k)
    return CellSet(P.m, level, cells, k)


def cylinder(mu: Path, k: KSequence) -> CellSet:
    """Z(mu) as a subset of Z_{r(mu)}."""
    return from_pattern(path_pattern(mu), k)


def _align(a: CellSet, b: CellSet) -> tuple[frozenset[Cell], frozenset[Cell], int]:
    if a.vertex != b.vertex:
        raise DomainError(f"cell sets at different vertices v{a.vertex}, v{b.vertex}")
    if a.k != b.k:
        raise DomainError("cell sets use different k-sequences")
    level = max(a.level, b.level)
    return a.at_level(level), b.at_level(level), level


def _finish(cells: frozenset[Cell], level: int, like: CellSet) -> CellSet:
    cells, level = _canonical_cells(frozenset(cells), level, like.k)
    return CellSet(like.vertex, level, cells, like.k)


def union(a: CellSet, b: CellSet) -> CellSet:
    x, y, level = _align(a, b)
    return _finish(frozenset(x) | frozenset(y), level, a)


def intersect(a: CellSet, b: CellSet) -> CellSet:
    if a.is_empty or b.is_empty:
        _align(a, b)
        return empty(a.vertex, a.k)
    x, y, level = _align(a, b)
    return _finish(x & y, level, a)


def subtract(a: CellSet, b: CellSet) -> CellSet:
    if a.is_empty or b.is_empty:
        _align(a, b)
        return a
    x, y, level = _align(a, b)
    return _finish(x - y, level, a)


def union_all(sets: Iterable[CellSet], vertex: int, k: KSequence) -> CellSet:
    sets = [s for s in sets if not s.is_empty]
    if not sets:
        return empty(vertex, k)
    level = max(s.level for s in sets)
    cells: set[Cell] = set()
    for s in sets:
        if s.vertex != vertex:
            raise DomainError("cell sets at different vertices")
        cells |= s.at_level(level)
    return _finish(frozenset(cells), level, sets[0])


def basic_set(mu: Path, nus: Iterable[Path], k: KSequence) -> CellSet:
    """Z(mu) minus the union of Z(nu_i), all inside Z_{r(mu)}."""
    out = cylinder(mu, k)
    for nu in nus:
        out = subtract(out, cylinder(nu, k))
    return out


# ---------------------------------------------------------------- translation and shifts

@lru_cache(maxsize=None)
def _prefix_cell(zeta: Path, c: Cell, k: KSequence) -> CellSet:
    return from_pattern(pattern_prefix(zeta, cell_pattern(c)), k)


@lru_cache(maxsize=None)
def _shift_cell(zeta: Path, c: Cell, k: KSequence) -> CellSet:
    P = pattern_shift(zeta, cell_pattern(c), k)
    return empty(zeta.source, k) if P is None else from_pattern(P, k)


def prefix_set(zeta: Path, s: CellSet) -> CellSet:
    """zeta . s as a subset of Z_{r(zeta)}."""
    if zeta.source != s.vertex:
        raise DomainError(f"{render(zeta)} does not end at v{s.vertex}")
    if zeta.is_identity:
        return s
    return union_all((_prefix_cell(zeta, c, s.k) for c in s.cells), zeta.m, s.k)


def shift_set(zeta: Path, s: CellSet) -> CellSet:
    """sigma^zeta(s meet Z(zeta)) as a subset of Z_{s(zeta)}."""
    if zeta.m != s.vertex:
        raise DomainError(f"{render(zeta)} does not start at v{s.vertex}")
    if zeta.is_identity:
        return s
    return union_all((_shift_cell(zeta, c, s.k) for c in s.cells), zeta.source, s.k)


def translate(theta: Path, s: CellSet) -> CellSet:
    """theta . s for theta in Phi (ending in gamma or trivial): prefixes cells, level + |theta|."""
    if not (theta.is_identity or theta.ends_in_gamma):
        raise DomainError(f"{render(theta)} must end in a gamma edge")
    if theta.source != s.vertex:
        raise DomainError(f"{render(theta)} does not end at v{s.vertex}")
    if theta.is_identity or s.is_empty:
        return s if theta.is_identity else empty(theta.m, s.k)
    level = max(s.level, 0)
    cells = frozenset(
        Cell(theta.m, c.n + theta.length, theta.closed + c.prefix, c.core) for c in s.at_level(level)
    )
    return CellSet(theta.m, level + theta.length, cells, s.k)


def alpha_shift(r: int, s: CellSet) -> CellSet:
    """alpha^r . s, a subset of Z_{vertex - r}."""
    if r < 1 or s.vertex - r < 1:
        raise DomainError("need 1 <= r < vertex")
    return prefix_set(Path(s.vertex - r, (), (r, 0)), s)


def beta_unshift(sv: int, s: CellSet) -> CellSet:
    """sigma^{beta^sv}(s), a subset of Z_{vertex + sv}."""
    if sv < 1:
        raise DomainError("need sv >= 1")
    return shift_set(Path(s.vertex, (), (0, sv)), s)
