"""Finite representatives of infinite paths, used as a ground-truth oracle.

An infinite path from v_m is a finite run of closed triples followed either by more closed
triples or by a final alpha/beta block with at least one infinite count. At depth D only
finitely many behaviours are distinguishable by cells of level <= D; ``classes`` returns one
representative for each. Membership here is decided from cylinder definitions alone, without
the pattern engine in ``cylinders``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator, NamedTuple, Optional

from .cfcore import KSequence
from .cylinders import Cell, CellSet
from .paths import Path, compose, lambda1

INF = math.inf


class InfPath(NamedTuple):
    m: int
    closed: tuple[tuple[int, int, int], ...]
    tail: tuple[float, float]


def in_cylinder(x: InfPath, mu: Path) -> bool:
    """x lies in Z(mu)."""
    if x.m != mu.m or len(x.closed) < len(mu.closed):
        return False
    n = len(mu.closed)
    if x.closed[:n] != mu.closed:
        return False
    nxt = x.closed[n][:2] if len(x.closed) > n else x.tail
    return nxt[0] >= mu.tail[0] and nxt[1] >= mu.tail[1]


def prefix(zeta: Path, x: InfPath) -> InfPath:
    """zeta x."""
    assert zeta.source == x.m
    tp, tq = zeta.tail
    if x.closed:
        p, q, b = x.closed[0]
        return InfPath(zeta.m, zeta.closed + ((p + tp, q + tq, b),) + x.closed[1:], x.tail)
    return InfPath(zeta.m, zeta.closed, (x.tail[0] + tp, x.tail[1] + tq))


def shift(zeta: Path, x: InfPath) -> Optional[InfPath]:
    """sigma^zeta(x), or None when x does not extend zeta."""
    if not in_cylinder(x, zeta):
        return None
    n = len(zeta.closed)
    tp, tq = zeta.tail
    if len(x.closed) > n:
        p, q, b = x.closed[n]
        return InfPath(zeta.source, ((p - tp, q - tq, b),) + x.closed[n + 1:], x.tail)
    return InfPath(zeta.source, (), (x.tail[0] - tp, x.tail[1] - tq))


@lru_cache(maxsize=None)
def cell_cylinders(c: Cell) -> tuple[tuple[Path, ...], tuple[Path, ...]]:
    """(inside, outside): c is the intersection of Z(p) for p inside minus the Z(p) for p outside."""
    theta = c.prefix_path()
    mc, nc = c.core_vertex, c.core_level
    kind = c.core[0]

    def z(p: int, q: int) -> Path:
        return compose(theta, lambda1(mc, p, q))

    if kind == "Z":
        return (theta,), ()
    if kind == "P1":
        j = c.core[1]
        return (z(nc + 1, j),), (z(nc + 1, j + 1),)
    if kind == "P2":
        i = c.core[1]
        return (z(i, nc + 1),), (z(i + 1, nc + 1),)
    if kind == "P3":
        _, i, j, b = c.core
        return (compose(theta, Path(mc, ((i, j, b),), (0, 0))),), ()
    return (z(nc + 1, nc + 1),), ()


def cell_contains(c: Cell, x: InfPath) -> bool:
    """Membership from the defining cylinder differences of each cell type."""
    inside, outside = cell_cylinders(c)
    return all(in_cylinder(x, p) for p in inside) and not any(in_cylinder(x, p) for p in outside)


def set_contains(s: CellSet, x: InfPath) -> bool:
    return x.m == s.vertex and any(cell_contains(c, x) for c in s.cells)


def classes(m: int, depth: int, k: KSequence) -> list[InfPath]:
    """One representative per behaviour class seen by cells of level <= depth."""
    out: list[InfPath] = []

    def walk(offset: int, closed: tuple) -> Iterator[InfPath]:
        cap = depth - offset + 1
        for a in range(cap + 1):
            for b in range(cap + 1):
                if a == cap or b == cap:
                    yield InfPath(m, closed, (INF if a == cap else a, INF if b == cap else b))
                    continue
                level = m + offset + a + b
                for br in range(1, k.at(level) + 1):
                    nxt = closed + ((a, b, br),)
                    after = offset + a + b + 1
                    if after > depth:
                        yield InfPath(m, nxt, (INF, INF))
                    else:
                        yield from walk(after, nxt)

    out.extend(walk(0, ()))
    return out


def bisection_apply(delta: Path, epsilon: Path, support: CellSet, x: InfPath) -> Optional[InfPath]:
    """The partial map epsilon y -> delta y for y in support."""
    y = shift(epsilon, x)
    if y is None or not set_contains(support, y):
        return None
    return prefix(delta, y)

