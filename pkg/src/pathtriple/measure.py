"""The invariant measure on cylinder sets.

The measure of Z(lambda) depends only on h = |lambda| for lambda starting at v_1; a_h is that
value. Additivity over the level-0 partition of Z_{h+1} gives

    a_h = (2 + k_{h+1}) a_{h+1} - a_{h+2},

and the measure is the minimal (decaying) solution normalized by a_0 = 1, found by backward
recursion since forward recursion amplifies the dominant solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .cfcore import KSequence
from .cylinders import Cell, CellSet
from .errors import ConvergenceError, HorizonError


@dataclass(frozen=True)
class MeasureTable:
    a: tuple[float, ...]
    horizon: int
    tol: float

    def __getitem__(self, h: int) -> float:
        if h < 0 or h >= len(self.a):
            raise HorizonError(f"a_{h} lies beyond the computed horizon {self.horizon}")
        return self.a[h]

    def b(self, h: int) -> float:
        """b_h = a_{h-1} - a_h."""
        return self[h - 1] - self[h]

    def to_rows(self) -> list[dict[str, float]]:
        return [{"h": h, "a": v} for h, v in enumerate(self.a)]


def _backward(k: KSequence, top: int) -> list[float]:
    a = [0.0] * (top + 2)
    a[top] = 1.0
    for h in range(top - 1, -1, -1):
        a[h] = (2 + k.at(h + 1)) * a[h + 1] - a[h + 2]
        if a[h] > 1e250:
            scale = 1.0 / a[h]
            for i in range(h, top + 2):
                a[i] *= scale
    a0 = a[0]
    return [v / a0 for v in a[: top + 1]]


def depth_measures(k: KSequence, horizon: int, tol: float = 1e-12, max_horizon: int = 1 << 16) -> MeasureTable:
    """a_0..a_horizon via Miller's backward recursion with horizon doubling."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    trial = max(2 * horizon + 8, 16)
    prev = _backward(k, trial)
    while True:
        trial *= 2
        if trial > max_horizon:
            raise ConvergenceError(f"backward recursion did not settle below horizon {max_horizon}")
        cur = _backward(k, trial)
        if all(abs(cur[h] - prev[h]) <= tol * max(cur[h], 1e-300) for h in range(horizon + 1)):
            return MeasureTable(tuple(cur[: horizon + 1]), horizon, tol)
        prev = cur


def cell_depths(c: Cell) -> tuple[int, ...]:
    """Signed depth list: the measure is a[d0] - a[d1] (two entries) or a[d0] (one entry)."""
    mc, nc = c.core_vertex, c.core_level
    kind = c.core[0]
    if kind == "Z":
        return (mc - 1,)
    if kind in ("P1", "P2"):
        x = c.core[1]
        return (mc + nc + x, mc + nc + x + 1)
    if kind == "P3":
        _, i, j, _ = c.core
        return (mc + i + j,)
    return (mc + 2 * nc + 1,)


def measure_cell(c: Cell, table: MeasureTable) -> float:
    d = cell_depths(c)
    if len(d) == 2:
        return table[d[0]] - table[d[1]]
    return table[d[0]]


def measure_cells(cells: Iterable[Cell], table: MeasureTable) -> float:
    return sum(measure_cell(c, table) for c in cells)


def measure_set(s: CellSet, table: MeasureTable) -> float:
    return measure_cells(s.cells, table)


def required_depth(s: CellSet) -> int:
    """Deepest table index touched by measure_set(s)."""
    return max((max(cell_depths(c)) for c in s.cells), default=0)
