"""Continued fractions, convergents, Effros-Shen dimensions and k-sequences.

All integer arithmetic uses Python ints, so convergent tables never overflow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .errors import LengthError


@dataclass(frozen=True)
class ContinuedFraction:
    """Finite prefix [a0; a1, a2, ...] of a simple continued fraction."""

    terms: tuple[int, ...]

    def __post_init__(self):
        terms = tuple(int(t) for t in self.terms)
        if not terms:
            raise ValueError("a continued fraction needs at least one term")
        if any(t < 1 for t in terms[1:]):
            raise ValueError("terms after index 0 must be positive")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    def value(self) -> Fraction:
        acc = Fraction(self.terms[-1])
        for a in reversed(self.terms[:-1]):
            acc = a + 1 / acc
        return acc


@dataclass(frozen=True)
class ConvergentTable:
    p: tuple[int, ...]
    q: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.p)

    def determinant(self, n: int) -> int:
        """p_n q_{n-1} - p_{n-1} q_n, which equals (-1)^(n+1)."""
        return self.p[n] * self.q[n - 1] - self.p[n - 1] * self.q[n]

    def fraction(self, n: int) -> Fraction:
        return Fraction(self.p[n], self.q[n])


@dataclass(frozen=True)
class EffrosShenSystem:
    """Level n holds (q_n, q_{n-1}, a_n): block sizes and the multiplicity of the big block."""

    levels: tuple[tuple[int, int, int], ...]

    def dimensions(self) -> tuple[int, ...]:
        if not self.levels:
            return ()
        return (self.levels[0][1],) + tuple(lv[0] for lv in self.levels)


def _as_cf(cf: ContinuedFraction | Sequence[int]) -> ContinuedFraction:
    return cf if isinstance(cf, ContinuedFraction) else ContinuedFraction(tuple(cf))


def convergents(cf: ContinuedFraction | Sequence[int], n: int | None = None) -> ConvergentTable:
    """Rows (p_i, q_i) for i = 0..n-1 via p_i = a_i p_{i-1} + p_{i-2}."""
    cf = _as_cf(cf)
    n = len(cf) if n is None else n
    if n > len(cf):
        raise LengthError(f"asked for {n} convergents but only {len(cf)} terms are available")
    if n < 1:
        return ConvergentTable((), ())
    a = cf.terms
    p_prev, q_prev = 1, 0
    p_cur, q_cur = a[0], 1
    ps, qs = [p_cur], [q_cur]
    for i in range(1, n):
        p_prev, p_cur = p_cur, a[i] * p_cur + p_prev
        q_prev, q_cur = q_cur, a[i] * q_cur + q_prev
        ps.append(p_cur)
        qs.append(q_cur)
    return ConvergentTable(tuple(ps), tuple(qs))


def effros_shen_system(cf: ContinuedFraction | Sequence[int], n: int | None = None) -> EffrosShenSystem:
    """Dimension data of the inductive system built from the first n terms (n >= 2)."""
    cf = _as_cf(cf)
    n = len(cf) if n is None else n
    if n < 2:
        raise ValueError("need at least two terms")
    table = convergents(cf, n)
    levels = tuple((table.q[i], table.q[i - 1], cf.terms[i]) for i in range(1, n))
    return EffrosShenSystem(levels)


def _cf_placement(c: Sequence[int], k1: int, length: int) -> list[int]:
    # k = (k1, c0, [c1-1 zeros], c2, [c3-1 zeros], c4, ...)
    out = [int(k1)]
    if length <= 1:
        return out[:length]
    if not c:
        raise LengthError("continued fraction has no terms")
    out.append(int(c[0]))
    idx = 1
    while len(out) < length:
        if idx + 1 > len(c):
            raise LengthError(f"continued fraction too short to fill {length} k-entries")
        zeros = int(c[idx]) - 1
        if zeros < 0:
            raise ValueError("odd-index terms must be positive")
        out.extend([0] * zeros)
        if len(out) >= length:
            break
        if idx + 2 > len(c):
            raise LengthError(f"continued fraction too short to fill {length} k-entries")
        out.append(int(c[idx + 1]))
        idx += 2
    return out[:length]


@dataclass(frozen=True)
class KSequence:
    """Edge counts k_1, k_2, ... as a materialized prefix plus a rule for deeper entries.

    ``tail`` is "periodic" (repeat the prefix), "cf" (regenerate from ``cf`` and ``k1``)
    or "strict" (no entries beyond the prefix).
    """

    values: tuple[int, ...]
    tail: str = "periodic"
    cf: tuple[int, ...] = ()
    k1: int = 0

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if not values:
            raise ValueError("k-sequence prefix is empty")
        if any(v < 0 for v in values):
            raise ValueError("k entries must be nonnegative")
        if self.tail not in ("periodic", "cf", "strict"):
            raise ValueError(f"unknown tail rule {self.tail!r}")
        if self.tail == "periodic" and not any(values):
            raise ValueError("a periodic k-sequence needs a nonzero entry")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_list(cls, values: Iterable[int], periodic: bool = True) -> "KSequence":
        return cls(tuple(values), "periodic" if periodic else "strict")

    def __len__(self) -> int:
        return len(self.values)

    def at(self, i: int) -> int:
        """k_i with 1-based index."""
        if i < 1:
            raise IndexError("k is indexed from 1")
        if i <= len(self.values):
            return self.values[i - 1]
        if self.tail == "periodic":
            return self.values[(i - 1) % len(self.values)]
        if self.tail == "cf":
            return _cf_placement(self.cf, self.k1, i)[i - 1]
        raise LengthError(f"k_{i} requested but only {len(self.values)} entries are stored")

    def prefix(self, n: int) -> tuple[int, ...]:
        return tuple(self.at(i) for i in range(1, n + 1))

    def extend(self, n: int) -> "KSequence":
        """Same rule with at least n entries materialized."""
        if n <= len(self.values):
            return self
        return KSequence(self.prefix(n), self.tail, self.cf, self.k1)

    def with_periodic_tail(self) -> "KSequence":
        return KSequence(self.values, "periodic")

    def nonzero_positions(self, count: int) -> tuple[int, ...]:
        """(p_0, ..., p_count) with p_0 = 0 and p_j the index of the j-th nonzero entry."""
        out = [0]
        i = 0
        limit = len(self.values) * (count + 2) + 64
        while len(out) <= count:
            i += 1
            if i > limit and self.tail != "strict":
                raise LengthError("could not find enough nonzero k entries")
            if self.at(i) > 0:
                out.append(i)
        return tuple(out)

    def p(self, j: int) -> int:
        return self.nonzero_positions(j)[j]

    def to_json(self) -> dict[str, Any]:
        return {"k": list(self.values), "tail": self.tail}


def k_sequence_from_cf(c: ContinuedFraction | Sequence[int], k1: int, length: int) -> KSequence:
    """k = (k1, c0, 0.., c2, 0.., c4, ...) where the zero runs have lengths c1-1, c3-1, ..."""
    terms = c.terms if isinstance(c, ContinuedFraction) else tuple(int(t) for t in c)
    if k1 < 0:
        raise ValueError("k1 must be nonnegative")
    values = _cf_placement(terms, k1, length)
    return KSequence(tuple(values), "cf", tuple(terms), int(k1))


def cf_from_k(k: Sequence[int]) -> tuple[int, list[int]]:
    """Inverse reading of k_sequence_from_cf: (k1, [c0, c1, c2, ...]).

    Nonzero entries after k1 give c0, c2, ...; the zero runs between them give c1-1, c3-1, ...
    The final even term is only recovered if it is present.
    """
    k = list(k)
    k1, rest = k[0], k[1:]
    if not rest:
        return k1, []
    c = [rest[0]]
    run = 0
    for v in rest[1:]:
        if v == 0:
            run += 1
        else:
            c.extend([run + 1, v])
            run = 0
    return k1, c


def _normalize_zeros(terms: list[int]) -> list[int]:
    # [.., x, 0, y, ..] = [.., x + y, ..]; a trailing [.., x, 0] collapses to [..]
    out: list[int] = []
    i = 0
    while i < len(terms):
        t = terms[i]
        if t == 0 and i > 0:
            if i + 1 < len(terms):
                out[-1] += terms[i + 1]
                i += 2
                continue
            out.pop()
            i += 1
            continue
        out.append(t)
        i += 1
    return out


def theta_from_k(k: KSequence | Sequence[int], precision: int) -> tuple[ContinuedFraction, float]:
    """The expansion [0, 1, k1, 1, k2, ..., 1, k_precision] normalized, and its value."""
    seq = k if isinstance(k, KSequence) else KSequence.from_list(k)
    raw = [0]
    for i in range(1, precision + 1):
        raw.extend([1, seq.at(i)])
    terms = _normalize_zeros(raw)
    cf = ContinuedFraction(tuple(terms))
    return cf, float(cf.value())


def parse_input(text_or_obj: str | dict[str, Any], length: int | None = None) -> KSequence:
    """Read {"cf": [...], "k1": int} or {"k": [...]} into a k-sequence."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else dict(text_or_obj)
    if "k" in obj:
        return KSequence.from_list(obj["k"], periodic=obj.get("tail", "periodic") == "periodic")
    if "cf" in obj:
        cf = [int(t) for t in obj["cf"]]
        k1 = int(obj.get("k1", 1))
        n = length if length is not None else max_fill_length(cf, k1)
        return k_sequence_from_cf(cf, k1, n)
    raise ValueError('expected a "k" or "cf" field')


def max_fill_length(c: Sequence[int], k1: int) -> int:
    """Longest k prefix that the given continued-fraction terms determine."""
    n = 1
    while True:
        try:
            _cf_placement(c, k1, n + 1)
        except LengthError:
            return n
        n += 1


def convergent_json(table: ConvergentTable) -> list[dict[str, str]]:
    """Rows with exact integers as strings."""
    return [{"n": str(i), "p": str(p), "q": str(q)} for i, (p, q) in enumerate(zip(table.p, table.q))]
