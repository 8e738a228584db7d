"""Convolution *-algebra spanned by basic compact-open bisections [delta, epsilon, E].

[delta, epsilon, E] pairs the tails epsilon y and delta y for y in E, where E is a cell set
at the common source vertex of delta and epsilon (both start at v_1). The product of two
basic bisections is basic or empty:

    [mu, nu, F] [delta, eps, E] = [mu z1, eps z2, sigma^z1(F) & sigma^z2(E)]

with nu z1 = delta z2 the minimal common extension.

Canonical form strips the longest common suffix z of (delta, eps) into the support,
[delta' z, eps' z, E] = [delta', eps', z E], then merges supports with equal coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .cfcore import KSequence
from .cylinders import CellSet, full, intersect, prefix_set, shift_set
from .errors import DomainError
from .measure import MeasureTable, measure_set
from .paths import (
    Path,
    common_suffix,
    compose,
    enumerate_S,
    identity,
    lambda1,
    minimal_common_extension,
    render,
    right_quotient,
)

COEF_DIGITS = 12


@dataclass(frozen=True)
class Bisection:
    delta: Path
    epsilon: Path
    support: CellSet

    def __post_init__(self):
        if self.delta.m != 1 or self.epsilon.m != 1:
            raise DomainError("bisection paths start at v1")
        if self.delta.source != self.epsilon.source:
            raise DomainError("delta and epsilon must share their source vertex")
        if self.support.vertex != self.epsilon.source:
            raise DomainError(f"support must live at v{self.epsilon.source}")

    def __str__(self) -> str:
        return f"[{render(self.delta)}, {render(self.epsilon)}, {self.support}]"


Term = tuple[Bisection, complex]


@dataclass(frozen=True)
class AlgebraElement:
    terms: tuple[Term, ...]
    k: KSequence

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return make_element(self.terms + other.terms, self.k)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + other.scale(-1)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return convolve(self, other)

    def scale(self, c: complex) -> "AlgebraElement":
        return make_element(tuple((b, c * w) for b, w in self.terms), self.k)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def norm_estimate(self) -> float:
        """Sum of |coefficients|; each basic bisection acts with norm at most one."""
        return sum(abs(w) for _, w in self.terms)

    def pairs(self) -> list[tuple[Path, Path]]:
        return sorted({(b.delta, b.epsilon) for b, _ in self.terms})

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({_fmt(w)}){b}" for b, w in self.terms)

    def to_json(self) -> list[dict]:
        return [
            {"delta": render(b.delta), "epsilon": render(b.epsilon), "support": b.support.to_json(),
             "re": w.real, "im": w.imag}
            for b, w in self.terms
        ]


def _fmt(w: complex) -> str:
    return f"{w.real:g}" if w.imag == 0 else f"{w.real:g}{w.imag:+g}j"


def _key(w: complex) -> complex:
    return complex(round(w.real, COEF_DIGITS) + 0.0, round(w.imag, COEF_DIGITS) + 0.0)


@lru_cache(maxsize=None)
def strip_suffix(delta: Path, epsilon: Path, support: CellSet) -> Bisection:
    """Move the common suffix of (delta, epsilon) into the support."""
    zeta = common_suffix(delta, epsilon)
    if zeta.length == 0:
        return Bisection(delta, epsilon, support)
    return Bisection(right_quotient(delta, zeta), right_quotient(epsilon, zeta), prefix_set(zeta, support))


def _sort_key(t: Term):
    b, w = t
    return (render(b.delta), render(b.epsilon), b.support.level, tuple(sorted(b.support.cells)), w.real, w.imag)


def make_element(terms: Iterable[tuple[Bisection, complex]], k: KSequence) -> AlgebraElement:
    """Canonical form of a finite sum of weighted bisections."""
    by_pair: dict[tuple[Path, Path], list[tuple[CellSet, complex]]] = {}
    for b, w in terms:
        w = complex(w)
        if w == 0 or b.support.is_empty:
            continue
        s = strip_suffix(b.delta, b.epsilon, b.support)
        by_pair.setdefault((s.delta, s.epsilon), []).append((s.support, w))
    out: list[Term] = []
    for (d, e), items in by_pair.items():
        if len(items) == 1:
            supp, w = items[0]
            w = _key(w)
            if w != 0:
                out.append((Bisection(d, e, supp), w))
            continue
        level = max(s.level for s, _ in items)
        acc: dict = {}
        for supp, w in items:
            for c in supp.at_level(level):
                acc[c] = acc.get(c, 0) + w
        groups: dict[complex, set] = {}
        for c, w in acc.items():
            w = _key(w)
            if w != 0:
                groups.setdefault(w, set()).add(c)
        vertex = items[0][0].vertex
        for w, cells in groups.items():
            supp = CellSet(vertex, level, frozenset(cells), k).canonical()
            out.append((Bisection(d, e, supp), w))
    out.sort(key=_sort_key)
    return AlgebraElement(tuple(out), k)


def basic(delta: Path, epsilon: Path, support: Optional[CellSet] = None, k: Optional[KSequence] = None,
          coef: complex = 1) -> AlgebraElement:
    """chi_[delta, epsilon, support]; the support defaults to all of Z_{s(epsilon)}."""
    if support is None:
        if k is None:
            raise DomainError("k required when no support is given")
        support = full(epsilon.source, k)
    return make_element(((Bisection(delta, epsilon, support), coef),), support.k)


def unit(k: KSequence) -> AlgebraElement:
    return basic(identity(1), identity(1), full(1, k))


def zero(k: KSequence) -> AlgebraElement:
    return AlgebraElement((), k)


def adjoint(a: AlgebraElement) -> AlgebraElement:
    return make_element(((Bisection(b.epsilon, b.delta, b.support), w.conjugate()) for b, w in a.terms), a.k)


@lru_cache(maxsize=None)
def core_product(nu: Path, F: CellSet, delta: Path, E: CellSet) -> Optional[tuple[Path, Path, CellSet]]:
    """(z1, z2, support) for [., nu, F][delta, ., E], or None when the product is empty."""
    ext = minimal_common_extension(nu, delta)
    if ext is None:
        return None
    z1, z2 = ext
    supp = intersect(shift_set(z1, F), shift_set(z2, E))
    if supp.is_empty:
        return None
    return z1, z2, supp


def product_terms(x: Bisection, y: Bisection) -> Optional[Bisection]:
    res = core_product(x.epsilon, x.support, y.delta, y.support)
    if res is None:
        return None
    z1, z2, supp = res
    return Bisection(compose(x.delta, z1), compose(y.epsilon, z2), supp)


def convolve(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.k != b.k:
        raise DomainError("elements use different k-sequences")
    out = []
    for x, wx in a.terms:
        for y, wy in b.terms:
            t = product_terms(x, y)
            if t is not None:
                out.append((t, wx * wy))
    return make_element(out, a.k)


def trace(a: AlgebraElement, table: MeasureTable) -> complex:
    """Integral of the diagonal part against the invariant measure."""
    return sum((w * measure_set(b.support, table) for b, w in a.terms if b.delta == b.epsilon), 0j)


def gns_inner(a: AlgebraElement, b: AlgebraElement, table: MeasureTable) -> complex:
    """<eta(a), eta(b)> = trace(b* a)."""
    return trace(convolve(adjoint(b), a), table)


@dataclass(frozen=True)
class Generator:
    """A member of B_0: chi_[mu c^r, nu d^s, Z(s(nu d^s))] with (mu, nu) in S_j."""

    delta: Path
    epsilon: Path
    j: int
    element: AlgebraElement

    @property
    def length(self) -> int:
        return self.delta.length

    def __str__(self) -> str:
        return f"[{render(self.delta)}, {render(self.epsilon)}, Z{self.delta.source}]"


def b0_generators(j_max: int, len_max: int, k: KSequence) -> list[Generator]:
    """All B_0 elements with j <= j_max and |mu c^r| <= len_max."""
    seen: dict[tuple[Path, Path], Generator] = {}
    for j in range(j_max + 1):
        for mu, nu in enumerate_S(j, k):
            for total in range(max(mu.length, nu.length), len_max + 1):
                r, s = total - mu.length, total - nu.length
                for c, d in (((r, 0), (0, s)), ((0, r), (s, 0))):
                    delta = compose(mu, lambda1(mu.source, *c))
                    eps = compose(nu, lambda1(nu.source, *d))
                    if (delta, eps) not in seen:
                        seen[(delta, eps)] = Generator(delta, eps, j, basic(delta, eps, k=k))
    return sorted(seen.values(), key=lambda g: (g.j, g.length, render(g.delta), render(g.epsilon)))


def element_sum(parts: Sequence[AlgebraElement], k: KSequence) -> AlgebraElement:
    return make_element((t for p in parts for t in p.terms), k)
