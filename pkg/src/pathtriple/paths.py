"""Finite paths in the category Lambda and the index sets built from them.

A path from v_m is stored as ``closed`` triples (p, q, b) and a trailing degree ``tail``.
Each triple is a commuting block alpha^p beta^q followed by one gamma edge with branch b;
the tail is the final alpha/beta block. Every edge lowers the vertex index by one, so the
source of a path is v_{m + length}.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Optional

from .cfcore import KSequence
from .errors import ComposabilityError, DomainError

Triple = tuple[int, int, int]
Degree = tuple[int, int]


class Path(NamedTuple):
    m: int
    closed: tuple[Triple, ...] = ()
    tail: Degree = (0, 0)

    @property
    def length(self) -> int:
        return sum(p + q + 1 for p, q, _ in self.closed) + self.tail[0] + self.tail[1]

    @property
    def source(self) -> int:
        return self.m + self.length

    @property
    def is_identity(self) -> bool:
        return not self.closed and self.tail == (0, 0)

    @property
    def ends_in_gamma(self) -> bool:
        return bool(self.closed) and self.tail == (0, 0)

    def gamma_edges(self) -> list[tuple[int, int]]:
        """(level, branch) for each gamma edge, in order."""
        out = []
        pos = self.m
        for p, q, b in self.closed:
            pos += p + q
            out.append((pos, b))
            pos += 1
        return out

    def blocks(self) -> list[tuple[str, object]]:
        """Alternating normal form: ("L1", (p, q)) and ("L2", [(level, branch), ...])."""
        out: list[tuple[str, object]] = []
        pos = self.m
        for p, q, b in self.closed:
            if p or q:
                out.append(("L1", (p, q)))
                pos += p + q
            if out and out[-1][0] == "L2":
                out[-1][1].append((pos, b))
            else:
                out.append(("L2", [(pos, b)]))
            pos += 1
        if self.tail != (0, 0):
            out.append(("L1", self.tail))
        return out

    def __str__(self) -> str:
        return render(self)


def identity(m: int) -> Path:
    if m < 1:
        raise DomainError("vertices are indexed from 1")
    return Path(m)


def lambda1(m: int, p: int = 0, q: int = 0) -> Path:
    return Path(m, (), (p, q))


def gamma(m: int, branch: int = 1) -> Path:
    return Path(m, ((0, 0, branch),), (0, 0))


def compose(lhs: Path, rhs: Path) -> Path:
    """Normal form of lhs followed by rhs; alpha/beta blocks at the seam merge."""
    if lhs.source != rhs.m:
        raise ComposabilityError(f"source v{lhs.source} of {render(lhs)} is not the range v{rhs.m} of {render(rhs)}")
    tp, tq = lhs.tail
    if not rhs.closed:
        return Path(lhs.m, lhs.closed, (tp + rhs.tail[0], tq + rhs.tail[1]))
    p, q, b = rhs.closed[0]
    return Path(lhs.m, lhs.closed + ((p + tp, q + tq, b),) + rhs.closed[1:], rhs.tail)


def compose_all(*paths: Path) -> Path:
    out = paths[0]
    for pth in paths[1:]:
        out = compose(out, pth)
    return out


def _sub(a: Degree, b: Degree) -> Degree:
    return (a[0] - b[0], a[1] - b[1])


def _leq(a: Degree, b: Degree) -> bool:
    return a[0] <= b[0] and a[1] <= b[1]


def extends(lam: Path, mu: Path) -> bool:
    """True when lam = mu nu for some nu."""
    if lam.m != mu.m or len(lam.closed) < len(mu.closed):
        return False
    n = len(mu.closed)
    if lam.closed[:n] != mu.closed:
        return False
    nxt = lam.closed[n][:2] if len(lam.closed) > n else lam.tail
    return _leq(mu.tail, nxt)


def left_shift(mu: Path, lam: Path) -> Path:
    """The unique nu with mu nu = lam."""
    if not extends(lam, mu):
        raise DomainError(f"{render(lam)} does not extend {render(mu)}")
    n = len(mu.closed)
    src = mu.source
    if len(lam.closed) > n:
        p, q, b = lam.closed[n]
        return Path(src, ((p - mu.tail[0], q - mu.tail[1], b),) + lam.closed[n + 1:], lam.tail)
    return Path(src, (), _sub(lam.tail, mu.tail))


def right_quotient(lam: Path, suffix: Path) -> Path:
    """The unique a with a suffix = lam."""
    if lam.source != suffix.source or suffix.length > lam.length:
        raise DomainError(f"{render(suffix)} is not a suffix of {render(lam)}")
    c = len(suffix.closed)
    if c == 0:
        if not _leq(suffix.tail, lam.tail):
            raise DomainError(f"{render(suffix)} is not a suffix of {render(lam)}")
        return Path(lam.m, lam.closed, _sub(lam.tail, suffix.tail))
    if len(lam.closed) < c or lam.tail != suffix.tail or lam.closed[len(lam.closed) - c + 1:] != suffix.closed[1:]:
        raise DomainError(f"{render(suffix)} is not a suffix of {render(lam)}")
    p, q, b = lam.closed[-c]
    ps, qs, bs = suffix.closed[0]
    if b != bs or p < ps or q < qs:
        raise DomainError(f"{render(suffix)} is not a suffix of {render(lam)}")
    return Path(lam.m, lam.closed[:-c], (p - ps, q - qs))


def minimal_common_extension(mu: Path, nu: Path) -> Optional[tuple[Path, Path]]:
    """Remainders (z1, z2) with mu z1 = nu z2 minimal, or None when mu and nu do not meet."""
    if mu.m != nu.m:
        raise DomainError("paths must share their range vertex")
    c1, c2 = mu.closed, nu.closed
    n = min(len(c1), len(c2))
    if c1[:n] != c2[:n]:
        return None
    if len(c1) == len(c2):
        t = (max(mu.tail[0], nu.tail[0]), max(mu.tail[1], nu.tail[1]))
        return Path(mu.source, (), _sub(t, mu.tail)), Path(nu.source, (), _sub(t, nu.tail))
    if len(c1) > len(c2):
        if not _leq(nu.tail, c1[n][:2]):
            return None
        return identity(mu.source), left_shift(nu, mu)
    if not _leq(mu.tail, c2[n][:2]):
        return None
    return left_shift(mu, nu), identity(nu.source)


def join(mu: Path, nu: Path) -> Optional[Path]:
    res = minimal_common_extension(mu, nu)
    return None if res is None else compose(mu, res[0])


def common_suffix(a: Path, b: Path) -> Path:
    """The longest path nu with a = a' nu and b = b' nu (identity when there is none)."""
    if a.source != b.source:
        raise DomainError("paths must share their source vertex")
    src = a.source
    if a.tail != b.tail:
        t = (min(a.tail[0], b.tail[0]), min(a.tail[1], b.tail[1]))
        return Path(src - t[0] - t[1], (), t)
    suffix: list[Triple] = []
    ca, cb = a.closed, b.closed
    for i in range(1, min(len(ca), len(cb)) + 1):
        (pa, qa, ba), (pb, qb, bb) = ca[-i], cb[-i]
        if ba != bb:
            break
        if (pa, qa) == (pb, qb):
            suffix.insert(0, ca[-i])
            continue
        suffix.insert(0, (min(pa, pb), min(qa, qb), ba))
        break
    length = sum(p + q + 1 for p, q, _ in suffix) + a.tail[0] + a.tail[1]
    return Path(src - length, tuple(suffix), a.tail)


def has_common_suffix(a: Path, b: Path) -> bool:
    """True iff a and b share a nontrivial final segment."""
    return common_suffix(a, b).length > 0


def split_last_gamma(path: Path) -> tuple[Path, Path]:
    """(mu, eta): mu ends in a gamma edge or is trivial, eta is the final alpha/beta block."""
    mu = Path(path.m, path.closed, (0, 0))
    return mu, Path(mu.source, (), path.tail)


def check_path(path: Path, k: KSequence) -> None:
    """Raise DomainError if a gamma branch exceeds the available edges at its level."""
    if path.m < 1:
        raise DomainError("vertices are indexed from 1")
    for level, b in path.gamma_edges():
        if not 1 <= b <= k.at(level):
            raise DomainError(f"no edge gamma({level},{b}): k_{level} = {k.at(level)}")
    if min(path.tail) < 0 or any(min(t[:2]) < 0 for t in path.closed):
        raise DomainError("negative degree")


# ---------------------------------------------------------------- text form

_L1 = re.compile(r"^(?:a(?:\^(\d+))?)?(?:b(?:\^(\d+))?)?$")
_G = re.compile(r"g\((\d+),(\d+)\)")


def render(path: Path) -> str:
    parts = [f"v{path.m}"]
    for kind, val in path.blocks():
        if kind == "L1":
            p, q = val
            parts.append((f"a^{p}" if p else "") + (f"b^{q}" if q else ""))
        else:
            parts.append("".join(f"g({lv},{b})" for lv, b in val))
    return ".".join(parts)


def parse(text: str) -> Path:
    """Inverse of render, e.g. "v1.a^2b^1.g(4,2).a^1"."""
    tokens = text.strip().split(".")
    head = tokens[0]
    if not head.startswith("v") or not head[1:].isdigit():
        raise ValueError(f"path must start with a vertex like v1: {text!r}")
    out = identity(int(head[1:]))
    for tok in tokens[1:]:
        if tok.startswith("g"):
            pos = 0
            for match in _G.finditer(tok):
                if match.start() != pos:
                    raise ValueError(f"bad gamma block {tok!r}")
                pos = match.end()
                level, b = int(match.group(1)), int(match.group(2))
                if level != out.source:
                    raise ValueError(f"gamma level {level} does not sit at vertex v{out.source}")
                out = compose(out, gamma(level, b))
            if pos != len(tok):
                raise ValueError(f"bad gamma block {tok!r}")
            continue
        match = _L1.match(tok)
        if not tok or match is None:
            raise ValueError(f"bad block {tok!r}")
        p = 0 if "a" not in tok else int(match.group(1) or 1)
        q = 0 if "b" not in tok else int(match.group(2) or 1)
        out = compose(out, lambda1(out.source, p, q))
    return out


# ---------------------------------------------------------------- enumeration

def _closed_sequences(m: int, budget: int, k: KSequence) -> Iterator[tuple[tuple[Triple, ...], int]]:
    """All closed-triple sequences from v_m with total length <= budget, with their lengths."""
    yield (), 0
    for s in range(budget):
        for p in range(s + 1):
            q = s - p
            level = m + s
            for b in range(1, k.at(level) + 1):
                for rest, used in _closed_sequences(m + s + 1, budget - s - 1, k):
                    yield ((p, q, b),) + rest, s + 1 + used


def enumerate_paths(m: int, length: int, k: KSequence) -> list[Path]:
    """Every path from v_m with exactly the given length."""
    out = []
    for closed, used in _closed_sequences(m, length, k):
        rem = length - used
        for p in range(rem + 1):
            out.append(Path(m, closed, (p, rem - p)))
    return sorted(out)


@lru_cache(maxsize=None)
def enumerate_phi(m: int, n: int, k: KSequence) -> tuple[Path, ...]:
    """Phi_n^m: paths from v_m of length 1..n ending in a gamma edge, plus the identity."""
    out = [Path(m, closed, (0, 0)) for closed, _ in _closed_sequences(m, max(n, 0), k)]
    return tuple(sorted(out, key=lambda pth: (pth.length, pth)))


@dataclass(frozen=True, order=True)
class PairClass:
    delta: Path
    epsilon: Path
    j: int
    l: int

    @property
    def vertex(self) -> int:
        return self.delta.source

    def __str__(self) -> str:
        return f"({render(self.delta)}, {render(self.epsilon)})"


def m_index(j: int, l: int, k: KSequence) -> int:
    """m(j, l) = p_j + l + 1, the common source vertex of pairs in S_{j,l}."""
    return k.p(j) + l + 1


@lru_cache(maxsize=None)
def enumerate_S(j: int, k: KSequence) -> tuple[tuple[Path, Path], ...]:
    """S_j: pairs from Phi_{p_j} x Phi_{p_j} with at least one length equal to p_j."""
    pj = k.p(j)
    phi = enumerate_phi(1, pj, k)
    return tuple((mu, nu) for mu in phi for nu in phi if pj in (mu.length, nu.length))


@lru_cache(maxsize=None)
def enumerate_S_jl(j: int, l: int, k: KSequence) -> tuple[PairClass, ...]:
    """S_{j,l}: extensions of S_j pairs by alpha/beta blocks to total length p_j + l."""
    pj = k.p(j)
    total = pj + l
    found: set[tuple[Path, Path]] = set()
    for mu, nu in enumerate_S(j, k):
        r, s = total - mu.length, total - nu.length
        if l >= 1:
            # orthogonal degrees with both blocks nonempty: one pure alpha, the other pure beta
            for eta, theta in (((r, 0), (0, s)), ((0, r), (s, 0))):
                found.add((compose(mu, lambda1(mu.source, *eta)), compose(nu, lambda1(nu.source, *theta))))
            continue
        for a in range(r + 1):
            d = compose(mu, lambda1(mu.source, a, r - a))
            for b in range(s + 1):
                e = compose(nu, lambda1(nu.source, b, s - b))
                if not has_common_suffix(d, e):
                    found.add((d, e))
    return tuple(PairClass(d, e, j, l) for d, e in sorted(found, key=lambda de: (render(de[0]), render(de[1]))))


def classify_pair(delta: Path, epsilon: Path, k: KSequence) -> tuple[int, int]:
    """(j, l) of a suffix-free pair from v1 with equal lengths."""
    if delta.m != 1 or epsilon.m != 1 or delta.length != epsilon.length:
        raise DomainError("pair must start at v1 with equal lengths")
    if has_common_suffix(delta, epsilon):
        raise DomainError("pair has a common suffix; strip it first")
    mu, _ = split_last_gamma(delta)
    nu, _ = split_last_gamma(epsilon)
    top = max(mu.length, nu.length)
    j = 0
    while k.p(j) < top:
        j += 1
    if k.p(j) != top:
        raise DomainError(f"last gamma level {top} is not a nonzero position of k")
    return j, delta.length - top
