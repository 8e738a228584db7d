"""Verification suite: each check compares the library against an independent computation
and reports pass/fail with measured residuals."""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

from . import algebra as alg
from .boundary import InfPath, cell_contains, classes, in_cylinder, prefix, shift
from .cfcore import KSequence, convergents, effros_shen_system
from .cylinders import Cell, CellSet, parent_cell, q_cells, refine_cell
from .measure import MeasureTable, depth_measures, measure_cell
from .paths import Path, enumerate_paths, minimal_common_extension


@dataclass
class CheckResult:
    name: str
    passed: bool
    metrics: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.metrics.items())
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {shown}"

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "metrics": self.metrics, "notes": self.notes}


def _short(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def timed(fn: Callable[..., CheckResult]) -> Callable[..., CheckResult]:
    def run(*args, **kwargs) -> CheckResult:
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


# ---------------------------------------------------------------- oracle location

class Locator:
    """Finds, by oracle membership, the cells of Q_n^m containing a representative."""

    def __init__(self, m: int, n: int, k: KSequence):
        self.cells = q_cells(m, n, k)
        self.index: dict[tuple, list[Cell]] = {}
        for c in self.cells:
            self.index.setdefault(c.prefix, []).append(c)

    def containing(self, x: InfPath) -> list[Cell]:
        out = []
        for i in range(len(x.closed) + 1):
            for c in self.index.get(x.closed[:i], ()):
                if cell_contains(c, x):
                    out.append(c)
        return out

    def locate(self, x: InfPath) -> Cell:
        found = self.containing(x)
        if len(found) != 1:
            raise AssertionError(f"{x} lies in {len(found)} cells of Q_{self.cells[0].n}")
        return found[0]


# ---------------------------------------------------------------- 1. partitions

@timed
def check_partitions(k: KSequence, m_max: int = 3, n_max: int = 4) -> CheckResult:
    """Q_n^m partitions the representative classes exactly and Q_{n+1} refines Q_n."""
    violations = refine_violations = empty_cells = 0
    classes_seen = 0
    for m in range(1, m_max + 1):
        depth = n_max + 1
        reps = classes(m, depth, k)
        classes_seen += len(reps)
        owner: dict[int, list[Cell]] = {}
        for n in range(-1, depth + 1):
            loc = Locator(m, n, k)
            hit: dict[Cell, int] = {}
            row = []
            for x in reps:
                found = loc.containing(x)
                if len(found) != 1:
                    violations += 1
                    row.append(None)
                    continue
                row.append(found[0])
                hit[found[0]] = hit.get(found[0], 0) + 1
            empty_cells += sum(1 for c in loc.cells if c not in hit)
            owner[n] = row
        for n in range(-1, depth):
            parent_of: dict[Cell, Cell] = {}
            for child, par in zip(owner[n + 1], owner[n]):
                if child is None or par is None:
                    continue
                if parent_of.setdefault(child, par) != par:
                    refine_violations += 1
            for child, par in parent_of.items():
                if parent_cell(child) != par or child not in refine_cell(par, k):
                    refine_violations += 1
    passed = violations == 0 and refine_violations == 0 and empty_cells == 0
    return CheckResult(
        "partitions",
        passed,
        {"k": list(k.values), "classes": classes_seen, "violations": violations,
         "refinement_violations": refine_violations, "empty_cells": empty_cells},
    )


# ---------------------------------------------------------------- 2. measure

@timed
def check_measure(k: KSequence, m_max: int = 3, n_max: int = 4, tol: float = 1e-9) -> CheckResult:
    """Additivity of the measure over every refinement step and over whole partitions."""
    table = depth_measures(k, 2 * (m_max + n_max) + 8)
    worst = 0.0
    for m in range(1, m_max + 1):
        for n in range(-1, n_max + 1):
            cells = q_cells(m, n, k)
            worst = max(worst, abs(sum(measure_cell(c, table) for c in cells) - table[m - 1]))
            for c in cells:
                parts = sum(measure_cell(x, table) for x in refine_cell(c, k))
                worst = max(worst, abs(measure_cell(c, table) - parts))
    rec = max(abs(table[h] - (2 + k.at(h + 1)) * table[h + 1] + table[h + 2]) for h in range(table.horizon - 1))
    metrics: dict[str, Any] = {"k": list(k.values), "additivity_residual": worst, "recurrence_residual": rec}
    passed = worst < tol and rec < tol and all(table[h] > table[h + 1] > 0 for h in range(table.horizon))
    return CheckResult("measure", passed, metrics)


@timed
def check_golden_measure(h_max: int = 8, tol: float = 1e-9) -> CheckResult:
    k = KSequence.from_list([1])
    table = depth_measures(k, h_max)
    r = (3 - math.sqrt(5)) / 2
    err = max(abs(table[h] - r ** h) for h in range(h_max + 1))
    return CheckResult("golden_measure", err < tol, {"max_error": err, "a_1": table[1]})


# ---------------------------------------------------------------- 3. algebra

def paths_up_to(length: int, k: KSequence) -> list[Path]:
    return [p for n in range(length + 1) for p in enumerate_paths(1, n, k)]


def small_bisections(k: KSequence, max_len: int = 2, max_level: int = 1) -> list[alg.Bisection]:
    """Basic bisections with |delta| = |epsilon| <= max_len and single-cell supports from Q_{<=max_level}."""
    out = []
    for n in range(max_len + 1):
        ps = enumerate_paths(1, n, k)
        for d, e in itertools.product(ps, ps):
            if d.source != e.source:
                continue
            for lv in range(-1, max_level + 1):
                for c in q_cells(d.source, lv, k):
                    out.append(alg.Bisection(d, e, CellSet(d.source, lv, frozenset((c,)), k)))
    return out


def _oracle_key_check(nu: Path, delta: Path, Fs: list[CellSet], Es: list[CellSet], k: KSequence) -> tuple[int, int]:
    """Compare core_product(nu, F, delta, E) with the partial-map oracle for all F, E.

    Returns (keys checked, mismatches)."""
    depth = nu.length + delta.length + 2
    bad = 0
    ext = minimal_common_extension(nu, delta)
    # the meeting set of delta y and Z(nu) is exactly Z(z2) (single alignment)
    for y in classes(delta.source, depth, k):
        meets = in_cylinder(prefix(delta, y), nu)
        if meets != (ext is not None and in_cylinder(y, ext[1])):
            bad += 1
    if ext is None:
        for F in Fs:
            for E in Es:
                bad += alg.core_product(nu, F, delta, E) is not None
        return len(Fs) * len(Es), bad
    z1, z2 = ext
    reps = classes(z1.source, depth, k)
    loc = Locator(z1.source, depth, k)
    in_e = [0] * len(Es)
    in_f = [0] * len(Fs)
    cell_mask: dict[Cell, int] = {}
    for idx, z in enumerate(reps):
        bit = 1 << idx
        y = prefix(z2, z)
        w = shift(nu, prefix(delta, y))
        if w is None or w != prefix(z1, z):
            bad += 1
            continue
        for i, E in enumerate(Es):
            if any(cell_contains(c, y) for c in E.cells):
                in_e[i] |= bit
        for i, F in enumerate(Fs):
            if any(cell_contains(c, w) for c in F.cells):
                in_f[i] |= bit
        c = loc.locate(z)
        cell_mask[c] = cell_mask.get(c, 0) | bit
    for i, F in enumerate(Fs):
        for j, E in enumerate(Es):
            res = alg.core_product(nu, F, delta, E)
            claimed = 0
            if res is not None:
                if res[0] != z1 or res[1] != z2 or res[2].level > depth:
                    bad += 1
                    continue
                for c in res[2].at_level(depth):
                    claimed |= cell_mask.get(c, 0)
            bad += claimed != (in_f[i] & in_e[j])
    return len(Fs) * len(Es), bad


@timed
def check_algebra(k: KSequence, table: Optional[MeasureTable] = None, max_len: int = 2, max_level: int = 1,
                  seed: int = 0, assoc_samples: int = 20000, tol: float = 1e-9) -> CheckResult:
    """Convolution against the partial-map oracle, *-algebra laws and trace identities."""
    table = table or depth_measures(k, 4 * max_len + 2 * max_level + 12)
    bis = small_bisections(k, max_len, max_level)
    elems = [alg.make_element(((b, 1),), k) for b in bis]
    by_path: dict[Path, list[CellSet]] = {}
    for b in bis:
        lst = by_path.setdefault(b.delta, [])
        if b.support not in lst:
            lst.append(b.support)
    by_path = {p: sorted(v, key=lambda s: sorted(s.cells)) for p, v in by_path.items()}
    keys = mismatches = 0
    for nu in by_path:
        for delta in by_path:
            n_keys, n_bad = _oracle_key_check(nu, delta, by_path[nu], by_path[delta], k)
            keys += n_keys
            mismatches += n_bad
    # every ordered pair: product exists and trace(ab) = trace(ba)
    trace_gap = 0.0
    min_tr = math.inf
    pairs = 0
    tr = {}
    for i, a in enumerate(elems):
        aa = alg.convolve(alg.adjoint(a), a)
        min_tr = min(min_tr, alg.trace(aa, table).real)
    for a, b in itertools.product(elems, elems):
        ab = alg.convolve(a, b)
        ba = alg.convolve(b, a)
        trace_gap = max(trace_gap, abs(alg.trace(ab, table) - alg.trace(ba, table)))
        pairs += 1
    # associativity: exhaustively on length <= 1 with supports of level <= 0, then a seeded sample
    small = [e for b, e in zip(bis, elems) if b.delta.length <= 1 and b.support.level <= 0]
    assoc_fail = 0
    assoc_count = 0
    for a, b, c in itertools.product(small, repeat=3):
        assoc_count += 1
        assoc_fail += alg.convolve(alg.convolve(a, b), c) != alg.convolve(a, alg.convolve(b, c))
    rng = random.Random(seed)
    for _ in range(assoc_samples):
        a, b, c = (rng.choice(elems) for _ in range(3))
        assoc_count += 1
        assoc_fail += alg.convolve(alg.convolve(a, b), c) != alg.convolve(a, alg.convolve(b, c))
    passed = mismatches == 0 and assoc_fail == 0 and trace_gap < tol and min_tr >= -tol
    return CheckResult(
        "algebra",
        passed,
        {"k": list(k.values), "bisections": len(bis), "pairs": pairs, "oracle_keys": keys,
         "oracle_mismatches": mismatches, "associativity_triples": assoc_count,
         "associativity_failures": assoc_fail, "trace_commutator": trace_gap, "min_trace_a_star_a": min_tr,
         "seed": seed},
    )


# ---------------------------------------------------------------- 4. GNS decomposition

def _sample_block_vectors(label, count: int, rng: random.Random, ctx) -> list:
    from .spectral import BasisVector, block_pairs

    j, l, n = label
    pairs = block_pairs(j, l, ctx.k)
    out = []
    for _ in range(count):
        pc = rng.choice(pairs)
        if n == -2:
            z = q_cells(pc.vertex, -1, ctx.k)[0]
            out.append(BasisVector((pc.delta, pc.epsilon), None, ((z, 1 / math.sqrt(ctx.measure(z))),)))
            continue
        splitting = [E for E in q_cells(pc.vertex, n, ctx.k) if len(refine_cell(E, ctx.k)) > 1]
        if not splitting:
            continue
        E = rng.choice(splitting)
        kids = refine_cell(E, ctx.k)
        B = ctx.k_basis(E)
        col = rng.randrange(B.shape[1])
        coef = [float(B[i, col]) / math.sqrt(ctx.measure(G)) for i, G in enumerate(kids)]
        out.append(BasisVector((pc.delta, pc.epsilon), E, tuple(zip(kids, coef))))
    return out


@timed
def check_gns(k: KSequence, caps: tuple[int, int, int] = (3, 3, 3), max_len: Optional[int] = None,
              max_level: int = 2, per_block: int = 3, seed: int = 0, tol: float = 1e-8,
              orth_tol: float = 1e-9) -> CheckResult:
    """Every eta[delta, epsilon, B] in the family decomposes with small residual; blocks are orthogonal."""
    from .spectral import Context, Truncation, decompose

    ctx = Context(k)
    t = Truncation(*caps)
    max_len = k.p(2) + 2 if max_len is None else max_len
    vectors = inside = 0
    worst_in = worst_ext = 0.0
    most_negative = 0.0
    need = [0, 0, 0]
    for length in range(max_len + 1):
        ps = enumerate_paths(1, length, k)
        for d, e in itertools.product(ps, ps):
            if d.source != e.source:
                continue
            for lv in range(-1, max_level + 1):
                for c in q_cells(d.source, lv, k):
                    v = alg.basic(d, e, CellSet(d.source, lv, frozenset((c,)), k))
                    dec = decompose(v, t, ctx)
                    vectors += 1
                    most_negative = min(most_negative, dec.residual)
                    if not dec.flagged:
                        inside += 1
                        worst_in = max(worst_in, abs(dec.residual))
                        continue
                    # the same projections at caps enlarged to cover every component
                    for jj, ll, nn in dec.out_of_range:
                        need = [max(need[0], jj), max(need[1], ll), max(need[2], nn)]
                    worst_ext = max(worst_ext, abs(dec.residual - sum(dec.out_of_range.values())))
    rng = random.Random(seed)
    sample = []
    for label in t.labels():
        for vec in _sample_block_vectors(label, per_block, rng, ctx):
            sample.append((label, vec, vec.element(k)))
    cross = 0.0
    self_err = 0.0
    for i, (la, va, ea) in enumerate(sample):
        for lb, vb, eb in sample[i:]:
            ip = abs(alg.gns_inner(ea, eb, ctx.table))
            if va is vb:
                self_err = max(self_err, abs(ip - 1))
            elif la != lb:
                cross = max(cross, ip)
            elif va == vb:
                continue
            elif va.pair != vb.pair or va.cell != vb.cell:
                cross = max(cross, ip)
    passed = worst_in < tol and worst_ext < tol and most_negative > -orth_tol and cross < orth_tol and self_err < tol
    return CheckResult(
        "gns",
        passed,
        {"k": list(k.values), "caps": list(caps), "vectors": vectors, "inside_caps": inside,
         "max_residual_inside": worst_in, "outside_caps": vectors - inside,
         "caps_needed_outside": need, "max_residual_enlarged": worst_ext,
         "sampled_basis_vectors": len(sample), "max_cross_block_inner": cross,
         "max_norm_error": self_err, "seed": seed},
        ["vectors whose pair or level exceeds the caps are orthogonal to the truncation; "
         "they are checked with caps enlarged to cover their components"],
    )


# ---------------------------------------------------------------- 5. bandwidth

@timed
def check_bandwidth(k: KSequence, j_gen: int = 1, len_max: int = 2, j_primes: Iterable[int] = (2, 3),
                    span: int = 2, tol: float = 1e-8) -> CheckResult:
    """Off-window leakage of a * H_{j',l,n} for every generator, with window m = |delta|."""
    from .spectral import Context, bandwidth

    ctx = Context(k)
    worst = 0.0
    worst_row = None
    rows = 0
    for g in alg.b0_generators(j_gen, len_max, k):
        m = g.length
        for jp in j_primes:
            for l in range(m, m + span + 1):
                for n in range(m, m + span + 1):
                    row = bandwidth(g, jp, l, n, ctx)
                    rows += 1
                    if row.leak >= worst:
                        worst, worst_row = row.leak, row
    return CheckResult(
        "bandwidth",
        worst < tol,
        {"k": list(k.values), "generators": len(alg.b0_generators(j_gen, len_max, k)), "blocks_checked": rows,
         "max_leak": worst, "worst": f"{worst_row.generator} on {worst_row.source}" if worst_row else ""},
    )


# ---------------------------------------------------------------- 6. Dirac operator

DEFAULT_LADDER = ((1, 0, 0), (1, 1, 1), (2, 1, 1), (2, 2, 2), (3, 2, 2))


def sample_generators(k: KSequence) -> list[alg.Generator]:
    """Three B_0 members: an alpha/beta swap, a gamma/alpha pair and a longer gamma pair."""
    gens = alg.b0_generators(1, 2, k)
    picks = []
    for want in ((0, 1), (1, 1), (1, 2)):
        for g in gens:
            if (g.j, g.length) == want and g.delta != g.epsilon and g not in picks:
                picks.append(g)
                break
    return picks


@timed
def check_dirac(k: KSequence, ladder: Iterable[tuple[int, int, int]] = DEFAULT_LADDER,
                spectrum_caps: tuple[int, int, int] = (2, 1, 1)) -> CheckResult:
    from .spectral import (Context, Truncation, block_dimension, commutator_ceiling, commutator_norm,
                           dirac_eigenvalue, dirac_net_violations, h_block_basis, resolvent_spectrum)

    ctx = Context(k)
    ladder = list(ladder)
    net_bad = dirac_net_violations(Truncation(*ladder[-1]))
    norms: dict[str, list[float]] = {}
    ceilings: dict[str, float] = {}
    monotone = bounded = True
    for g in sample_generators(k):
        seq = [commutator_norm(g.element, Truncation(*caps), ctx)["norm"] for caps in ladder]
        norms[str(g)] = seq
        ceilings[str(g)] = commutator_ceiling(g)
        monotone &= all(b >= a - 1e-12 for a, b in zip(seq, seq[1:]))
        bounded &= max(seq) <= ceilings[str(g)]
    t = Truncation(*spectrum_caps)
    rows = resolvent_spectrum(t, k)
    built: dict[int, int] = {}
    for lab in t.labels():
        built[dirac_eigenvalue(*lab)] = built.get(dirac_eigenvalue(*lab), 0) + h_block_basis(*lab, ctx).dimension
    spectrum_ok = all(ev == 1 / (1 + c * c) and built.get(c, 0) == mult for ev, c, mult in rows)
    spectrum_ok &= sum(m for _, _, m in rows) == sum(built.values())
    passed = net_bad == 0 and monotone and bounded and spectrum_ok
    return CheckResult(
        "dirac",
        passed,
        {"k": list(k.values), "net_violations": net_bad, "ladder": [list(c) for c in ladder],
         "commutator_norms": norms, "ceilings": ceilings, "monotone": monotone, "bounded": bounded,
         "spectrum_caps": list(spectrum_caps), "spectrum": [[c, m] for _, c, m in rows],
         "spectrum_matches_blocks": spectrum_ok,
         "tail_norm": 1 / (1 + t.min_excluded_eigenvalue() ** 2)},
    )


# ---------------------------------------------------------------- 7. Effros-Shen

@timed
def check_effros_shen(cf: Iterable[int] = (0, 1, 1, 1, 1, 1)) -> CheckResult:
    cf = tuple(cf)
    dims = effros_shen_system(cf).dimensions()
    table = convergents(cf)
    det_bad = sum(table.determinant(n) != (-1) ** (n + 1) for n in range(1, len(table)))
    rec_bad = sum(table.q[n] != cf[n] * table.q[n - 1] + table.q[n - 2] for n in range(2, len(table)))
    fib = [1, 1]
    while len(fib) < len(dims):
        fib.append(fib[-1] + fib[-2])
    passed = list(dims) == fib[: len(dims)] and det_bad == 0 and rec_bad == 0
    return CheckResult("effros_shen", passed,
                       {"cf": list(cf), "dimensions": list(dims), "determinant_failures": det_bad,
                        "recurrence_failures": rec_bad})


# ---------------------------------------------------------------- suite

GOLDEN = (1, 1, 1, 1, 1)
MIXED = (2, 1, 0, 3, 1)


def acceptance_checks(seed: int = 0) -> list[tuple[int, Callable[[], CheckResult]]]:
    """The seven acceptance criteria, in order, as (criterion number, thunk)."""
    g = KSequence.from_list(GOLDEN)
    mixed = KSequence.from_list(MIXED)
    return [
        (1, lambda: _merge("partitions", check_partitions(g), check_partitions(mixed))),
        (2, lambda: _merge("measure", check_measure(g), check_measure(mixed), check_golden_measure())),
        (3, lambda: check_algebra(g, seed=seed)),
        (4, lambda: check_gns(g, seed=seed)),
        (5, lambda: check_bandwidth(g)),
        (6, lambda: check_dirac(g)),
        (7, lambda: check_effros_shen()),
    ]


def acceptance_suite(seed: int = 0) -> list[tuple[int, CheckResult]]:
    return [(num, run()) for num, run in acceptance_checks(seed)]


def _merge(name: str, *parts: CheckResult) -> CheckResult:
    """Combine sub-checks; metric keys are prefixed by the sub-check's position."""
    out = CheckResult(name, all(p.passed for p in parts))
    for i, p in enumerate(parts, 1):
        for key, v in p.metrics.items():
            out.metrics[f"{i}.{p.name}.{key}"] = v
        out.notes += p.notes
        out.seconds += p.seconds
    return out
