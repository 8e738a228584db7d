"""Command-line front end.

Subcommands: cf, kseq, measure, partitions, spectrum, bandwidth, verify. JSON is the default
report format; tables are also available as CSV. ``verify`` exits with the number of failed
check categories (capped at 125).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from . import __version__
from . import algebra as alg
from . import checks
from .cfcore import (
    ContinuedFraction,
    KSequence,
    convergent_json,
    convergents,
    effros_shen_system,
    k_sequence_from_cf,
    max_fill_length,
    theta_from_k,
)
from .cylinders import q_cells, render_cell
from .errors import ConfigError, PathtripleError
from .measure import depth_measures, measure_cell
from .spectral import Context, Truncation, bandwidth, block_dimension, dirac_eigenvalue, resolvent_spectrum

log = logging.getLogger("pathtriple")

MAX_CAPS = (6, 8, 8)
MAX_DEPTH = 4096
CHECK_NAMES = ("partitions", "measure", "algebra", "gns", "bandwidth", "dirac", "effros_shen")


@dataclass(frozen=True)
class RunConfig:
    k: Optional[KSequence]
    cf: Optional[tuple[int, ...]]
    k1: int
    caps: tuple[int, int, int]
    depth: int
    tol: float
    fmt: str
    out: Optional[str]
    seed: Optional[int]
    figures: Optional[str]
    vertex: int
    checks: tuple[str, ...]


def _ints(text: str, field: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.replace(" ", "").split(",") if t != "")
    except ValueError:
        raise ConfigError(field, f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise ConfigError(field, "empty list")
    return vals


def build_config(ns: argparse.Namespace) -> RunConfig:
    cf = _ints(ns.cf, "--cf") if ns.cf else None
    k: Optional[KSequence] = None
    if ns.input:
        try:
            with open(ns.input, encoding="utf-8") as fh:
                obj = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError("--input", str(exc)) from None
        if "cf" in obj and "k" not in obj:
            cf = tuple(int(t) for t in obj["cf"])
            ns.k1 = int(obj.get("k1", ns.k1))
        elif "k" in obj:
            ns.k = ",".join(str(int(v)) for v in obj["k"])
        else:
            raise ConfigError("--input", 'expected a "k" or "cf" field')
    if ns.k:
        vals = _ints(ns.k, "--k")
        if any(v < 0 for v in vals):
            raise ConfigError("--k", "entries must be nonnegative")
        if not any(vals):
            raise ConfigError("--k", "needs at least one nonzero entry")
        k = KSequence.from_list(vals)
    if ns.k1 < 0:
        raise ConfigError("--k1", "must be nonnegative")
    caps = _ints(ns.caps, "--caps")
    if len(caps) != 3:
        raise ConfigError("--caps", "expected J,L,N")
    if caps[0] < 1 or caps[1] < 0 or caps[2] < -2:
        raise ConfigError("--caps", "need J >= 1, L >= 0, N >= -2")
    if any(c > m for c, m in zip(caps, MAX_CAPS)):
        raise ConfigError("--caps", f"desk-scale limit is {','.join(map(str, MAX_CAPS))}")
    if not 0 <= ns.depth <= MAX_DEPTH:
        raise ConfigError("--depth", f"must lie in [0, {MAX_DEPTH}]")
    if not ns.tol > 0:
        raise ConfigError("--tol", "must be positive")
    if ns.vertex < 1:
        raise ConfigError("--vertex", "vertices start at 1")
    selected = tuple(s for s in (ns.checks or ",".join(CHECK_NAMES)).split(",") if s)
    unknown = [s for s in selected if s not in CHECK_NAMES]
    if unknown:
        raise ConfigError("--checks", f"unknown check(s) {', '.join(unknown)}")
    return RunConfig(k, cf, ns.k1, tuple(caps), ns.depth, ns.tol, ns.format, ns.out, ns.seed, ns.figures,
                     ns.vertex, selected)


def resolve_k(cfg: RunConfig) -> KSequence:
    """Explicit --k wins; otherwise --cf/--k1 fill a prefix which then repeats."""
    if cfg.k is not None:
        return cfg.k
    if cfg.cf is None:
        raise ConfigError("--k", "give --k or --cf")
    try:
        seq = k_sequence_from_cf(cfg.cf, cfg.k1, max_fill_length(cfg.cf, cfg.k1))
    except ValueError as exc:
        raise ConfigError("--cf", str(exc)) from None
    if not any(seq.values):
        raise ConfigError("--cf", "k prefix is all zero")
    return seq.with_periodic_tail()


# ---------------------------------------------------------------- commands

def cmd_cf(cfg: RunConfig) -> dict[str, Any]:
    if cfg.cf is None:
        raise ConfigError("--cf", "required")
    try:
        cf = ContinuedFraction(cfg.cf)
    except ValueError as exc:
        raise ConfigError("--cf", str(exc)) from None
    table = convergents(cf)
    out: dict[str, Any] = {"cf": list(cf.terms), "convergents": convergent_json(table), "value": float(cf.value())}
    if len(cf) >= 2:
        es = effros_shen_system(cf)
        out["effros_shen"] = [{"n": i + 1, "q_n": str(a), "q_prev": str(b), "a_n": c} for i, (a, b, c) in enumerate(es.levels)]
        out["dimensions"] = [str(d) for d in es.dimensions()]
    return out


def cmd_kseq(cfg: RunConfig) -> dict[str, Any]:
    k = resolve_k(cfg)
    n = max(cfg.depth, len(k))
    prefix = k.prefix(n)
    count = sum(1 for v in prefix if v)
    theta_cf, theta = theta_from_k(k, min(n, 40))
    return {"k": list(prefix), "tail": k.tail, "p": list(k.nonzero_positions(count)),
            "theta_cf": list(theta_cf.terms[:24]), "theta": theta}


def cmd_measure(cfg: RunConfig) -> dict[str, Any]:
    k = resolve_k(cfg)
    table = depth_measures(k, cfg.depth, tol=min(cfg.tol, 1e-12))
    return {"k": list(k.prefix(max(cfg.depth + 1, len(k)))), "horizon": cfg.depth,
            "rows": [{"h": h, "a": table[h], "b": (table[h - 1] - table[h]) if h else None}
                     for h in range(cfg.depth + 1)]}


def cmd_partitions(cfg: RunConfig) -> dict[str, Any]:
    k = resolve_k(cfg)
    m, n = cfg.vertex, cfg.depth
    if n > 8:
        raise ConfigError("--depth", "partition listings are limited to level 8")
    table = depth_measures(k, m + 2 * n + 8)
    cells = q_cells(m, n, k)
    rows = [{"cell": render_cell(c), "measure": measure_cell(c, table)} for c in cells]
    return {"vertex": m, "level": n, "counts": [len(q_cells(m, t, k)) for t in range(-1, n + 1)],
            "total_measure": sum(r["measure"] for r in rows), "rows": rows}


def cmd_spectrum(cfg: RunConfig) -> dict[str, Any]:
    k = resolve_k(cfg)
    t = Truncation(*cfg.caps)
    blocks = [{"j": j, "l": l, "n": n, "eigenvalue": dirac_eigenvalue(j, l, n), "dimension": block_dimension(j, l, n, k)}
              for j, l, n in t.labels()]
    rows = [{"eigenvalue": c, "resolvent": ev, "multiplicity": mult} for ev, c, mult in resolvent_spectrum(t, k)]
    return {"caps": list(cfg.caps), "rows": rows, "blocks": blocks,
            "tail_norm": 1 / (1 + t.min_excluded_eigenvalue() ** 2)}


def cmd_bandwidth(cfg: RunConfig) -> dict[str, Any]:
    k = resolve_k(cfg)
    J, L, N = cfg.caps
    if J < 2:
        raise ConfigError("--caps", "bandwidth needs J >= 2")
    ctx = Context(k)
    rows = []
    for g in alg.b0_generators(1, 2, k):
        m = g.length
        for jp in range(2, J + 1):
            for l in range(m, m + L + 1):
                for n in range(m, m + max(N, 0) + 1):
                    r = bandwidth(g, jp, l, n, ctx)
                    rows.append({"generator": r.generator, "window": r.window, "j": jp, "l": l, "n": n,
                                 "leak": r.leak, "pairs": r.pairs, "zero_images": r.zero_images})
    return {"caps": list(cfg.caps), "max_leak": max((r["leak"] for r in rows), default=0.0), "rows": rows}


def _ladder(caps: tuple[int, int, int]) -> list[tuple[int, int, int]]:
    out: list[tuple[int, int, int]] = []
    for i in range(max(caps) + 1):
        step = (max(1, min(caps[0], i)), min(caps[1], i), min(caps[2], i))
        if step not in out:
            out.append(step)
    return out


def cmd_verify(cfg: RunConfig) -> tuple[dict[str, Any], int]:
    k = resolve_k(cfg)
    seed = 0 if cfg.seed is None else cfg.seed
    ladder = _ladder(cfg.caps)
    runners = {
        "partitions": lambda: checks.check_partitions(k),
        "measure": lambda: checks.check_measure(k, tol=cfg.tol),
        "algebra": lambda: checks.check_algebra(k, seed=seed, tol=cfg.tol),
        "gns": lambda: checks.check_gns(k, caps=cfg.caps, seed=seed),
        "bandwidth": lambda: checks.check_bandwidth(k),
        "dirac": lambda: checks.check_dirac(k, ladder=ladder, spectrum_caps=ladder[min(2, len(ladder) - 1)]),
        "effros_shen": lambda: checks.check_effros_shen(cfg.cf if cfg.cf else (0, 1, 1, 1, 1, 1)),
    }
    results = []
    for name in cfg.checks:
        log.info("running %s", name)
        res = runners[name]()
        log.info("%s", res.line())
        results.append(res)
    failed = sum(not r.passed for r in results)
    report = {"k": list(k.values), "caps": list(cfg.caps), "seed": seed,
              "checks": [r.to_json() for r in results], "failed": failed}
    return report, min(failed, 125)


# ---------------------------------------------------------------- output

def _csv(report: dict[str, Any]) -> str:
    buf = io.StringIO()
    if "checks" in report:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "passed", "metric", "value"])
        for c in report["checks"]:
            for key, v in c["metrics"].items():
                w.writerow([c["name"], c["passed"], key, json.dumps(v) if isinstance(v, (list, dict)) else v])
        return buf.getvalue()
    rows = report.get("rows") or report.get("convergents") or [{"k": v} for v in report.get("k", [])]
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def render_report(report: dict[str, Any], fmt: str) -> str:
    if fmt == "csv":
        return _csv(report)
    return json.dumps(report, indent=2) + "\n"


COMMANDS = {
    "cf": cmd_cf,
    "kseq": cmd_kseq,
    "measure": cmd_measure,
    "partitions": cmd_partitions,
    "spectrum": cmd_spectrum,
    "bandwidth": cmd_bandwidth,
    "verify": cmd_verify,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cf", help="continued-fraction terms, comma separated")
    common.add_argument("--k1", type=int, default=1, help="first k entry when k is built from --cf")
    common.add_argument("--k", help="explicit k prefix, repeated periodically")
    common.add_argument("--input", help='JSON file with {"cf": [...], "k1": n} or {"k": [...]}')
    common.add_argument("--caps", default="3,3,3", help="truncation caps J,L,N")
    common.add_argument("--depth", type=int, default=8, help="measure horizon or partition level")
    common.add_argument("--vertex", type=int, default=1, help="base vertex for partitions")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, help="seed for sampled checks (echoed in the report)")
    common.add_argument("--checks", help=f"subset of {','.join(CHECK_NAMES)}")
    common.add_argument("--figures", metavar="DIR", help="also render matplotlib figures into DIR")
    parser = argparse.ArgumentParser(prog="pathtriple", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).splitlines()[0])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("PATHTRIPLE_LOG", "WARNING").upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    ns = make_parser().parse_args(argv)
    try:
        cfg = build_config(ns)
        result = COMMANDS[ns.command](cfg)
        report, code = result if isinstance(result, tuple) else (result, 0)
        if cfg.figures:
            from .figures import render_figures

            report["figures"] = render_figures(ns.command, report, cfg.figures)
    except ConfigError as exc:
        print(f"pathtriple: error: {exc}", file=sys.stderr)
        return 2
    except PathtripleError as exc:
        print(f"pathtriple: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = render_report(report, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code
