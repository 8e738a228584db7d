"""Optional matplotlib figures for CLI reports (install the ``figures`` extra)."""

from __future__ import annotations

import os
from typing import Any

from .errors import ConfigError


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise ConfigError("--figures", "matplotlib is not installed; pip install pathtriple[figures]") from None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _measure(report: dict[str, Any], ax) -> None:
    rows = report["rows"]
    ax.semilogy([r["h"] for r in rows], [r["a"] for r in rows], "o-")
    ax.set_xlabel("h")
    ax.set_ylabel("a_h")
    ax.set_title("cylinder measure by depth")


def _spectrum(report: dict[str, Any], ax) -> None:
    rows = report["rows"]
    ax.bar([r["eigenvalue"] for r in rows], [r["multiplicity"] for r in rows])
    ax.set_xlabel("Dirac eigenvalue")
    ax.set_ylabel("multiplicity")
    ax.set_title(f"truncated spectrum, caps {report['caps']}")


def _bandwidth(report: dict[str, Any], ax) -> None:
    rows = report["rows"]
    ax.semilogy(range(len(rows)), [max(r["leak"], 1e-18) for r in rows], ".")
    ax.set_xlabel("block index")
    ax.set_ylabel("off-window leak")
    ax.set_title("bandwidth leakage")


def _partitions(report: dict[str, Any], ax) -> None:
    counts = report["counts"]
    ax.semilogy(range(-1, len(counts) - 1), counts, "o-")
    ax.set_xlabel("level n")
    ax.set_ylabel("cells")
    ax.set_title(f"partition sizes at v{report['vertex']}")


def _kseq(report: dict[str, Any], ax) -> None:
    ax.bar(range(1, len(report["k"]) + 1), report["k"])
    ax.set_xlabel("i")
    ax.set_ylabel("k_i")
    ax.set_title("edge counts")


def _cf(report: dict[str, Any], ax) -> None:
    rows = report["convergents"]
    ax.plot([int(r["n"]) for r in rows], [int(r["p"]) / int(r["q"]) for r in rows], "o-")
    ax.axhline(report["value"], color="gray", lw=0.8)
    ax.set_xlabel("n")
    ax.set_ylabel("p_n / q_n")
    ax.set_title("convergents")


def _verify(report: dict[str, Any], ax) -> None:
    names = [c["name"] for c in report["checks"]]
    colors = ["tab:green" if c["passed"] else "tab:red" for c in report["checks"]]
    ax.barh(names, [1] * len(names), color=colors)
    ax.set_xticks([])
    ax.set_title("verification checks")


PLOTTERS = {"measure": _measure, "spectrum": _spectrum, "bandwidth": _bandwidth, "partitions": _partitions,
            "kseq": _kseq, "cf": _cf, "verify": _verify}


def render_figures(command: str, report: dict[str, Any], directory: str) -> list[str]:
    """Write one PNG for the report and return its path."""
    plt = _pyplot()
    os.makedirs(directory, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    PLOTTERS[command](report, ax)
    fig.tight_layout()
    path = os.path.join(directory, f"{command}.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]
