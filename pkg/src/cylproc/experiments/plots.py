"""SVG plots of scan results."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.fonttype"] = "none"
import matplotlib.pyplot as plt  # noqa: E402

from ..stats import fit_rate  # noqa: E402
from .records import AGGREGATE_INDEX  # noqa: E402

_KINDS = {
    "variance": ("variance-scan", "Var / r^(n+m)"),
    "clt-rate": ("clt-scan", "Kolmogorov distance"),
}


def plot_scan(records, kind: str, path: str) -> None:
    """Plot aggregate rows of a variance or CLT scan against ``r``."""
    if kind not in _KINDS:
        raise ValueError(f"unknown plot kind {kind!r}")
    tag, ylabel = _KINDS[kind]
    rows = [x for x in records if x.mode == tag and x.index == AGGREGATE_INDEX
            and x.r is not None and x.vol is not None]
    if not rows:
        raise ValueError(f"no aggregate {tag} rows to plot")
    r = [x.r for x in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(r, [x.vol for x in rows], "o-", label="simulated")
    ref = [x.analytic_var for x in rows]
    if kind == "variance" and all(v is not None for v in ref):
        ax.plot(r, ref, "--", label=f"asymptotic {ref[0]:.4g}")
    ax.set_xscale("log")
    if kind == "clt-rate":
        ax.set_yscale("log")
        if len(rows) >= 3:
            fit = fit_rate([(x.r, x.vol) for x in rows])
            ax.plot(r, fit.predict(r), ":", label=f"fit, slope {fit.slope:.3f}")
    ax.set_xlabel("r")
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg")
    finally:
        plt.close(fig)
