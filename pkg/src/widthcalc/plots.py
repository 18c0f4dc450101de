"""Figure rendering for sweep and report outputs.

Figures are a convenience layer next to the machine-readable outputs (CSV
and JSON remain the contract).  matplotlib is imported lazily with the Agg
backend so the CLI stays headless and fast when no figure is requested.
"""

from __future__ import annotations

import math
from typing import Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_sweep_figure(rows: Sequence, fit: dict, path: str) -> None:
    """Log-log plot of the estimate against the swept grid side, with the
    fitted power law over the stable run drawn through."""
    plt = _pyplot()
    ks = [r.k for r in rows]
    psis = [math.exp(r.log_psi) for r in rows]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(ks, psis, "o-", color="tab:blue", label="estimate")
    if fit.get("slope") is not None:
        start, length = fit["run_start_row"], fit["run_length"]
        run = rows[start:start + length]
        x0 = run[0].k
        y0 = math.exp(run[0].log_psi)
        xs = [run[0].k, run[-1].k]
        ys = [y0 * (x / x0) ** fit["slope"] for x in xs]
        ax.loglog(xs, ys, "--", color="tab:red",
                  label=f"fit slope {fit['slope']:.6f} "
                        f"(expected {fit['expected_slope']:.6f})")
    ax.set_xlabel(f"$k_{{{fit['axis']}}}$")
    ax.set_ylabel(r"$\Psi$")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_margin_figure(report: dict, path: str) -> None:
    """Bar chart of per-ball membership margins of the witness."""
    plt = _pyplot()
    margins = report["witness"]["margins"]
    labels = list(margins.keys())
    values = [margins[lab] for lab in labels]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    colors = ["tab:green" if v >= -1e-9 else "tab:red" for v in values]
    ax.bar(range(len(labels)), values, color=colors)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("log membership margin")
    ax.set_title(f"witness margins (psi = {report['psi']:.6g})", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
