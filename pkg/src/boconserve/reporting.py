"""Report emission: CSV tables, JSON summaries, plot data, rendered figures.

Every command writes a delimited table plus a JSON summary that validates
against the shipped schema; time series additionally get gnuplot-compatible
two-column .dat files and PNG figures rendered with the Agg backend.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .config import validate_summary


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def write_csv(path: str, rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
    return path


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return str(v).lower()
    return v


def write_summary(path: str, summary: dict) -> str:
    validate_summary(summary)
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_dat(path: str, xs, ys) -> str:
    """Two-column whitespace-delimited series."""
    with open(path, "w") as fh:
        for x, y in zip(xs, ys):
            fh.write(f"{x!r} {y!r}\n")
    return path


def timeseries_figure(path: str, t, series: dict, title: str, ylabel: str,
                      logy: bool = False) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, ys in series.items():
        ax.plot(t, ys, lw=1.2, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if logy:
        ax.set_yscale("log")
    if len(series) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def convergence_figure(path: str, dims, residual_sets: dict, title: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, res in residual_sets.items():
        ax.loglog(dims, res, "o-", lw=1.2, label=label)
    ref = [res[0] * (dims[0] / d) for d in dims]
    ax.loglog(dims, ref, "k--", lw=0.8, label="~1/dim")
    ax.set_xlabel("truncation dimension")
    ax.set_ylabel("normalized residual")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def residual_scatter_figure(path: str, names: list[str], residuals: list[float],
                            tolerances: list[float], title: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(len(residuals))
    floor = 1e-18
    ax.semilogy(xs, [max(r, floor) for r in residuals], ".", ms=4, label="residual")
    ax.semilogy(xs, [max(t, floor) for t in tolerances], "r-", lw=0.8, label="tolerance")
    ax.set_xlabel("check index")
    ax.set_ylabel("residual")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
