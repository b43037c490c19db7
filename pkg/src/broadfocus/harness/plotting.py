"""Static SVG figures drawn from the emitted CSV files.

Needs matplotlib (``pip install artifact[plots]``). Only reads the CSVs, so it
can be swapped out without touching the simulation.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "broadfocus"
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_outputs(out_dir, sweep_label="sweep value") -> list[Path]:
    """Draw one SVG per metric CSV found in ``out_dir``; return the files written."""
    plt = _pyplot()
    out = Path(out_dir)
    written = []
    for name in ("detection", "resolution", "split", "merged", "rmse"):
        path = out / f"{name}.csv"
        if not path.exists():
            continue
        rows = _read(path)
        metric = [k for k in rows[0] if k not in ("sweep_value", "method", "stderr", "trials")][0]
        series = defaultdict(list)
        for r in rows:
            series[r["method"]].append((float(r["sweep_value"]), float(r[metric]), float(r["stderr"])))
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for method, pts in series.items():
            x, y, e = zip(*pts)
            ax.errorbar(x, y, yerr=e, marker="o", ms=3, capsize=2, label=method.upper())
        ax.set_xlabel(sweep_label)
        ax.set_ylabel(metric.replace("_", " "))
        if name == "rmse":
            ax.set_yscale("log")
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        target = out / f"{name}.svg"
        _save(fig, target)
        plt.close(fig)
        written.append(target)

    path = out / "spectra.csv"
    if path.exists():
        series = defaultdict(lambda: ([], []))
        for r in _read(path):
            key = (r["sweep_value"], r["method"])
            series[key][0].append(float(r["u"]))
            series[key][1].append(float(r["mean_spectrum"]))
        for value in sorted({k[0] for k in series}, key=float):
            fig, ax = plt.subplots(figsize=(5, 3.5))
            for (v, method), (u, s) in series.items():
                if v == value:
                    ax.semilogy(u, s, lw=0.8, label=method.upper())
            ax.set_xlabel("u")
            ax.set_ylabel("mean MUSIC pseudo-spectrum")
            ax.legend()
            fig.tight_layout()
            target = out / f"spectra_{value}.svg"
            _save(fig, target)
            plt.close(fig)
            written.append(target)
    return written
