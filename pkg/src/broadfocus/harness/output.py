"""CSV emission for aggregated Monte Carlo results.

Floats are written with ``repr`` so files round-trip exactly and reruns are
byte-identical.

========================  ================================================================
file                      columns
========================  ================================================================
detection.csv             sweep_value, method, detection_probability, stderr, trials
resolution.csv            sweep_value, method, resolution_probability, stderr, trials
split.csv                 sweep_value, method, split_probability, stderr, trials
merged.csv                sweep_value, method, merged_probability, stderr, trials
rmse.csv                  sweep_value, method, rmse, stderr, trials
criteria.csv              sweep_value, method, criterion, q, mean, stderr
spectra.csv               sweep_value, method, u, mean_spectrum
trials.csv                sweep_value, method, trial, seed, q_hat, q_hat_mdl, q_hat_mdl_gap,
                          doas, resolved, split, merged
scenario.json             the resolved scenario configuration
========================  ================================================================

The resolution, split and merged files appear only for two-source scenarios
with DOA estimation; rmse.csv only with DOA estimation; spectra.csv only when
spectra are kept.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from ..estimation import MDL, MDL_GAP
from .runner import ScenarioResult

RATE_FILES = {
    "detection": "detection_probability",
    "resolution": "resolution_probability",
    "split": "split_probability",
    "merged": "merged_probability",
    "rmse": "rmse",
}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_outputs(result: ScenarioResult, out_dir) -> list[Path]:
    """Write every applicable CSV plus ``scenario.json``; return the paths written."""
    s = result.scenario
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    points = list(enumerate(s.sweep_values))

    cfg = out / "scenario.json"
    cfg.write_text(json.dumps(s.to_config(), indent=2) + "\n")
    written.append(cfg)

    for name, column in RATE_FILES.items():
        rows = []
        for p, v in points:
            for m in s.methods:
                stat = getattr(result, name)(p, m)
                if stat is not None:
                    rows.append((v, m, *stat))
        if rows:
            path = out / f"{name}.csv"
            _write(path, ("sweep_value", "method", column, "stderr", "trials"), rows)
            written.append(path)

    rows = []
    for p, v in points:
        for m in s.methods:
            for kind in (MDL, MDL_GAP):
                mean, se = result.mean_curve(p, m, kind)
                q0 = 0 if kind == MDL else 1
                for i, (a, b) in enumerate(zip(mean, se)):
                    rows.append((v, m, kind, q0 + i, float(a), float(b)))
    path = out / "criteria.csv"
    _write(path, ("sweep_value", "method", "criterion", "q", "mean", "stderr"), rows)
    written.append(path)

    if s.spectra and s.doa:
        rows = []
        for p, v in points:
            for m in s.methods:
                spec = result.mean_spectrum(p, m)
                if spec is None:
                    continue
                u = result.grid_points
                rows.extend((v, m, float(a), float(b)) for a, b in zip(u, spec))
        if rows:
            path = out / "spectra.csv"
            _write(path, ("sweep_value", "method", "u", "mean_spectrum"), rows)
            written.append(path)

    rows = []
    for p, v in points:
        for m in s.methods:
            for t in result.results(p, m):
                doas = ";".join(repr(float(d)) for d in t.doas)
                rows.append((v, m, t.trial, t.seed, t.q_hat, t.q_hat_mdl, t.q_hat_mdl_gap,
                             doas, t.resolved, t.split, t.merged))
    path = out / "trials.csv"
    _write(path, ("sweep_value", "method", "trial", "seed", "q_hat", "q_hat_mdl",
                  "q_hat_mdl_gap", "doas", "resolved", "split", "merged"), rows)
    written.append(path)
    return written
