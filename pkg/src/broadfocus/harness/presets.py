"""Preset scenarios for the six-sensor MRA broadband studies.

Every preset uses the MRA at lattice positions 1, 2, 5, 6, 12, 14 with
half-wavelength spacing at 100 Hz, 41 bands spread evenly over 80-120 Hz, and
equal-power sources.

The nine-source set is one source at broadside, four at angles
101.25, 112.5, 123.75 and 135 degrees from endfire (an even partition of
(90, 135] degrees), and four at u = 0.175, 0.35, 0.525, 0.7 (an even
partition of (0, 0.7]).

========  ==================================================================
name      study
========  ==================================================================
fig2      MDL / MDL-gap curves, two sources at delta u = 0.06 and 0.3
fig3      MUSIC spectra, two sources at u = 0, 0.06, 3 snapshots/sensor
fig4      resolution and RMSE vs delta u in [0.01, 0.1], 5 snapshots/sensor
fig5      MDL / MDL-gap curves, nine sources, 3 and 10 snapshots/sensor
fig6a     MDL-gap detection vs snapshots/sensor, nine sources, 0 dB
fig6b     MDL-gap detection vs SNR, nine sources, 5 snapshots/sensor
fig7a     RMSE vs snapshots/sensor, nine sources, -5 dB
fig7b     RMSE vs SNR, nine sources, 1 snapshot/sensor
========  ==================================================================

``fig6`` and ``fig7`` alias ``fig6a`` and ``fig7a``.
"""

from __future__ import annotations

import numpy as np

from ..errors import UnknownPreset
from ..geometry import make_mra6
from ..synthesis import BandPlan
from .scenario import Scenario

NINE_SOURCE_U = tuple(
    [0.0]
    + [float(np.cos(np.deg2rad(t))) for t in (101.25, 112.5, 123.75, 135.0)]
    + [0.175, 0.35, 0.525, 0.7])


def _base(name, sources, description, **kw):
    kw.setdefault("trials", 500)
    kw.setdefault("seed", 2024)
    return Scenario(name=name, geometry=make_mra6(), sources=tuple(sources),
                    band=BandPlan(80.0, 120.0, 41), description=description, **kw)


def _nine(snr_db=0.0):
    return [(u, snr_db) for u in NINE_SOURCE_U]


def _fig2():
    return _base("fig2", [(0.0, 0.0), (0.06, 0.0)],
                 "Two-source criterion realizations, 3 snapshots/sensor, SNR 0 dB",
                 snapshots_per_sensor=3, sweep_axis="delta_u", sweep_values=(0.06, 0.3),
                 trials=50, spectra=False)


def _fig3():
    return _base("fig3", [(0.0, 0.0), (0.06, 0.0)],
                 "Two-source MUSIC spectra, u = [0, 0.06], 3 snapshots/sensor, SNR 0 dB",
                 snapshots_per_sensor=3)


def _fig4():
    return _base("fig4", [(0.0, 0.0), (0.06, 0.0)],
                 "Resolution probability and RMSE vs source spacing, 5 snapshots/sensor, SNR 0 dB",
                 snapshots_per_sensor=5, sweep_axis="delta_u",
                 sweep_values=tuple(np.round(np.arange(1, 11) * 0.01, 2)), spectra=False)


def _fig5():
    return _base("fig5", _nine(), "Nine-source criterion realizations, SNR 0 dB",
                 sweep_axis="snapshots_per_sensor", sweep_values=(3, 10), trials=50,
                 spectra=False)


def _fig6a():
    return _base("fig6a", _nine(), "MDL-gap detection probability vs snapshots/sensor, SNR 0 dB",
                 sweep_axis="snapshots_per_sensor", sweep_values=tuple(range(1, 11)),
                 doa=False, spectra=False)


def _fig6b():
    return _base("fig6b", _nine(), "MDL-gap detection probability vs SNR, 5 snapshots/sensor",
                 snapshots_per_sensor=5, sweep_axis="snr_db",
                 sweep_values=tuple(range(-15, 6, 3)), doa=False, spectra=False)


def _fig7a():
    return _base("fig7a", _nine(-5.0), "Nine-source DOA RMSE vs snapshots/sensor, SNR -5 dB",
                 sweep_axis="snapshots_per_sensor", sweep_values=tuple(range(1, 11)),
                 spectra=False)


def _fig7b():
    return _base("fig7b", _nine(), "Nine-source DOA RMSE vs SNR, 1 snapshot/sensor",
                 snapshots_per_sensor=1, sweep_axis="snr_db",
                 sweep_values=tuple(range(-15, 6, 3)), spectra=False)


PRESETS = {
    "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5,
    "fig6": _fig6a, "fig6a": _fig6a, "fig6b": _fig6b,
    "fig7": _fig7a, "fig7a": _fig7a, "fig7b": _fig7b,
}


def preset(name) -> Scenario:
    """Return the preset scenario called ``name``."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
