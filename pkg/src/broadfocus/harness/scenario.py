"""Scenario description and JSON configuration parsing."""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field, replace

from ..errors import ConfigError
from ..estimation import CRITERIA, MDL_GAP
from ..geometry import ArrayGeometry, difference_coarray
from ..synthesis import BandPlan

METHODS = ("ap", "scr", "iss", "nb")
SWEEP_AXES = ("snapshots_per_sensor", "snr_db", "delta_u")


@dataclass(frozen=True)
class FocusingOptions:
    grid_points: int = 4096
    fir_taps_per_factor: int = 8
    fir_stopband_db: float = 60.0
    focus: str = "center"
    scr_focus: str = "min"


@dataclass(frozen=True)
class EstimationOptions:
    music_grid_step: float = 1e-3
    oracle_d: bool = True
    # None means the time-bandwidth product M*L for focused methods
    l_eff: float | None = None
    peak_tolerance: float = 0.02


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo study: a geometry, sources, a band plan and a sweep.

    ``sources`` holds ``(u, snr_db)`` pairs. The sweep overrides one axis:
    snapshots per sensor, the SNR of every source, or (for two sources) the
    offset of the second source from the first.
    """

    name: str
    geometry: ArrayGeometry
    sources: tuple
    band: BandPlan
    snapshots_per_sensor: float = 3.0
    sweep_axis: str = "snapshots_per_sensor"
    sweep_values: tuple = ()
    methods: tuple = METHODS
    trials: int = 500
    seed: int = 0
    criterion: str = MDL_GAP
    noise_power: float = 1.0
    doa: bool = True
    spectra: bool = True
    focusing: FocusingOptions = field(default_factory=FocusingOptions)
    estimation: EstimationOptions = field(default_factory=EstimationOptions)
    description: str = ""

    def __post_init__(self):
        if not self.sweep_values:
            base = {"snapshots_per_sensor": self.snapshots_per_sensor,
                    "snr_db": self.sources[0][1] if self.sources else 0.0,
                    "delta_u": (self.sources[1][0] - self.sources[0][0]) if len(self.sources) == 2 else 0.0}
            object.__setattr__(self, "sweep_values", (base.get(self.sweep_axis, 0.0),))
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "sources", tuple((float(u), float(s)) for u, s in self.sources))
        self.validate()

    def validate(self):
        if self.trials < 1:
            raise ConfigError("need at least one trial", "trials")
        if not self.noise_power > 0:
            raise ConfigError("noise power must be positive", "noise_power")
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}", "sweep.axis")
        if not self.sweep_values:
            raise ConfigError("sweep needs at least one value", "sweep.values")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"methods must be a non-empty subset of {METHODS}", "methods")
        if self.criterion not in CRITERIA:
            raise ConfigError(f"criterion must be one of {sorted(CRITERIA)}", "criterion")
        if self.sweep_axis == "delta_u" and len(self.sources) != 2:
            raise ConfigError("a delta_u sweep needs exactly two sources", "sources")
        for i, (u, _) in enumerate(self.sources):
            if abs(u) > 1:
                raise ConfigError("directional cosine outside [-1, 1]", f"sources[{i}].u")
        for v in self.sweep_values:
            if self.sweep_axis == "snapshots_per_sensor" and self.snapshots_for(v) < 1:
                raise ConfigError("snapshot count rounds to zero", "sweep.values")
            if self.sweep_axis == "delta_u" and abs(self.sources[0][0] + v) > 1:
                raise ConfigError("second source leaves the visible region", "sweep.values")
        try:
            difference_coarray(self.geometry)
        except ValueError as exc:
            raise ConfigError(str(exc), "geometry.sensors") from None
        if self.estimation.music_grid_step <= 0:
            raise ConfigError("grid step must be positive", "estimation.music_grid_step")
        for key, spec in (("focusing.focus", self.focusing.focus),
                          ("focusing.scr_focus", self.focusing.scr_focus)):
            try:
                f = self.focus_frequency(spec)
            except ValueError as exc:
                raise ConfigError(str(exc), key) from None
            if key == "focusing.scr_focus" and f > self.band.f_min:
                raise ConfigError("SCR focus must not exceed the lowest band frequency", key)

    @property
    def D(self) -> int:
        return len(self.sources)

    def snapshots_for(self, per_sensor) -> int:
        return int(math.floor(per_sensor * self.geometry.N + 0.5))

    def focus_frequency(self, spec: str) -> float:
        if spec == "center":
            return self.band.center
        if spec == "min":
            return self.band.f_min
        m = re.fullmatch(r"hz:\s*([0-9.eE+-]+)", spec)
        if m:
            f = float(m.group(1))
            if f > 0:
                return f
        raise ValueError(f"focus must be 'center', 'min' or 'hz:<value>', got {spec!r}")

    def point(self, value):
        """``(sources, snapshots_per_sensor)`` at one sweep value."""
        sources = list(self.sources)
        sps = self.snapshots_per_sensor
        if self.sweep_axis == "snapshots_per_sensor":
            sps = value
        elif self.sweep_axis == "snr_db":
            sources = [(u, value) for u, _ in sources]
        else:
            sources = [sources[0], (sources[0][0] + value, sources[1][1])]
        return sources, sps

    def with_overrides(self, **kw) -> "Scenario":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_config(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "geometry": self.geometry.to_config(),
            "sources": [{"u": u, "snr_db": s} for u, s in self.sources],
            "band": {"f_min_hz": self.band.f_min, "f_max_hz": self.band.f_max,
                     "num_bands": self.band.M},
            "snapshots_per_sensor": self.snapshots_per_sensor,
            "sweep": {"axis": self.sweep_axis, "values": list(self.sweep_values)},
            "methods": list(self.methods),
            "trials": self.trials,
            "seed": self.seed,
            "criterion": self.criterion,
            "noise_power": self.noise_power,
            "doa": self.doa,
            "spectra": self.spectra,
            "focusing": asdict(self.focusing),
            "estimation": asdict(self.estimation),
        }


_TOP_KEYS = {"name", "description", "geometry", "sources", "band", "snapshots_per_sensor",
             "sweep", "methods", "trials", "seed", "criterion", "noise_power", "doa",
             "spectra", "focusing", "estimation"}


def _line_of(text, key):
    if text is None:
        return None
    leaf = key.split(".")[-1].split("[")[0]
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{leaf}"' in line:
            return i
    return None


def _take(d, key, conv, path, text, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError("missing required key", path, _line_of(text, path.rsplit(".", 1)[0]))
        return default
    try:
        return conv(d[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value {d[key]!r} ({exc})", path, _line_of(text, path)) from None


def _check_keys(d, allowed, prefix, text):
    if not isinstance(d, dict):
        raise ConfigError("expected an object", prefix or None, _line_of(text, prefix) if prefix else None)
    for k in d:
        if k not in allowed:
            path = f"{prefix}.{k}" if prefix else k
            raise ConfigError("unknown key", path, _line_of(text, path))


def _bool(v):
    if not isinstance(v, bool):
        raise ValueError("expected true or false")
    return v


def scenario_from_dict(cfg: dict, text: str | None = None) -> Scenario:
    """Build a :class:`Scenario` from parsed JSON, reporting the offending key on error."""
    _check_keys(cfg, _TOP_KEYS, "", text)
    g = cfg.get("geometry", {})
    _check_keys(g, {"sensors", "design_freq_hz", "speed_mps"}, "geometry", text)
    sensors = _take(g, "sensors", list, "geometry.sensors", text, required=True)
    design = _take(g, "design_freq_hz", float, "geometry.design_freq_hz", text, 100.0)
    speed = _take(g, "speed_mps", float, "geometry.speed_mps", text, 1500.0)
    try:
        geom = ArrayGeometry.from_design_frequency(sensors, design, speed)
    except ValueError as exc:
        raise ConfigError(str(exc), "geometry", _line_of(text, "geometry")) from None

    raw_sources = cfg.get("sources")
    if not isinstance(raw_sources, list) or not raw_sources:
        raise ConfigError("need a non-empty list of sources", "sources", _line_of(text, "sources"))
    sources = []
    for i, s in enumerate(raw_sources):
        _check_keys(s, {"u", "snr_db"}, f"sources[{i}]", text)
        sources.append((_take(s, "u", float, f"sources[{i}].u", text, required=True),
                        _take(s, "snr_db", float, f"sources[{i}].snr_db", text, 0.0)))

    b = cfg.get("band", {})
    _check_keys(b, {"f_min_hz", "f_max_hz", "num_bands"}, "band", text)
    try:
        band = BandPlan(_take(b, "f_min_hz", float, "band.f_min_hz", text, 80.0),
                        _take(b, "f_max_hz", float, "band.f_max_hz", text, 120.0),
                        _take(b, "num_bands", int, "band.num_bands", text, 41))
    except ValueError as exc:
        raise ConfigError(str(exc), "band", _line_of(text, "band")) from None

    sw = cfg.get("sweep", {})
    _check_keys(sw, {"axis", "values"}, "sweep", text)
    f = cfg.get("focusing", {})
    _check_keys(f, {"method", "grid_points", "fir_taps_per_factor", "fir_stopband_db",
                    "focus", "scr_focus"}, "focusing", text)
    e = cfg.get("estimation", {})
    _check_keys(e, {"music_grid_step", "oracle_d", "l_eff", "peak_tolerance"}, "estimation", text)

    methods = _take(cfg, "methods", lambda v: tuple(str(x) for x in v), "methods", text, None)
    if methods is None and "method" in f:
        methods = (str(f["method"]),)
    focusing = FocusingOptions(
        grid_points=_take(f, "grid_points", int, "focusing.grid_points", text, 4096),
        fir_taps_per_factor=_take(f, "fir_taps_per_factor", int, "focusing.fir_taps_per_factor", text, 8),
        fir_stopband_db=_take(f, "fir_stopband_db", float, "focusing.fir_stopband_db", text, 60.0),
        focus=_take(f, "focus", str, "focusing.focus", text, "center"),
        scr_focus=_take(f, "scr_focus", str, "focusing.scr_focus", text, "min"))
    l_eff = _take(e, "l_eff", lambda v: None if v is None else float(v), "estimation.l_eff", text, None)
    estimation = EstimationOptions(
        music_grid_step=_take(e, "music_grid_step", float, "estimation.music_grid_step", text, 1e-3),
        oracle_d=_take(e, "oracle_d", _bool, "estimation.oracle_d", text, True),
        l_eff=l_eff,
        peak_tolerance=_take(e, "peak_tolerance", float, "estimation.peak_tolerance", text, 0.02))

    kw = dict(
        name=_take(cfg, "name", str, "name", text, "custom"),
        description=_take(cfg, "description", str, "description", text, ""),
        geometry=geom, sources=tuple(sources), band=band,
        snapshots_per_sensor=_take(cfg, "snapshots_per_sensor", float, "snapshots_per_sensor", text, 3.0),
        sweep_axis=_take(sw, "axis", str, "sweep.axis", text, "snapshots_per_sensor"),
        sweep_values=_take(sw, "values", lambda v: tuple(float(x) for x in v), "sweep.values", text, ()),
        trials=_take(cfg, "trials", int, "trials", text, 500),
        seed=_take(cfg, "seed", int, "seed", text, 0),
        criterion=_take(cfg, "criterion", str, "criterion", text, MDL_GAP),
        noise_power=_take(cfg, "noise_power", float, "noise_power", text, 1.0),
        doa=_take(cfg, "doa", _bool, "doa", text, True),
        spectra=_take(cfg, "spectra", _bool, "spectra", text, True),
        focusing=focusing, estimation=estimation)
    if methods is not None:
        kw["methods"] = methods
    try:
        return Scenario(**kw)
    except ConfigError as exc:
        if exc.line is None and exc.key is not None:
            raise ConfigError(str(exc).split(": ", 1)[-1], exc.key, _line_of(text, exc.key)) from None
        raise


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return scenario_from_dict(cfg, text)
