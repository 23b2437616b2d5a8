"""JSON run configuration shared by all CLI subcommands.

Layout (``schema`` is required and versioned)::

    {
      "schema": 1,
      "scenario": {
        "geometry": {"uca": {"elements": 8, "radius_m": 10.0, "carrier_hz": 15e6}},
        "sources": [{"azimuth_deg": 40, "elevation_deg": 90, "power": 1.0}, ...],
        "snr_db": 15.0, "noiseless": false, "num_snapshots": 128, "seed": 42,
        "sampling_hz": null, "direct_paths": null
      },
      "grid": {"az_count": 360, "el_count": 1, "step_deg": 1.0},
      "estimation": {"algorithms": ["music"], "model_order": 2,
                     "precision": "double", "workers": "auto"},
      "bench": {"ranges": ["360x1", "360x30", "360x60", "360x90"],
                "repeats": 5, "algorithm": "music"}
    }

Geometry may instead be ``{"positions_m": [[x, y, z], ...], "carrier_hz": f}``
(or ``"wavelength_m"``). The grid may list angles explicitly with
``"azimuth_deg": [...]`` and ``"elevation_deg": [...]``. SNR is the ratio of
the mean source power to the per-element noise variance. ``sampling_hz`` and
``direct_paths`` are accepted and ignored by the narrowband model.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .array_model import AngleGrid, ArrayGeometry, uniform_circular_array
from .errors import DoaError, FormatError
from .signal_sim import ScenarioConfig, SourceSpec
from .subspace import ALGORITHMS

SCHEMA_VERSION = 1

DEFAULT_CONFIG = {
    "schema": SCHEMA_VERSION,
    "scenario": {
        "geometry": {"uca": {"elements": 8, "radius_m": 10.0, "carrier_hz": 15e6}},
        "sources": [
            {"azimuth_deg": 40.0, "elevation_deg": 90.0, "power": 1.0},
            {"azimuth_deg": 130.0, "elevation_deg": 90.0, "power": 1.0},
        ],
        "snr_db": 15.0,
        "noiseless": False,
        "num_snapshots": 128,
        "seed": 42,
    },
    "grid": {"az_count": 360, "el_count": 1, "step_deg": 1.0},
    "estimation": {"algorithms": list(ALGORITHMS), "model_order": 2, "precision": "double", "workers": "auto"},
    "bench": {"ranges": ["360x1", "360x30", "360x60", "360x90"], "repeats": 5, "algorithm": "music"},
}


class ConfigError(FormatError):
    pass


@dataclass(frozen=True, eq=False)
class RunConfig:
    scenario: ScenarioConfig
    grid: AngleGrid
    algorithms: tuple[str, ...] = ALGORITHMS
    model_order: int = 2
    precision: str = "double"
    workers: int | str = "auto"
    bench_ranges: tuple[str, ...] = ("360x1", "360x30", "360x60", "360x90")
    bench_repeats: int = 5
    bench_algorithm: str = "music"
    source: str = "<default>"
    raw: dict = field(default_factory=dict, repr=False)


def _line_of(text: str, path: list[str]) -> int | None:
    """Best-effort line number of the last key in ``path``."""
    pos = 0
    for key in path:
        if not isinstance(key, str):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            return None
        pos = m.start()
    return text.count("\n", 0, pos) + 1 if path else None


class _Reader:
    def __init__(self, text: str, name: str):
        self.text = text
        self.name = name

    def fail(self, path: list, msg: str):
        line = _line_of(self.text, path) if self.text else None
        where = f"{self.name}:{line}" if line else self.name
        dotted = ".".join(str(p) for p in path)
        raise ConfigError(f"{where}: {dotted}: {msg}" if dotted else f"{where}: {msg}")

    def get(self, obj: dict, path: list, key: str, kind, default=...):
        if key not in obj:
            if default is ...:
                self.fail(path, f"missing required key {key!r}")
            return default
        value = obj[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if value is not None and not isinstance(value, kind):
            self.fail(path + [key], f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
        return value


def _geometry(r: _Reader, g: dict, path: list) -> ArrayGeometry:
    if not isinstance(g, dict):
        r.fail(path, "expected an object")
    if "uca" in g:
        u = g["uca"]
        p = path + ["uca"]
        return uniform_circular_array(r.get(u, p, "elements", int), r.get(u, p, "radius_m", float),
                                      r.get(u, p, "carrier_hz", float))
    if "positions_m" in g:
        pos = r.get(g, path, "positions_m", list)
        if "wavelength_m" in g:
            return ArrayGeometry(pos, r.get(g, path, "wavelength_m", float))
        return ArrayGeometry.from_carrier(pos, r.get(g, path, "carrier_hz", float))
    r.fail(path, "geometry needs either 'uca' or 'positions_m'")


def _scenario(r: _Reader, s: dict, seed_override: int | None) -> ScenarioConfig:
    path = ["scenario"]
    geom = _geometry(r, r.get(s, path, "geometry", dict), path + ["geometry"])
    sources = []
    for i, src in enumerate(r.get(s, path, "sources", list)):
        sp = path + ["sources", i]
        if not isinstance(src, dict):
            r.fail(sp, "expected an object")
        sources.append(SourceSpec(r.get(src, sp, "azimuth_deg", float),
                                  r.get(src, sp, "elevation_deg", float, 90.0),
                                  r.get(src, sp, "power", float, 1.0)))
    seed = r.get(s, path, "seed", int, 0)
    return ScenarioConfig(
        geometry=geom,
        sources=tuple(sources),
        snr_db=r.get(s, path, "snr_db", float, 15.0),
        num_snapshots=r.get(s, path, "num_snapshots", int, 128),
        seed=seed if seed_override is None else seed_override,
        noiseless=r.get(s, path, "noiseless", bool, False),
        sampling_hz=r.get(s, path, "sampling_hz", float, None),
        direct_paths=r.get(s, path, "direct_paths", int, None),
    )


def _grid(r: _Reader, g: dict) -> AngleGrid:
    path = ["grid"]
    step = r.get(g, path, "step_deg", float, 1.0)
    if "azimuth_deg" in g:
        return AngleGrid(r.get(g, path, "azimuth_deg", list), r.get(g, path, "elevation_deg", list, [90.0]), step)
    return AngleGrid.from_counts(r.get(g, path, "az_count", int, 360), r.get(g, path, "el_count", int, 1), step)


def parse_config(raw: dict, text: str = "", name: str = "<config>", seed: int | None = None) -> RunConfig:
    r = _Reader(text, name)
    if not isinstance(raw, dict):
        r.fail([], "top level must be a JSON object")
    schema = r.get(raw, [], "schema", int)
    if schema != SCHEMA_VERSION:
        r.fail(["schema"], f"unsupported schema version {schema} (expected {SCHEMA_VERSION})")
    try:
        scenario = _scenario(r, r.get(raw, [], "scenario", dict), seed)
        grid = _grid(r, r.get(raw, [], "grid", dict, {}))
        est = r.get(raw, [], "estimation", dict, {})
        algs = r.get(est, ["estimation"], "algorithms", list, list(ALGORITHMS))
        for a in algs:
            if a not in ALGORITHMS:
                r.fail(["estimation", "algorithms"], f"unknown algorithm {a!r}")
        if not algs:
            r.fail(["estimation", "algorithms"], "select at least one algorithm")
        precision = r.get(est, ["estimation"], "precision", str, "double")
        if precision not in ("single", "double", "both"):
            r.fail(["estimation", "precision"], f"precision must be single, double or both, got {precision!r}")
        bench = r.get(raw, [], "bench", dict, {})
        return RunConfig(
            scenario=scenario,
            grid=grid,
            algorithms=tuple(algs),
            model_order=r.get(est, ["estimation"], "model_order", int, scenario.num_sources),
            precision=precision,
            workers=est.get("workers", "auto"),
            bench_ranges=tuple(r.get(bench, ["bench"], "ranges", list, list(DEFAULT_CONFIG["bench"]["ranges"]))),
            bench_repeats=r.get(bench, ["bench"], "repeats", int, 5),
            bench_algorithm=r.get(bench, ["bench"], "algorithm", str, "music"),
            source=name,
            raw=raw,
        )
    except ConfigError:
        raise
    except DoaError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def load_config(path: str | Path | None, seed: int | None = None) -> RunConfig:
    """Read a config file; ``None`` gives the built-in two-source scenario."""
    if path is None:
        return parse_config(copy.deepcopy(DEFAULT_CONFIG), "", "<default>", seed)
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    return parse_config(raw, text, str(path), seed)


def dump_default_config(path: str | Path) -> None:
    Path(path).write_text(json.dumps(DEFAULT_CONFIG, indent=2) + "\n")
