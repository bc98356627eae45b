"""Flat ``key = value`` scenario files.

Blank lines and ``#`` comments are ignored. Dotted keys address nested
groups (``ra.preamble_trans_max = 10``, ``timeline.rar_delay_sf = 3``).
Lists are comma-separated. ``none`` clears an optional value.
"""
from __future__ import annotations

from dataclasses import fields, replace
from pathlib import Path

from .engine import ScenarioConfig, Scheme, Timeline
from .prach import ConfigurationError, RaParameters
from .sweep import SweepSpec


class ConfigError(ConfigurationError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        values[key] = value.strip()
    return values


def load_config_file(path) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def _int_list(key, text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(key, f"expected comma-separated integers, got {text!r}") from None


def _bool(key, text):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


def _coerce(key, text, kind):
    if kind in ("float | None", "int | None"):
        if text.lower() in ("none", "inf", ""):
            return None
        kind = kind.split(" ")[0]
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(key, f"expected {kind}, got {text!r}") from None
    raise ConfigError(key, f"unsupported type {kind}")


_SCENARIO_TYPES = {
    "isd_m": "float", "carrier_hz": "float", "sim_time_ms": "int", "seed": "int",
    "repetitions": "int", "capture_margin_db": "float | None",
    "detection_threshold_dbm": "float | None", "path_loss_exponent": "float",
    "ue_height_m": "float", "cell_height_m": "float", "ue_max_power_dbm": "float",
}


def _group_types(cls):
    return {f.name: ("float" if f.type in ("float", float) else "int") for f in fields(cls)}


def sweep_from_mapping(values: dict, base: SweepSpec | None = None) -> SweepSpec:
    """Apply ``values`` on top of ``base`` (defaults when omitted)."""
    spec = base or SweepSpec()
    cfg = spec.base
    scenario, ra, timeline = {}, {}, {}
    sweep = {}
    ra_types, tl_types = _group_types(RaParameters), _group_types(Timeline)
    for key, text in values.items():
        if key in _SCENARIO_TYPES:
            scenario[key] = _coerce(key, text, _SCENARIO_TYPES[key])
        elif key.startswith("ra.") and key[3:] in ra_types:
            ra[key[3:]] = _coerce(key, text, ra_types[key[3:]])
        elif key.startswith("timeline.") and key[9:] in tl_types:
            timeline[key[9:]] = _coerce(key, text, tl_types[key[9:]])
        elif key in ("n_cells", "ue_counts"):
            sweep[key] = _int_list(key, text)
        elif key == "palette":
            scenario["palette"] = _int_list(key, text)
        elif key == "schemes":
            sweep[key] = tuple(t.strip() for t in text.split(",") if t.strip())
        elif key == "ue_counts_per_cell":
            sweep[key] = _bool(key, text)
        else:
            raise ConfigError(key, "unknown configuration key")

    try:
        if ra:
            scenario["ra"] = replace(cfg.ra, **ra)
        if timeline:
            scenario["timeline"] = replace(cfg.timeline, **timeline)
        cfg = cfg.replace(**scenario)
        return SweepSpec(
            base=cfg,
            ue_counts=sweep.get("ue_counts", spec.ue_counts),
            schemes=tuple(Scheme.parse(s) for s in sweep.get("schemes", spec.schemes)),
            cell_counts=sweep.get("n_cells", spec.cell_counts),
            per_cell=sweep.get("ue_counts_per_cell", spec.per_cell),
        )
    except ConfigError:
        raise
    except (ConfigurationError, ValueError) as exc:
        key = next(iter(values), "config")
        for k in values:
            if k.split(".")[-1] in str(exc) or k in str(exc):
                key = k
                break
        raise ConfigError(key, str(exc)) from None


def load_sweep(path=None, overrides: dict | None = None) -> SweepSpec:
    values = load_config_file(path) if path else {}
    values.update(overrides or {})
    return sweep_from_mapping(values)
