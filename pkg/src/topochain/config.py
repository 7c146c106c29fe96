"""Run configuration: a single JSON document in laboratory units.

Keys carry their unit in the name (MHz, ns, radians); internal code works in
t0 = 2pi x 4 MHz natural units, converted exactly once here.  Unknown keys
are rejected so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import copy
import hashlib
import json

from .circuit_map import CircuitParams
from .open_system import LindbladConfig
from .spin_chain import ChainParams
from .units import energy_from_mhz, rate_from_khz, time_from_ns, time_from_us


class ConfigError(ValueError):
    """Malformed configuration: unknown key, bad type, or bad value."""


DEFAULTS = {
    "model": {
        "t_z_mhz": 4.0,
        "delta0_mhz": 3.96,
        "h_z_mhz": 1.2,
        "phi_rad": 0.0,
        "n_cells": 16,
    },
    "circuit": {
        "omega_r_mhz": 6000.0,
        "omega_b_mhz": 5840.0,
        "g_r_mhz": 200.0,
        "g_b_mhz": 120.0,
    },
    "protocol": {
        "order": ["O1", "O2"],
        "durations_us": [1.5, 1.5],
        "ramp_shape": "cosine",
        "mode": "tracking",
        "steps": 1200,
        "scan_durations_us": [1.0, 3.0, 10.0],
    },
    "lindblad": {
        "gamma_khz": [0.0, 5.0, 20.0, 100.0],
        "duration_ns": 1500.0,
        "dt_ns": 0.5,
        "record_stride": 10,
    },
    "bands": {
        "k_points": 256,
    },
    "phase_diagram": {
        "t_z_mhz_min": -8.0,
        "t_z_mhz_max": 8.0,
        "h_z_mhz_min": -16.0,
        "h_z_mhz_max": 16.0,
        "grid_points": 41,
        "dynamical_points_mhz": [],
        "dynamical_duration_ns": 7957.747,
    },
    "edge_modes": {
        "dot": None,
    },
    "drives": {
        "cross_validate_ns": 200.0,
    },
    "chiral_center": {
        "duration_ns": 7957.747,
        "steps": 4000,
    },
    "output": {
        "directory": None,
        "format": None,
    },
}


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _num_list(v) -> bool:
    return isinstance(v, list) and all(_is_num(x) for x in v)


def _pair_list(v) -> bool:
    return (isinstance(v, list)
            and all(isinstance(x, list) and len(x) == 2
                    and all(_is_num(y) for y in x) for x in v))


_VALIDATORS = {
    "model.t_z_mhz": _is_num,
    "model.delta0_mhz": _is_num,
    "model.h_z_mhz": _is_num,
    "model.phi_rad": _is_num,
    "model.n_cells": lambda v: isinstance(v, int) and v >= 2,
    "circuit.omega_r_mhz": _is_num,
    "circuit.omega_b_mhz": _is_num,
    "circuit.g_r_mhz": _is_num,
    "circuit.g_b_mhz": _is_num,
    "protocol.order": lambda v: isinstance(v, list)
        and all(x in ("O1", "O2") for x in v),
    "protocol.durations_us": lambda v: _is_num(v) or _num_list(v),
    "protocol.ramp_shape": lambda v: v in ("cosine", "linear"),
    "protocol.mode": lambda v: v in ("tracking", "unitary"),
    "protocol.steps": lambda v: isinstance(v, int) and v >= 100,
    "protocol.scan_durations_us": _num_list,
    "lindblad.gamma_khz": lambda v: _num_list(v) and len(v) >= 1
        and all(x >= 0 for x in v),
    "lindblad.duration_ns": lambda v: _is_num(v) and v > 0,
    "lindblad.dt_ns": lambda v: _is_num(v) and v > 0,
    "lindblad.record_stride": lambda v: isinstance(v, int) and v >= 1,
    "bands.k_points": lambda v: isinstance(v, int) and v >= 1,
    "phase_diagram.t_z_mhz_min": _is_num,
    "phase_diagram.t_z_mhz_max": _is_num,
    "phase_diagram.h_z_mhz_min": _is_num,
    "phase_diagram.h_z_mhz_max": _is_num,
    "phase_diagram.grid_points": lambda v: isinstance(v, int) and v >= 2,
    "phase_diagram.dynamical_points_mhz": _pair_list,
    "phase_diagram.dynamical_duration_ns": lambda v: _is_num(v) and v > 0,
    "edge_modes.dot": lambda v: v is None or v in ("A", "B", "C", "D"),
    "drives.cross_validate_ns": lambda v: v is None or (_is_num(v) and v > 0),
    "chiral_center.duration_ns": lambda v: _is_num(v) and v > 0,
    "chiral_center.steps": lambda v: isinstance(v, int) and v >= 10,
    "output.directory": lambda v: v is None or isinstance(v, str),
    "output.format": lambda v: v is None or v in ("csv", "json"),
}


def _check_leaf(path: str, value) -> None:
    ok = _VALIDATORS[path]
    if not ok(value):
        raise ConfigError("bad value for %s: %r" % (path, value))


def _merge(base: dict, user: dict, prefix: str = "") -> None:
    for key, value in user.items():
        path = prefix + key
        if key not in base:
            raise ConfigError("unknown config key: %s" % path)
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError("%s must be an object" % path)
            _merge(base[key], value, path + ".")
        else:
            _check_leaf(path, value)
            base[key] = value


def load_config(path: str | None = None) -> dict:
    """Defaults, deep-merged with the user JSON document when given."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError("cannot read config: %s" % exc) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config is not valid JSON: %s" % exc) from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        _merge(cfg, user)
    return cfg


def apply_override(cfg: dict, assignment: str) -> None:
    """One `section.key=value` override; the value is parsed as JSON."""
    if "=" not in assignment:
        raise ConfigError("override must look like section.key=value")
    path, raw = assignment.split("=", 1)
    path = path.strip()
    if path not in _VALIDATORS:
        raise ConfigError("unknown config key: %s" % path)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    _check_leaf(path, value)
    node = cfg
    *heads, leaf = path.split(".")
    for head in heads:
        node = node[head]
    node[leaf] = value


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def chain_params_from(cfg: dict) -> ChainParams:
    m = cfg["model"]
    return ChainParams(
        t_z=energy_from_mhz(m["t_z_mhz"]),
        delta0=energy_from_mhz(m["delta0_mhz"]),
        h_z=energy_from_mhz(m["h_z_mhz"]),
        phi=m["phi_rad"],
        n_cells=m["n_cells"],
    )


def circuit_params_from(cfg: dict) -> CircuitParams:
    c = cfg["circuit"]
    return CircuitParams(
        omega_r=energy_from_mhz(c["omega_r_mhz"]),
        omega_b=energy_from_mhz(c["omega_b_mhz"]),
        g_r=energy_from_mhz(c["g_r_mhz"]),
        g_b=energy_from_mhz(c["g_b_mhz"]),
        n_cells=cfg["model"]["n_cells"],
    )


def lindblad_base_from(cfg: dict) -> tuple[LindbladConfig, list[float]]:
    """Base run settings plus the gamma list converted to t0 units."""
    sec = cfg["lindblad"]
    base = LindbladConfig(
        gamma=0.0,
        duration=time_from_ns(sec["duration_ns"]),
        dt=time_from_ns(sec["dt_ns"]),
        record_stride=sec["record_stride"],
    )
    return base, [rate_from_khz(g) for g in sec["gamma_khz"]]


def protocol_durations(cfg: dict) -> list[float]:
    """Per-op durations in t0 units, broadcasting a scalar over the order."""
    sec = cfg["protocol"]
    durs = sec["durations_us"]
    if not isinstance(durs, list):
        durs = [durs] * len(sec["order"])
    if len(durs) != len(sec["order"]):
        raise ConfigError("need one protocol duration per op")
    return [time_from_us(d) for d in durs]
