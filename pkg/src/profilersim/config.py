"""Scenario configuration: TOML schema, defaults, built-ins, round-trip dump.

A configuration is a two-level TOML document (sections per module).  The
empty document resolves to the full-default constant-density dive; every
default is echoed into the resolved dump so a run is reproducible from its
output directory alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .control import RegulatorConfig, SpeedRefs, SupervisorConfig
from .dynamics import ActuatorMode, BuoyParams
from .environment import StratificationProfile
from .errors import ConfigError, DomainError, OutOfRangeError
from .scenario import Scenario, SensorSettings, StopCondition

# value kinds: "float" accepts int and stores float; "int" accepts bool-free ints
_SCHEMA: dict[str, Any] = {
    "name": "str",
    "buoy": {
        "c_x": "float", "s_m": "float", "s_c": "float", "v0": "float",
        "l_max": "float", "t_e": "float", "k_e": "float", "g": "float",
    },
    "profile": {
        "kind": "str", "rho_ref": "float", "z_max": "float",
        "rho": "float",
        "rho_surface": "float", "slope": "float",
        "rho_top": "float", "rho_bottom": "float", "z_center": "float", "thickness": "float",
        "knots": "knots",
        "csv_path": "str",
    },
    "regulator": {"law": "str", "lambda": "float", "kp": "float", "ki": "float"},
    "supervisor": {
        "trigger_threshold": "float", "dwell_s": "float", "quiet_window_s": "float",
        "trigger_on": "str", "deviation_threshold": "float",
    },
    "sensors": {
        "theta_density": "float", "theta_depth": "float", "theta_temperature": "float",
        "noise_sd_density": "float", "noise_sd_depth": "float", "seed": "int",
        "speed_smoothing_T": "float", "v_meas_source": "str", "fp_source": "str",
        "temp_gradient_ref": "float", "temp_per_density": "float",
    },
    "speeds": {"cruise": "float", "measure": "float"},
    "sim": {
        "t_s": "float", "plant_dt": "float", "t_end": "float", "z0": "float", "v0": "float",
        "stop": "str", "stop_depth": "float", "actuator_mode": "str",
        "mode_control": "str", "v_ref_override": "float",
    },
}

_PROFILE_KIND_KEYS = {
    "constant": {"rho"},
    "linear_ramp": {"rho_surface", "slope"},
    "tanh_pycnocline": {"rho_top", "rho_bottom", "z_center", "thickness"},
    "piecewise_linear": {"knots"},
    "table_lookup": {"csv_path"},
}

DEFAULTS: dict[str, Any] = {
    "name": "constant_density_dive",
    "buoy": {"c_x": 0.82, "s_m": 0.0227, "s_c": 0.0227, "v0": 0.025,
             "l_max": 0.04, "t_e": 2.0, "k_e": 0.004, "g": 9.81},
    "profile": {"kind": "constant", "rho_ref": 1022.0, "z_max": 2100.0, "rho": 1022.0},
    "regulator": {"law": "inverse_dynamics", "lambda": 0.5, "kp": 8.0, "ki": 2.0},
    "supervisor": {"trigger_threshold": 0.02, "dwell_s": 300.0, "quiet_window_s": 60.0,
                   "trigger_on": "gradient", "deviation_threshold": 1.0},
    "sensors": {"theta_density": 0.065, "theta_depth": 0.065, "theta_temperature": 0.065,
                "noise_sd_density": 0.0, "noise_sd_depth": 0.0, "seed": 0,
                "speed_smoothing_T": 0.5, "v_meas_source": "differenced",
                "fp_source": "measured", "temp_gradient_ref": 0.3, "temp_per_density": 4.0},
    "speeds": {"cruise": 1.0, "measure": 0.1},
    "sim": {"t_s": 0.1, "plant_dt": 0.01, "t_end": 25000.0, "z0": 0.0, "v0": 0.0,
            "stop": "depth_reached", "stop_depth": 2000.0, "actuator_mode": "physical",
            "mode_control": "fixed_measure"},
}

# The default ARGO-like buoyancy engine cannot hold the 1 m/s cruise
# reference (max control acceleration g*s_c*l_max/(2*v0) = 0.178 m/s^2 is
# below the drag at 1 m/s), so the mode-switching scenarios carry a larger
# piston: l_max = 0.25 m, k_e = 0.01 m/V -> u_max = 25 V, b = 0.0891.
_AUTHORITY_BUOY = {"l_max": 0.25, "k_e": 0.01}

BUILTIN_SCENARIOS: dict[str, dict] = {
    "constant_density_dive": {},
    "neutral_rest": {
        "name": "neutral_rest",
        "sim": {"t_end": 60.0, "z0": 100.0, "stop": "time_up",
                "mode_control": "auto", "v_ref_override": 0.0},
    },
    "fig4": {
        "name": "fig4",
        "buoy": dict(_AUTHORITY_BUOY),
        "profile": {"kind": "tanh_pycnocline", "rho_top": 1022.0, "rho_bottom": 1028.0,
                    "z_center": 200.0, "thickness": 40.0, "z_max": 700.0},
        "sim": {"t_end": 5000.0, "stop_depth": 600.0, "mode_control": "auto"},
    },
    "deep_profile": {
        "name": "deep_profile",
        "buoy": dict(_AUTHORITY_BUOY),
        "profile": {"kind": "piecewise_linear",
                    "knots": [[0.0, 1022.0], [80.0, 1022.0], [140.0, 1025.0],
                              [420.0, 1025.3], [480.0, 1028.0], [2000.0, 1028.8]],
                    "z_max": 2100.0},
        "sim": {"t_end": 30000.0, "stop_depth": 2000.0, "mode_control": "auto",
                "plant_dt": 0.05},
    },
}

SCENARIO_DESCRIPTIONS = {
    "constant_density_dive": "constant-density water, fixed 0.1 m/s dive to 2000 m",
    "neutral_rest": "neutrally buoyant hover at 100 m, zero speed reference",
    "fig4": "pycnocline at 200 m, adaptive cruise/measure dive to 600 m",
    "deep_profile": "2000 m dive through two pycnoclines, adaptive speed modes",
}


def _check_value(path: str, kind: str, value: Any) -> Any:
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key '{path}' must be a number, got {value!r}")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"config key '{path}' must be an integer, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"config key '{path}' must be a string, got {value!r}")
        return value
    if kind == "knots":
        if (not isinstance(value, list) or
                any(not isinstance(p, list) or len(p) != 2 or
                    any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in p)
                    for p in value)):
            raise ConfigError(f"config key '{path}' must be a list of [depth, density] pairs")
        return [[float(p[0]), float(p[1])] for p in value]
    raise AssertionError(kind)


def _validate_layer(layer: dict) -> dict:
    """Check a raw config dict against the schema; returns a typed copy."""
    if not isinstance(layer, dict):
        raise ConfigError("config root must be a table")
    out: dict[str, Any] = {}
    for key, value in layer.items():
        spec = _SCHEMA.get(key)
        if spec is None:
            raise ConfigError(f"unknown config key '{key}'")
        if isinstance(spec, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{key}' must be a section")
            section = {}
            for sub, sub_value in value.items():
                sub_spec = spec.get(sub)
                if sub_spec is None:
                    raise ConfigError(f"unknown config key '{key}.{sub}'")
                section[sub] = _check_value(f"{key}.{sub}", sub_spec, sub_value)
            out[key] = section
        else:
            out[key] = _check_value(key, spec, value)
    return out


def _merge(base: dict, override: dict) -> dict:
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
    for key, value in override.items():
        if isinstance(value, dict):
            section = merged.get(key, {})
            if key == "profile" and "kind" in value and value["kind"] != section.get("kind"):
                # switching profile kind drops the old kind's parameters
                section = {k: v for k, v in section.items()
                           if k in ("kind", "rho_ref", "z_max")}
            section.update(value)
            merged[key] = section
        else:
            merged[key] = value
    return merged


def resolve_config(*layers: dict) -> dict:
    """Merge validated layers onto the defaults."""
    resolved = _merge(DEFAULTS, {})
    for layer in layers:
        resolved = _merge(resolved, _validate_layer(layer))
    return resolved


def _fail(message: str) -> None:
    raise ConfigError(message)


def build_scenario(resolved: dict, base_dir: str | Path = ".") -> Scenario:
    """Construct a validated Scenario from a resolved config dict."""
    try:
        params = BuoyParams(**resolved["buoy"])
    except DomainError as exc:
        raise ConfigError(f"buoy: {exc}") from exc

    profile = _build_profile(resolved["profile"], base_dir)

    sim = resolved["sim"]
    t_s = sim["t_s"]
    plant_dt = sim["plant_dt"]
    if t_s <= 0.0:
        _fail("t_s must be > 0")
    if plant_dt <= 0.0:
        _fail("plant_dt must be > 0")
    n_sub = round(t_s / plant_dt)
    if n_sub < 1 or abs(n_sub * plant_dt - t_s) > 1e-9 * t_s:
        _fail(f"plant_dt must divide t_s exactly (got t_s={t_s}, plant_dt={plant_dt})")
    if sim["t_end"] <= 0.0:
        _fail("t_end must be > 0")
    if sim["z0"] < 0.0:
        _fail("z0 must be >= 0")
    if sim["z0"] > profile.z_max:
        _fail(f"z0 must be within the profile depth range [0, {profile.z_max}]")

    stop_kind = sim["stop"]
    if stop_kind not in ("time_up", "depth_reached", "surfaced"):
        _fail(f"unknown stop condition '{stop_kind}'")
    stop_depth = sim.get("stop_depth")
    if stop_kind == "depth_reached":
        if stop_depth is None:
            _fail("stop = 'depth_reached' requires stop_depth")
        if stop_depth <= sim["z0"]:
            _fail("stop_depth must be below the initial depth z0")
        if stop_depth + 5.0 > profile.z_max:
            _fail(f"stop_depth needs 5 m of profile headroom: "
                  f"stop_depth={stop_depth}, profile z_max={profile.z_max}")
    stop = StopCondition(stop_kind, stop_depth if stop_kind == "depth_reached" else None)

    mode_control = sim["mode_control"]
    if mode_control not in ("auto", "fixed_cruise", "fixed_measure"):
        _fail(f"unknown mode_control '{mode_control}'")
    actuator = sim["actuator_mode"]
    if actuator not in ("physical", "bypass"):
        _fail(f"unknown actuator_mode '{actuator}'")

    sensors_cfg = dict(resolved["sensors"])
    if sensors_cfg["v_meas_source"] not in ("differenced", "exact"):
        _fail(f"unknown v_meas_source '{sensors_cfg['v_meas_source']}'")
    if sensors_cfg["fp_source"] not in ("measured", "exact"):
        _fail(f"unknown fp_source '{sensors_cfg['fp_source']}'")

    try:
        regulator = RegulatorConfig(law=resolved["regulator"]["law"],
                                    lam=resolved["regulator"]["lambda"],
                                    kp=resolved["regulator"]["kp"],
                                    ki=resolved["regulator"]["ki"],
                                    u_max=params.u_max, t_s=t_s)
        supervisor = SupervisorConfig(rho_ref=profile.rho_ref, **resolved["supervisor"])
        speeds = SpeedRefs(**resolved["speeds"])
        sensors = SensorSettings(**sensors_cfg)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    for name in ("theta_density", "theta_depth", "theta_temperature"):
        if sensors_cfg[name] <= 0.0:
            _fail(f"{name} must be > 0")
    for name in ("noise_sd_density", "noise_sd_depth"):
        if sensors_cfg[name] < 0.0:
            _fail(f"{name} must be >= 0")
    if sensors_cfg["speed_smoothing_T"] <= 0.0:
        _fail("speed_smoothing_T must be > 0")

    return Scenario(
        name=resolved["name"],
        params=params,
        profile=profile,
        regulator=regulator,
        supervisor=supervisor,
        speeds=speeds,
        sensors=sensors,
        t_s=t_s,
        plant_dt=plant_dt,
        t_end=sim["t_end"],
        z0=sim["z0"],
        v0=sim["v0"],
        stop=stop,
        actuator_mode=ActuatorMode(actuator),
        mode_control=mode_control,
        v_ref_override=sim.get("v_ref_override"),
    )


def _build_profile(cfg: dict, base_dir: str | Path) -> StratificationProfile:
    kind = cfg["kind"]
    if kind not in _PROFILE_KIND_KEYS:
        _fail(f"unknown profile kind '{kind}'")
    rho_ref = cfg.get("rho_ref", 1022.0)
    z_max = cfg.get("z_max", 2000.0)
    try:
        if kind == "constant":
            return StratificationProfile.constant(cfg.get("rho", rho_ref), rho_ref, z_max)
        if kind == "linear_ramp":
            if "slope" not in cfg:
                _fail("profile kind 'linear_ramp' requires slope")
            return StratificationProfile.linear_ramp(cfg.get("rho_surface", rho_ref),
                                                     cfg["slope"], rho_ref, z_max)
        if kind == "tanh_pycnocline":
            missing = _PROFILE_KIND_KEYS[kind] - cfg.keys()
            if missing:
                _fail(f"profile kind 'tanh_pycnocline' requires {sorted(missing)}")
            return StratificationProfile.tanh_pycnocline(
                cfg["rho_top"], cfg["rho_bottom"], cfg["z_center"], cfg["thickness"],
                rho_ref, z_max)
        if kind == "piecewise_linear":
            if "knots" not in cfg:
                _fail("profile kind 'piecewise_linear' requires knots")
            return StratificationProfile.piecewise_linear(
                [(p[0], p[1]) for p in cfg["knots"]], rho_ref, z_max)
        # table_lookup
        if "csv_path" not in cfg:
            _fail("profile kind 'table_lookup' requires csv_path")
        path = Path(base_dir) / cfg["csv_path"]
        return StratificationProfile.from_csv(str(path), rho_ref, z_max)
    except DomainError as exc:
        raise ConfigError(f"profile: {exc}") from exc


def parse_config(text: str, base_dir: str | Path = ".") -> tuple[Scenario, dict]:
    """Parse a TOML scenario document into a validated Scenario.

    Returns the scenario plus the resolved config (defaults applied) that
    reproduces it.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from exc
    resolved = resolve_config(raw)
    scenario = build_scenario(resolved, base_dir)
    return scenario, resolved


def load_scenario(source: str, overrides: Optional[list[str]] = None,
                  seed: Optional[int] = None) -> tuple[Scenario, dict]:
    """Resolve a scenario from a built-in name or a config file path."""
    base_dir: str | Path = "."
    if source in BUILTIN_SCENARIOS:
        layers = [BUILTIN_SCENARIOS[source]]
    else:
        path = Path(source)
        if not path.is_file():
            raise ConfigError(f"'{source}' is neither a built-in scenario "
                              f"({', '.join(sorted(BUILTIN_SCENARIOS))}) nor a config file")
        try:
            raw = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{source}: TOML syntax error: {exc}") from exc
        if "name" not in raw:
            raw["name"] = path.stem
        layers = [raw]
        base_dir = path.parent
    if overrides:
        layers.append(_overrides_to_layer(overrides))
    if seed is not None:
        layers.append({"sensors": {"seed": seed}})
    resolved = resolve_config(*layers)
    scenario = build_scenario(resolved, base_dir)
    return scenario, resolved


def _overrides_to_layer(overrides: list[str]) -> dict:
    """Turn repeated --set key=value flags into a config layer."""
    layer: dict[str, Any] = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' must look like key=value")
        key, _, raw_value = item.partition("=")
        key = key.strip()
        try:
            value = tomllib.loads(f"v = {raw_value.strip()}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw_value.strip()  # bare strings need no quotes
        parts = key.split(".")
        if len(parts) == 1:
            layer[parts[0]] = value
        elif len(parts) == 2:
            layer.setdefault(parts[0], {})
            if not isinstance(layer[parts[0]], dict):
                raise ConfigError(f"override '{key}' conflicts with a scalar key")
            layer[parts[0]][parts[1]] = value
        else:
            raise ConfigError(f"override key '{key}' has too many dots")
    return layer


def dump_toml(resolved: dict) -> str:
    """Serialize a resolved config as TOML, keys in schema order."""
    lines: list[str] = []
    for key in _SCHEMA:
        if key not in resolved:
            continue
        value = resolved[key]
        if not isinstance(value, dict):
            lines.append(f"{key} = {_toml_value(value)}")
    for key in _SCHEMA:
        section = resolved.get(key)
        if not isinstance(section, dict):
            continue
        lines.append("")
        lines.append(f"[{key}]")
        for sub in _SCHEMA[key]:
            if sub in section:
                lines.append(f"{sub} = {_toml_value(section[sub])}")
    return "\n".join(lines) + "\n"


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"cannot serialize non-finite float {value}")
        text = repr(value)
        return text if ("." in text or "e" in text or "E" in text) else text + ".0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize config value {value!r}")
