"""
Experiment config files.

A config is a flat "key = value" file (dotenv syntax, "#" comments). Keys for
physical quantities carry their unit as a suffix; the noise floor is given in
dBm and converted to watts here. Every key is optional and falls back to the
defaults of ExperimentConfig.

    ue_counts = 50,100,200,400
    modes = offload_only,partition
    size_classes_bits = 500000:0.3,2000000:0.4,8000000:0.3
    noise_power_dbm = -100
"""

import io
import logging
import re
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from dotenv import dotenv_values
from pydantic import ValidationError

from app.errors import ConfigParseError
from app.models import ExperimentConfig
from app.radio import dbm_to_watts

logger = logging.getLogger(__name__)


def _float(value: str) -> float:
    return float(value)


def _int(value: str) -> int:
    return int(value)


def _bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _str_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _int_list(value: str) -> List[int]:
    return [int(item) for item in _str_list(value)]


def _size_classes(value: str) -> List[Tuple[float, float]]:
    classes = []
    for item in _str_list(value):
        bits, sep, weight = item.partition(":")
        if not sep:
            raise ValueError(f"expected bits:weight, got {item!r}")
        classes.append((float(bits), float(weight)))
    return classes


def _node_limit(value: str) -> Optional[int]:
    if value.lower() in ("none", "unbounded", "0"):
        return None
    return int(value)


def _dbm(value: str) -> float:
    return dbm_to_watts(float(value))


# config key -> (section, model field, converter); section "" is the top level
KEYS: Dict[str, Tuple[str, str, Callable[[str], object]]] = {
    "total_bandwidth_hz": ("radio", "total_bandwidth_hz", _float),
    "guard_band_fraction": ("radio", "guard_band_fraction", _float),
    "rb_bandwidth_hz": ("radio", "rb_bandwidth_hz", _float),
    "tx_power_w": ("radio", "tx_power_w", _float),
    "channel_gain": ("radio", "channel_gain", _float),
    "noise_power_dbm": ("radio", "noise_power_w", _dbm),
    "server_count": ("servers", "count", _int),
    "cpus_per_server": ("servers", "cpu_count", _int),
    "server_speed_factor": ("servers", "speed_factor", _float),
    "local_rate_bits_per_s": ("processing", "local_rate_bits_per_s", _float),
    "mec_rate_bits_per_s": ("processing", "mec_rate_bits_per_s", _float),
    "max_tasks": ("workload", "max_tasks", _int),
    "arrival_rate_per_ue_per_s": ("workload", "arrival_rate_per_ue_per_s", _float),
    "workload_horizon_s": ("workload", "horizon_s", _float),
    "size_classes_bits": ("workload", "size_classes", _size_classes),
    "deadline_slack_min_s": ("workload", "deadline_slack_min", _float),
    "deadline_slack_max_s": ("workload", "deadline_slack_max", _float),
    "ue_counts": ("", "ue_counts", _int_list),
    "modes": ("", "modes", _str_list),
    "solvers": ("", "solvers", _str_list),
    "runs_per_point": ("", "runs_per_point", _int),
    "seed": ("", "seed", _int),
    "drop_penalty": ("", "drop_penalty", str),
    "output_dir": ("", "output_dir", str),
    "record_wall_time": ("", "record_wall_time", _bool),
    "cuckoo_nest_count": ("cuckoo", "nest_count", _int),
    "cuckoo_iterations": ("cuckoo", "iterations", _int),
    "cuckoo_abandonment_prob": ("cuckoo", "abandonment_prob", _float),
    "cuckoo_levy_lambda": ("cuckoo", "levy_lambda", _float),
    "cuckoo_seed": ("cuckoo", "seed", _int),
    "cuckoo_step_scale": ("cuckoo", "step_scale", _float),
    "cuckoo_move_share": ("cuckoo", "move_share", _float),
    "exact_p_grid_step": ("exact", "p_grid_step", _float),
    "exact_rb_choices": ("exact", "rb_choices", _int_list),
    "exact_node_limit": ("exact", "node_limit", _node_limit),
}


def _key_lines(text: str) -> Dict[str, int]:
    lines = {}
    pattern = re.compile(r"^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=")
    for number, line in enumerate(text.splitlines(), start=1):
        match = pattern.match(line)
        if match:
            lines[match.group(1).lower()] = number
    return lines


def _key_for_location(loc: Tuple, present: Mapping[str, object]) -> Optional[str]:
    """Best config key for a pydantic error location"""
    if not loc:
        return None
    section = loc[0] if loc[0] in {s for s, _, _ in KEYS.values()} else ""
    if section == "servers":
        fields = [part for part in loc[1:] if isinstance(part, str)]
    elif section:
        fields = [part for part in loc[1:2] if isinstance(part, str)]
    else:
        fields = [loc[0]]
    if section == "workload" and fields == ["deadline_slack"]:
        fields = ["deadline_slack_min", "deadline_slack_max"]
    candidates = [key for key, (s, f, _) in KEYS.items() if s == section]
    for key in candidates:
        if KEYS[key][1] in fields and key in present:
            return key
    for key in candidates:
        if KEYS[key][1] in fields:
            return key
    return next((key for key in candidates if key in present), None)


def _build(values: Mapping[str, object]) -> Dict[str, object]:
    sections: Dict[str, Dict[str, object]] = {}
    for key, value in values.items():
        section, field, _ = KEYS[key]
        sections.setdefault(section, {})[field] = value

    data: Dict[str, object] = dict(sections.pop("", {}))
    workload = sections.get("workload", {})
    if "deadline_slack_min" in workload or "deadline_slack_max" in workload:
        low = workload.pop("deadline_slack_min", 0.5)
        high = workload.pop("deadline_slack_max", 2.0)
        workload["deadline_slack"] = (low, high)

    server_fields = sections.pop("servers", None)
    if server_fields is not None:
        count = server_fields.pop("count", 2)
        if count < 1:
            raise ConfigParseError("server_count must be at least 1", field="server_count")
        data["servers"] = [{"id": j + 1, **server_fields} for j in range(count)]

    data.update(sections)
    return data


def parse_experiment_config(
    text: str,
    source: str = "<config>",
    overrides: Optional[Mapping[str, Optional[str]]] = None,
) -> ExperimentConfig:
    """
    Parse config text, then apply overrides (raw string values keyed like the
    file, e.g. from the command line). Errors name the key and, for keys that
    came from the file, its line.
    """
    lines = _key_lines(text)
    raw = {
        key.lower(): value
        for key, value in dotenv_values(stream=io.StringIO(text), interpolate=False).items()
    }
    origin = {key: lines.get(key) for key in raw}
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = str(value)
            origin[key] = None

    values: Dict[str, object] = {}
    for key, value in raw.items():
        if key not in KEYS:
            raise ConfigParseError(f"unknown key '{key}'", field=key, line=origin[key], source=source)
        if value is None or not value.strip():
            raise ConfigParseError("missing value", field=key, line=origin[key], source=source)
        try:
            values[key] = KEYS[key][2](value.strip())
        except ValueError as e:
            raise ConfigParseError(
                f"invalid value {value!r}: {e}", field=key, line=origin[key], source=source
            )

    try:
        config = ExperimentConfig(**_build(values))
    except ConfigParseError as e:
        raise ConfigParseError(e.message, field=e.field, line=origin.get(e.field), source=source)
    except ValidationError as e:
        error = e.errors()[0]
        key = _key_for_location(tuple(error["loc"]), values)
        raise ConfigParseError(
            error["msg"], field=key, line=origin.get(key) if key else None, source=source
        )

    logger.debug(f"Parsed experiment config from {source}: {sorted(values)}")
    return config


def load_experiment_config(
    path: str, overrides: Optional[Mapping[str, Optional[str]]] = None
) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    return parse_experiment_config(text, source=path, overrides=overrides)
