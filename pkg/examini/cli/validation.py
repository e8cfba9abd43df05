"""
Config document validation with defaults injection
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from loguru import logger

from ..core.errors import ConfigError, ValidationError
from .schemas import FieldSpec, Schema

Violation = Tuple[str, str]


def _check_bounds(value: float, spec: FieldSpec, path: str, violations: List[Violation]) -> None:
    if spec.minimum is not None:
        if value < spec.minimum or (spec.exclusive_min and value == spec.minimum):
            violations.append((path, f"must be {'>' if spec.exclusive_min else '>='} {spec.minimum:g}"))
    if spec.maximum is not None:
        if value > spec.maximum or (spec.exclusive_max and value == spec.maximum):
            violations.append((path, f"must be {'<' if spec.exclusive_max else '<='} {spec.maximum:g}"))


def _check_value(value: Any, spec: FieldSpec, path: str, violations: List[Violation]) -> Any:
    if value is None:
        if not spec.nullable:
            violations.append((path, "must not be null"))
        return None

    if spec.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            violations.append((path, "must be an integer"))
            return value
        _check_bounds(value, spec, path, violations)
    elif spec.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            violations.append((path, "must be a number"))
            return value
        value = float(value)
        _check_bounds(value, spec, path, violations)
    elif spec.kind == "bool":
        if not isinstance(value, bool):
            violations.append((path, "must be true or false"))
    elif spec.kind == "str":
        if not isinstance(value, str):
            violations.append((path, "must be a string"))
            return value
    elif spec.kind == "list":
        if not isinstance(value, list):
            violations.append((path, "must be a list"))
            return value
        if spec.length is not None and len(value) != spec.length:
            violations.append((path, f"must hold exactly {spec.length} items"))
        if spec.item is not None:
            value = [_check_value(v, spec.item, f"{path}[{i}]", violations) for i, v in enumerate(value)]
    elif spec.kind == "object":
        if not isinstance(value, dict):
            violations.append((path, "must be an object"))
            return value
        if spec.fields is not None:
            value = _check_document(value, spec.fields, f"{path}.", violations)

    if spec.allowed is not None and value not in spec.allowed:
        violations.append((path, f"must be one of {', '.join(map(str, spec.allowed))}"))
    return value


def _check_document(data: Dict[str, Any], schema: Schema, prefix: str, violations: List[Violation]) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for key in data:
        if key not in schema:
            violations.append((f"{prefix}{key}", "unknown field"))
    for name, spec in schema.items():
        path = f"{prefix}{name}"
        if name in data:
            values[name] = _check_value(data[name], spec, path, violations)
        elif spec.required:
            violations.append((path, "is required"))
        else:
            values[name] = spec.default_value()
    return values


def validate_document(data: Any, schema: Schema) -> Dict[str, Any]:
    """Validated copy of `data` with every default filled in; raises with all violations"""
    if not isinstance(data, dict):
        raise ValidationError([("<root>", "config must be a JSON object")])
    violations: List[Violation] = []
    values = _check_document(data, schema, "", violations)
    if violations:
        raise ValidationError(violations)
    return values


def validate_config(path: Union[str, Path], schema: Schema) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    values = validate_document(data, schema)
    logger.debug(f"Validated {path} ({len(values)} fields)")
    return values


def write_effective_config(values: Dict[str, Any], output_dir: Union[str, Path], name: str) -> Path:
    """Echo the defaults-filled config next to the run outputs"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / f"{name}_effective_config.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(values, f, indent=2, sort_keys=True)
    return path
