"""
Config document schemas: typed fields with bounds, allowed values and defaults
"""

import copy
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

from ..gravity.models import MAX_KEY_ORDER
from ..pic.models import default_species


@dataclass
class FieldSpec:
    kind: str                                   # int, float, str, bool, list, object
    default: Any = None
    help: str = ""
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    exclusive_min: bool = False
    exclusive_max: bool = False
    allowed: Optional[Sequence[Any]] = None
    item: Optional["FieldSpec"] = None          # list element spec
    length: Optional[int] = None                # exact list length
    fields: Optional["Schema"] = None           # object members
    nullable: bool = False
    required: bool = False

    def default_value(self) -> Any:
        value = self.default() if callable(self.default) else self.default
        return copy.deepcopy(value) if isinstance(value, (list, dict)) else value

    def describe(self) -> str:
        parts = [self.kind]
        if self.allowed:
            parts.append("one of " + "|".join(str(a) for a in self.allowed))
        if self.minimum is not None:
            parts.append(f"{'>' if self.exclusive_min else '>='} {self.minimum:g}")
        if self.maximum is not None:
            parts.append(f"{'<' if self.exclusive_max else '<='} {self.maximum:g}")
        if self.required:
            parts.append("required")
        elif not callable(self.default):
            parts.append(f"default {self.default!r}")
        return ", ".join(parts)


Schema = Dict[str, FieldSpec]


def _int(default: int, minimum: Optional[float] = None, maximum: Optional[float] = None, help: str = "") -> FieldSpec:
    return FieldSpec("int", default, help, minimum, maximum)


def _float(default: float, minimum: Optional[float] = None, maximum: Optional[float] = None,
           exclusive_min: bool = False, exclusive_max: bool = False, help: str = "") -> FieldSpec:
    return FieldSpec("float", default, help, minimum, maximum, exclusive_min, exclusive_max)


def _choice(default: str, allowed: Sequence[str], help: str = "") -> FieldSpec:
    return FieldSpec("str", default, help, allowed=tuple(allowed))


def _ints(default: Union[List[int], Callable], length: Optional[int] = None, minimum: int = 1,
          help: str = "") -> FieldSpec:
    return FieldSpec("list", default, help, item=FieldSpec("int", minimum=minimum), length=length)


def _floats(default: Union[List[float], Callable], length: Optional[int] = None, help: str = "") -> FieldSpec:
    return FieldSpec("list", default, help, item=FieldSpec("float"), length=length)


SEED = _int(0, minimum=0, help="single source of randomness")
RANKS = FieldSpec("int", None, "logical rank count; null keeps the default layout", minimum=1, nullable=True)

MHD_SCHEMA: Schema = {
    "problem": _choice("orszag_tang", ("orszag_tang", "cp_alfven")),
    "reconstruction": _choice("WENOZ", ("WENOZ",)),
    "riemann": _choice("HLLD", ("HLLD", "HLL")),
    "time_stepper": _choice("RK3", ("RK3",)),
    "divb_mode": _choice("CT", ("CT", "GLM")),
    "cfl": _float(0.3, 0.0, 1.0, exclusive_min=True, exclusive_max=True),
    "gamma": _float(5.0 / 3.0, 1.0, exclusive_min=True),
    "t_end": _float(1.0, 0.0),
    "max_steps": _int(100, 0),
    "glm_ch_ratio": _float(1.0, 0.0, exclusive_min=True),
    "glm_damping": _float(0.18, 0.0),
    "flux_correction": FieldSpec("bool", True),
    "pressure_floor": _float(1e-12, 0.0, exclusive_min=True),
    "amplitude": _float(0.1, 0.0, exclusive_min=True),
    "wavevector": FieldSpec("list", [1, 1, 1], item=FieldSpec("int"), length=3),
    "history_every": _int(1, 1),
    "dump_every": _int(0, 0),
    "global_cells": _ints([32, 32, 32], length=3),
    "domain_extent": FieldSpec("list", [[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]],
                               item=FieldSpec("list", item=FieldSpec("float"), length=2), length=3),
    "rank_layout": _ints([1, 1, 1], length=3),
    "ghost_width": _int(3, 3),
    "periodic": FieldSpec("list", [True, True, True], item=FieldSpec("bool"), length=3),
    "ranks": RANKS,
    "seed": SEED,
}

SPECIES_SCHEMA: Schema = {
    "name": FieldSpec("str", required=True),
    "qom": FieldSpec("float", required=True),
    "charge_density": FieldSpec("float", required=True),
    "vth": _float(0.1, 0.0),
    "drift": _floats([0.0, 0.0, 0.0], length=3),
}


def _default_species() -> List[Dict[str, Any]]:
    return [{"name": s.name, "qom": s.qom, "charge_density": s.charge_density, "vth": s.vth,
             "drift": list(s.drift)} for s in default_species()]


PIC_SCHEMA: Schema = {
    "cells": _ints([16, 16], length=2, minimum=2),
    "extent": _floats([1.6, 1.6], length=2),
    "ppc": _int(16, 1),
    "species": FieldSpec("list", _default_species, item=FieldSpec("object", fields=SPECIES_SCHEMA)),
    "dt": _float(0.1, 0.0, exclusive_min=True),
    "theta": _float(0.5, 0.5, 1.0),
    "mover_iterations": _int(3, 1),
    "gmres_tolerance": _float(1e-8, 0.0, exclusive_min=True),
    "gmres_restart": _int(20, 1),
    "gmres_max_iters": _int(400, 1),
    "quiet_start": FieldSpec("bool", True),
    "pressure_term": FieldSpec("bool", True),
    "cycles": _int(4, 0),
    "ranks": RANKS,
    "seed": SEED,
}

SPH_SCHEMA: Schema = {
    "n_ngb": _float(32.0, 32.0 / 3.0, exclusive_min=True),
    "kernel": _choice("cubic_spline", ("cubic_spline",)),
    "tolerance": _float(1e-4, 0.0, exclusive_min=True),
    "max_iterations": _int(100, 1),
}

GRAVITY_SCHEMA: Schema = {
    "n_bodies": _int(1000, 1),
    "distribution": _choice("uniform_sphere", ("uniform_sphere", "uniform_cube")),
    "walk": _choice("grouped", ("bh", "grouped")),
    "theta": _float(0.5, 0.0),
    "softening": _float(1e-3, 0.0),
    "group_size": _int(32, 1),
    "direct_radius": _float(0.0, 0.0),
    "leaf_capacity": _int(8, 1),
    "key_order": _int(MAX_KEY_ORDER, 1, MAX_KEY_ORDER),
    "sph": FieldSpec("object", None, fields=SPH_SCHEMA, nullable=True),
    "ranks": RANKS,
    "seed": SEED,
}

CAMPAIGN_SCHEMA: Schema = {
    "app": _choice("synthetic", ("mhd", "pic", "gravity", "synthetic")),
    "mode": _choice("strong", ("weak", "strong", "grouped_strong")),
    "rank_counts": _ints([1, 2, 4, 8]),
    "resolution": _ints([64]),
    "repetitions": _int(3, 1),
    "steps": _int(2, 1),
    "baseline_ref": FieldSpec("str", None, nullable=True),
    "options": FieldSpec("object", dict),
    "tolerance_pct": _float(10.0, 0.0),
    "seed": SEED,
}

MACHINE_SCHEMA: Schema = {
    "cpu_model": FieldSpec("str", required=True),
    "logical_cpus": FieldSpec("int", required=True, minimum=1),
    "physical_cpus": FieldSpec("int", required=True, minimum=1),
    "workers": FieldSpec("int", required=True, minimum=1),
    "frequency_mhz": _float(0.0, 0.0),
    "artifact_version": FieldSpec("str", None, nullable=True),
}

SCHEMAS: Dict[str, Schema] = {
    "mhd": MHD_SCHEMA,
    "pic": PIC_SCHEMA,
    "gravity": GRAVITY_SCHEMA,
    "campaign": CAMPAIGN_SCHEMA,
    "machine": MACHINE_SCHEMA,
}


def schema_help(schema: Schema, prefix: str = "") -> str:
    lines = []
    for name, spec in schema.items():
        lines.append(f"  {prefix}{name}: {spec.describe()}")
        if spec.kind == "object" and spec.fields:
            lines.append(schema_help(spec.fields, prefix=f"{prefix}{name}."))
        elif spec.item is not None and spec.item.fields:
            lines.append(schema_help(spec.item.fields, prefix=f"{prefix}{name}[]."))
    return "\n".join(lines)
