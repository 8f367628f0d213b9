"""JSON experiment configuration: strict parsing, lossless round-trip,
and builders for the solver objects.

Schema (unknown keys are rejected at every level)::

    {
      "mapping":     {"kind": "flip"}
                   | {"kind": "affine", "A": [[...]], "b": [...]}
                   | {"kind": "contraction_half"},
      "contraction": {"kind": "half"}
                   | {"kind": "scale", "factor": 0.3}
                   | {"kind": "affine", "A": [[...]], "b": [...]},
      "schedule":    {"family": "paper"}
                   | {"family": "power", "s": 1.0, "b_const": 0.0}
                   | {"family": "custom", "table": [[a, b, c, k], ...]},
      "scheme":      "AGVIM" or ["VIM", "GVIM", ...],
      "x1":          [..],
      "norm_p":      2.0,          # optional
      "tol_step":    1e-8,         # optional
      "tol_inner":   1e-12,        # optional
      "max_outer":   10000,        # optional
      "max_inner":   10000,        # optional
      "power_cap":   1000,         # optional
      "seed":        1,            # required by randomized commands
      "out":         "results"     # optional output directory
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidInputError, MidpointError
from .mappings import (
    Contraction,
    Mapping,
    make_affine,
    make_contraction_half,
    make_flip_map,
    make_scaling,
    make_scaling_contraction,
    operator_norm_est,
)
from .schedules import Schedule, custom_schedule, paper_schedule, power_schedule
from .solver import Scheme, SolverConfig, scheme_by_name
from .space import NormSpec

__all__ = ["ExperimentConfig", "load_config", "parse_config"]

_TOP_KEYS = {
    "mapping", "contraction", "schedule", "scheme", "x1", "norm_p",
    "tol_step", "tol_inner", "max_outer", "max_inner", "power_cap",
    "seed", "out",
}
_MAPPING_KEYS = {
    "flip": {"kind", "envelope"},
    "affine": {"kind", "A", "b", "envelope"},
    "contraction_half": {"kind", "envelope"},
}
_CONTRACTION_KEYS = {
    "half": {"kind"},
    "scale": {"kind", "factor"},
    "affine": {"kind", "A", "b"},
}
_SCHEDULE_KEYS = {
    "paper": {"family"},
    "power": {"family", "s", "b_const"},
    "custom": {"family", "table"},
}


def _check_keys(section: str, data: dict, allowed: set):
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {section}", key=key)


def _require(section: str, data: dict, key: str):
    if key not in data:
        raise ConfigError(f"missing required key {key!r} in {section}", key=key)
    return data[key]


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative experiment description; round-trips losslessly via JSON."""

    mapping: dict
    schedule: dict
    scheme: tuple  # one or more scheme names, upper-case
    x1: tuple
    contraction: dict | None = None
    norm_p: float = 2.0
    tol_step: float = 1e-8
    tol_inner: float = 1e-12
    max_outer: int = 10_000
    max_inner: int = 10_000
    power_cap: int = 1_000
    seed: int | None = None
    out: str | None = None
    _single_scheme: bool = field(default=True, repr=False)

    # -- construction -------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "mapping": dict(self.mapping),
            "schedule": dict(self.schedule),
            "scheme": self.scheme[0] if self._single_scheme else list(self.scheme),
            "x1": list(self.x1),
            "norm_p": self.norm_p,
            "tol_step": self.tol_step,
            "tol_inner": self.tol_inner,
            "max_outer": self.max_outer,
            "max_inner": self.max_inner,
            "power_cap": self.power_cap,
        }
        if self.contraction is not None:
            d["contraction"] = dict(self.contraction)
        if self.seed is not None:
            d["seed"] = self.seed
        if self.out is not None:
            d["out"] = self.out
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # -- builders ------------------------------------------------------

    def build_mapping(self) -> Mapping:
        spec = self.mapping
        kind = spec["kind"]
        envelope = None
        if spec.get("envelope") == "unit":
            envelope = lambda n: 1.0
        if kind == "flip":
            return make_flip_map(envelope=envelope)
        if kind == "affine":
            return make_affine(np.asarray(spec["A"], dtype=float),
                               np.asarray(spec["b"], dtype=float),
                               envelope=envelope)
        if kind == "contraction_half":
            dim = len(self.x1)
            return make_scaling(0.5, dim, envelope=envelope or (lambda n: 1.0))
        raise ConfigError(f"unknown mapping kind {kind!r}", key="kind")

    def build_contraction(self) -> Contraction | None:
        spec = self.contraction
        if spec is None:
            return None
        kind = spec["kind"]
        if kind == "half":
            return make_contraction_half()
        if kind == "scale":
            return make_scaling_contraction(float(spec["factor"]))
        if kind == "affine":
            A = np.asarray(spec["A"], dtype=float)
            b = np.asarray(spec["b"], dtype=float)
            alpha = operator_norm_est(A)
            if not alpha < 1.0:
                raise ConfigError(
                    f"affine contraction needs ||A|| < 1, estimated {alpha:.6f}", key="A"
                )
            return Contraction(apply=lambda u: A @ u + b, alpha=alpha, name="affine")
        raise ConfigError(f"unknown contraction kind {kind!r}", key="kind")

    def build_schedule(self) -> Schedule:
        spec = self.schedule
        family = spec["family"]
        if family == "paper":
            return paper_schedule()
        if family == "power":
            return power_schedule(float(spec.get("s", 1.0)), float(spec.get("b_const", 0.0)))
        if family == "custom":
            return custom_schedule(spec["table"])
        raise ConfigError(f"unknown schedule family {family!r}", key="family")

    def schemes(self) -> list[Scheme]:
        return [scheme_by_name(name) for name in self.scheme]

    def build_solver_config(self, scheme: Scheme | None = None) -> SolverConfig:
        scheme = scheme if scheme is not None else self.schemes()[0]
        try:
            return SolverConfig(
                scheme=scheme,
                mapping=self.build_mapping(),
                schedule=self.build_schedule(),
                x1=np.asarray(self.x1, dtype=float),
                contraction=self.build_contraction(),
                max_outer=self.max_outer,
                tol_step=self.tol_step,
                tol_inner=self.tol_inner,
                max_inner=self.max_inner,
                norm=NormSpec(self.norm_p),
                power_cap=self.power_cap,
            )
        except ConfigError:
            raise
        except MidpointError as exc:
            raise ConfigError(str(exc)) from exc


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a decoded JSON object and freeze it as an ExperimentConfig."""
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a JSON object")
    _check_keys("config", data, _TOP_KEYS)

    mapping = _require("config", data, "mapping")
    if not isinstance(mapping, dict):
        raise ConfigError("'mapping' must be an object", key="mapping")
    kind = _require("mapping", mapping, "kind")
    if kind not in _MAPPING_KEYS:
        raise ConfigError(f"unknown mapping kind {kind!r}", key="kind")
    _check_keys("mapping", mapping, _MAPPING_KEYS[kind])
    if kind == "affine":
        _require("mapping", mapping, "A")
        _require("mapping", mapping, "b")
    if mapping.get("envelope") not in (None, "auto", "unit"):
        raise ConfigError("mapping envelope must be 'auto' or 'unit'", key="envelope")

    contraction = data.get("contraction")
    if contraction is not None:
        if not isinstance(contraction, dict):
            raise ConfigError("'contraction' must be an object", key="contraction")
        ckind = _require("contraction", contraction, "kind")
        if ckind not in _CONTRACTION_KEYS:
            raise ConfigError(f"unknown contraction kind {ckind!r}", key="kind")
        _check_keys("contraction", contraction, _CONTRACTION_KEYS[ckind])
        if ckind == "scale":
            _require("contraction", contraction, "factor")
        if ckind == "affine":
            _require("contraction", contraction, "A")
            _require("contraction", contraction, "b")

    schedule = _require("config", data, "schedule")
    if not isinstance(schedule, dict):
        raise ConfigError("'schedule' must be an object", key="schedule")
    family = _require("schedule", schedule, "family")
    if family not in _SCHEDULE_KEYS:
        raise ConfigError(f"unknown schedule family {family!r}", key="family")
    _check_keys("schedule", schedule, _SCHEDULE_KEYS[family])
    if family == "custom":
        _require("schedule", schedule, "table")

    scheme_raw = _require("config", data, "scheme")
    single = isinstance(scheme_raw, str)
    names = [scheme_raw] if single else list(scheme_raw)
    if not names:
        raise ConfigError("'scheme' must name at least one scheme", key="scheme")
    try:
        schemes = tuple(scheme_by_name(n).name for n in names)
    except InvalidInputError as exc:
        raise ConfigError(str(exc), key="scheme") from exc

    x1 = _require("config", data, "x1")
    if not isinstance(x1, (list, tuple)) or not x1:
        raise ConfigError("'x1' must be a non-empty array of numbers", key="x1")

    def _num(key, default, cast):
        value = data.get(key, default)
        try:
            return cast(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}", key=key) from exc

    return ExperimentConfig(
        mapping=dict(mapping),
        contraction=dict(contraction) if contraction is not None else None,
        schedule=dict(schedule),
        scheme=schemes,
        x1=tuple(float(v) for v in x1),
        norm_p=_num("norm_p", 2.0, float),
        tol_step=_num("tol_step", 1e-8, float),
        tol_inner=_num("tol_inner", 1e-12, float),
        max_outer=_num("max_outer", 10_000, int),
        max_inner=_num("max_inner", 10_000, int),
        power_cap=_num("power_cap", 1_000, int),
        seed=None if data.get("seed") is None else _num("seed", None, int),
        out=None if data.get("out") is None else str(data["out"]),
        _single_scheme=single,
    )


def load_config(path) -> ExperimentConfig:
    """Read and parse a JSON config file."""
    p = Path(path)
    try:
        raw = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {p}: {exc}") from exc
    return parse_config(data)
