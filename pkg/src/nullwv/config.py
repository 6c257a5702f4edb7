"""JSON experiment configs: schema, validation with field paths, round-trip.

Example (the qubit sweep behind the WV/NWV comparison plot)::

    {
      "dim": 2,
      "initial_state": [[0.8660254037844387, 0.0], [0.5, 0.0]],
      "tunneling": {"probs": [0.0, 0.01]},
      "unitary": {"qubit_gamma": 0.0},
      "postselect_index": 1,
      "calibration": {"mode": "dominant", "params": {"state": 1}},
      "sweep": {"parameter": "gamma", "from": -1.5707963267948966,
                "to": 1.5707963267948966, "steps": 721},
      "montecarlo": {"n_samples": 100000, "seed": 7},
      "outputs": {"format": "csv", "path": "qubit_sweep.csv"}
    }

Complex numbers are ``[re, im]`` pairs; a bare number is read as real.
``tunneling`` is either ``{"probs": [...]}`` or ``{"rates": [...], "time": t}``.
``unitary`` is either ``{"qubit_gamma": g}`` or ``{"matrix": [[z, ...], ...]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import ConfigError, NwvError
from .hilbert import StateVector, Unitary, normalize, qubit_rotation
from .partial_collapse import (
    Calibration,
    DominantState,
    PartialCollapseConfig,
    Subspace,
    calibration_for,
)

_number = {"type": "number"}
_complex = {
    "oneOf": [
        _number,
        {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
    ]
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["dim", "initial_state", "tunneling", "unitary", "postselect_index", "calibration"],
    "properties": {
        "dim": {"type": "integer", "minimum": 2},
        "initial_state": {"type": "array", "items": _complex, "minItems": 2},
        "tunneling": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["probs"],
                    "properties": {
                        "probs": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}}
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["rates", "time"],
                    "properties": {
                        "rates": {"type": "array", "items": {"type": "number", "minimum": 0}},
                        "time": {"type": "number", "minimum": 0},
                    },
                },
            ]
        },
        "phases": {"type": "array", "items": _number},
        "unitary": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["qubit_gamma"],
                    "properties": {"qubit_gamma": _number},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["matrix"],
                    "properties": {"matrix": {"type": "array", "items": {"type": "array", "items": _complex}}},
                },
            ]
        },
        "postselect_index": {"type": "integer", "minimum": 0},
        "calibration": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["dominant", "subspace", "explicit"]},
                "params": {"type": "object"},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["parameter", "from", "to", "steps"],
            "properties": {
                "parameter": {"const": "gamma"},
                "from": _number,
                "to": _number,
                "steps": {"type": "integer", "minimum": 1},
            },
        },
        "montecarlo": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_samples"],
            "properties": {
                "n_samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["csv", "json"]},
                "path": {"type": "string"},
            },
        },
    },
}


@dataclass(frozen=True)
class SweepSpec:
    start: float
    stop: float
    steps: int
    parameter: str = "gamma"

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class MonteCarloSpec:
    n_samples: int
    seed: int = 0


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int
    initial_state: tuple[complex, ...]
    postselect_index: int
    calibration_mode: str
    calibration_params: tuple[tuple[str, float], ...] = ()
    probs: tuple[float, ...] | None = None
    rates: tuple[float, ...] | None = None
    time: float | None = None
    phases: tuple[float, ...] | None = None
    qubit_gamma: float | None = None
    matrix: tuple[tuple[complex, ...], ...] | None = None
    sweep: SweepSpec | None = None
    montecarlo: MonteCarloSpec | None = None
    outputs: OutputSpec = field(default_factory=OutputSpec)

    # -- building protocol objects -------------------------------------------------

    def collapse_config(self) -> PartialCollapseConfig:
        phases = self.phases or ()
        if self.probs is not None:
            return PartialCollapseConfig(self.probs, phases)
        return PartialCollapseConfig.from_rates(self.rates, self.time, phases)

    def state(self) -> StateVector:
        return normalize(np.array(self.initial_state, dtype=complex))

    def unitary(self, gamma: float | None = None) -> Unitary:
        if self.matrix is not None:
            return Unitary(np.array(self.matrix, dtype=complex))
        return qubit_rotation(self.qubit_gamma if gamma is None else gamma)

    def calibration(self) -> Calibration:
        params = dict(self.calibration_params)
        cfg = self.collapse_config()
        if self.calibration_mode == "dominant":
            return calibration_for(cfg, DominantState(int(params["state"])))
        if self.calibration_mode == "subspace":
            return calibration_for(cfg, Subspace(int(params["k"])))
        return Calibration(scale=params["scale"], offset=params.get("offset", 0.0))


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _complex_of(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a decoded JSON document and build an :class:`ExperimentConfig`."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(_path(err.absolute_path), err.message)

    dim = data["dim"]

    def need_len(key: str, seq, where: str) -> None:
        if len(seq) != dim:
            raise ConfigError(where, f"expected {dim} entries, got {len(seq)}")

    need_len("initial_state", data["initial_state"], "$.initial_state")
    tun = data["tunneling"]
    probs = rates = time = None
    if "probs" in tun:
        need_len("probs", tun["probs"], "$.tunneling.probs")
        probs = tuple(float(p) for p in tun["probs"])
    else:
        need_len("rates", tun["rates"], "$.tunneling.rates")
        rates = tuple(float(r) for r in tun["rates"])
        time = float(tun["time"])
    phases = None
    if "phases" in data:
        need_len("phases", data["phases"], "$.phases")
        phases = tuple(float(x) for x in data["phases"])

    m = data["postselect_index"]
    if m >= dim:
        raise ConfigError("$.postselect_index", f"index {m} out of range for dim {dim}")

    uni = data["unitary"]
    qubit_gamma = matrix = None
    if "qubit_gamma" in uni:
        if dim != 2:
            raise ConfigError("$.unitary.qubit_gamma", "qubit rotation requires dim 2")
        qubit_gamma = float(uni["qubit_gamma"])
    else:
        rows = uni["matrix"]
        need_len("matrix", rows, "$.unitary.matrix")
        for r, row in enumerate(rows):
            need_len("matrix", row, f"$.unitary.matrix[{r}]")
        matrix = tuple(tuple(_complex_of(z) for z in row) for row in rows)

    cal = data["calibration"]
    mode = cal["mode"]
    params = cal.get("params", {})
    required = {"dominant": ("state",), "subspace": ("k",), "explicit": ("scale",)}[mode]
    allowed = {"dominant": {"state"}, "subspace": {"k"}, "explicit": {"scale", "offset"}}[mode]
    for key in required:
        if key not in params:
            raise ConfigError(f"$.calibration.params.{key}", f"required for mode {mode!r}")
    for key, val in params.items():
        if key not in allowed:
            raise ConfigError(f"$.calibration.params.{key}", f"unknown parameter for mode {mode!r}")
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ConfigError(f"$.calibration.params.{key}", "must be a number")
    for key in ("state", "k"):
        if key in params and (int(params[key]) != params[key] or not 0 <= params[key] < dim):
            raise ConfigError(f"$.calibration.params.{key}", f"must be an index below {dim}")
    cal_params = tuple(sorted((k, float(v) if mode == "explicit" else int(v)) for k, v in params.items()))

    sweep = None
    if "sweep" in data:
        if qubit_gamma is None:
            raise ConfigError("$.sweep", "a gamma sweep needs a qubit_gamma unitary")
        s = data["sweep"]
        sweep = SweepSpec(float(s["from"]), float(s["to"]), int(s["steps"]), s["parameter"])
    montecarlo = None
    if "montecarlo" in data:
        mc = data["montecarlo"]
        montecarlo = MonteCarloSpec(int(mc["n_samples"]), int(mc.get("seed", 0)))
    out = data.get("outputs", {})
    outputs = OutputSpec(out.get("format", "csv"), out.get("path"))

    config = ExperimentConfig(
        dim=dim,
        initial_state=tuple(_complex_of(z) for z in data["initial_state"]),
        postselect_index=m,
        calibration_mode=mode,
        calibration_params=cal_params,
        probs=probs,
        rates=rates,
        time=time,
        phases=phases,
        qubit_gamma=qubit_gamma,
        matrix=matrix,
        sweep=sweep,
        montecarlo=montecarlo,
        outputs=outputs,
    )
    _check_buildable(config)
    return config


def _check_buildable(config: ExperimentConfig) -> None:
    try:
        config.state()
    except NwvError as exc:
        raise ConfigError("$.initial_state", str(exc)) from exc
    try:
        config.collapse_config()
    except NwvError as exc:
        raise ConfigError("$.tunneling", str(exc)) from exc
    try:
        config.unitary()
    except NwvError as exc:
        raise ConfigError("$.unitary", str(exc)) from exc
    try:
        config.calibration()
    except NwvError as exc:
        raise ConfigError("$.calibration", str(exc)) from exc


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def config_to_dict(config: ExperimentConfig) -> dict:
    data: dict[str, Any] = {
        "dim": config.dim,
        "initial_state": [_pair(z) for z in config.initial_state],
    }
    if config.probs is not None:
        data["tunneling"] = {"probs": list(config.probs)}
    else:
        data["tunneling"] = {"rates": list(config.rates), "time": config.time}
    if config.phases is not None:
        data["phases"] = list(config.phases)
    if config.matrix is not None:
        data["unitary"] = {"matrix": [[_pair(z) for z in row] for row in config.matrix]}
    else:
        data["unitary"] = {"qubit_gamma": config.qubit_gamma}
    data["postselect_index"] = config.postselect_index
    data["calibration"] = {"mode": config.calibration_mode, "params": dict(config.calibration_params)}
    if config.sweep is not None:
        s = config.sweep
        data["sweep"] = {"parameter": s.parameter, "from": s.start, "to": s.stop, "steps": s.steps}
    if config.montecarlo is not None:
        data["montecarlo"] = {"n_samples": config.montecarlo.n_samples, "seed": config.montecarlo.seed}
    out: dict[str, Any] = {"format": config.outputs.format}
    if config.outputs.path is not None:
        out["path"] = config.outputs.path
    data["outputs"] = out
    return data


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON config file.

    Raises ``OSError`` for unreadable files and :class:`ConfigError` for bad content.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ConfigError("$", "top level must be an object")
    return parse_config(data)


def dump_config(config: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2)


def qubit_sweep_config(p1: float = 0.01, steps: int = 721) -> ExperimentConfig:
    """Default qubit sweep: i = cos(pi/6)|0> + sin(pi/6)|1>, p = (0, p1), gamma over [-pi/2, pi/2]."""
    return ExperimentConfig(
        dim=2,
        initial_state=(complex(np.cos(np.pi / 6)), complex(np.sin(np.pi / 6))),
        postselect_index=1,
        calibration_mode="dominant",
        calibration_params=(("state", 1),),
        probs=(0.0, p1),
        qubit_gamma=0.0,
        sweep=SweepSpec(-np.pi / 2, np.pi / 2, steps),
    )
