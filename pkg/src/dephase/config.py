"""Scenario files: JSON in, validated domain objects out.

Layout::

    {
      "system": {"energies": [0, 1], "pointer_values": [0, 1],
                 "rho0": [[{"re": 0.5, "im": 0}, {"re": 0.5, "im": 0}],
                          [{"re": 0.5, "im": 0}, {"re": 0.5, "im": 0}]]},
      "bath": {"discrete": [{"omega": 1.0, "g": {"re": 0.4, "im": 0}}]},
      "temperature": {"beta": "inf"},
      "time_grid": {"start": 0, "stop": 5, "count": 8, "spacing": "linear"},
      "flags": {"renormalize": false, "tolerance": 1e-6, "budget": 4096},
      "output": {"path": "out.csv", "format": "csv"}
    }

``bath`` holds exactly one of ``discrete`` (list of modes) or ``spectral``
(``{"A", "n", "omega_c"}`` plus optional ``"K"``/``"omega_max"`` used when a
discrete bath is needed). Complex numbers are ``{"re", "im"}`` objects; a
bare number is read as real. ``system`` is only required by the commands
that evolve a density matrix. An optional ``regimes`` block overrides the
fit windows of the ``regimes`` command.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .continuum import SpectralFunction, discretize_spectral
from .core import DiscreteBath, SystemSpec, Temperature, validate_system
from .errors import ValidationError
from .oracle import DEFAULT_BUDGET

DEFAULT_TOLERANCE = 1e-8


class ConfigError(ValidationError):
    """Malformed or invalid scenario file; the message names the field."""


@dataclass
class ScenarioConfig:
    system: SystemSpec | None
    discrete_bath: DiscreteBath | None
    spectral: SpectralFunction | None
    discretization: tuple | None  # (K, omega_max) for a spectral bath
    temperature: Temperature
    times: np.ndarray
    renormalize: bool = False
    tolerance: float = DEFAULT_TOLERANCE
    budget: int = DEFAULT_BUDGET
    output_path: str | None = None
    output_format: str = "csv"
    regimes: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def canonical(self) -> str:
        """Compact, key-sorted JSON of the effective configuration."""
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def bath_for_evolution(self) -> DiscreteBath:
        if self.discrete_bath is not None:
            return self.discrete_bath
        if self.discretization is None:
            raise ConfigError("bath.spectral: 'K' and 'omega_max' are required to build a discrete bath")
        K, omega_max = self.discretization
        return discretize_spectral(self.spectral, K, omega_max)

    def require_system(self) -> SystemSpec:
        if self.system is None:
            raise ConfigError("system: block required for this command")
        return self.system


def _get(block, key, path, required=True, default=None):
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected an object")
    if key not in block:
        if required:
            raise ConfigError(f"{path}.{key}: missing")
        return default
    return block[key]


def _number(value, path, positive=False, allow_inf=False):
    if allow_inf and isinstance(value, str) and value.strip().lower() == "inf":
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    if positive and not value > 0:
        raise ConfigError(f"{path}: must be positive, got {value!r}")
    return value


def _complex(value, path):
    if isinstance(value, dict):
        extra = set(value) - {"re", "im"}
        if extra:
            raise ConfigError(f"{path}: unexpected keys {sorted(extra)}")
        return complex(_number(value.get("re", 0.0), f"{path}.re"), _number(value.get("im", 0.0), f"{path}.im"))
    return complex(_number(value, path))


def _number_list(value, path):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{path}: expected a non-empty list")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _parse_system(block):
    energies = _number_list(_get(block, "energies", "system"), "system.energies")
    pointer = _number_list(_get(block, "pointer_values", "system"), "system.pointer_values")
    rows = _get(block, "rho0", "system")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ConfigError("system.rho0: expected a list of rows")
    rho = [[_complex(v, f"system.rho0[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)]
    if any(len(r) != len(rho) for r in rho):
        raise ConfigError("system.rho0: matrix must be square")
    try:
        return validate_system(energies, pointer, np.array(rho, dtype=complex))
    except ValidationError as exc:
        raise ConfigError(f"system: {exc}") from exc


def _parse_bath(block):
    if not isinstance(block, dict):
        raise ConfigError("bath: expected an object")
    kinds = [k for k in ("discrete", "spectral") if k in block]
    if len(kinds) != 1:
        raise ConfigError("bath: exactly one of 'discrete' or 'spectral' must be given")
    if kinds[0] == "discrete":
        modes = block["discrete"]
        if not isinstance(modes, list):
            raise ConfigError("bath.discrete: expected a list of modes")
        omega = [_number(_get(m, "omega", f"bath.discrete[{i}]"), f"bath.discrete[{i}].omega", positive=True) for i, m in enumerate(modes)]
        g = [_complex(_get(m, "g", f"bath.discrete[{i}]"), f"bath.discrete[{i}].g") for i, m in enumerate(modes)]
        return DiscreteBath(omega, g), None, None
    sb = block["spectral"]
    spec = SpectralFunction(
        _number(_get(sb, "A", "bath.spectral"), "bath.spectral.A", positive=True),
        _number(_get(sb, "n", "bath.spectral"), "bath.spectral.n", positive=True),
        _number(_get(sb, "omega_c", "bath.spectral"), "bath.spectral.omega_c", positive=True),
    )
    disc = None
    if "K" in sb or "omega_max" in sb:
        K = _get(sb, "K", "bath.spectral")
        if isinstance(K, bool) or not isinstance(K, int) or K < 1:
            raise ConfigError(f"bath.spectral.K: expected a positive integer, got {K!r}")
        disc = (K, _number(_get(sb, "omega_max", "bath.spectral"), "bath.spectral.omega_max", positive=True))
    return None, spec, disc


def _parse_times(block):
    start = _number(_get(block, "start", "time_grid"), "time_grid.start")
    stop = _number(_get(block, "stop", "time_grid"), "time_grid.stop")
    count = _get(block, "count", "time_grid")
    spacing = _get(block, "spacing", "time_grid", required=False, default="linear")
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ConfigError(f"time_grid.count: expected a positive integer, got {count!r}")
    if start < 0:
        raise ConfigError("time_grid.start: times must be >= 0")
    if count == 1:
        if stop != start:
            raise ConfigError("time_grid: a single-point grid needs start == stop")
        return np.array([start])
    if not stop > start:
        raise ConfigError("time_grid: stop must exceed start")
    if spacing == "linear":
        return np.linspace(start, stop, count)
    if spacing == "log":
        if start <= 0:
            raise ConfigError("time_grid.start: log spacing needs start > 0")
        return np.geomspace(start, stop, count)
    raise ConfigError(f"time_grid.spacing: expected 'linear' or 'log', got {spacing!r}")


def _parse_regimes(block):
    out = {}
    if block is None:
        return out
    if not isinstance(block, dict):
        raise ConfigError("regimes: expected an object")
    for name, value in block.items():
        path = f"regimes.{name}"
        if name == "samples":
            if isinstance(value, bool) or not isinstance(value, int) or value < 8:
                raise ConfigError(f"{path}: expected an integer >= 8")
            out[name] = value
        elif name in ("quiet", "quantum", "thermal"):
            if not isinstance(value, list) or len(value) != 2:
                raise ConfigError(f"{path}: expected [t_start, t_stop]")
            lo, hi = (_number(v, f"{path}[{i}]", positive=True) for i, v in enumerate(value))
            if not hi > lo:
                raise ConfigError(f"{path}: t_stop must exceed t_start")
            out[name] = (lo, hi)
        else:
            raise ConfigError(f"{path}: unknown key")
    return out


def parse_config(raw: dict, overrides: dict | None = None) -> ScenarioConfig:
    """Validate a decoded scenario; ``overrides`` replaces ``flags`` entries."""
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected an object")
    raw = copy.deepcopy(raw)
    if overrides:
        flags = raw.setdefault("flags", {})
        if not isinstance(flags, dict):
            raise ConfigError("flags: expected an object")
        flags.update({k: v for k, v in overrides.items() if v is not None})
    known = {"system", "bath", "temperature", "time_grid", "flags", "output", "regimes"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"top level: unknown keys {sorted(unknown)}")

    system = _parse_system(raw["system"]) if "system" in raw else None
    discrete, spectral, disc = _parse_bath(_get(raw, "bath", "top level"))
    temp_block = _get(raw, "temperature", "top level")
    beta = _number(_get(temp_block, "beta", "temperature"), "temperature.beta", positive=True, allow_inf=True)
    times = _parse_times(_get(raw, "time_grid", "top level"))

    flags = raw.get("flags", {})
    if not isinstance(flags, dict):
        raise ConfigError("flags: expected an object")
    renormalize = flags.get("renormalize", False)
    if not isinstance(renormalize, bool):
        raise ConfigError("flags.renormalize: expected true or false")
    tolerance = _number(flags.get("tolerance", DEFAULT_TOLERANCE), "flags.tolerance", positive=True)
    budget = flags.get("budget", DEFAULT_BUDGET)
    if isinstance(budget, bool) or not isinstance(budget, int) or budget < 1:
        raise ConfigError(f"flags.budget: expected a positive integer, got {budget!r}")

    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output: expected an object")
    fmt = output.get("format", "csv")
    if fmt not in ("csv", "tsv"):
        raise ConfigError(f"output.format: expected 'csv' or 'tsv', got {fmt!r}")

    return ScenarioConfig(
        system=system,
        discrete_bath=discrete,
        spectral=spectral,
        discretization=disc,
        temperature=Temperature(beta),
        times=times,
        renormalize=renormalize,
        tolerance=tolerance,
        budget=budget,
        output_path=output.get("path"),
        output_format=fmt,
        regimes=_parse_regimes(raw.get("regimes")),
        raw=raw,
    )


def loads(text: str, overrides: dict | None = None) -> ScenarioConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(raw, overrides)


def load(path: str, overrides: dict | None = None) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return loads(text, overrides)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def dumps_value(value: Any) -> Any:
    """JSON form of a complex number used in configs."""
    c = complex(value)
    return {"re": c.real, "im": c.imag}
