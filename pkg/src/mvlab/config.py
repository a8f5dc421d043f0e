"""Simulation configuration documents.

A configuration is a JSON-compatible mapping (JSON or YAML text). Example::

    {
      "domain": {"L": 5, "n_cells": 512},
      "kernel": {"type": "morse", "C_a": 4, "C_r": 1, "l_a": 0.125, "l_r": 0.05},
      "sigma": 0.838,
      "solver": {"dt": 0.001, "t_final": 20, "record_stride": 1},
      "initial": [[1.0, 0.0, 0.5]],
      "classifier": {"min_duration": 0.02},
      "output": {"directory": "out/ex1", "snapshot_times": [0, 1, 5, 20]}
    }

``t_final`` may also be given at the top level. A Morse kernel without
parameters takes the locally attractive reference values
``C_a=4, C_r=1, l_a=0.025 L, l_r=0.01 L``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import yaml

from .errors import ConfigParseError, ConfigValidationError, InvalidConfigurationError
from .kernels import HegselmannKrause, InteractionKernel, Morse
from .regimes import DEFAULT_MIN_DURATION
from .solver import SCHEMES, SolverConfig

__all__ = ["SimulationConfig", "parse_config", "config_from_mapping", "kernel_from_mapping", "kernel_to_mapping"]

_SCHEMA: dict[str, Any] = {
    "name": None,
    "domain": {"L", "n_cells"},
    "kernel": None,
    "sigma": None,
    "t_final": None,
    "solver": {"dt", "scheme", "t_final", "record_stride", "stationarity_tol", "cfl_safety", "density_floor", "stop_when_stationary"},
    "initial": None,
    "classifier": {"rate_deadband", "min_duration"},
    "output": {"directory", "snapshot_times"},
    "seed": None,
    "particles": {"N", "record_stride", "dt", "t_final"},
}
_MORSE_KEYS = {"type", "C_a", "C_r", "l_a", "l_r"}
_HK_KEYS = {"type", "R_0"}


@dataclass(frozen=True)
class SimulationConfig:
    sigma: float
    kernel: InteractionKernel
    components: tuple[tuple[float, float, float], ...]
    L: float = 5.0
    n_cells: int = 512
    solver: SolverConfig = field(default_factory=SolverConfig)
    t_final: float = 20.0
    record_stride: int = 1
    stop_when_stationary: bool = True
    rate_deadband: float | None = None
    min_duration: float = DEFAULT_MIN_DURATION
    output_directory: str | None = None
    snapshot_times: tuple[float, ...] = ()
    seed: int = 0
    n_particles: int = 10_000
    particle_record_stride: int = 100
    particle_dt: float | None = None
    particle_t_final: float | None = None
    name: str | None = None

    def to_mapping(self) -> dict:
        """Inverse of :func:`config_from_mapping`."""
        return {
            "name": self.name,
            "domain": {"L": self.L, "n_cells": self.n_cells},
            "kernel": kernel_to_mapping(self.kernel),
            "sigma": self.sigma,
            "solver": {
                "dt": self.solver.dt,
                "scheme": self.solver.scheme,
                "t_final": self.t_final,
                "record_stride": self.record_stride,
                "stationarity_tol": self.solver.stationarity_tol,
                "cfl_safety": self.solver.cfl_safety,
                "density_floor": self.solver.density_floor,
                "stop_when_stationary": self.stop_when_stationary,
            },
            "initial": [list(c) for c in self.components],
            "classifier": {"rate_deadband": self.rate_deadband, "min_duration": self.min_duration},
            "output": {"directory": self.output_directory, "snapshot_times": list(self.snapshot_times)},
            "seed": self.seed,
            "particles": {
                "N": self.n_particles,
                "record_stride": self.particle_record_stride,
                "dt": self.particle_dt,
                "t_final": self.particle_t_final,
            },
        }


def kernel_to_mapping(kernel: InteractionKernel) -> dict:
    if isinstance(kernel, Morse):
        return {"type": "morse", **asdict(kernel)}
    return {"type": "hegselmann_krause", "R_0": kernel.R_0}


def _number(value, path: str, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigValidationError(path, f"expected an integer, got {value!r}")
    value = int(value) if integer else float(value)
    if not np.isfinite(value):
        raise ConfigValidationError(path, "must be finite")
    if positive and not value > 0:
        raise ConfigValidationError(path, f"must be positive, got {value!r}")
    if nonneg and value < 0:
        raise ConfigValidationError(path, f"must be nonnegative, got {value!r}")
    return value


def kernel_from_mapping(spec, L: float) -> InteractionKernel:
    if isinstance(spec, str):
        spec = {"type": spec}
    if not isinstance(spec, dict):
        raise ConfigParseError("kernel", f"expected a mapping, got {type(spec).__name__}")
    kind = str(spec.get("type", "")).lower().replace("-", "_")
    if kind == "morse":
        allowed = _MORSE_KEYS
    elif kind in ("hegselmann_krause", "hk"):
        allowed = _HK_KEYS
    else:
        raise ConfigValidationError("kernel.type", f"unknown kernel type {spec.get('type')!r}")
    for key in spec:
        if key not in allowed:
            raise ConfigParseError(f"kernel.{key}", "unknown key")
    try:
        if kind == "morse":
            defaults = {"C_a": 4.0, "C_r": 1.0, "l_a": 0.025 * L, "l_r": 0.01 * L}
            params = {
                k: _number(spec.get(k, defaults[k]), f"kernel.{k}", positive=True) for k in defaults
            }
            return Morse(**params)
        if "R_0" not in spec:
            raise ConfigValidationError("kernel.R_0", "required")
        R_0 = _number(spec["R_0"], "kernel.R_0", positive=True)
        if R_0 > 0.5 * L:
            raise ConfigValidationError("kernel.R_0", f"must not exceed L/2 = {0.5 * L}")
        return HegselmannKrause(R_0)
    except InvalidConfigurationError as exc:
        raise ConfigValidationError("kernel", str(exc)) from exc


def _components(raw) -> tuple[tuple[float, float, float], ...]:
    if isinstance(raw, dict):
        if set(raw) - {"components"}:
            bad = sorted(set(raw) - {"components"})[0]
            raise ConfigParseError(f"initial.{bad}", "unknown key")
        raw = raw.get("components")
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigValidationError("initial", "expected a non-empty list of (weight, mean, std)")
    out = []
    for k, c in enumerate(raw):
        path = f"initial[{k}]"
        if isinstance(c, dict):
            extra = set(c) - {"weight", "mean", "std"}
            if extra:
                raise ConfigParseError(f"{path}.{sorted(extra)[0]}", "unknown key")
            c = (c.get("weight", 1.0), c.get("mean", 0.0), c.get("std"))
        if not isinstance(c, (list, tuple)) or len(c) != 3:
            raise ConfigValidationError(path, "expected (weight, mean, std)")
        w = _number(c[0], f"{path}.weight", positive=True)
        m = _number(c[1], f"{path}.mean")
        if c[2] is None:
            raise ConfigValidationError(f"{path}.std", "required")
        s = _number(c[2], f"{path}.std", positive=True)
        out.append((w, m, s))
    total = sum(c[0] for c in out)
    if abs(total - 1.0) > 1e-10:
        raise ConfigValidationError("initial", f"weights sum to {total!r}, not 1")
    return tuple(out)


def config_from_mapping(doc: dict) -> SimulationConfig:
    """Validate a parsed document and apply defaults."""
    if not isinstance(doc, dict):
        raise ConfigParseError("<root>", "expected a mapping at the top level")
    for key, sub in doc.items():
        if key not in _SCHEMA:
            raise ConfigParseError(key, "unknown key")
        allowed = _SCHEMA[key]
        if isinstance(allowed, set):
            if sub is None:
                continue
            if not isinstance(sub, dict):
                raise ConfigParseError(key, "expected a mapping")
            for k in sub:
                if k not in allowed:
                    raise ConfigParseError(f"{key}.{k}", "unknown key")

    domain = doc.get("domain") or {}
    L = _number(domain.get("L", 5.0), "domain.L", positive=True)
    n_cells = _number(domain.get("n_cells", 512), "domain.n_cells", integer=True)
    if n_cells < 2:
        raise ConfigValidationError("domain.n_cells", "must be at least 2")

    if "sigma" not in doc or doc["sigma"] is None:
        raise ConfigValidationError("sigma", "required")
    sigma = _number(doc["sigma"], "sigma", positive=True)
    if "kernel" not in doc:
        raise ConfigValidationError("kernel", "required")
    kernel = kernel_from_mapping(doc["kernel"], L)
    if "initial" not in doc:
        raise ConfigValidationError("initial", "required")
    components = _components(doc["initial"])

    solver = doc.get("solver") or {}
    if "t_final" in doc and "t_final" in solver:
        raise ConfigValidationError("t_final", "given both at top level and in solver")
    t_final = _number(solver.get("t_final", doc.get("t_final", 20.0)), "solver.t_final", positive=True)
    record_stride = _number(solver.get("record_stride", 1), "solver.record_stride", integer=True, positive=True)
    scheme = solver.get("scheme", SolverConfig.scheme)
    if scheme not in SCHEMES:
        raise ConfigValidationError("solver.scheme", f"must be one of {SCHEMES}")
    stop = solver.get("stop_when_stationary", True)
    if not isinstance(stop, bool):
        raise ConfigValidationError("solver.stop_when_stationary", "expected a boolean")
    safety = _number(solver.get("cfl_safety", SolverConfig.cfl_safety), "solver.cfl_safety", positive=True)
    if safety > 1:
        raise ConfigValidationError("solver.cfl_safety", "must lie in (0, 1]")
    solver_cfg = SolverConfig(
        dt=_number(solver.get("dt", SolverConfig.dt), "solver.dt", positive=True),
        scheme=scheme,
        density_floor=_number(solver.get("density_floor", SolverConfig.density_floor), "solver.density_floor", positive=True),
        cfl_safety=safety,
        stationarity_tol=_number(solver.get("stationarity_tol", SolverConfig.stationarity_tol), "solver.stationarity_tol", positive=True),
    )

    classifier = doc.get("classifier") or {}
    deadband = classifier.get("rate_deadband")
    if deadband is not None:
        deadband = _number(deadband, "classifier.rate_deadband", nonneg=True)
    min_duration = _number(classifier.get("min_duration", DEFAULT_MIN_DURATION), "classifier.min_duration", nonneg=True)

    output = doc.get("output") or {}
    directory = output.get("directory")
    if directory is not None and not isinstance(directory, str):
        raise ConfigValidationError("output.directory", "expected a string")
    snaps = output.get("snapshot_times", [])
    if not isinstance(snaps, (list, tuple)):
        raise ConfigValidationError("output.snapshot_times", "expected a list")
    snaps = tuple(_number(s, f"output.snapshot_times[{k}]", nonneg=True) for k, s in enumerate(snaps))

    seed = _number(doc.get("seed", 0), "seed", integer=True, nonneg=True)
    if seed >= 2**64:
        raise ConfigValidationError("seed", "must fit in an unsigned 64-bit integer")
    particles = doc.get("particles") or {}
    n_particles = _number(particles.get("N", 10_000), "particles.N", integer=True, positive=True)
    p_stride = _number(particles.get("record_stride", 100), "particles.record_stride", integer=True, positive=True)
    p_dt = particles.get("dt")
    p_dt = None if p_dt is None else _number(p_dt, "particles.dt", positive=True)
    p_tf = particles.get("t_final")
    p_tf = None if p_tf is None else _number(p_tf, "particles.t_final", positive=True)

    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ConfigValidationError("name", "expected a string")

    return SimulationConfig(
        sigma=sigma,
        kernel=kernel,
        components=components,
        L=L,
        n_cells=n_cells,
        solver=solver_cfg,
        t_final=t_final,
        record_stride=record_stride,
        stop_when_stationary=stop,
        rate_deadband=deadband,
        min_duration=min_duration,
        output_directory=directory,
        snapshot_times=snaps,
        seed=seed,
        n_particles=n_particles,
        particle_record_stride=p_stride,
        particle_dt=p_dt,
        particle_t_final=p_tf,
        name=name,
    )


def parse_config(text: str) -> SimulationConfig:
    """Parse a JSON or YAML configuration document.

    Raises
    ------
    ConfigParseError
        If the text is malformed or contains an unknown key.
    ConfigValidationError
        If a value violates a constraint; the message starts with the field path.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigParseError("<document>", f"malformed document: {exc}") from exc
    return config_from_mapping(doc)
