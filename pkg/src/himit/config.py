"""Experiment configuration files (JSON), validated with pydantic.

Relative paths inside a config resolve against the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

from . import gates
from .densim import PauliString, pauli_matrix
from .errors import ConfigurationError
from .noise import GateErrorModel, MixedUnitaryNoise, OverRotationNoise


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


def generator_matrix(name: str) -> np.ndarray:
    """Gate label (``CX``) or Pauli string (``ZZ``) as a matrix."""
    key = name.upper()
    if key in gates.FIXED_GATES:
        return gates.FIXED_GATES[key]
    return pauli_matrix(PauliString(key).letters)


class MixedNoiseConfig(_Strict):
    type: Literal["mixed"]
    generator: str = "ZZ"
    epsilon: float
    kappa: float = Field(1.0, ge=0.0, le=1.0)
    gates: List[str] = ["CX"]
    side: Literal["after", "before"] = "after"
    inverse_behavior: Literal["inverts_with_gate", "fixed"] = "inverts_with_gate"

    @field_validator("generator")
    @classmethod
    def _known_generator(cls, v):
        try:
            generator_matrix(v)
        except Exception as exc:
            raise ValueError(f"unknown generator {v!r}") from exc
        return v.upper()


class OverRotationConfig(_Strict):
    type: Literal["overrotation"]
    generator: str = "ZX"
    base_angle: float = float(np.pi / 2)
    sigma: float = Field(0.0, ge=0.0)
    sampling: Literal["systematic", "quasi_static"] = "quasi_static"
    epsilon: float = 0.0
    gates: List[str] = ["CX"]
    side: Literal["after", "before"] = "after"
    inverse_behavior: Literal["inverts_with_gate", "fixed"] = "inverts_with_gate"

    @field_validator("generator")
    @classmethod
    def _pauli(cls, v):
        PauliString(v)
        return v.upper()


NoiseConfig = Annotated[Union[MixedNoiseConfig, OverRotationConfig], Field(discriminator="type")]


def build_noise_model(cfg: MixedNoiseConfig | OverRotationConfig | None) -> GateErrorModel:
    if cfg is None:
        return GateErrorModel()
    if isinstance(cfg, MixedNoiseConfig):
        spec = MixedUnitaryNoise(generator_matrix(cfg.generator), cfg.epsilon, cfg.kappa)
    else:
        spec = OverRotationNoise(
            PauliString(cfg.generator), cfg.base_angle, cfg.sigma, cfg.sampling, cfg.epsilon
        )
    return GateErrorModel({g.upper(): spec for g in cfg.gates}, cfg.side, cfg.inverse_behavior)


class _Base(_Strict):
    seed: int = Field(0, ge=0)
    output: Optional[str] = None
    noise: Optional[NoiseConfig] = None

    @model_validator(mode="after")
    def _noise_consistent(self):
        build_noise_model(self.noise)  # arity and label checks
        return self


def _known_gate(v: str) -> str:
    if not gates.is_known(v.upper()):
        raise ValueError(f"unknown gate {v!r}")
    return v.upper()


class FoldConfig(_Base):
    experiment: Literal["fold"]
    gate: str = "CX"
    n_max: int = Field(5, ge=0)
    variants: List[Literal["default", "inverse"]] = ["default", "inverse"]
    realizations: int = Field(1, ge=1)

    _gate = field_validator("gate")(_known_gate)


class QptConfig(_Base):
    experiment: Literal["qpt"]
    gate: str = "CX"

    _gate = field_validator("gate")(_known_gate)
    shots: Optional[int] = Field(5000, ge=1)


class OptimizerConfig(_Strict):
    name: Literal["bobyqa", "adam"] = "bobyqa"
    budget: int = Field(200, ge=1)
    rhobeg: float = Field(0.5, gt=0)
    rhoend: float = Field(1e-4, gt=0)
    max_iters: int = Field(100, ge=1)
    lr: float = Field(0.05, gt=0)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


ARMS = ("default", "hidden", "rc", "simulator")


class VqeConfig(_Base):
    experiment: Literal["vqe"]
    ansatz: Optional[str] = None
    hamiltonian: Optional[str] = None
    optimizer: OptimizerConfig = OptimizerConfig()
    x0: Optional[List[float]] = None
    shots: Optional[int] = Field(5000, ge=1)
    rc_instances: int = Field(20, ge=1)
    arms: List[Literal["default", "hidden", "rc", "simulator"]] = list(ARMS)
    convergence_tolerance: float = Field(0.005, gt=0)


class AxisConfig(_Strict):
    slot: int = Field(ge=0)
    start: float = float(-np.pi)
    stop: float = float(np.pi)
    points: int = Field(41, ge=2)


class GridConfig(_Strict):
    fixed_slot: int = Field(2, ge=0)
    fixed_value: float = 0.0
    axis1: AxisConfig = AxisConfig(slot=0)
    axis2: AxisConfig = AxisConfig(slot=1)
    shots: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _distinct(self):
        if len({self.fixed_slot, self.axis1.slot, self.axis2.slot}) != 3:
            raise ValueError("fixed_slot, axis1.slot and axis2.slot must be distinct")
        return self


class LandscapeConfig(_Base):
    experiment: Literal["landscape"]
    ansatz: Optional[str] = None
    hamiltonian: Optional[str] = None
    grid: GridConfig = GridConfig()
    mitigation: Literal["none", "hidden_inverse", "randomized_compile"] = "none"
    rc_instances: int = Field(20, ge=1)
    workers: int = Field(1, ge=1)


class GaussianConfig(_Strict):
    u0: float
    u_sigma: float = Field(gt=0)
    T: float = Field(gt=0)
    N: int = Field(ge=2)


class DriveConfig(_Strict):
    epsilon_strength: float = 1.0
    omega0: float = float(2 * np.pi * 5e9)
    omega1: Optional[float] = None


class PulseConfig(_Base):
    experiment: Literal["pulse"]
    action: Literal["invert", "simulate"] = "simulate"
    schedule: Optional[str] = None
    gaussian: Optional[GaussianConfig] = None
    drive: DriveConfig = DriveConfig()

    @model_validator(mode="after")
    def _one_source(self):
        if (self.schedule is None) == (self.gaussian is None):
            raise ValueError("give exactly one of 'schedule' or 'gaussian'")
        return self


ExperimentConfig = Annotated[
    Union[FoldConfig, QptConfig, VqeConfig, LandscapeConfig, PulseConfig],
    Field(discriminator="experiment"),
]
_ADAPTER = TypeAdapter(ExperimentConfig)

_PATH_FIELDS = ("ansatz", "hamiltonian", "schedule")


def parse_config(data: dict, base_dir: Path | str = ".") -> BaseModel:
    """Validate ``data`` and resolve/verify referenced paths.

    Raises :class:`ConfigurationError` whose message names the field path.
    """
    from pydantic import ValidationError as PydanticError

    try:
        cfg = _ADAPTER.validate_python(data)
    except PydanticError as exc:
        lines = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"])
            lines.append(f"{loc}: {err['msg']}")
        raise ConfigurationError("; ".join(lines)) from None
    base = Path(base_dir)
    updates = {}
    for name in _PATH_FIELDS:
        value = getattr(cfg, name, None)
        if value is None:
            continue
        path = Path(value)
        if not path.is_absolute():
            path = base / path
        if not path.exists():
            raise ConfigurationError(f"{name}: file not found: {value}")
        updates[name] = str(path)
    return cfg.model_copy(update=updates) if updates else cfg


def load_config(path) -> BaseModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from None
    return parse_config(data, path.parent)


def config_hash(cfg: BaseModel) -> str:
    """sha256 of the canonical config; referenced files enter by content, not path."""
    data = cfg.model_dump(mode="json")
    for name in _PATH_FIELDS:
        if data.get(name):
            data[name] = "sha256:" + hashlib.sha256(Path(data[name]).read_bytes()).hexdigest()
    data.pop("output", None)
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
