"""Run configuration for the command-line interface.

A config is one JSON object. ``model`` is required; everything else has a
default. Unknown keys are rejected at every level.

    {
      "model": {"omega": 1.0, "a": 1.0},
      "ambiguity": {"alpha": -0.25, "beta": -0.5},
      "m0": 1.0,
      "simulate": {"energy": 2.0, "theta0": 0.0, "t_end": 31.4, "tol": 1e-10}
    }
"""
from __future__ import annotations

import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .model import AmbiguityTriple, ModelParams


class ConfigError(ValueError):
    """Config file is missing, malformed or fails validation."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelBlock(_Strict):
    omega: float = Field(gt=0)
    a: float
    branch: Optional[Literal["positive", "negative"]] = None

    def params(self) -> ModelParams:
        return ModelParams(self.omega, self.a, self.branch)


class AmbiguityBlock(_Strict):
    alpha: float
    beta: float

    def triple(self) -> AmbiguityTriple:
        return AmbiguityTriple(self.alpha, self.beta)


class StateBlock(_Strict):
    x: float
    xdot: float


class OrbitBlock(_Strict):
    """Initial condition: an explicit state, or an energy and phase on the closed-form orbit."""

    initial: Optional[StateBlock] = None
    energy: Optional[float] = None
    theta0: float = 0.0
    tol: float = Field(default=1e-10, ge=1e-13, le=1e-3)
    n_samples: Optional[int] = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _one_start(self):
        if (self.initial is None) == (self.energy is None):
            raise ValueError("give exactly one of 'initial' or 'energy'")
        return self


class SimulateBlock(OrbitBlock):
    t_end: float = Field(gt=0)


class LinearizeBlock(OrbitBlock):
    periods: float = Field(default=5.0, gt=0)
    step: Optional[float] = Field(default=None, gt=0)


class PeriodSweepBlock(_Strict):
    energies: list[float] = Field(min_length=1)
    periods: int = Field(default=10, ge=3)
    tol: float = Field(default=1e-10, ge=1e-13, le=1e-3)
    workers: int = Field(default=1, ge=1)


class SpectrumBlock(_Strict):
    levels: int = Field(default=6, ge=2, le=40)
    triples: Optional[list[AmbiguityBlock]] = None
    refine: bool = True
    workers: int = Field(default=1, ge=1)


class EigensolveBlock(_Strict):
    method: Literal["xi", "x"] = "xi"
    levels: int = Field(default=6, ge=1, le=40)
    n_points: Optional[int] = Field(default=None, ge=64)
    hi: Optional[float] = Field(default=None, gt=0)
    refine: bool = True
    tol: Optional[float] = Field(default=None, gt=0)


class WavefunctionBlock(_Strict):
    levels: int = Field(default=3, ge=1, le=40)
    xi_max: float = Field(default=6.0, gt=0)
    n_points: int = Field(default=1200, ge=10)


class PhasePortraitBlock(_Strict):
    x_range: Optional[tuple[float, float]] = None
    xdot_range: Optional[tuple[float, float]] = None
    nx: int = Field(default=21, ge=2)
    nv: int = Field(default=21, ge=2)


class RunConfig(_Strict):
    model: ModelBlock
    ambiguity: Optional[AmbiguityBlock] = None
    m0: float = Field(default=1.0, gt=0)
    simulate: Optional[SimulateBlock] = None
    period_sweep: Optional[PeriodSweepBlock] = None
    spectrum: SpectrumBlock = SpectrumBlock()
    eigensolve: EigensolveBlock = EigensolveBlock()
    wavefunction: WavefunctionBlock = WavefunctionBlock()
    phase_portrait: PhasePortraitBlock = PhasePortraitBlock()
    linearize_check: Optional[LinearizeBlock] = None

    def resolved(self) -> dict:
        return self.model_dump(mode="json")


def _key_path(loc) -> str:
    return ".".join(str(p) for p in loc) or "<root>"


def parse_config(raw: dict) -> RunConfig:
    try:
        cfg = RunConfig.model_validate(raw)
        cfg.model.params()
        if cfg.ambiguity is not None:
            cfg.ambiguity.triple()
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(f"{_key_path(err['loc'])}: {err['msg']}") from None
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None
    return cfg


def set_path(raw: dict, path: str, value) -> None:
    """Set ``raw[k1][k2]...`` from a dotted key path, creating blocks as needed."""
    keys = path.split(".")
    node = raw
    for k in keys[:-1]:
        child = node.setdefault(k, {})
        if not isinstance(child, dict):
            raise ConfigError(f"{path}: '{k}' is not a block")
        node = child
    node[keys[-1]] = value


def parse_override(text: str) -> tuple[str, object]:
    """Split ``key.path=value``; the value is read as JSON, falling back to a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key.path=value")
    path, value = text.split("=", 1)
    try:
        return path.strip(), json.loads(value)
    except json.JSONDecodeError:
        return path.strip(), value


def load_raw(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return raw
