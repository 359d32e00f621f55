from __future__ import annotations

from dataclasses import dataclass, fields, replace
import os
from pathlib import Path
import re
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
import yaml

from .errors import QigValidationError

DEFAULT_CONFIG = "qig.yaml"
THREADS_ENV = "QIG_THREADS"


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 100_000
    armijo: float = 1e-4
    stall_tol: float = 1e-12
    bisection_tol: float = 1e-8
    bisection_max_iter: int = 200
    bracket_cap: float = 2.0**60
    fd_step: float = 1e-5
    series_order: int = 6
    series_nodes: int = 32
    sufficiency_tol: float = 1e-8
    support_tol: float = 1e-12
    threads: int | None = None

    def __post_init__(self):
        for name in (
            "tol",
            "armijo",
            "stall_tol",
            "bisection_tol",
            "bracket_cap",
            "fd_step",
            "sufficiency_tol",
            "support_tol",
        ):
            value = getattr(self, name)
            if not value > 0:
                raise QigValidationError(f"{name} must be > 0, got {value}", field=name)
        for name in ("max_iter", "bisection_max_iter", "series_nodes"):
            if getattr(self, name) < 1:
                raise QigValidationError(f"{name} must be >= 1", field=name)
        if self.series_order < 0:
            raise QigValidationError("series_order must be >= 0", field="series_order")
        if self.threads is not None and self.threads < 1:
            raise QigValidationError("threads must be >= 1", field="threads")

    def with_overrides(self, **overrides: Any) -> "SolverOptions":
        known = {f.name for f in fields(self)}
        updates = {k: v for k, v in overrides.items() if k in known and v is not None}
        return replace(self, **updates)


DEFAULT_OPTIONS = SolverOptions()


def thread_cap(requested: int | None = None) -> int:
    """Worker count for the property suite, capped by QIG_THREADS."""
    cores = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV)
    cap = cores
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError as exc:
            raise QigValidationError(
                f"{THREADS_ENV} must be an integer, got {raw!r}", field=THREADS_ENV
            ) from exc
    if requested is None:
        return cap
    return max(1, min(requested, cap))


class Profile(BaseModel):
    """One named block of solver settings in a profiles file."""

    model_config = ConfigDict(extra="forbid")

    tol: float | None = Field(default=None, gt=0)
    max_iter: int | None = Field(default=None, ge=1)
    armijo: float | None = Field(default=None, gt=0, lt=1)
    stall_tol: float | None = Field(default=None, gt=0)
    bisection_tol: float | None = Field(default=None, gt=0)
    bisection_max_iter: int | None = Field(default=None, ge=1)
    bracket_cap: float | None = Field(default=None, gt=1)
    fd_step: float | None = Field(default=None, gt=0)
    series_order: int | None = Field(default=None, ge=0)
    series_nodes: int | None = Field(default=None, ge=1)
    sufficiency_tol: float | None = Field(default=None, gt=0)
    support_tol: float | None = Field(default=None, gt=0)
    threads: int | None = Field(default=None, ge=1)
    dims: list[int] | None = None
    trials: int | None = Field(default=None, ge=1)
    seed: int | None = Field(default=None, ge=0)

    @field_validator("dims")
    @classmethod
    def _dims_in_range(cls, value: list[int] | None) -> list[int] | None:
        if value is not None and any(d < 1 or d > 8 for d in value):
            raise ValueError("dims must lie in 1..8")
        return value


class ProfilesFile(BaseModel):
    """Validates the entire qig.yaml file structure."""

    model_config = ConfigDict(extra="forbid")
    default_profile: str | None = None
    profiles: dict[str, Profile] = Field(default_factory=dict)


def load_yaml_with_env(config_path: str | Path) -> dict[str, Any]:
    """Loads YAML after substituting ${VAR} placeholders from the environment."""
    path = Path(config_path)
    if not path.exists():
        return {"profiles": {}}

    raw_content = path.read_text()

    def sub(match: re.Match[str]) -> str:
        val = os.environ.get(match.group(1))
        return val if val is not None else match.group(0)

    expanded = re.sub(r"\$\{([^}]+)\}", sub, raw_content)
    try:
        data = yaml.safe_load(expanded)
    except yaml.YAMLError as exc:
        raise QigValidationError(f"Invalid YAML syntax in {path}: {exc}", field=str(path))

    if not isinstance(data, dict):
        return {"profiles": {}}
    return data


def load_profile(config_path: str | Path, profile: str | None = None) -> Profile:
    raw = load_yaml_with_env(config_path)
    try:
        profiles = ProfilesFile(**raw)
    except ValidationError as exc:
        loc = ".".join(str(part) for part in exc.errors()[0]["loc"])
        raise QigValidationError(f"Error in {config_path}: {exc}", field=loc) from exc
    name = profile or profiles.default_profile
    if not name:
        return Profile()
    if name not in profiles.profiles:
        raise QigValidationError(
            f"Profile '{name}' not found in {config_path}", field="profile"
        )
    return profiles.profiles[name]


def resolve_options(profile: Profile | None = None, **overrides: Any) -> SolverOptions:
    """Defaults, then profile fields, then explicit overrides (CLI flags)."""
    options = DEFAULT_OPTIONS
    if profile is not None:
        options = options.with_overrides(**profile.model_dump(exclude_none=True))
    return options.with_overrides(**overrides)
