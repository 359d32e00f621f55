"""Machine-readable command reports.

Floats are written with Python's shortest round-trip repr (at most 17
significant digits), non-finite values as the strings "inf", "-inf" and
"nan". Matrices are written in the ``MatrixPayload`` encoding.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .algebra import BlockMatrix
from .schema import MatrixPayload

SCHEMA_VERSION = 1


def encode_float(value: float) -> float | str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def jsonable(value: Any) -> Any:
    """Recursively convert results to JSON-safe builtins."""
    if isinstance(value, BlockMatrix):
        return MatrixPayload.from_element(value).model_dump()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return encode_float(value)
    return value


class Report(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: str
    schema_version: int = SCHEMA_VERSION
    params: dict[str, Any] = Field(default_factory=dict)
    results: dict[str, Any] = Field(default_factory=dict)
    residuals: dict[str, Any] = Field(default_factory=dict)
    diagnostics: dict[str, Any] = Field(default_factory=dict)
    wall_time: float | None = None

    def to_json(self, *, omit_timing: bool = False) -> str:
        payload = {
            "command": self.command,
            "schema_version": self.schema_version,
            "params": jsonable(self.params),
            "results": jsonable(self.results),
            "residuals": jsonable(self.residuals),
            "diagnostics": jsonable(self.diagnostics),
        }
        if not omit_timing and self.wall_time is not None:
            payload["wall_time"] = encode_float(self.wall_time)
        return json.dumps(payload, indent=2, allow_nan=False) + "\n"
