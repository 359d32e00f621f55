"""JSON payloads for matrices, channels and Schatten exponents.

A complex entry is written as ``[re, im]``; a bare number is accepted as a
real entry. Matrices are row-major lists of rows.
"""

from __future__ import annotations

import math
from typing import Any, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .algebra import BlockMatrix, HermitianElement, MatrixAlgebra, PositiveFunctional

Entry = Union[float, tuple[float, float]]
DenseRows = list[list[Entry]]


def _decode(rows: DenseRows) -> np.ndarray:
    out = []
    for row in rows:
        out.append([complex(e[0], e[1]) if isinstance(e, (tuple, list)) else complex(e) for e in row])
    return np.array(out, dtype=np.complex128)


def _encode(matrix: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix)]


def _check_shape(rows: DenseRows, shape: tuple[int, int], what: str) -> None:
    if len(rows) != shape[0] or any(len(r) != shape[1] for r in rows):
        widths = sorted({len(r) for r in rows})
        raise ValueError(f"{what} must be {shape[0]}x{shape[1]}, got {len(rows)} rows of widths {widths}")


class MatrixPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    block_dims: list[int] = Field(min_length=1)
    blocks: list[DenseRows]

    @field_validator("block_dims")
    @classmethod
    def _positive_dims(cls, value: list[int]) -> list[int]:
        if any(d < 1 for d in value):
            raise ValueError("every block dimension must be >= 1")
        return value

    @model_validator(mode="after")
    def _blocks_match_dims(self) -> "MatrixPayload":
        if len(self.blocks) != len(self.block_dims):
            raise ValueError(f"expected {len(self.block_dims)} blocks, got {len(self.blocks)}")
        for i, (rows, n) in enumerate(zip(self.blocks, self.block_dims)):
            _check_shape(rows, (n, n), f"block {i}")
        return self

    @property
    def algebra(self) -> MatrixAlgebra:
        return MatrixAlgebra(tuple(self.block_dims))

    def to_element(self, kind: type[BlockMatrix] = HermitianElement):
        return kind(self.algebra, tuple(_decode(rows) for rows in self.blocks))

    @classmethod
    def from_element(cls, x: BlockMatrix) -> "MatrixPayload":
        return cls(
            block_dims=list(x.algebra.block_dims),
            blocks=[_encode(b) for b in x.blocks],
        )


class ChannelPayload(BaseModel):
    """Kraus operators as dense (target_dim x source_dim) matrices."""

    model_config = ConfigDict(extra="forbid")

    source_dims: list[int] = Field(min_length=1)
    target_dims: list[int] = Field(min_length=1)
    kraus: list[DenseRows] = Field(min_length=1)

    @model_validator(mode="after")
    def _kraus_shapes(self) -> "ChannelPayload":
        shape = (sum(self.target_dims), sum(self.source_dims))
        for i, rows in enumerate(self.kraus):
            _check_shape(rows, shape, f"kraus operator {i}")
        return self

    def kraus_arrays(self) -> list[np.ndarray]:
        return [_decode(rows) for rows in self.kraus]

    def to_channel(self):
        from .channels import Channel

        return Channel(
            MatrixAlgebra(tuple(self.source_dims)),
            MatrixAlgebra(tuple(self.target_dims)),
            tuple(self.kraus_arrays()),
        )

    @classmethod
    def from_channel(cls, channel) -> "ChannelPayload":
        return cls(
            source_dims=list(channel.source.block_dims),
            target_dims=list(channel.target.block_dims),
            kraus=[_encode(k) for k in channel.kraus],
        )


def parse_exponent(value: Any) -> float:
    """Schatten/Renyi exponents: numbers, or the strings "inf"/"infinity"."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in {"inf", "infinity", "+inf"}:
            return math.inf
        value = float(text)
    return float(value)


def load_state(payload: dict | str) -> PositiveFunctional:
    model = (
        MatrixPayload.model_validate_json(payload)
        if isinstance(payload, str)
        else MatrixPayload.model_validate(payload)
    )
    return model.to_element(PositiveFunctional)
