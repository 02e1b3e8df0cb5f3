"""
JSON payloads for matrices, states and channels.

Matrices are stored as flat row-major real and imaginary arrays; Python
floats round-trip exactly through JSON.
"""
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class MatrixPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dim: int = Field(..., gt=0)
    cols: Optional[int] = Field(None, gt=0)  # rectangular Kraus operators only
    factor_dims: Optional[List[int]] = None
    re: List[float]
    im: List[float]

    @model_validator(mode="after")
    def check_sizes(self):
        size = self.dim * (self.cols or self.dim)
        if len(self.re) != size or len(self.im) != size:
            raise ValueError(f"re/im must hold {size} row-major entries")
        return self

    @classmethod
    def from_array(cls, matrix: np.ndarray, factor_dims: Optional[Tuple[int, ...]] = None) -> "MatrixPayload":
        matrix = np.asarray(matrix, dtype=np.complex128)
        rows, cols = matrix.shape
        return cls(
            dim=rows,
            cols=None if rows == cols else cols,
            factor_dims=list(factor_dims) if factor_dims is not None else None,
            re=[float(x) for x in matrix.real.reshape(-1)],
            im=[float(x) for x in matrix.imag.reshape(-1)],
        )

    def to_array(self) -> np.ndarray:
        shape = (self.dim, self.cols or self.dim)
        real = np.asarray(self.re, dtype=float).reshape(shape)
        imag = np.asarray(self.im, dtype=float).reshape(shape)
        return real + 1j * imag


class ChannelPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dims: Tuple[int, int]  # (dim_in, dim_out)
    label: str = "channel"
    kraus: List[MatrixPayload] = Field(..., min_length=1)

    @model_validator(mode="after")
    def check_shapes(self):
        dim_in, dim_out = self.dims
        for op in self.kraus:
            if (op.dim, op.cols or op.dim) != (dim_out, dim_in):
                raise ValueError(f"Kraus operators must be {dim_out}x{dim_in}")
        return self
