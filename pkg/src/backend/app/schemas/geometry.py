"""
Field grid payloads and balance rows for the entropy-current checks.
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

# components per grid point
FIELD_COMPONENTS = {
    "T": 4,  # T^{mu nu}, row-major 2x2
    "N": 2,  # N^mu
    "beta": 2,  # beta_nu (covector)
    "alpha": 1,
    "pressure": 1,
    "w": 2,  # w^mu
    "current": 2,  # s^mu given directly
}


class FieldGridPayload(BaseModel):
    """Fields stored as flat arrays in (t, x, component) row-major order."""

    model_config = ConfigDict(extra="forbid")

    nx: int = Field(..., ge=1)
    nt: int = Field(..., ge=1)
    dx: float = Field(..., gt=0)
    dt: float = Field(..., gt=0)
    x0: float = 0.0
    t0: float = 0.0
    fields: Dict[str, List[float]]

    @model_validator(mode="after")
    def check_fields(self):
        for name, values in self.fields.items():
            if name not in FIELD_COMPONENTS:
                raise ValueError(f"unknown field '{name}', expected one of {sorted(FIELD_COMPONENTS)}")
            expected = self.nt * self.nx * FIELD_COMPONENTS[name]
            if len(values) != expected:
                raise ValueError(f"field '{name}' needs {expected} values, got {len(values)}")
        return self


class DiamondBalance(BaseModel):
    volume_integral: float
    boundary_integral: float
    residual: float
    area: float


class BalanceRow(BaseModel):
    preset: str
    level: int
    dx: float
    dt: float
    half_width: int  # index units
    volume_integral: float
    boundary_integral: float
    residual: float
    ratio: Optional[float] = None  # residual(level - 1) / residual(level)
    max_divergence: Optional[float] = None
    max_killing_residual: Optional[float] = None
