"""
Ensemble payloads.
"""
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..services.ensembles import EnsembleKind
from .states import MatrixPayload


class WeightedObservable(BaseModel):
    model_config = ConfigDict(extra="forbid")

    weight: float
    observable: MatrixPayload


class EnsemblePayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: EnsembleKind
    hamiltonian: Optional[MatrixPayload] = None
    number: Optional[MatrixPayload] = None
    beta: Optional[float] = Field(None, gt=0)
    mu: float = 0.0
    shell: Optional[Tuple[float, float]] = None  # (E, dE)
    generalized: Optional[List[WeightedObservable]] = None
    factor_dims: Optional[List[int]] = None
