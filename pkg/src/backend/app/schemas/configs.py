"""
Run configurations. All documents are strict: unknown fields are rejected.
"""
from enum import Enum
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .ensembles import EnsemblePayload
from .geometry import FieldGridPayload
from .lightcone import ChainSpec, SliceStep
from .states import ChannelPayload, MatrixPayload

SEED_MAX = (1 << 64) - 1


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(0, ge=0, le=SEED_MAX)
    tolerance: Optional[float] = Field(None, ge=0)
    format: OutputFormat = OutputFormat.CSV
    output: Optional[str] = None


class StateKind(str, Enum):
    MATRIX = "matrix"
    BASIS = "basis"
    PROBABILITIES = "probabilities"
    MAXIMALLY_MIXED = "maximally_mixed"
    RANDOM = "random"
    REFERENCE = "reference"


class StateConfig(BaseModel):
    """How to build a density matrix; dimensions default to the ensemble's."""

    model_config = ConfigDict(extra="forbid")

    kind: StateKind
    matrix: Optional[MatrixPayload] = None
    index: Optional[int] = Field(None, ge=0)
    probabilities: Optional[List[float]] = None
    rank: Optional[int] = Field(None, ge=1)
    dim: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_kind(self):
        needs = {
            StateKind.MATRIX: ("matrix", self.matrix),
            StateKind.BASIS: ("index", self.index),
            StateKind.PROBABILITIES: ("probabilities", self.probabilities),
        }
        if self.kind in needs and needs[self.kind][1] is None:
            raise ValueError(f"state kind '{self.kind.value}' needs '{needs[self.kind][0]}'")
        return self


class ChannelKind(str, Enum):
    KRAUS = "kraus"
    IDENTITY = "identity"
    UNITARY = "unitary"
    EVOLUTION = "evolution"
    DEPHASING = "dephasing"
    DEPOLARIZING = "depolarizing"
    PARTIAL_REPLACEMENT = "partial_replacement"
    THERMAL_QUBIT = "thermal_qubit"
    MEASUREMENT_RESET = "measurement_reset"
    EMBED = "embed"
    COMPOSE = "compose"
    MIX = "mix"
    RANDOM = "random"
    RANDOM_UNITAL = "random_unital"


class ChannelConfig(BaseModel):
    """Recursive channel recipe. Hamiltonians and targets default to the case's ensemble."""

    model_config = ConfigDict(extra="forbid")

    kind: ChannelKind
    kraus: Optional[ChannelPayload] = None
    check: bool = True
    matrix: Optional[MatrixPayload] = None  # unitary, or Hamiltonian for evolution/dephasing
    time: Optional[float] = None
    p: Optional[float] = Field(None, ge=0, le=1)
    target: Optional[StateConfig] = None
    beta: Optional[float] = Field(None, gt=0)
    gap: Optional[float] = None
    coupling: Optional[float] = Field(None, ge=0, le=1)
    site: Optional[int] = Field(None, ge=0)
    factor_dims: Optional[List[int]] = None
    inner: Optional["ChannelConfig"] = None
    stages: Optional[List["ChannelConfig"]] = None
    weights: Optional[List[float]] = None
    dim: Optional[int] = Field(None, ge=1)
    ancilla_dim: int = Field(2, ge=1)
    n_unitaries: int = Field(3, ge=1)

    @model_validator(mode="after")
    def check_kind(self):
        required = {
            ChannelKind.KRAUS: ("kraus",),
            ChannelKind.UNITARY: ("matrix",),
            ChannelKind.EVOLUTION: ("time",),
            ChannelKind.DEPOLARIZING: ("p",),
            ChannelKind.PARTIAL_REPLACEMENT: ("p",),
            ChannelKind.THERMAL_QUBIT: ("beta", "gap", "coupling"),
            ChannelKind.EMBED: ("inner", "site", "factor_dims"),
            ChannelKind.COMPOSE: ("stages",),
            ChannelKind.MIX: ("stages", "weights"),
        }
        missing = [name for name in required.get(self.kind, ()) if getattr(self, name) is None]
        if missing:
            raise ValueError(f"channel kind '{self.kind.value}' needs {missing}")
        return self


class SecondLawCase(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    ensemble: EnsemblePayload
    rho0: StateConfig
    channel: ChannelConfig


class SecondLawConfig(RunConfig):
    cases: List[SecondLawCase] = Field(..., min_length=1)


class ScheduleConfig(BaseModel):
    """Either a generated diamond (center, n_steps, max_half_width) or explicit steps."""

    model_config = ConfigDict(extra="forbid")

    center: Optional[int] = Field(None, ge=0)
    n_steps: Optional[int] = Field(None, ge=1)
    max_half_width: Optional[int] = Field(None, ge=0)
    bath_sites: Optional[List[int]] = None
    steps: Optional[List[SliceStep]] = None

    @model_validator(mode="after")
    def check_form(self):
        generated = (self.center, self.n_steps, self.max_half_width)
        if self.steps is None and any(value is None for value in generated):
            raise ValueError("schedule needs explicit steps or center, n_steps and max_half_width")
        if self.steps is not None and any(value is not None for value in generated):
            raise ValueError("schedule takes explicit steps or generator fields, not both")
        return self


class InitialStateConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    preset: Literal["reference", "flipped", "random_inside", "matrix"] = "reference"
    site: Optional[int] = Field(None, ge=0)
    matrix: Optional[MatrixPayload] = None


class LightconeConfig(RunConfig):
    chain: ChainSpec
    schedule: ScheduleConfig
    rho0: InitialStateConfig = Field(default_factory=InitialStateConfig)
    lambdas: List[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def check_lambdas(self):
        bad = [value for value in self.lambdas if not 0.0 <= value <= 1.0]
        if bad:
            raise ValueError(f"couplings must lie in [0, 1], got {bad}")
        return self


class GeometryConfig(RunConfig):
    grid: FieldGridPayload
    center: Optional[Tuple[int, int]] = None  # (t index, x index), default grid centre
    half_width: Optional[int] = Field(None, ge=1)
    orientation: Literal[1, -1] = 1


ChannelConfig.model_rebuild()
