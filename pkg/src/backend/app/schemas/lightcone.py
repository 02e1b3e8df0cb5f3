"""
Spin-chain, diamond schedule and trace record models for the light-cone
simulator.
"""
from typing import List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.config import settings


class ChainSpec(BaseModel):
    """Chain of qubits with on-site fields h_i diag(0, 1)."""

    model_config = ConfigDict(extra="forbid")

    n_sites: int = Field(..., ge=1)
    local_dim: Literal[2] = 2
    fields: List[float]
    beta: float = Field(..., gt=0)
    coupling: float = Field(0.0, ge=0.0, le=1.0)
    gate_time: float = 0.0

    @field_validator("n_sites")
    @classmethod
    def check_cap(cls, value: int) -> int:
        if value > settings.MAX_CHAIN_SITES:
            raise ValueError(f"at most {settings.MAX_CHAIN_SITES} sites are supported, got {value}")
        return value

    @model_validator(mode="after")
    def check_fields(self):
        if len(self.fields) != self.n_sites:
            raise ValueError(f"need one field per site ({self.n_sites}), got {len(self.fields)}")
        return self

    @classmethod
    def uniform(cls, n_sites: int, field: float, beta: float, coupling: float = 0.0, gate_time: float = 0.0) -> "ChainSpec":
        return cls(n_sites=n_sites, fields=[field] * n_sites, beta=beta, coupling=coupling, gate_time=gate_time)

    @property
    def factor_dims(self) -> Tuple[int, ...]:
        return (self.local_dim,) * self.n_sites


class SliceStep(BaseModel):
    """One Cauchy slice A(tau) = [lo, hi] with its brickwork gates and bath sites."""

    model_config = ConfigDict(extra="forbid")

    lo: int = Field(..., ge=0)
    hi: int = Field(..., ge=0)
    gates: List[Tuple[int, int]] = Field(default_factory=list)
    bath: List[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_inside(self):
        if self.hi < self.lo:
            raise ValueError(f"empty slice [{self.lo}, {self.hi}]")
        touched: List[int] = []
        for left, right in self.gates:
            if right != left + 1:
                raise ValueError(f"gate ({left}, {right}) is not a nearest-neighbour pair")
            if left < self.lo or right > self.hi:
                raise ValueError(f"gate ({left}, {right}) leaves the slice [{self.lo}, {self.hi}]")
            touched.extend((left, right))
        if len(touched) != len(set(touched)):
            raise ValueError("gates within one step overlap")
        for site in self.bath:
            if not self.lo <= site <= self.hi:
                raise ValueError(f"bath site {site} leaves the slice [{self.lo}, {self.hi}]")
        return self

    @property
    def sites(self) -> Tuple[int, ...]:
        return tuple(range(self.lo, self.hi + 1))

    def contains(self, other: "SliceStep") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


class DiamondSchedule(BaseModel):
    """Expanding-then-contracting sequence of slices (a discrete causal diamond)."""

    model_config = ConfigDict(extra="forbid")

    steps: List[SliceStep] = Field(..., min_length=1)

    @model_validator(mode="after")
    def check_nesting(self):
        steps = self.steps
        widest = max(range(len(steps)), key=lambda k: steps[k].hi - steps[k].lo)
        for k in range(widest):
            if not steps[k + 1].contains(steps[k]):
                raise ValueError(f"slice {k + 1} does not contain slice {k} on the expanding side")
        for k in range(widest, len(steps) - 1):
            if not steps[k].contains(steps[k + 1]):
                raise ValueError(f"slice {k + 1} is not contained in slice {k} on the contracting side")
        return self

    @classmethod
    def build(
        cls,
        n_sites: int,
        center: int,
        n_steps: int,
        max_half_width: int,
        bath_sites: Optional[Sequence[int]] = None,
    ) -> "DiamondSchedule":
        """Brickwork diamond growing one site per step on each side, then shrinking.

        Step tau covers [center - r, center + r] with r = min(tau, n_steps - 1 - tau,
        max_half_width); gates pair (i, i + 1) with i of the same parity as tau.
        Bath sites default to every site of the slice.
        """
        if not 0 <= center < n_sites:
            raise ValueError(f"center {center} outside a chain of {n_sites} sites")
        if n_steps < 1 or max_half_width < 0:
            raise ValueError("need n_steps >= 1 and max_half_width >= 0")
        if center - max_half_width < 0 or center + max_half_width >= n_sites:
            raise ValueError(f"diamond of half width {max_half_width} around {center} leaves the chain")
        steps = []
        for tau in range(n_steps):
            radius = min(tau, n_steps - 1 - tau, max_half_width)
            lo, hi = center - radius, center + radius
            gates = [(i, i + 1) for i in range(lo, hi) if i % 2 == tau % 2]
            bath = list(range(lo, hi + 1)) if bath_sites is None else [s for s in bath_sites if lo <= s <= hi]
            steps.append(SliceStep(lo=lo, hi=hi, gates=gates, bath=bath))
        return cls(steps=steps)

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def footprint(self) -> Tuple[int, ...]:
        """Union of all slices, the region A whose complement is never touched."""
        return tuple(sorted({site for step in self.steps for site in step.sites}))

    def check_chain(self, n_sites: int):
        for k, step in enumerate(self.steps):
            if step.hi >= n_sites:
                raise ValueError(f"slice {k} [{step.lo}, {step.hi}] leaves a chain of {n_sites} sites")


class TraceRecord(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    coupling: float
    tau: int
    rel_global: float
    rel_local: float
    production: float
    entropy_global: float
    energy: float
    outside_drift: float
    slice_lo: Optional[int] = None  # slice applied to reach this record; None at tau = 0
    slice_hi: Optional[int] = None


class LocalityRow(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    coupling: float
    tau: int
    delta_rel_global: float
    delta_rel_local: float
    difference: float
    bound_margin: float  # rel_global - rel_local, >= -tol


class LocalEquilibriumCell(BaseModel):
    start: int
    stop: int  # inclusive
    rel_entropy: float
    indistinguishable: bool
