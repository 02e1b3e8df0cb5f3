"""
Second-law ledgers. Every term is kept so a failing verdict can be traced to
the term that broke it.
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..services.ensembles import EnsembleKind


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"


class SecondLawLedger(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants", populate_by_name=True)

    ensemble_kind: EnsembleKind
    S_before: float
    S_after: float
    E_before: Optional[float] = None
    E_after: Optional[float] = None
    N_before: Optional[float] = None
    N_after: Optional[float] = None
    rel_before: float  # S(rho || sigma), may be +inf
    rel_after: float
    delta_rel: float
    identity_residual: float
    inequality_margin: float  # -(-dS + beta dE - alpha dN); >= 0 when the inequality holds
    tolerance: float
    verdict: Verdict
    fixed_point_residual: float
    coupling: Optional[float] = None
    flags: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS


class MonotonicityCheck(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    rel_before: float
    rel_after: float
    gap: Optional[float] = None  # None when rel_before is infinite
    comparable: bool


class ContourRow(BaseModel):
    p1: float
    p2: float
    p3: float
    rel_entropy: float
