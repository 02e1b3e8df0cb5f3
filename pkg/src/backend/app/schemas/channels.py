"""
Channel verification report.
"""
from typing import Optional

from pydantic import BaseModel, ConfigDict


class ChannelReport(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    label: str
    dim_in: int
    dim_out: int
    kraus_count: Optional[int] = None
    threshold: float
    trace_preserving: float  # max |eig(sum A^dagger A - 1)|
    completely_positive: float  # min Choi eigenvalue
    unital: Optional[float] = None  # ||N(1/d) - 1/d||_1
    fixed_point: Optional[float] = None  # ||N(sigma) - sigma||_1
    trace_preserving_pass: bool
    completely_positive_pass: bool
    unital_pass: Optional[bool] = None
    fixed_point_pass: Optional[bool] = None

    @property
    def passed(self) -> bool:
        """CPTP contract plus the fixed point, when one was supplied."""
        ok = self.trace_preserving_pass and self.completely_positive_pass
        if self.fixed_point_pass is not None:
            ok = ok and self.fixed_point_pass
        return ok
