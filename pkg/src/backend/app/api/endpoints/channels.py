"""
Channel verification and construction.
"""
from typing import Optional

from fastapi import APIRouter
from fastapi.responses import Response
from pydantic import BaseModel, ConfigDict, Field

from ...core.rng import make_rng
from ...schemas.channels import ChannelReport
from ...schemas.configs import SEED_MAX, ChannelConfig
from ...schemas.ensembles import EnsemblePayload
from ...schemas.states import ChannelPayload, MatrixPayload
from ...services.ensembles import reference_state
from ...services.runner import build_channel
from ...services.serialization import channel_from_payload, channel_to_payload, ensemble_from_payload, state_to_payload

router = APIRouter()


class VerifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    channel: ChannelPayload
    fixed_point: Optional[MatrixPayload] = None
    tolerance: Optional[float] = Field(None, ge=0)


class ConstructRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ensemble: EnsemblePayload
    channel: ChannelConfig
    seed: int = Field(0, ge=0, le=SEED_MAX)


class ConstructResponse(BaseModel):
    channel: ChannelPayload
    reference: MatrixPayload
    report: ChannelReport


@router.post("/verify", response_model=ChannelReport)
def verify_channel(request: VerifyRequest):
    """CPTP, unitality and fixed-point residuals; invalid Kraus sets and misfit fixed points are reported, not rejected."""
    channel = channel_from_payload(request.channel, check=False)
    fixed_point = request.fixed_point.to_array() if request.fixed_point is not None else None
    report = channel.verify(fixed_point, request.tolerance)
    return Response(content=report.model_dump_json(), media_type="application/json")


@router.post("/construct", response_model=ConstructResponse)
def construct_channel(request: ConstructRequest):
    """Resolve a channel recipe against an ensemble: dense Kraus set, reference state and report."""
    spec = ensemble_from_payload(request.ensemble)
    sigma = reference_state(spec)
    channel = build_channel(request.channel, spec, make_rng(request.seed))
    return ConstructResponse(
        channel=channel_to_payload(channel),
        reference=state_to_payload(sigma),
        report=channel.verify(sigma),
    )
