"""
Light-cone runs.
"""
from typing import Literal

from fastapi import APIRouter

from ...schemas.configs import LightconeConfig
from ...services.runner import run_lightcone
from ..responses import run_response

router = APIRouter()


@router.post("")
def run_chain(config: LightconeConfig, format: Literal["json", "csv"] = "json"):
    """Trace records per (lambda, tau) with the locality comparison columns."""
    return run_response(run_lightcone(config), format)
