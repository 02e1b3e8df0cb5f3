"""
Entropy-current balance on the preset grids.
"""
from typing import Literal

from fastapi import APIRouter, Query

from ...schemas.configs import GeometryConfig
from ...services.runner import run_geometry, run_geometry_preset
from ..responses import run_response

router = APIRouter()


@router.get("/{preset}")
def get_preset_balance(
    preset: str,
    refine: int = Query(0, ge=0, le=4),
    format: Literal["json", "csv"] = "json",
):
    """Balance rows for refinement levels 0..refine."""
    return run_response(run_geometry_preset(preset, refine), format)


@router.post("")
def post_grid_balance(config: GeometryConfig, format: Literal["json", "csv"] = "json"):
    """Balance row for a user-supplied field grid."""
    return run_response(run_geometry(config), format)
