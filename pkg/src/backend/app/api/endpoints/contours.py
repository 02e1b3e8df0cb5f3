"""
Relative entropy to the uniform distribution over the 2-simplex.
"""
from typing import Literal

from fastapi import APIRouter, Query

from ...services.runner import run_contours
from ..responses import run_response

router = APIRouter()


@router.get("")
def get_contours(
    resolution: int = Query(..., ge=2, le=1000),
    format: Literal["json", "csv"] = "json",
):
    """Grid rows p1, p2, p3, rel_entropy."""
    return run_response(run_contours(resolution), format)
