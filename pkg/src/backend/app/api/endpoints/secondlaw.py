"""
Second-law ledgers.
"""
from typing import Literal

from fastapi import APIRouter

from ...schemas.configs import SecondLawConfig
from ...services.runner import run_secondlaw
from ..responses import run_response

router = APIRouter()


@router.post("")
def evaluate_ledgers(config: SecondLawConfig, format: Literal["json", "csv"] = "json"):
    """One ledger per case. A case whose channel does not fix its reference state is rejected with 422."""
    return run_response(run_secondlaw(config), format)
