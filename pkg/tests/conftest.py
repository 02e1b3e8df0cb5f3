"""
Shared fixtures for the service tests.
"""
import numpy as np
import pytest

from src.backend.app.core.rng import make_rng
from src.backend.app.services.spectra import HermitianOperator

LN2 = float(np.log(2.0))
LN3 = float(np.log(3.0))
# 1/(1 + e^-1) and e^-1/(1 + e^-1): qubit Gibbs populations at beta * gap = 1
GIBBS_GROUND = 1.0 / (1.0 + np.exp(-1.0))
GIBBS_EXCITED = 1.0 - GIBBS_GROUND


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture
def qubit_hamiltonian():
    return HermitianOperator.diagonal([0.0, 1.0])


def random_hermitian(rng: np.random.Generator, dim: int) -> HermitianOperator:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator(0.5 * (a + a.conj().T))


def matrix_payload(matrix) -> dict:
    from src.backend.app.schemas.states import MatrixPayload

    return MatrixPayload.from_array(np.asarray(matrix)).model_dump(exclude_none=True)


def ledger_config(**overrides) -> dict:
    """Three canonical qubit cases with sigma-fixing channels."""
    ensemble = {"kind": "canonical", "hamiltonian": matrix_payload(np.diag([0.0, 1.0])), "beta": 1.0}
    config = {
        "seed": 7,
        "cases": [
            {
                "name": "replace",
                "ensemble": ensemble,
                "rho0": {"kind": "basis", "index": 1},
                "channel": {"kind": "partial_replacement", "p": 0.5},
            },
            {
                "name": "thermal",
                "ensemble": ensemble,
                "rho0": {"kind": "random"},
                "channel": {"kind": "thermal_qubit", "beta": 1.0, "gap": 1.0, "coupling": 0.3},
            },
            {
                "name": "evolve",
                "ensemble": ensemble,
                "rho0": {"kind": "random"},
                "channel": {"kind": "evolution", "time": 1.3},
            },
        ],
    }
    config.update(overrides)
    return config


def chain_config(**overrides) -> dict:
    config = {
        "seed": 3,
        "chain": {"n_sites": 4, "fields": [1.0] * 4, "beta": 1.0, "gate_time": 0.4},
        "schedule": {"center": 1, "n_steps": 3, "max_half_width": 1},
        "rho0": {"preset": "flipped"},
        "lambdas": [0.0, 0.5],
    }
    config.update(overrides)
    return config
