"""
Conversion between JSON payloads and the numeric domain objects.
"""
from typing import Optional

from ..schemas.ensembles import EnsemblePayload
from ..schemas.states import ChannelPayload, MatrixPayload
from .channels import KrausChannel, QuantumChannel, from_kraus
from .ensembles import EnsembleSpec
from .spectra import HermitianOperator
from .states import DensityMatrix


def state_to_payload(rho: DensityMatrix) -> MatrixPayload:
    return MatrixPayload.from_array(rho.entries, rho.factor_dims)


def state_from_payload(payload: MatrixPayload) -> DensityMatrix:
    if payload.cols is not None and payload.cols != payload.dim:
        raise ValueError("a density matrix payload must be square")
    factor_dims = tuple(payload.factor_dims) if payload.factor_dims is not None else None
    return DensityMatrix(payload.to_array(), factor_dims)


def operator_from_payload(payload: MatrixPayload) -> HermitianOperator:
    return HermitianOperator(payload.to_array())


def channel_to_payload(channel: QuantumChannel) -> ChannelPayload:
    return ChannelPayload(
        dims=(channel.dim_in, channel.dim_out),
        label=channel.label,
        kraus=[MatrixPayload.from_array(op) for op in channel.kraus_operators()],
    )


def channel_from_payload(payload: ChannelPayload, check: bool = True) -> KrausChannel:
    """Rebuild a Kraus channel; check=False keeps invalid sets for verification."""
    return from_kraus([op.to_array() for op in payload.kraus], payload.label, check=check)


def ensemble_from_payload(payload: EnsemblePayload) -> EnsembleSpec:
    def _op(value: Optional[MatrixPayload]) -> Optional[HermitianOperator]:
        return operator_from_payload(value) if value is not None else None

    generalized = None
    if payload.generalized is not None:
        generalized = tuple((item.weight, operator_from_payload(item.observable)) for item in payload.generalized)
    return EnsembleSpec(
        kind=payload.kind,
        hamiltonian=_op(payload.hamiltonian),
        number=_op(payload.number),
        beta=payload.beta,
        mu=payload.mu,
        shell=tuple(payload.shell) if payload.shell is not None else None,
        generalized=generalized,
        factor_dims=tuple(payload.factor_dims) if payload.factor_dims is not None else None,
    )
