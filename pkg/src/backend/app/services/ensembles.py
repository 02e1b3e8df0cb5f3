"""
Reference states of the statistical ensembles and their thermodynamic
potentials. Natural units, k_B = hbar = 1.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from ..core.config import settings
from ..core.exceptions import EnsembleError, NonCommutingChargesError
from ..core.logger import get_logger
from .spectra import HermitianOperator, eigh
from .states import DensityMatrix, expectation, von_neumann_entropy

logger = get_logger(__name__)


class EnsembleKind(str, Enum):
    MICROCANONICAL = "microcanonical"
    CANONICAL = "canonical"
    GRAND_CANONICAL = "grand_canonical"
    GENERAL_EXPONENTIAL = "general_exponential"


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    """Recipe for a reference state sigma.

    generalized holds (lambda_i, O_i) pairs for sigma = exp(-sum lambda_i O_i)/Z.
    """

    kind: EnsembleKind
    hamiltonian: Optional[HermitianOperator] = None
    number: Optional[HermitianOperator] = None
    beta: Optional[float] = None
    mu: float = 0.0
    shell: Optional[Tuple[float, float]] = None
    generalized: Optional[Tuple[Tuple[float, HermitianOperator], ...]] = None
    factor_dims: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        kind = EnsembleKind(self.kind)
        object.__setattr__(self, "kind", kind)

        if kind != EnsembleKind.GENERAL_EXPONENTIAL and self.hamiltonian is None:
            raise EnsembleError(f"{kind.value} ensemble needs a Hamiltonian")
        if kind in (EnsembleKind.CANONICAL, EnsembleKind.GRAND_CANONICAL):
            if self.beta is None or not self.beta > 0:
                raise EnsembleError(f"{kind.value} ensemble needs beta > 0, got {self.beta!r}")
        if kind == EnsembleKind.GRAND_CANONICAL and self.number is None:
            raise EnsembleError("grand_canonical ensemble needs a number operator")
        if kind == EnsembleKind.MICROCANONICAL:
            if self.shell is None:
                raise EnsembleError("microcanonical ensemble needs an energy shell (E, dE)")
            center, half_width = self.shell
            if half_width < 0:
                raise EnsembleError(f"shell half width must be non-negative, got {half_width!r}")
            levels = eigh(self.hamiltonian).eigenvalues
            if not np.any(np.abs(levels - center) <= half_width):
                raise EnsembleError(f"energy shell [{center - half_width}, {center + half_width}] is empty")
        if kind == EnsembleKind.GENERAL_EXPONENTIAL:
            if not self.generalized:
                raise EnsembleError("general_exponential ensemble needs a non-empty observable list")
            object.__setattr__(
                self,
                "generalized",
                tuple((float(weight), op) for weight, op in self.generalized),
            )

        dims = {op.dim for op in self.operators()}
        if len(dims) != 1:
            raise EnsembleError(f"operators have inconsistent dimensions {sorted(dims)}")

    @property
    def alpha(self) -> float:
        """alpha = beta * mu."""
        return (self.beta or 0.0) * self.mu

    @property
    def dim(self) -> int:
        return self.operators()[0].dim

    def operators(self) -> Tuple[HermitianOperator, ...]:
        ops = [op for op in (self.hamiltonian, self.number) if op is not None]
        ops.extend(op for _, op in (self.generalized or ()))
        return tuple(ops)


@dataclass(frozen=True)
class MicrocanonicalState:
    sigma: DensityMatrix
    shell_dimension: int


@dataclass(frozen=True)
class CanonicalState:
    sigma: DensityMatrix
    log_partition: float
    free_energy: float


@dataclass(frozen=True)
class GrandCanonicalState:
    sigma: DensityMatrix
    log_partition: float
    grand_potential: float


@dataclass(frozen=True)
class GeneralExponentialState:
    sigma: DensityMatrix
    log_partition: float


def _require(spec: EnsembleSpec, kind: EnsembleKind):
    if spec.kind != kind:
        raise EnsembleError(f"expected a {kind.value} spec, got {spec.kind.value}")


def exponential_state(
    exponent: np.ndarray,
    factor_dims: Optional[Sequence[int]] = None,
) -> Tuple[DensityMatrix, float]:
    """sigma = exp(-K)/Z and ln Z for a Hermitian K, via max-shifted log-sum-exp."""
    spectrum = eigh(HermitianOperator(exponent))
    log_z = float(logsumexp(-spectrum.eigenvalues))
    weights = np.exp(-spectrum.eigenvalues - log_z)
    sigma = DensityMatrix(spectrum.reconstruct(weights), factor_dims)
    return sigma, log_z


def microcanonical(spec: EnsembleSpec) -> MicrocanonicalState:
    """Uniform mixture over the energy shell [E - dE, E + dE]."""
    _require(spec, EnsembleKind.MICROCANONICAL)
    center, half_width = spec.shell
    spectrum = eigh(spec.hamiltonian)
    inside = np.abs(spectrum.eigenvalues - center) <= half_width
    shell_dimension = int(np.count_nonzero(inside))
    vecs = spectrum.eigenvectors[:, inside]
    sigma = DensityMatrix(vecs @ vecs.conj().T / shell_dimension, spec.factor_dims)
    logger.debug(f"Microcanonical shell {spec.shell} holds {shell_dimension} levels")
    return MicrocanonicalState(sigma=sigma, shell_dimension=shell_dimension)


def canonical(spec: EnsembleSpec) -> CanonicalState:
    """Gibbs state exp(-beta H)/Z with free energy F = -ln Z / beta."""
    _require(spec, EnsembleKind.CANONICAL)
    sigma, log_z = exponential_state(spec.beta * spec.hamiltonian.entries, spec.factor_dims)
    return CanonicalState(sigma=sigma, log_partition=log_z, free_energy=-log_z / spec.beta)


def grand_canonical(spec: EnsembleSpec) -> GrandCanonicalState:
    """exp(-beta (H - mu N))/Z with grand potential Omega = -ln Z / beta."""
    _require(spec, EnsembleKind.GRAND_CANONICAL)
    residual = spec.hamiltonian.commutator_norm(spec.number)
    if residual > settings.CHANNEL_TOL:
        logger.error(f"Rejected non-commuting charges, residual {residual:.3e}")
        raise NonCommutingChargesError(residual, settings.CHANNEL_TOL)
    exponent = spec.beta * (spec.hamiltonian.entries - spec.mu * spec.number.entries)
    sigma, log_z = exponential_state(exponent, spec.factor_dims)
    return GrandCanonicalState(sigma=sigma, log_partition=log_z, grand_potential=-log_z / spec.beta)


def general_exponential(spec: EnsembleSpec) -> GeneralExponentialState:
    """exp(-sum_i lambda_i O_i)/Z."""
    _require(spec, EnsembleKind.GENERAL_EXPONENTIAL)
    exponent = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    for weight, op in spec.generalized:
        exponent = exponent + weight * op.entries
    sigma, log_z = exponential_state(exponent, spec.factor_dims)
    return GeneralExponentialState(sigma=sigma, log_partition=log_z)


def reference_state(spec: EnsembleSpec) -> DensityMatrix:
    """The sigma of any ensemble kind."""
    builders = {
        EnsembleKind.MICROCANONICAL: microcanonical,
        EnsembleKind.CANONICAL: canonical,
        EnsembleKind.GRAND_CANONICAL: grand_canonical,
        EnsembleKind.GENERAL_EXPONENTIAL: general_exponential,
    }
    return builders[spec.kind](spec).sigma


def gibbs_state(hamiltonian: HermitianOperator, beta: float) -> DensityMatrix:
    return canonical(EnsembleSpec(kind=EnsembleKind.CANONICAL, hamiltonian=hamiltonian, beta=beta)).sigma


def entropy_identity_residual(state: GeneralExponentialState, spec: EnsembleSpec) -> float:
    """|S(sigma) - ln Z - sum_i lambda_i <O_i>_sigma|."""
    predicted = state.log_partition + sum(
        weight * expectation(state.sigma, op) for weight, op in spec.generalized
    )
    return abs(von_neumann_entropy(state.sigma) - predicted)
