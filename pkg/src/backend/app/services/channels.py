"""
Quantum channels in Kraus form.

Elementary channels hold dense Kraus operators. Embedded, composed and mixed
channels keep their parts and act part by part, so a lattice step on many
sites never materializes an exponentially long Kraus list unless asked to.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from ..core.config import settings
from ..core.exceptions import ChannelContractError, DimensionMismatchError, FactorizationError
from ..core.logger import get_logger
from ..schemas.channels import ChannelReport
from .spectra import ArrayLike, HermitianOperator, as_operator, eigh, hermitize
from .states import DensityMatrix, random_unitary, trace_norm

logger = get_logger(__name__)


class QuantumChannel(ABC):
    """Linear CPTP map rho -> sum_a A_a rho A_a^dagger."""

    label: str

    @property
    @abstractmethod
    def dim_in(self) -> int: ...

    @property
    @abstractmethod
    def dim_out(self) -> int: ...

    @abstractmethod
    def apply_matrix(self, matrix: np.ndarray) -> np.ndarray:
        """The map on an arbitrary dim_in x dim_in matrix."""

    @abstractmethod
    def apply_adjoint(self, matrix: np.ndarray) -> np.ndarray:
        """The Heisenberg-picture map, sum_a A_a^dagger M A_a."""

    @abstractmethod
    def kraus_operators(self) -> Tuple[np.ndarray, ...]:
        """Dense Kraus operators (materialized for structured channels)."""

    @abstractmethod
    def elementary(self) -> Tuple["KrausChannel", ...]:
        """Elementary Kraus channels this channel is built from."""

    @abstractmethod
    def kraus_count(self) -> int: ...

    def output_factors(self, input_factors: Optional[Tuple[int, ...]]) -> Optional[Tuple[int, ...]]:
        return input_factors if self.dim_in == self.dim_out else None

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.dim != self.dim_in:
            raise DimensionMismatchError(f"channel '{self.label}' input", self.dim_in, rho.dim)
        out = self.apply_matrix(rho.entries)
        return DensityMatrix(hermitize(out), self.output_factors(rho.factor_dims))

    def __call__(self, rho: DensityMatrix) -> DensityMatrix:
        return self.apply(rho)

    def choi(self) -> np.ndarray:
        """J = sum_a |A_a>><<A_a|, dimension dim_in * dim_out (input factor first)."""
        vectors = np.array([op.T.reshape(-1) for op in self.kraus_operators()])
        return vectors.T @ vectors.conj()

    def is_unitary(self, tol: Optional[float] = None) -> bool:
        tol = settings.CHANNEL_TOL if tol is None else tol
        if self.dim_in != self.dim_out or self.kraus_count() != 1:
            return False
        op = self.kraus_operators()[0]
        return _unitarity_defect(op) <= tol

    def verify(
        self,
        fixed_point: Optional[Union[DensityMatrix, ArrayLike]] = None,
        tol: Optional[float] = None,
    ) -> ChannelReport:
        """Report the CPTP, unitality and fixed-point residuals; never raises on failure."""
        tol = settings.VERIFY_TOL if tol is None else tol
        d_in, d_out = self.dim_in, self.dim_out

        tp_defect = self.apply_adjoint(np.eye(d_out, dtype=np.complex128)) - np.eye(d_in)
        trace_preserving = float(np.max(np.abs(linalg.eigvalsh(hermitize(tp_defect)))))

        completely_positive = min(
            float(linalg.eigvalsh(hermitize(part.choi()))[0]) for part in self.elementary()
        )

        unital = None
        if d_in == d_out:
            mixed = np.eye(d_in, dtype=np.complex128) / d_in
            unital = trace_norm(self.apply_matrix(mixed) - mixed)

        fixed = None
        if fixed_point is not None:
            sigma = fixed_point.entries if isinstance(fixed_point, DensityMatrix) else np.asarray(fixed_point)
            if sigma.shape != (d_in, d_in) or d_in != d_out:
                logger.warning(f"Fixed point of shape {sigma.shape} does not fit channel '{self.label}' ({d_in} -> {d_out})")
                fixed = float("inf")
            else:
                fixed = trace_norm(self.apply_matrix(sigma) - sigma)

        return ChannelReport(
            label=self.label,
            dim_in=d_in,
            dim_out=d_out,
            kraus_count=self.kraus_count(),
            threshold=tol,
            trace_preserving=trace_preserving,
            completely_positive=completely_positive,
            unital=unital,
            fixed_point=fixed,
            trace_preserving_pass=trace_preserving <= tol,
            completely_positive_pass=completely_positive >= -tol,
            unital_pass=None if unital is None else unital <= tol,
            fixed_point_pass=None if fixed is None else fixed <= tol,
        )

    def fixed_point_residual(self, sigma: DensityMatrix) -> float:
        if sigma.dim != self.dim_in or self.dim_in != self.dim_out:
            raise DimensionMismatchError(f"fixed point of '{self.label}'", self.dim_in, sigma.dim)
        return trace_norm(self.apply_matrix(sigma.entries) - sigma.entries)


def _unitarity_defect(op: np.ndarray) -> float:
    eye = np.eye(op.shape[0])
    return float(max(np.max(np.abs(op.conj().T @ op - eye)), np.max(np.abs(op @ op.conj().T - eye))))


@dataclass(frozen=True, eq=False)
class KrausChannel(QuantumChannel):
    """Dense Kraus set. Construction does not enforce CPTP; see from_kraus."""

    kraus: Tuple[np.ndarray, ...]
    label: str = "kraus"
    output_factor_dims: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        ops = tuple(np.array(op, dtype=np.complex128) for op in self.kraus)
        if not ops:
            raise ChannelContractError(f"channel '{self.label}' has no Kraus operators")
        shape = ops[0].shape
        if len(shape) != 2 or any(op.shape != shape for op in ops):
            raise ChannelContractError(f"channel '{self.label}' has inconsistent Kraus shapes")
        for op in ops:
            op.setflags(write=False)
        object.__setattr__(self, "kraus", ops)
        if self.output_factor_dims is not None:
            object.__setattr__(self, "output_factor_dims", tuple(self.output_factor_dims))

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def output_factors(self, input_factors):
        if self.output_factor_dims is not None:
            return self.output_factor_dims
        return super().output_factors(input_factors)

    def apply_matrix(self, matrix: np.ndarray) -> np.ndarray:
        stack = np.asarray(self.kraus)
        return np.einsum("kab,bc,kdc->ad", stack, matrix, stack.conj())

    def apply_adjoint(self, matrix: np.ndarray) -> np.ndarray:
        stack = np.asarray(self.kraus)
        return np.einsum("kba,bc,kcd->ad", stack.conj(), matrix, stack)

    def kraus_operators(self) -> Tuple[np.ndarray, ...]:
        return self.kraus

    def elementary(self) -> Tuple["KrausChannel", ...]:
        return (self,)

    def kraus_count(self) -> int:
        return len(self.kraus)


@dataclass(frozen=True, eq=False)
class EmbeddedChannel(QuantumChannel):
    """A local channel acting on consecutive tensor factors starting at site."""

    inner: KrausChannel
    factor_dims: Tuple[int, ...]
    site: int
    label: str = "embedded"

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        object.__setattr__(self, "factor_dims", dims)
        if self.inner.dim_in != self.inner.dim_out:
            raise ChannelContractError("only square local channels can be embedded")
        if not 0 <= self.site < len(dims):
            raise FactorizationError(f"site {self.site} outside {len(dims)} factors")
        span, local = 0, 1
        while local < self.inner.dim_in and self.site + span < len(dims):
            local *= dims[self.site + span]
            span += 1
        if local != self.inner.dim_in:
            raise FactorizationError(
                f"local dimension {self.inner.dim_in} does not match consecutive factors "
                f"of {dims} starting at site {self.site}"
            )
        object.__setattr__(self, "_span", span)

    @property
    def sites(self) -> Tuple[int, ...]:
        return tuple(range(self.site, self.site + self._span))

    @property
    def _blocks(self) -> Tuple[int, int, int]:
        before = int(np.prod(self.factor_dims[: self.site]))
        after = int(np.prod(self.factor_dims[self.site + self._span:]))
        return before, self.inner.dim_in, after

    @property
    def dim_in(self) -> int:
        return int(np.prod(self.factor_dims))

    @property
    def dim_out(self) -> int:
        return self.dim_in

    def _local(self, matrix: np.ndarray, ops: Iterable[np.ndarray]) -> np.ndarray:
        p, m, q = self._blocks
        blocks = matrix.reshape(p, m, q, p, m, q)
        out = np.zeros_like(blocks)
        for op in ops:
            left = np.einsum("am,imjknl->iajknl", op, blocks)
            out += np.einsum("iajknl,bn->iajkbl", left, op.conj())
        return out.reshape(matrix.shape)

    def apply_matrix(self, matrix: np.ndarray) -> np.ndarray:
        return self._local(matrix, self.inner.kraus)

    def apply_adjoint(self, matrix: np.ndarray) -> np.ndarray:
        return self._local(matrix, (op.conj().T for op in self.inner.kraus))

    def kraus_operators(self) -> Tuple[np.ndarray, ...]:
        p, _, q = self._blocks
        return tuple(np.kron(np.kron(np.eye(p), op), np.eye(q)) for op in self.inner.kraus)

    def elementary(self) -> Tuple[KrausChannel, ...]:
        return (self.inner,)

    def kraus_count(self) -> int:
        return self.inner.kraus_count()


@dataclass(frozen=True, eq=False)
class ComposedChannel(QuantumChannel):
    """stages[0] acts first."""

    stages: Tuple[QuantumChannel, ...]
    label: str = "composed"

    def __post_init__(self):
        stages = tuple(self.stages)
        if not stages:
            raise ChannelContractError("compose needs at least one channel")
        for first, second in zip(stages, stages[1:]):
            if first.dim_out != second.dim_in:
                raise DimensionMismatchError(f"compose '{second.label}' after '{first.label}'", first.dim_out, second.dim_in)
        object.__setattr__(self, "stages", stages)

    @property
    def dim_in(self) -> int:
        return self.stages[0].dim_in

    @property
    def dim_out(self) -> int:
        return self.stages[-1].dim_out

    def output_factors(self, input_factors):
        return reduce(lambda factors, stage: stage.output_factors(factors), self.stages, input_factors)

    def apply_matrix(self, matrix: np.ndarray) -> np.ndarray:
        for stage in self.stages:
            matrix = stage.apply_matrix(matrix)
        return matrix

    def apply_adjoint(self, matrix: np.ndarray) -> np.ndarray:
        for stage in reversed(self.stages):
            matrix = stage.apply_adjoint(matrix)
        return matrix

    def kraus_operators(self) -> Tuple[np.ndarray, ...]:
        ops: List[np.ndarray] = [np.eye(self.dim_in, dtype=np.complex128)]
        for stage in self.stages:
            ops = [b @ a for b in stage.kraus_operators() for a in ops]
        return tuple(ops)

    def elementary(self) -> Tuple[KrausChannel, ...]:
        return tuple(part for stage in self.stages for part in stage.elementary())

    def kraus_count(self) -> int:
        return int(np.prod([stage.kraus_count() for stage in self.stages]))


@dataclass(frozen=True, eq=False)
class MixedChannel(QuantumChannel):
    """Convex combination sum_k w_k N_k."""

    weights: Tuple[float, ...]
    channels: Tuple[QuantumChannel, ...]
    label: str = "mixed"

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        channels = tuple(self.channels)
        if not channels or len(weights) != len(channels):
            raise ChannelContractError("mix needs one weight per channel")
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > settings.CHANNEL_TOL:
            raise ChannelContractError(f"mix weights {weights} are not a probability vector")
        dims = {(c.dim_in, c.dim_out) for c in channels}
        if len(dims) != 1:
            raise ChannelContractError(f"mixed channels have different dimensions {sorted(dims)}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "channels", channels)

    @property
    def dim_in(self) -> int:
        return self.channels[0].dim_in

    @property
    def dim_out(self) -> int:
        return self.channels[0].dim_out

    def output_factors(self, input_factors):
        return self.channels[0].output_factors(input_factors)

    def apply_matrix(self, matrix: np.ndarray) -> np.ndarray:
        return sum(w * c.apply_matrix(matrix) for w, c in zip(self.weights, self.channels))

    def apply_adjoint(self, matrix: np.ndarray) -> np.ndarray:
        return sum(w * c.apply_adjoint(matrix) for w, c in zip(self.weights, self.channels))

    def kraus_operators(self) -> Tuple[np.ndarray, ...]:
        return tuple(
            np.sqrt(w) * op for w, c in zip(self.weights, self.channels) if w > 0 for op in c.kraus_operators()
        )

    def elementary(self) -> Tuple[KrausChannel, ...]:
        return tuple(part for c in self.channels for part in c.elementary())

    def kraus_count(self) -> int:
        return sum(c.kraus_count() for w, c in zip(self.weights, self.channels) if w > 0)


# ---------------------------------------------------------------------------
# Constructors. Every constructor checks the CPTP contract and the steady
# state it promises before returning.
# ---------------------------------------------------------------------------

def _checked(channel: QuantumChannel, fixed_point: Optional[np.ndarray] = None) -> QuantumChannel:
    report = channel.verify(tol=settings.CHANNEL_TOL)
    if not (report.trace_preserving_pass and report.completely_positive_pass):
        logger.error(f"Channel '{channel.label}' failed the CPTP contract: {report.model_dump()}")
        raise ChannelContractError(
            f"channel '{channel.label}' is not CPTP: trace residual {report.trace_preserving:.3e}, "
            f"min Choi eigenvalue {report.completely_positive:.3e}"
        )
    if fixed_point is not None:
        residual = trace_norm(channel.apply_matrix(fixed_point) - fixed_point)
        if residual > settings.FIXED_POINT_TOL:
            raise ChannelContractError(
                f"channel '{channel.label}' does not fix its promised steady state: residual {residual:.3e}"
            )
    return channel


def _check_probability(name: str, p: float):
    if not 0.0 <= p <= 1.0:
        raise ChannelContractError(f"{name} must lie in [0, 1], got {p!r}")


def from_kraus(kraus: Sequence[ArrayLike], label: str = "kraus", check: bool = True) -> KrausChannel:
    """Wrap a Kraus set, validating the CPTP contract unless check is False."""
    channel = KrausChannel(tuple(kraus), label)
    return _checked(channel) if check else channel


def identity(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim),), "identity")


def unitary(matrix: ArrayLike, label: str = "unitary") -> KrausChannel:
    op = np.asarray(matrix, dtype=np.complex128)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ChannelContractError(f"unitary must be square, got shape {op.shape}")
    defect = _unitarity_defect(op)
    if defect > settings.CHANNEL_TOL:
        raise ChannelContractError(f"matrix is not unitary: defect {defect:.3e}")
    return KrausChannel((op,), label)


def hamiltonian_evolution(hamiltonian: Union[HermitianOperator, ArrayLike], time: float) -> KrausChannel:
    """unitary(exp(-i H t)); fixes every Gibbs state of H."""
    hamiltonian = as_operator(hamiltonian)
    return unitary(linalg.expm(-1j * time * hamiltonian.entries), f"evolution(t={time})")


def dephasing(hamiltonian: Union[HermitianOperator, ArrayLike]) -> KrausChannel:
    """Pinching onto the eigenspaces of H; fixes every Gibbs state of H."""
    projectors = [proj for _, proj in eigh(hamiltonian).projectors()]
    channel = KrausChannel(tuple(projectors), "dephasing")
    _checked(channel)
    for proj in projectors:
        residual = trace_norm(channel.apply_matrix(proj) - proj)
        if residual > settings.FIXED_POINT_TOL:
            raise ChannelContractError(f"dephasing does not fix a spectral projector: residual {residual:.3e}")
    return channel


def partial_replacement(sigma: DensityMatrix, p: float) -> KrausChannel:
    """rho -> (1 - p) rho + p sigma; fixes sigma.

    Kraus set {sqrt(1-p) 1} U {sqrt(p s_i) |v_i><v_j|}.
    """
    _check_probability("replacement probability", p)
    dim = sigma.dim
    ops: List[np.ndarray] = []
    if p < 1.0:
        ops.append(np.sqrt(1.0 - p) * np.eye(dim, dtype=np.complex128))
    if p > 0.0:
        vecs = sigma.spectrum.eigenvectors
        for i, s_i in enumerate(sigma.eigenvalues):
            if s_i <= 0.0:
                continue
            for j in range(dim):
                ops.append(np.sqrt(p * s_i) * np.outer(vecs[:, i], vecs[:, j].conj()))
    channel = KrausChannel(tuple(ops), f"partial_replacement(p={p})")
    return _checked(channel, sigma.entries)


def depolarizing(p: float, dim: int) -> KrausChannel:
    """rho -> (1 - p) rho + p 1/d; unital."""
    channel = partial_replacement(DensityMatrix.maximally_mixed(dim), p)
    return KrausChannel(channel.kraus, f"depolarizing(p={p})")


def thermal_qubit(beta: float, gap: float, coupling: float) -> KrausChannel:
    """Generalized amplitude damping toward the Gibbs state of gap * |1><1|."""
    _check_probability("coupling", coupling)
    if not beta > 0:
        raise ChannelContractError(f"beta must be positive, got {beta!r}")
    excited = 1.0 / (1.0 + np.exp(beta * gap))
    ground = 1.0 - excited
    keep = np.sqrt(1.0 - coupling)
    jump = np.sqrt(coupling)
    candidates = [
        np.sqrt(ground) * np.array([[1.0, 0.0], [0.0, keep]]),
        np.sqrt(ground) * np.array([[0.0, jump], [0.0, 0.0]]),
        np.sqrt(excited) * np.array([[keep, 0.0], [0.0, 1.0]]),
        np.sqrt(excited) * np.array([[0.0, 0.0], [jump, 0.0]]),
    ]
    ops = tuple(op for op in candidates if np.any(op != 0.0))
    channel = KrausChannel(ops, f"thermal_qubit(beta={beta}, gap={gap}, lambda={coupling})")
    return _checked(channel, np.diag([ground, excited]).astype(np.complex128))


def measurement_reset() -> KrausChannel:
    """Kraus |0><0|, |0><1|: measure and reset to |0>. Not unital."""
    return from_kraus(
        [np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([[0.0, 1.0], [0.0, 0.0]])],
        "measurement_reset",
    )


def embed(channel: QuantumChannel, site: int, factor_dims: Sequence[int]) -> QuantumChannel:
    """Act with a local channel on the factor(s) starting at site, identity elsewhere."""
    if isinstance(channel, ComposedChannel):
        return ComposedChannel(tuple(embed(stage, site, factor_dims) for stage in channel.stages), channel.label)
    if isinstance(channel, MixedChannel):
        return MixedChannel(channel.weights, tuple(embed(c, site, factor_dims) for c in channel.channels), channel.label)
    inner = channel if isinstance(channel, KrausChannel) else KrausChannel(channel.kraus_operators(), channel.label)
    return EmbeddedChannel(inner, tuple(factor_dims), site, f"{channel.label}@{site}")


def compose(channels: Sequence[QuantumChannel], label: str = "composed") -> ComposedChannel:
    return ComposedChannel(tuple(channels), label)


def mix(weights: Sequence[float], channels: Sequence[QuantumChannel], label: str = "mixed") -> MixedChannel:
    return MixedChannel(tuple(weights), tuple(channels), label)


def discard(factor_dims: Sequence[int], keep: Iterable[int]) -> KrausChannel:
    """Partial trace over the factors not in keep, as a channel."""
    factor_dims = tuple(int(d) for d in factor_dims)
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep or any(not 0 <= k < len(factor_dims) for k in keep):
        raise FactorizationError(f"invalid keep set {keep} for factors {factor_dims}")
    traced = [k for k in range(len(factor_dims)) if k not in keep]
    kept_dims = tuple(factor_dims[k] for k in keep)
    traced_dims = tuple(factor_dims[k] for k in traced)
    dim_keep = int(np.prod(kept_dims))
    dim_full = int(np.prod(factor_dims))

    ops = []
    for env in np.ndindex(*traced_dims) if traced_dims else [()]:
        op = np.zeros((dim_keep, dim_full), dtype=np.complex128)
        for sys_index in np.ndindex(*kept_dims):
            full = [0] * len(factor_dims)
            for k, value in zip(keep, sys_index):
                full[k] = value
            for k, value in zip(traced, env):
                full[k] = value
            row = np.ravel_multi_index(sys_index, kept_dims)
            col = np.ravel_multi_index(tuple(full), factor_dims)
            op[row, col] = 1.0
        ops.append(op)
    return KrausChannel(tuple(ops), f"discard(keep={list(keep)})", kept_dims)


def random_channel(rng: np.random.Generator, dim: int, ancilla_dim: int = 2) -> KrausChannel:
    """Stinespring sample: Haar unitary on system (x) ancilla, ancilla starts in |0>, traced out."""
    big = random_unitary(rng, dim * ancilla_dim).reshape(dim, ancilla_dim, dim, ancilla_dim)
    ops = tuple(big[:, k, :, 0] for k in range(ancilla_dim))
    return KrausChannel(ops, f"stinespring(d={dim}, a={ancilla_dim})")


def random_unital_channel(rng: np.random.Generator, dim: int, n_unitaries: int = 3) -> MixedChannel:
    """Random mixture of Haar unitaries."""
    weights = rng.dirichlet(np.ones(n_unitaries))
    unitaries = tuple(KrausChannel((random_unitary(rng, dim),), "haar") for _ in range(n_unitaries))
    return MixedChannel(tuple(weights / weights.sum()), unitaries, f"random_unital(d={dim})")
