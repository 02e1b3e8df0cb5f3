"""
Density matrices, composition and reduction, and the entropy functionals.

All entropies are in nats. Functionals work on the (clamped) spectrum of a
state, never on ln(rho) directly.
"""
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.stats import unitary_group

from ..core.config import settings
from ..core.exceptions import (
    DimensionMismatchError,
    FactorizationError,
    InvalidStateError,
    NotHermitianError,
)
from ..core.logger import get_logger
from .spectra import ArrayLike, HermitianOperator, Spectrum, as_operator, hermiticity_defect, hermitize

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semi-definite, unit-trace matrix.

    Eigenvalues in [-EIGENVALUE_CLAMP_TOL, 0) are clamped to zero and the
    spectrum renormalized; the entries are rebuilt only when clamping moved
    the spectrum by more than EIGENVALUE_CUTOFF, so an already valid state
    keeps its entries bit for bit.
    """

    entries: np.ndarray
    factor_dims: Optional[Tuple[int, ...]] = None
    _spectrum: Spectrum = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        matrix = np.array(self.entries, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise InvalidStateError(f"density matrix must be square and non-empty, got {matrix.shape}")
        dim = matrix.shape[0]

        row, col, deviation = hermiticity_defect(matrix)
        if deviation > settings.HERMITICITY_TOL:
            raise NotHermitianError(row, col, deviation, settings.HERMITICITY_TOL)
        matrix = hermitize(matrix)

        trace = float(np.trace(matrix).real)
        if abs(trace - 1.0) > settings.TRACE_TOL:
            raise InvalidStateError(f"trace is {trace!r}, expected 1 within {settings.TRACE_TOL:.1e}")

        values, vectors = linalg.eigh(matrix)
        values = np.asarray(values, dtype=float)
        if values[0] < -settings.EIGENVALUE_CLAMP_TOL:
            raise InvalidStateError(
                f"minimum eigenvalue {values[0]!r} is below -{settings.EIGENVALUE_CLAMP_TOL:.1e}"
            )
        clamped = np.clip(values, 0.0, None)
        clamped = clamped / clamped.sum()
        spectrum = Spectrum(eigenvalues=clamped, eigenvectors=vectors)
        if np.max(np.abs(clamped - values)) > settings.EIGENVALUE_CUTOFF:
            logger.debug(f"Clamped spectrum (min eigenvalue {values[0]!r})")
            matrix = spectrum.reconstruct()

        factor_dims = self.factor_dims
        if factor_dims is not None:
            factor_dims = tuple(int(d) for d in factor_dims)
            if any(d <= 0 for d in factor_dims) or int(np.prod(factor_dims)) != dim:
                raise FactorizationError(f"factor_dims {factor_dims} do not multiply to {dim}")

        matrix.setflags(write=False)
        object.__setattr__(self, "entries", matrix)
        object.__setattr__(self, "factor_dims", factor_dims)
        object.__setattr__(self, "_spectrum", spectrum)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def spectrum(self) -> Spectrum:
        return self._spectrum

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._spectrum.eigenvalues

    def with_factors(self, factor_dims: Sequence[int]) -> "DensityMatrix":
        return DensityMatrix(self.entries, tuple(factor_dims))

    @classmethod
    def pure(cls, vector: ArrayLike, factor_dims: Optional[Sequence[int]] = None) -> "DensityMatrix":
        psi = np.asarray(vector, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidStateError("cannot build a pure state from the zero vector")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()), factor_dims)

    @classmethod
    def basis(cls, index: int, dim: int, factor_dims: Optional[Sequence[int]] = None) -> "DensityMatrix":
        if not 0 <= index < dim:
            raise InvalidStateError(f"basis index {index} outside dimension {dim}")
        matrix = np.zeros((dim, dim), dtype=np.complex128)
        matrix[index, index] = 1.0
        return cls(matrix, factor_dims)

    @classmethod
    def maximally_mixed(cls, dim: int, factor_dims: Optional[Sequence[int]] = None) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=np.complex128) / dim, factor_dims)

    @classmethod
    def from_probabilities(cls, probabilities: ArrayLike, factor_dims: Optional[Sequence[int]] = None) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probabilities, dtype=float)), factor_dims)


def _factors(rho: DensityMatrix) -> Tuple[int, ...]:
    return rho.factor_dims if rho.factor_dims is not None else (rho.dim,)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Tensor product a (x) b with concatenated factorization."""
    return DensityMatrix(np.kron(a.entries, b.entries), _factors(a) + _factors(b))


def tensor_all(states: Iterable[DensityMatrix]) -> DensityMatrix:
    return reduce(tensor, states)


def _check_keep(factor_dims: Optional[Tuple[int, ...]], keep: Iterable[int]) -> Tuple[int, ...]:
    if factor_dims is None:
        raise FactorizationError("partial trace needs factor_dims")
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep:
        raise FactorizationError("partial trace needs a non-empty keep set")
    bad = [k for k in keep if not 0 <= k < len(factor_dims)]
    if bad:
        raise FactorizationError(f"keep indices {bad} outside {len(factor_dims)} factors")
    return keep


def partial_trace_matrix(matrix: np.ndarray, factor_dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Partial trace of a raw operator; kept factors stay in ascending order."""
    factor_dims = tuple(factor_dims)
    keep = _check_keep(factor_dims, keep)
    n = len(factor_dims)
    traced = [k for k in range(n) if k not in keep]
    dim_keep = int(np.prod([factor_dims[k] for k in keep]))
    dim_traced = int(np.prod([factor_dims[k] for k in traced])) if traced else 1

    tensor_form = matrix.reshape(factor_dims + factor_dims)
    order = list(keep) + traced + [n + k for k in keep] + [n + k for k in traced]
    grouped = tensor_form.transpose(order).reshape(dim_keep, dim_traced, dim_keep, dim_traced)
    return np.einsum("ajbj->ab", grouped)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the kept tensor factors."""
    keep = _check_keep(rho.factor_dims, keep)
    reduced = partial_trace_matrix(rho.entries, rho.factor_dims, keep)
    return DensityMatrix(reduced, tuple(rho.factor_dims[k] for k in keep))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -Tr rho ln rho, nats."""
    p = rho.eigenvalues
    p = p[p > settings.EIGENVALUE_CUTOFF]
    return float(-np.sum(p * np.log(p)))


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """S(rho||sigma) = Tr rho (ln rho - ln sigma), +inf on support violation."""
    if rho.dim != sigma.dim:
        raise DimensionMismatchError("relative_entropy", rho.dim, sigma.dim)
    p, u = rho.eigenvalues, rho.spectrum.eigenvectors
    s, v = sigma.eigenvalues, sigma.spectrum.eigenvectors
    eps = settings.SUPPORT_TOL

    # same cutoff as von_neumann_entropy so ledger identities close
    occupied = p > settings.EIGENVALUE_CUTOFF
    kernel = s <= eps
    overlaps = np.abs(u[:, occupied].conj().T @ v) ** 2  # |<u_i|v_j>|^2
    if np.any(kernel):
        leak = overlaps[:, kernel].sum(axis=1)
        if np.any(leak[p[occupied] > eps] > eps):
            return float("inf")

    p_occ = p[occupied]
    log_s = np.zeros_like(s)
    log_s[~kernel] = np.log(s[~kernel])
    cross = float(np.sum(p_occ[:, None] * overlaps[:, ~kernel] * log_s[None, ~kernel]))
    value = float(np.sum(p_occ * np.log(p_occ))) - cross
    return max(value, 0.0)


def expectation(rho: DensityMatrix, observable: Union[HermitianOperator, ArrayLike]) -> float:
    """Tr{rho O}."""
    observable = as_operator(observable)
    if observable.dim != rho.dim:
        raise DimensionMismatchError("expectation", rho.dim, observable.dim)
    value = np.einsum("ij,ji->", rho.entries, observable.entries)
    if abs(value.imag) > settings.TRACE_TOL * max(1.0, abs(value.real)):
        logger.warning(f"Expectation has imaginary residual {value.imag!r}")
    return float(value.real)


def trace_norm(matrix: np.ndarray) -> float:
    """||A||_1 for a Hermitian (or nearly Hermitian) matrix."""
    values = linalg.eigvalsh(hermitize(np.asarray(matrix, dtype=np.complex128)))
    return float(np.sum(np.abs(values)))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    if a.dim != b.dim:
        raise DimensionMismatchError("trace_distance", a.dim, b.dim)
    return 0.5 * trace_norm(a.entries - b.entries)


def mutual_information(rho: DensityMatrix, part_a: Iterable[int], part_b: Iterable[int]) -> float:
    """I(A:B) = S(rho_A) + S(rho_B) - S(rho_AB): correlations a product of marginals drops."""
    part_a, part_b = tuple(part_a), tuple(part_b)
    if set(part_a) & set(part_b):
        raise FactorizationError("mutual information needs disjoint parts")
    s_a = von_neumann_entropy(partial_trace(rho, part_a))
    s_b = von_neumann_entropy(partial_trace(rho, part_b))
    s_ab = von_neumann_entropy(partial_trace(rho, part_a + part_b))
    return s_a + s_b - s_ab


def product_of_marginals(rho: DensityMatrix) -> DensityMatrix:
    """rho_1 (x) rho_2 (x) ... over every tensor factor."""
    factors = _check_keep(rho.factor_dims, range(len(rho.factor_dims or ())))
    return tensor_all(partial_trace(rho, [k]) for k in factors)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random unitary."""
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1), dtype=np.complex128)
    return unitary_group.rvs(dim, random_state=rng)


def random_density_matrix(
    rng: np.random.Generator,
    dim: int,
    rank: Optional[int] = None,
    factor_dims: Optional[Sequence[int]] = None,
) -> DensityMatrix:
    """Hilbert-Schmidt random state (Ginibre G, rho = G G^dagger / Tr)."""
    rank = dim if rank is None else rank
    ginibre = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    matrix = ginibre @ ginibre.conj().T
    return DensityMatrix(matrix / np.trace(matrix).real, factor_dims)
