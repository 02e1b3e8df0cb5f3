"""
Hermitian linear-algebra kernel: eigendecomposition and spectral matrix
functions shared by every other service.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from ..core.config import settings
from ..core.exceptions import NonFiniteSpectralValueError, NotHermitianError

ArrayLike = Union[np.ndarray, list]


def hermiticity_defect(matrix: np.ndarray) -> Tuple[int, int, float]:
    """Worst element (row, col, |M - M^dagger|) of a square matrix."""
    deviation = np.abs(matrix - matrix.conj().T)
    row, col = np.unravel_index(int(np.argmax(deviation)), deviation.shape)
    return int(row), int(col), float(deviation[row, col])


def hermitize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def _as_square(entries: ArrayLike) -> np.ndarray:
    matrix = np.array(entries, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {matrix.shape}")
    return matrix


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Hermitian matrix (Hamiltonian, number operator or generic observable)."""

    entries: np.ndarray
    tol: Optional[float] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        matrix = _as_square(self.entries)
        tol = settings.HERMITICITY_TOL if self.tol is None else self.tol
        row, col, deviation = hermiticity_defect(matrix)
        if deviation > tol:
            raise NotHermitianError(row, col, deviation, tol)
        matrix.setflags(write=False)
        object.__setattr__(self, "entries", matrix)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls(np.eye(dim))

    @classmethod
    def diagonal(cls, values: ArrayLike) -> "HermitianOperator":
        return cls(np.diag(np.asarray(values, dtype=float)))

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.entries + as_operator(other).entries)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.entries - as_operator(other).entries)

    def scaled(self, factor: float) -> "HermitianOperator":
        return HermitianOperator(float(factor) * self.entries)

    def commutator_norm(self, other: "HermitianOperator") -> float:
        """Frobenius norm of [self, other]."""
        a, b = self.entries, as_operator(other).entries
        return float(np.linalg.norm(a @ b - b @ a))


def as_operator(value: Union[HermitianOperator, ArrayLike]) -> HermitianOperator:
    if isinstance(value, HermitianOperator):
        return value
    return HermitianOperator(value)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self, values: Optional[np.ndarray] = None) -> np.ndarray:
        """V diag(values) V^dagger, defaulting to the eigenvalues themselves."""
        values = self.eigenvalues if values is None else values
        vecs = self.eigenvectors
        return hermitize((vecs * values) @ vecs.conj().T)

    def projectors(self, tol: Optional[float] = None) -> List[Tuple[float, np.ndarray]]:
        """Spectral projectors, grouping eigenvalues closer than tol.

        Degenerate subspaces are returned as one projector so that callers
        never depend on the solver's choice of basis inside them.
        """
        tol = settings.DEGENERACY_TOL if tol is None else tol
        groups: List[List[int]] = []
        for index, value in enumerate(self.eigenvalues):
            if groups and value - self.eigenvalues[groups[-1][-1]] <= tol:
                groups[-1].append(index)
            else:
                groups.append([index])
        result = []
        for group in groups:
            vecs = self.eigenvectors[:, group]
            result.append((float(np.mean(self.eigenvalues[group])), vecs @ vecs.conj().T))
        return result


def eigh(operator: Union[HermitianOperator, ArrayLike]) -> Spectrum:
    """Eigendecomposition of a Hermitian operator, eigenvalues ascending."""
    operator = as_operator(operator)
    values, vectors = linalg.eigh(operator.entries)
    return Spectrum(eigenvalues=np.asarray(values, dtype=float), eigenvectors=vectors)


def _evaluate(f: Callable, values: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        try:
            result = np.asarray(f(values), dtype=float)
            if result.shape == values.shape:
                return result
        except (TypeError, ValueError, OverflowError):
            pass
        out = np.empty_like(values)
        for index, value in enumerate(values):
            try:
                out[index] = float(f(float(value)))
            except (ValueError, OverflowError, ZeroDivisionError):
                out[index] = np.nan
        return out


def matrix_fn(
    operator: Union[HermitianOperator, ArrayLike],
    f: Callable,
    spectrum: Optional[Spectrum] = None,
) -> HermitianOperator:
    """Apply a real scalar function through the spectrum: V diag(f(lambda)) V^dagger."""
    spectrum = eigh(operator) if spectrum is None else spectrum
    values = _evaluate(f, spectrum.eigenvalues)
    bad = ~np.isfinite(values)
    if np.any(bad):
        index = int(np.argmax(bad))
        raise NonFiniteSpectralValueError(float(spectrum.eigenvalues[index]), float(values[index]))
    return HermitianOperator(spectrum.reconstruct(values))
