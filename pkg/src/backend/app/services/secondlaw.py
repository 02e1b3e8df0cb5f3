"""
Second-law ledgers for sigma-fixing channels, the data-processing gap and the
relative-entropy landscape on the probability simplex.
"""
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import entr, rel_entr

from ..core.config import settings
from ..core.exceptions import DimensionMismatchError, EnsembleError, FixedPointError
from ..core.logger import get_logger
from ..schemas.ledger import MonotonicityCheck, SecondLawLedger, Verdict
from .channels import QuantumChannel
from .ensembles import EnsembleKind, EnsembleSpec, reference_state
from .states import DensityMatrix, expectation, relative_entropy, von_neumann_entropy

logger = get_logger(__name__)


class SecondLawEvaluator:
    """Evaluates the ensemble identities and inequalities as ledgers."""

    def __init__(self, tolerance: Optional[float] = None, fixed_point_tol: Optional[float] = None):
        self.tolerance = settings.LEDGER_TOL if tolerance is None else tolerance
        self.fixed_point_tol = settings.VERIFY_TOL if fixed_point_tol is None else fixed_point_tol

    def evaluate(
        self,
        rho0: DensityMatrix,
        channel: QuantumChannel,
        spec: EnsembleSpec,
        tolerance: Optional[float] = None,
        sigma: Optional[DensityMatrix] = None,
        coupling: Optional[float] = None,
    ) -> SecondLawLedger:
        """One application of channel to rho0, booked against the reference state of spec.

        Raises FixedPointError when channel does not fix sigma; the inequality
        has no hypothesis to stand on in that case.
        """
        tol = self.tolerance if tolerance is None else tolerance
        sigma = reference_state(spec) if sigma is None else sigma
        if rho0.dim != sigma.dim:
            raise DimensionMismatchError("initial state vs reference state", sigma.dim, rho0.dim)

        fixed_residual = channel.fixed_point_residual(sigma)
        if fixed_residual >= self.fixed_point_tol:
            logger.error(f"Channel '{channel.label}' does not fix the {spec.kind.value} reference state")
            raise FixedPointError(fixed_residual, self.fixed_point_tol)

        rho1 = channel.apply(rho0)
        return self.ledger(rho0, rho1, spec, sigma, tol, fixed_residual, coupling)

    def ledger(
        self,
        rho0: DensityMatrix,
        rho1: DensityMatrix,
        spec: EnsembleSpec,
        sigma: DensityMatrix,
        tolerance: Optional[float] = None,
        fixed_point_residual: float = 0.0,
        coupling: Optional[float] = None,
    ) -> SecondLawLedger:
        """Book a before/after pair of states against sigma."""
        tol = self.tolerance if tolerance is None else tolerance
        flags: List[str] = []

        s_before, s_after = von_neumann_entropy(rho0), von_neumann_entropy(rho1)
        rel_before, rel_after = relative_entropy(rho0, sigma), relative_entropy(rho1, sigma)
        e_before = e_after = n_before = n_after = None
        if spec.hamiltonian is not None:
            e_before, e_after = expectation(rho0, spec.hamiltonian), expectation(rho1, spec.hamiltonian)
        if spec.number is not None:
            n_before, n_after = expectation(rho0, spec.number), expectation(rho1, spec.number)

        # thermodynamic side: -dS + beta dE - alpha dN (or the general exponential sum)
        predicted = -(s_after - s_before)
        if spec.kind in (EnsembleKind.CANONICAL, EnsembleKind.GRAND_CANONICAL):
            predicted += spec.beta * (e_after - e_before)
        if spec.kind == EnsembleKind.GRAND_CANONICAL:
            predicted -= spec.alpha * (n_after - n_before)
        if spec.kind == EnsembleKind.GENERAL_EXPONENTIAL:
            predicted += sum(
                weight * (expectation(rho1, op) - expectation(rho0, op)) for weight, op in spec.generalized
            )

        if np.isinf(rel_before):
            flags.append("rel_before is infinite: initial state leaves the support of sigma; change is incomparable")
            if spec.kind == EnsembleKind.MICROCANONICAL:
                flags.append("initial state is not supported in the energy shell")
            delta_rel = float("nan")
            identity_residual = float("nan")
            verdict = Verdict.PASS
        elif np.isinf(rel_after):
            flags.append("rel_after is infinite although rel_before is finite")
            delta_rel = float("inf")
            identity_residual = float("inf")
            verdict = Verdict.FAIL
        else:
            delta_rel = rel_after - rel_before
            identity_residual = abs(delta_rel - predicted)
            verdict = Verdict.PASS if delta_rel <= tol and identity_residual <= tol else Verdict.FAIL

        if verdict == Verdict.FAIL:
            logger.warning(
                f"{spec.kind.value} ledger fails: delta_rel={delta_rel!r}, identity_residual={identity_residual!r}"
            )

        return SecondLawLedger(
            ensemble_kind=spec.kind,
            S_before=s_before,
            S_after=s_after,
            E_before=e_before,
            E_after=e_after,
            N_before=n_before,
            N_after=n_after,
            rel_before=rel_before,
            rel_after=rel_after,
            delta_rel=delta_rel,
            identity_residual=identity_residual,
            inequality_margin=-predicted,
            tolerance=tol,
            verdict=verdict,
            fixed_point_residual=fixed_point_residual,
            coupling=coupling,
            flags=flags,
        )

    def monotonicity_check(self, rho: DensityMatrix, sigma: DensityMatrix, channel: QuantumChannel) -> MonotonicityCheck:
        if rho.dim != sigma.dim:
            raise DimensionMismatchError("monotonicity_gap", rho.dim, sigma.dim)
        before = relative_entropy(rho, sigma)
        after = relative_entropy(channel.apply(rho), channel.apply(sigma))
        if np.isinf(before):
            return MonotonicityCheck(rel_before=before, rel_after=after, gap=None, comparable=False)
        return MonotonicityCheck(rel_before=before, rel_after=after, gap=before - after, comparable=True)

    def monotonicity_gap(self, rho: DensityMatrix, sigma: DensityMatrix, channel: QuantumChannel) -> float:
        """S(rho||sigma) - S(N(rho)||N(sigma)); nan when S(rho||sigma) is infinite."""
        check = self.monotonicity_check(rho, sigma, channel)
        return check.gap if check.comparable else float("nan")

    def coupling_sweep(
        self,
        rho0: DensityMatrix,
        spec: EnsembleSpec,
        channel_factory: Callable[[float], QuantumChannel],
        couplings: Sequence[float],
    ) -> List[SecondLawLedger]:
        """One ledger per coupling strength, channel_factory(coupling) -> sigma-fixing channel."""
        if not couplings:
            raise EnsembleError("coupling_sweep needs at least one coupling")
        sigma = reference_state(spec)
        ledgers = [
            self.evaluate(rho0, channel_factory(float(c)), spec, sigma=sigma, coupling=float(c)) for c in couplings
        ]
        logger.info(f"Coupling sweep over {len(ledgers)} values: {sum(l.passed for l in ledgers)} passed")
        return ledgers


second_law = SecondLawEvaluator()


@dataclass(frozen=True, eq=False)
class ContourGrid:
    """Barycentric grid points (rows of p) with S(p || uniform) per row."""

    resolution: int
    points: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]

    def rows(self):
        for (p1, p2, p3), value in zip(self.points, self.values):
            yield float(p1), float(p2), float(p3), float(value)


def simplex_relative_entropy(p: Sequence[float]) -> float:
    """Classical S(p || uniform) in nats."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > settings.TRACE_TOL:
        raise ValueError(f"not a probability vector: {p!r}")
    return max(float(np.sum(rel_entr(p, 1.0 / p.size))), 0.0)


def contour_grid(resolution: int) -> ContourGrid:
    """S(p || 1/3) over the lattice i + j + k = resolution of the 2-simplex."""
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    index = np.array([(i, j) for i in range(resolution + 1) for j in range(resolution + 1 - i)], dtype=float)
    p1 = index[:, 0] / resolution
    p2 = index[:, 1] / resolution
    p3 = np.clip(1.0 - p1 - p2, 0.0, None)
    points = np.column_stack([p1, p2, p3])
    values = np.clip(rel_entr(points, 1.0 / 3.0).sum(axis=1), 0.0, None)
    return ContourGrid(resolution=resolution, points=points, values=values)


def shannon_entropy(points: np.ndarray) -> np.ndarray:
    return entr(points).sum(axis=-1)


def radial_profile(vertex: int, samples: int = 101) -> np.ndarray:
    """S(p || uniform) along the straight line from the centre to a vertex (t in [0, 1])."""
    if vertex not in (0, 1, 2) or samples < 2:
        raise ValueError("vertex must be 0, 1 or 2 and samples at least 2")
    t = np.linspace(0.0, 1.0, samples)
    corner = np.zeros(3)
    corner[vertex] = 1.0
    points = (1.0 - t)[:, None] * np.full(3, 1.0 / 3.0) + t[:, None] * corner
    return np.clip(rel_entr(points, 1.0 / 3.0).sum(axis=1), 0.0, None)
