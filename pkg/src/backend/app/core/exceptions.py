"""
Exception hierarchy for the toolkit.

Every error carries a diagnostic message naming the offending quantity
(worst element, eigenvalue, residual, step index).
"""
from typing import Optional


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class NotHermitianError(ToolkitError):
    def __init__(self, row: int, col: int, deviation: float, tol: float):
        self.row = row
        self.col = col
        self.deviation = deviation
        super().__init__(
            f"matrix is not Hermitian: worst element ({row}, {col}) deviates "
            f"by {deviation:.3e} from its conjugate transpose (tolerance {tol:.1e})"
        )


class NonFiniteSpectralValueError(ToolkitError):
    def __init__(self, eigenvalue: float, value: float):
        self.eigenvalue = eigenvalue
        super().__init__(
            f"spectral function is not finite at eigenvalue {eigenvalue!r} (got {value!r})"
        )


class InvalidStateError(ToolkitError):
    """Density matrix fails the trace or positivity contract."""


class DimensionMismatchError(ToolkitError):
    def __init__(self, what: str, expected: int, got: int):
        super().__init__(f"{what}: expected dimension {expected}, got {got}")


class FactorizationError(ToolkitError):
    """Missing or inconsistent tensor factorization."""


class EnsembleError(ToolkitError):
    """Ensemble specification is incomplete or inconsistent."""


class NonCommutingChargesError(EnsembleError):
    def __init__(self, residual: float, tol: float):
        self.residual = residual
        super().__init__(
            f"H and N do not commute: ||[H, N]||_F = {residual:.3e} exceeds {tol:.1e}"
        )


class ChannelContractError(ToolkitError):
    """Kraus set or constructor parameters violate the CPTP contract."""


class FixedPointError(ToolkitError):
    def __init__(self, residual: float, tol: float, step: Optional[int] = None):
        self.residual = residual
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(
            f"channel does not fix the reference state{where}: "
            f"||N(sigma) - sigma||_1 = {residual:.3e} exceeds {tol:.1e}"
        )


class GateInvarianceError(ToolkitError):
    def __init__(self, sites, residual: float, tol: float):
        self.sites = tuple(sites)
        self.residual = residual
        super().__init__(
            f"gate on sites {self.sites} does not commute with the reference "
            f"Hamiltonian: commutator norm {residual:.3e} exceeds {tol:.1e}"
        )


class ScheduleError(ToolkitError):
    """Diamond schedule violates nesting or containment."""


class LocalityBoundError(ToolkitError):
    def __init__(self, tau: int, rel_local: float, rel_global: float):
        self.tau = tau
        super().__init__(
            f"relative entanglement entropy exceeds global relative entropy at "
            f"tau={tau}: {rel_local!r} > {rel_global!r}"
        )


class GridError(ToolkitError):
    """Field grid or diamond geometry is unusable."""


class ConfigError(ToolkitError):
    """Run configuration is invalid."""
