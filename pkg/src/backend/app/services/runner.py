"""
Run orchestration shared by the command line and the HTTP API: builds states
and channels from configs, runs the checks and renders CSV/JSON tables.
"""
import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from ..core.config import settings
from ..core.exceptions import ConfigError, LocalityBoundError
from ..core.logger import get_logger
from ..core.rng import make_rng, spawn_rngs
from ..schemas.configs import (
    ChannelConfig,
    ChannelKind,
    GeometryConfig,
    LightconeConfig,
    SecondLawConfig,
    StateConfig,
    StateKind,
)
from ..schemas.geometry import BalanceRow
from ..schemas.ledger import SecondLawLedger
from ..schemas.lightcone import DiamondSchedule, LocalityRow
from . import channels as ch
from .ensembles import EnsembleSpec, reference_state
from .geometry import FieldGrid, balance_row, convergence_study
from .lightcone import initial_state, locality_report, sweep
from .secondlaw import ContourGrid, SecondLawEvaluator, contour_grid
from .serialization import channel_from_payload, ensemble_from_payload, operator_from_payload, state_from_payload
from .spectra import HermitianOperator
from .states import DensityMatrix, random_density_matrix

logger = get_logger(__name__)

CONTOUR_COLUMNS = ["p1", "p2", "p3", "rel_entropy"]
LEDGER_COLUMNS = [
    "case",
    "ensemble_kind",
    "S_before",
    "S_after",
    "E_before",
    "E_after",
    "N_before",
    "N_after",
    "rel_before",
    "rel_after",
    "delta_rel",
    "identity_residual",
    "inequality_margin",
    "fixed_point_residual",
    "verdict",
]
TRACE_COLUMNS = [
    "coupling",
    "tau",
    "slice_lo",
    "slice_hi",
    "rel_global",
    "rel_local",
    "production",
    "entropy_global",
    "energy",
    "outside_drift",
    "delta_rel_global",
    "delta_rel_local",
    "difference",
    "bound_margin",
]
BALANCE_COLUMNS = [
    "preset",
    "level",
    "dx",
    "dt",
    "half_width",
    "volume_integral",
    "boundary_integral",
    "residual",
    "ratio",
    "max_divergence",
    "max_killing_residual",
]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def render_csv(columns: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
    """Fixed header, float repr cells, '\\n' line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def render_json(rows: Sequence[Dict[str, Any]]) -> str:
    return json.dumps(list(rows), indent=2, default=_cell) + "\n"


@dataclass
class RunResult:
    """Tabular output plus the violations that decide the exit code."""

    command: str
    columns: List[str]
    rows: List[Dict[str, Any]]
    violations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def render(self, fmt: str = "csv") -> str:
        return render_json(self.rows) if fmt == "json" else render_csv(self.columns, self.rows)

    def failure_report(self) -> Dict[str, Any]:
        return {"command": self.command, "violations": self.violations}


# ---------------------------------------------------------------------------
# contours
# ---------------------------------------------------------------------------

def run_contours(resolution: int) -> RunResult:
    try:
        grid: ContourGrid = contour_grid(resolution)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    rows = [dict(zip(CONTOUR_COLUMNS, row)) for row in grid.rows()]
    return RunResult("contours", CONTOUR_COLUMNS, rows)


# ---------------------------------------------------------------------------
# second law
# ---------------------------------------------------------------------------

def build_state(config: StateConfig, spec: EnsembleSpec, rng: np.random.Generator) -> DensityMatrix:
    dim = config.dim or spec.dim
    factor_dims = spec.factor_dims
    if config.kind == StateKind.MATRIX:
        return state_from_payload(config.matrix)
    if config.kind == StateKind.BASIS:
        return DensityMatrix.basis(config.index, dim, factor_dims)
    if config.kind == StateKind.PROBABILITIES:
        return DensityMatrix.from_probabilities(config.probabilities, factor_dims)
    if config.kind == StateKind.MAXIMALLY_MIXED:
        return DensityMatrix.maximally_mixed(dim, factor_dims)
    if config.kind == StateKind.RANDOM:
        return random_density_matrix(rng, dim, config.rank, factor_dims)
    return reference_state(spec)


def _hamiltonian(config: ChannelConfig, spec: EnsembleSpec) -> HermitianOperator:
    if config.matrix is not None:
        return operator_from_payload(config.matrix)
    if spec.hamiltonian is None:
        raise ConfigError(f"channel '{config.kind.value}' needs a Hamiltonian")
    return spec.hamiltonian


def build_channel(config: ChannelConfig, spec: EnsembleSpec, rng: np.random.Generator) -> ch.QuantumChannel:
    """Channel from a recursive recipe; the case's ensemble supplies defaults."""
    kind = config.kind
    dim = config.dim or spec.dim
    if kind == ChannelKind.KRAUS:
        return channel_from_payload(config.kraus, check=config.check)
    if kind == ChannelKind.IDENTITY:
        return ch.identity(dim)
    if kind == ChannelKind.UNITARY:
        return ch.unitary(config.matrix.to_array())
    if kind == ChannelKind.EVOLUTION:
        return ch.hamiltonian_evolution(_hamiltonian(config, spec), config.time)
    if kind == ChannelKind.DEPHASING:
        return ch.dephasing(_hamiltonian(config, spec))
    if kind == ChannelKind.DEPOLARIZING:
        return ch.depolarizing(config.p, dim)
    if kind == ChannelKind.PARTIAL_REPLACEMENT:
        target = reference_state(spec) if config.target is None else build_state(config.target, spec, rng)
        return ch.partial_replacement(target, config.p)
    if kind == ChannelKind.THERMAL_QUBIT:
        return ch.thermal_qubit(config.beta, config.gap, config.coupling)
    if kind == ChannelKind.MEASUREMENT_RESET:
        return ch.measurement_reset()
    if kind == ChannelKind.EMBED:
        return ch.embed(build_channel(config.inner, spec, rng), config.site, config.factor_dims)
    if kind == ChannelKind.COMPOSE:
        return ch.compose([build_channel(stage, spec, rng) for stage in config.stages])
    if kind == ChannelKind.MIX:
        return ch.mix(config.weights, [build_channel(stage, spec, rng) for stage in config.stages])
    if kind == ChannelKind.RANDOM:
        return ch.random_channel(rng, dim, config.ancilla_dim)
    return ch.random_unital_channel(rng, dim, config.n_unitaries)


def run_secondlaw(config: SecondLawConfig) -> RunResult:
    """One ledger per case; precondition failures propagate as toolkit errors."""
    evaluator = SecondLawEvaluator(tolerance=config.tolerance)
    rows: List[Dict[str, Any]] = []
    violations: List[Dict[str, Any]] = []
    for case, rng in zip(config.cases, spawn_rngs(config.seed, len(config.cases))):
        spec = ensemble_from_payload(case.ensemble)
        rho0 = build_state(case.rho0, spec, rng)
        channel = build_channel(case.channel, spec, rng)
        ledger: SecondLawLedger = evaluator.evaluate(rho0, channel, spec)
        row = {"case": case.name, **ledger.model_dump()}
        rows.append(row)
        if not ledger.passed:
            violations.append(
                {
                    "case": case.name,
                    "delta_rel": ledger.delta_rel,
                    "identity_residual": ledger.identity_residual,
                    "tolerance": ledger.tolerance,
                    "flags": ledger.flags,
                }
            )
    logger.info(f"Second-law run: {len(rows)} ledgers, {len(violations)} violations")
    return RunResult("secondlaw", LEDGER_COLUMNS, rows, violations)


# ---------------------------------------------------------------------------
# light cone
# ---------------------------------------------------------------------------

def build_schedule(config: LightconeConfig) -> DiamondSchedule:
    sched = config.schedule
    try:
        if sched.steps is not None:
            schedule = DiamondSchedule(steps=sched.steps)
        else:
            schedule = DiamondSchedule.build(
                config.chain.n_sites, sched.center, sched.n_steps, sched.max_half_width, sched.bath_sites
            )
        schedule.check_chain(config.chain.n_sites)
    except ValueError as e:
        raise ConfigError(f"invalid schedule: {e}") from e
    return schedule


def run_lightcone(config: LightconeConfig) -> RunResult:
    """Trace rows per (lambda, tau) joined with the locality comparison."""
    tol = settings.COMPARISON_TOL if config.tolerance is None else config.tolerance
    chain = config.chain
    schedule = build_schedule(config)
    matrix = state_from_payload(config.rho0.matrix) if config.rho0.matrix is not None else None
    try:
        rho0 = initial_state(chain, schedule, config.rho0.preset, make_rng(config.seed), config.rho0.site, matrix)
    except ValueError as e:
        raise ConfigError(str(e)) from e

    runs = sweep(chain, schedule, rho0, config.lambdas)
    rows: List[Dict[str, Any]] = []
    violations: List[Dict[str, Any]] = []
    for records in runs:
        try:
            locality: List[LocalityRow] = locality_report(records, chain, schedule, tol)
        except LocalityBoundError as e:
            violations.append({"coupling": records[0].coupling, "tau": e.tau, "reason": str(e)})
            locality = []
        by_tau = {row.tau: row for row in locality}
        for record in records:
            row = record.model_dump()
            if record.tau in by_tau:
                row.update(by_tau[record.tau].model_dump(exclude={"coupling", "tau"}))
            rows.append(row)
            if record.production > tol:
                violations.append(
                    {
                        "coupling": record.coupling,
                        "tau": record.tau,
                        "production": record.production,
                        "reason": "relative entropy increased",
                    }
                )
    return RunResult("lightcone", TRACE_COLUMNS, rows, violations)


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def run_geometry_preset(preset: str, refine: int = 0) -> RunResult:
    rows: List[BalanceRow] = convergence_study(preset, refine)
    return RunResult("geometry", BALANCE_COLUMNS, [row.model_dump() for row in rows])


def run_geometry(config: GeometryConfig) -> RunResult:
    grid = FieldGrid.from_payload(config.grid)
    row = balance_row(grid, "config", 0, config.half_width, config.center, config.orientation)
    return RunResult("geometry", BALANCE_COLUMNS, [row.model_dump()])
