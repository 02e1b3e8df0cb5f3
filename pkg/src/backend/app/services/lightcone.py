"""
Light-cone simulator: a qubit chain evolved slice by slice inside a discrete
causal diamond by number-conserving gates and a thermal bath of strength
lambda, with the global and local relative entropies recorded per step.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg

from ..core.config import settings
from ..core.exceptions import (
    FactorizationError,
    FixedPointError,
    GateInvarianceError,
    LocalityBoundError,
    ScheduleError,
)
from ..core.logger import get_logger
from ..schemas.lightcone import (
    ChainSpec,
    DiamondSchedule,
    LocalEquilibriumCell,
    LocalityRow,
    SliceStep,
    TraceRecord,
)
from .channels import QuantumChannel, compose, embed, identity, thermal_qubit, unitary
from .ensembles import gibbs_state
from .spectra import HermitianOperator
from .states import (
    DensityMatrix,
    partial_trace,
    random_density_matrix,
    relative_entropy,
    tensor_all,
    trace_distance,
    von_neumann_entropy,
)

logger = get_logger(__name__)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=np.complex128)
OCCUPATION = np.diag([0.0, 1.0]).astype(np.complex128)
HOPPING = 0.5 * (np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y))

INITIAL_PRESETS = ("reference", "flipped", "random_inside", "matrix")


def site_hamiltonian(field: float) -> HermitianOperator:
    return HermitianOperator(field * OCCUPATION)


def energy_levels(chain: ChainSpec) -> np.ndarray:
    """Diagonal of H_ref = sum_i h_i n_i in the product basis (site 0 most significant)."""
    n = chain.n_sites
    index = np.arange(2 ** n)
    bits = (index[:, None] >> (n - 1 - np.arange(n))) & 1
    return bits @ np.asarray(chain.fields, dtype=float)


def reference_hamiltonian(chain: ChainSpec) -> HermitianOperator:
    return HermitianOperator(np.diag(energy_levels(chain)))


def build_reference(chain: ChainSpec) -> DensityMatrix:
    """Product of the per-site Gibbs states at inverse temperature beta."""
    return tensor_all(gibbs_state(site_hamiltonian(h), chain.beta) for h in chain.fields)


def hopping_gate(theta: float) -> np.ndarray:
    """exp(-i theta (XX + YY) / 2); conserves the number of excitations."""
    return linalg.expm(-1j * theta * HOPPING)


def _gate_channel(chain: ChainSpec, pair) -> QuantumChannel:
    left, right = pair
    gate = hopping_gate(chain.gate_time)
    local_h = np.kron(site_hamiltonian(chain.fields[left]).entries, np.eye(2)) + np.kron(
        np.eye(2), site_hamiltonian(chain.fields[right]).entries
    )
    residual = float(np.linalg.norm(gate @ local_h - local_h @ gate))
    if residual > settings.CHANNEL_TOL:
        logger.error(f"Gate on sites {pair} breaks invariance of the reference state")
        raise GateInvarianceError(pair, residual, settings.CHANNEL_TOL)
    return embed(unitary(gate, f"hop{tuple(pair)}"), left, chain.factor_dims)


def step_channel(
    chain: ChainSpec,
    step: SliceStep,
    coupling: Optional[float] = None,
    index: Optional[int] = None,
    sigma: Optional[DensityMatrix] = None,
) -> QuantumChannel:
    """Gate layer on the slice followed by a thermal bath on the slice's bath sites.

    The result is checked to fix the reference state; a failure names the step.
    """
    coupling = chain.coupling if coupling is None else coupling
    if step.hi >= chain.n_sites:
        raise ScheduleError(f"slice [{step.lo}, {step.hi}] leaves a chain of {chain.n_sites} sites")

    stages: List[QuantumChannel] = [_gate_channel(chain, pair) for pair in step.gates]
    if coupling > 0.0:
        for site in step.bath:
            bath = thermal_qubit(chain.beta, chain.fields[site], coupling)
            stages.append(embed(bath, site, chain.factor_dims))
    if not stages:
        stages.append(embed(identity(2), step.lo, chain.factor_dims))
    channel = compose(stages, f"slice[{step.lo},{step.hi}](lambda={coupling})")

    sigma = build_reference(chain) if sigma is None else sigma
    residual = channel.fixed_point_residual(sigma)
    if residual >= settings.LATTICE_FIXED_POINT_TOL:
        raise FixedPointError(residual, settings.LATTICE_FIXED_POINT_TOL, step=index)
    return channel


def _complement(chain: ChainSpec, region: Sequence[int]) -> List[int]:
    return [site for site in range(chain.n_sites) if site not in set(region)]


def run(
    chain: ChainSpec,
    schedule: DiamondSchedule,
    rho0: DensityMatrix,
    coupling: Optional[float] = None,
) -> List[TraceRecord]:
    """Evolve rho0 through every slice; record tau holds the state after tau steps."""
    coupling = chain.coupling if coupling is None else coupling
    try:
        schedule.check_chain(chain.n_sites)
    except ValueError as e:
        raise ScheduleError(str(e)) from e
    if rho0.dim != 2 ** chain.n_sites:
        raise FactorizationError(f"initial state has dimension {rho0.dim}, chain needs {2 ** chain.n_sites}")
    rho = rho0.with_factors(chain.factor_dims)

    sigma = build_reference(chain)
    levels = energy_levels(chain)
    region = schedule.footprint()
    outside = _complement(chain, region)
    sigma_local = partial_trace(sigma, region)
    outside_initial = partial_trace(rho, outside) if outside else None

    channels = [step_channel(chain, step, coupling, index=k, sigma=sigma) for k, step in enumerate(schedule.steps)]

    records: List[TraceRecord] = []
    previous = None
    for tau in range(schedule.n_steps + 1):
        if tau > 0:
            rho = channels[tau - 1].apply(rho)
        rel_global = relative_entropy(rho, sigma)
        drift = trace_distance(partial_trace(rho, outside), outside_initial) if outside else 0.0
        step = schedule.steps[tau - 1] if tau > 0 else None
        records.append(
            TraceRecord(
                coupling=coupling,
                tau=tau,
                rel_global=rel_global,
                rel_local=relative_entropy(partial_trace(rho, region), sigma_local),
                production=0.0 if previous is None else rel_global - previous,
                entropy_global=von_neumann_entropy(rho),
                energy=float(np.real(np.diag(rho.entries)) @ levels),
                outside_drift=drift,
                slice_lo=step.lo if step else None,
                slice_hi=step.hi if step else None,
            )
        )
        logger.debug(f"lambda={coupling} tau={tau} rel_global={rel_global!r}")
        previous = rel_global

    logger.info(
        f"Light-cone run lambda={coupling}: {schedule.n_steps} steps, "
        f"rel_global {records[0].rel_global:.6g} -> {records[-1].rel_global:.6g}"
    )
    return records


def locality_report(
    records: Sequence[TraceRecord],
    chain: Optional[ChainSpec] = None,
    schedule: Optional[DiamondSchedule] = None,
    tolerance: Optional[float] = None,
) -> List[LocalityRow]:
    """Per-step changes of the global and local relative entropies side by side.

    Only rel_local <= rel_global is enforced; the two changes are reported,
    not required to agree.
    """
    tol = settings.COMPARISON_TOL if tolerance is None else tolerance
    if schedule is not None and chain is not None:
        schedule.check_chain(chain.n_sites)
    rows: List[LocalityRow] = []
    previous: Dict[float, TraceRecord] = {}
    for record in records:
        margin = record.rel_global - record.rel_local
        if margin < -tol:
            raise LocalityBoundError(record.tau, record.rel_local, record.rel_global)
        before = previous.get(record.coupling)
        if before is None or record.tau == 0:
            d_global = d_local = 0.0
        else:
            d_global = record.rel_global - before.rel_global
            d_local = record.rel_local - before.rel_local
        rows.append(
            LocalityRow(
                coupling=record.coupling,
                tau=record.tau,
                delta_rel_global=d_global,
                delta_rel_local=d_local,
                difference=d_local - d_global,
                bound_margin=margin,
            )
        )
        previous[record.coupling] = record
    return rows


def sweep(
    chain: ChainSpec,
    schedule: DiamondSchedule,
    rho0: DensityMatrix,
    couplings: Sequence[float],
    max_workers: Optional[int] = None,
) -> List[List[TraceRecord]]:
    """Independent runs per coupling, in input order."""
    workers = settings.MAX_WORKERS if max_workers is None else max_workers
    couplings = [float(c) for c in couplings]
    if workers <= 1 or len(couplings) <= 1:
        return [run(chain, schedule, rho0, c) for c in couplings]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run(chain, schedule, rho0, c), couplings))


def local_equilibrium_profile(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    cell_size: int,
    threshold: Optional[float] = None,
) -> List[LocalEquilibriumCell]:
    """S(rho_A || sigma_A) over every contiguous cell A of cell_size sites."""
    threshold = settings.COMPARISON_TOL if threshold is None else threshold
    if rho.factor_dims is None or sigma.factor_dims != rho.factor_dims:
        raise FactorizationError("local equilibrium profile needs matching factor_dims on both states")
    n = len(rho.factor_dims)
    if not 1 <= cell_size <= n:
        raise FactorizationError(f"cell size {cell_size} outside 1..{n}")
    cells = []
    for start in range(n - cell_size + 1):
        sites = list(range(start, start + cell_size))
        value = relative_entropy(partial_trace(rho, sites), partial_trace(sigma, sites))
        cells.append(
            LocalEquilibriumCell(
                start=start,
                stop=start + cell_size - 1,
                rel_entropy=value,
                indistinguishable=value <= threshold,
            )
        )
    return cells


def initial_state(
    chain: ChainSpec,
    schedule: DiamondSchedule,
    preset: str,
    rng: Optional[np.random.Generator] = None,
    site: Optional[int] = None,
    matrix: Optional[DensityMatrix] = None,
) -> DensityMatrix:
    """Named initial states; sites outside the diamond always start in their Gibbs state."""
    sites = [gibbs_state(site_hamiltonian(h), chain.beta) for h in chain.fields]
    if preset == "reference":
        return tensor_all(sites)
    if preset == "flipped":
        region = schedule.footprint()
        site = region[len(region) // 2] if site is None else site
        if not 0 <= site < chain.n_sites:
            raise ScheduleError(f"flipped site {site} outside the chain")
        sites[site] = DensityMatrix.basis(1, 2)
        return tensor_all(sites)
    if preset == "random_inside":
        if rng is None:
            raise ValueError("random_inside needs a seeded generator")
        region = schedule.footprint()
        inside = random_density_matrix(rng, 2 ** len(region), factor_dims=(2,) * len(region))
        before = sites[: region[0]]
        after = sites[region[-1] + 1:]
        return tensor_all(before + [inside] + after)
    if preset == "matrix":
        if matrix is None:
            raise ValueError("matrix preset needs an explicit state")
        return matrix.with_factors(chain.factor_dims)
    raise ValueError(f"unknown initial state preset '{preset}', expected one of {INITIAL_PRESETS}")
