"""
Entropy-current checks on flat 1+1 dimensional grids.

Arrays are indexed [t, x] with the metric eta = diag(-1, +1). beta is stored
with a lower index, so a fluid at rest has beta_nu = (-1/T, 0).
"""
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.integrate import trapezoid

from ..core.exceptions import GridError
from ..core.logger import get_logger
from ..schemas.geometry import FIELD_COMPONENTS, BalanceRow, DiamondBalance, FieldGridPayload

logger = get_logger(__name__)

ETA = np.diag([-1.0, 1.0])

GRID_PRESETS = ("vacuum", "rest_fluid", "boosted_fluid", "gradient_beta", "stream", "source")


@dataclass(frozen=True, eq=False)
class FieldGrid:
    nx: int
    nt: int
    dx: float
    dt: float
    x0: float = 0.0
    t0: float = 0.0
    T: Optional[np.ndarray] = None  # (nt, nx, 2, 2) contravariant
    N: Optional[np.ndarray] = None  # (nt, nx, 2)
    beta: Optional[np.ndarray] = None  # (nt, nx, 2) covariant
    alpha: Optional[np.ndarray] = None  # (nt, nx)
    pressure: Optional[np.ndarray] = None  # (nt, nx)
    w: Optional[np.ndarray] = None  # (nt, nx, 2)
    current: Optional[np.ndarray] = None  # (nt, nx, 2) given s^mu

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0):
            raise GridError(f"grid spacings must be positive, got dx={self.dx}, dt={self.dt}")
        if self.nx < 1 or self.nt < 1:
            raise GridError(f"empty grid {self.nt}x{self.nx}")
        if self.T is not None:
            defect = float(np.max(np.abs(self.T - np.swapaxes(self.T, -1, -2))))
            if defect > 1e-12:
                raise GridError(f"energy-momentum tensor is not symmetric (defect {defect:.3e})")

    @property
    def shape(self):
        return (self.nt, self.nx)

    def coordinates(self):
        """(t, x) mesh arrays of shape (nt, nx)."""
        t = self.t0 + self.dt * np.arange(self.nt)
        x = self.x0 + self.dx * np.arange(self.nx)
        return np.meshgrid(t, x, indexing="ij")

    @classmethod
    def from_payload(cls, payload: FieldGridPayload) -> "FieldGrid":
        arrays: Dict[str, np.ndarray] = {}
        for name, values in payload.fields.items():
            shape = (payload.nt, payload.nx)
            components = FIELD_COMPONENTS[name]
            if name == "T":
                shape += (2, 2)
            elif components == 2:
                shape += (2,)
            arrays[name] = np.asarray(values, dtype=float).reshape(shape)
        return cls(nx=payload.nx, nt=payload.nt, dx=payload.dx, dt=payload.dt, x0=payload.x0, t0=payload.t0, **arrays)

    def to_payload(self) -> FieldGridPayload:
        fields = {}
        for name in FIELD_COMPONENTS:
            value = getattr(self, name)
            if value is not None:
                fields[name] = [float(v) for v in np.asarray(value).reshape(-1)]
        return FieldGridPayload(nx=self.nx, nt=self.nt, dx=self.dx, dt=self.dt, x0=self.x0, t0=self.t0, fields=fields)


def raise_index(covector: np.ndarray) -> np.ndarray:
    return covector @ ETA  # eta is diagonal and its own inverse


def entropy_current(grid: FieldGrid) -> np.ndarray:
    """s^mu = -beta_nu T^{mu nu} - alpha N^mu + w^mu, with w^mu = p beta^mu by default."""
    missing = [name for name in ("T", "N", "beta", "alpha") if getattr(grid, name) is None]
    if grid.w is None and grid.pressure is None:
        missing.append("pressure")
    if missing:
        raise GridError(f"entropy current needs fields {missing}")
    w = grid.w if grid.w is not None else grid.pressure[..., None] * raise_index(grid.beta)
    return -np.einsum("...n,...mn->...m", grid.beta, grid.T) - grid.alpha[..., None] * grid.N + w


def current_field(grid: FieldGrid) -> np.ndarray:
    """The given current when present, otherwise the candidate entropy current."""
    return grid.current if grid.current is not None else entropy_current(grid)


def _check_size(field: np.ndarray):
    if field.shape[0] < 3 or field.shape[1] < 3:
        raise GridError(f"finite differences need at least 3 points per axis, grid is {field.shape[:2]}")


def divergence(current: np.ndarray, dx: float, dt: float) -> np.ndarray:
    """d_t s^0 + d_x s^1; second order centred inside, second order one-sided at the edges."""
    _check_size(current)
    return np.gradient(current[..., 0], dt, axis=0, edge_order=2) + np.gradient(
        current[..., 1], dx, axis=1, edge_order=2
    )


def killing_residual(grid: FieldGrid) -> np.ndarray:
    """max_{mu,nu} |d_mu beta_nu + d_nu beta_mu| + |d alpha| per grid point."""
    if grid.beta is None or grid.alpha is None:
        raise GridError("Killing residual needs beta and alpha")
    _check_size(grid.beta)
    spacing = (grid.dt, grid.dx)
    d = np.empty(grid.shape + (2, 2))
    for mu in range(2):
        for nu in range(2):
            d[..., mu, nu] = np.gradient(grid.beta[..., nu], spacing[mu], axis=mu, edge_order=2)
    symmetric = np.abs(d + np.swapaxes(d, -1, -2)).max(axis=(-1, -2))
    d_alpha = np.hypot(
        np.gradient(grid.alpha, grid.dt, axis=0, edge_order=2),
        np.gradient(grid.alpha, grid.dx, axis=1, edge_order=2),
    )
    return symmetric + d_alpha


def diamond_balance(
    grid: FieldGrid,
    center: tuple,
    half_width: int,
    current: Optional[np.ndarray] = None,
    orientation: int = 1,
) -> DiamondBalance:
    """Divergence theorem over the diamond |t - t_c| + |x - x_c| <= half_width (index units).

    The volume term integrates the discrete divergence on the null lattice
    u = dt + dx, v = dt - dx with the trapezoid rule. The boundary term runs
    along the four null edges (trapezoid per edge) with the past cone counted
    with n^0 > 0 and the future cone with n^0 < 0. orientation=-1 reverses
    time and flips both integrals.
    """
    if orientation not in (1, -1):
        raise GridError(f"orientation must be +1 or -1, got {orientation}")
    if not np.isclose(grid.dx, grid.dt, rtol=1e-12, atol=0.0):
        raise GridError(f"diamond edges need dx == dt, got dx={grid.dx}, dt={grid.dt}")
    current = current_field(grid) if current is None else current
    kc, jc = (int(c) for c in center)
    h = grid.dx
    H = int(half_width)
    if H < 1:
        raise GridError("diamond half width must be at least one grid step")
    if kc - H < 1 or kc + H > grid.nt - 2 or jc - H < 1 or jc + H > grid.nx - 2:
        raise GridError(f"diamond at {center} with half width {H} touches the edge of a {grid.nt}x{grid.nx} grid")

    div = divergence(current, grid.dx, grid.dt)
    # null lattice with spacing 2 in (u, v) index units, corners included
    nodes = np.arange(-H, H + 1, 2)
    u, v = np.meshgrid(nodes, nodes, indexing="ij")
    samples = div[kc + (u + v) // 2, jc + (u - v) // 2]
    volume = 0.5 * h * h * trapezoid(trapezoid(samples, dx=2.0, axis=1), dx=2.0)

    # clockwise in the (x, t) plane: left, top, right, bottom, back to left
    corners = [(kc, jc - H), (kc + H, jc), (kc, jc + H), (kc - H, jc), (kc, jc - H)]
    boundary = 0.0
    for (k0, j0), (k1, j1) in zip(corners, corners[1:]):
        steps = np.arange(H + 1)
        ks = k0 + np.sign(k1 - k0) * steps
        js = j0 + np.sign(j1 - j0) * steps
        s = current[ks, js]
        integrand = s[:, 0] * np.sign(j1 - j0) * h - s[:, 1] * np.sign(k1 - k0) * h
        boundary += trapezoid(integrand)

    volume *= orientation
    boundary *= orientation
    return DiamondBalance(
        volume_integral=float(volume),
        boundary_integral=float(boundary),
        residual=float(abs(volume - boundary)),
        area=0.5 * (2.0 * H * h) ** 2,
    )


# ---------------------------------------------------------------------------
# Presets on the square [-1, 1]^2; level k halves the spacing k times.
# ---------------------------------------------------------------------------

DOMAIN_HALF_SIZE = 1.0
BASE_SPACING = 0.125
DIAMOND_HALF_SIZE = 0.75


def _ideal_fluid(t, x, energy, pressure, number, temperature, velocity, mu=0.0) -> Dict[str, np.ndarray]:
    gamma = 1.0 / np.sqrt(1.0 - velocity ** 2)
    u = np.stack([gamma * np.ones_like(t), gamma * velocity * np.ones_like(t)], axis=-1)
    energy = energy * np.ones_like(t)
    pressure = pressure * np.ones_like(t)
    T = (energy + pressure)[..., None, None] * u[..., :, None] * u[..., None, :] + pressure[..., None, None] * ETA
    beta_up = u / np.asarray(temperature * np.ones_like(t))[..., None]
    return {
        "T": T,
        "N": number * u,
        "beta": raise_index(beta_up),
        "alpha": (mu / temperature) * np.ones_like(t),
        "pressure": pressure,
    }


def _stream_current(t, x):
    """s = (d_x psi, -d_t psi) for psi = sin(1.3 t + 0.4) cos(0.9 x - 0.3) + 0.3 t^2 x; divergence free."""
    s0 = -0.9 * np.sin(1.3 * t + 0.4) * np.sin(0.9 * x - 0.3) + 0.3 * t ** 2
    s1 = -(1.3 * np.cos(1.3 * t + 0.4) * np.cos(0.9 * x - 0.3) + 0.6 * t * x)
    return np.stack([s0, s1], axis=-1)


SOURCE_RATE = 1.5

_PRESET_FIELDS: Dict[str, Callable] = {
    "vacuum": lambda t, x: {
        "T": np.zeros(t.shape + (2, 2)),
        "N": np.zeros(t.shape + (2,)),
        "beta": np.stack([-np.ones_like(t), np.zeros_like(t)], axis=-1),
        "alpha": np.zeros_like(t),
        "pressure": np.zeros_like(t),
    },
    "rest_fluid": lambda t, x: _ideal_fluid(t, x, 3.0, 1.0, 0.0, 1.0, 0.0),
    "boosted_fluid": lambda t, x: _ideal_fluid(t, x, 3.0, 1.0, 0.0, 1.0, 0.5),
    "gradient_beta": lambda t, x: _ideal_fluid(t, x, 3.0, 1.0, 0.0, 1.0 + 0.2 * x, 0.0),
    "stream": lambda t, x: {"current": _stream_current(t, x)},
    "source": lambda t, x: {"current": np.stack([SOURCE_RATE * t, np.zeros_like(t)], axis=-1)},
}


def preset_grid(name: str, level: int = 0) -> FieldGrid:
    if name not in _PRESET_FIELDS:
        raise GridError(f"unknown preset '{name}', expected one of {GRID_PRESETS}")
    spacing = BASE_SPACING / 2 ** level
    n = int(round(2 * DOMAIN_HALF_SIZE / spacing)) + 1
    grid = FieldGrid(nx=n, nt=n, dx=spacing, dt=spacing, x0=-DOMAIN_HALF_SIZE, t0=-DOMAIN_HALF_SIZE)
    t, x = grid.coordinates()
    return replace(grid, **_PRESET_FIELDS[name](t, x))


def largest_diamond(grid: FieldGrid, center: tuple) -> int:
    """Widest half width around center that keeps off the grid edge."""
    kc, jc = center
    return min(kc, jc, grid.nt - 1 - kc, grid.nx - 1 - jc) - 1


def balance_row(
    grid: FieldGrid,
    preset: str = "config",
    level: int = 0,
    half_width: Optional[int] = None,
    center: Optional[tuple] = None,
    orientation: int = 1,
) -> BalanceRow:
    """Diamond balance (default: widest diamond around the grid centre) plus pointwise residual maxima."""
    center = ((grid.nt - 1) // 2, (grid.nx - 1) // 2) if center is None else tuple(center)
    half_width = largest_diamond(grid, center) if half_width is None else half_width
    current = current_field(grid)
    balance = diamond_balance(grid, center, half_width, current, orientation)
    killing = None
    if grid.beta is not None and grid.alpha is not None:
        killing = float(np.max(killing_residual(grid)))
    return BalanceRow(
        preset=preset,
        level=level,
        dx=grid.dx,
        dt=grid.dt,
        half_width=half_width,
        volume_integral=balance.volume_integral,
        boundary_integral=balance.boundary_integral,
        residual=balance.residual,
        max_divergence=float(np.max(np.abs(divergence(current, grid.dx, grid.dt)))),
        max_killing_residual=killing,
    )


def convergence_study(preset: str, levels: int = 1) -> List[BalanceRow]:
    """Balance rows at levels 0..levels on a fixed physical domain; ratio = previous / current residual."""
    if levels < 0:
        raise GridError(f"refinement levels must be non-negative, got {levels}")
    rows: List[BalanceRow] = []
    for level in range(levels + 1):
        grid = preset_grid(preset, level)
        row = balance_row(grid, preset, level, half_width=int(round(DIAMOND_HALF_SIZE / grid.dx)))
        if rows and row.residual > 0.0:
            row.ratio = rows[-1].residual / row.residual
        rows.append(row)
        logger.debug(f"{preset} level {level}: residual {row.residual!r}")
    logger.info(f"Convergence study '{preset}' over {levels + 1} levels finished")
    return rows
