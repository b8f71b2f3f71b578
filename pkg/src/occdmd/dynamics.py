"""Ground-truth systems, RK4 trajectory generation and seeded measurement noise."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DivergenceError, InputError
from .trajectory import Trajectory

STEP_RTOL = 1e-9


@dataclass(frozen=True)
class OdeSystem:
    """Autonomous vector field ``xdot = field(x)``.

    ``field`` must accept a single state of shape (dim,) or a batch of shape
    (p, dim) and return an array of the same shape.
    """

    name: str
    dim: int
    field: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        return self.field(np.asarray(x, dtype=float))


def _duffing(x):
    x1 = x[..., 0]
    x2 = x[..., 1]
    return np.stack([x2, x1 - x1**3], axis=-1)


def duffing_energy(x):
    """Conserved energy x2^2/2 - x1^2/2 + x1^4/4 of the unforced, undamped Duffing oscillator."""
    x = np.asarray(x, dtype=float)
    x1 = x[..., 0]
    x2 = x[..., 1]
    return 0.5 * x2**2 - 0.5 * x1**2 + 0.25 * x1**4


def linear_system(name: str, matrix) -> OdeSystem:
    A = np.array(matrix, dtype=float)
    A.flags.writeable = False
    return OdeSystem(name, A.shape[0], lambda x: x @ A.T)


DUFFING = OdeSystem("duffing", 2, _duffing)
DECAY_1D = linear_system("decay1d", [[-1.0]])
DECAY_2D = linear_system("decay", [[-1.0, 0.0], [0.0, -1.0]])
SPIRAL = linear_system("spiral", [[-0.1, -1.0], [1.0, -0.1]])

SYSTEMS = {s.name: s for s in (DUFFING, DECAY_1D, DECAY_2D, SPIRAL)}


def get_system(name: str) -> OdeSystem:
    try:
        return SYSTEMS[name]
    except KeyError:
        raise InputError(f"unknown system {name!r}; available: {sorted(SYSTEMS)}") from None


def time_grid(duration: float, dt: float) -> np.ndarray:
    """Uniform sample times from 0 to ``duration``; the last step is shortened if needed."""
    duration = float(duration)
    dt = float(dt)
    if not (duration > 0 and dt > 0 and dt <= duration * (1 + STEP_RTOL)):
        raise InputError(f"need 0 < dt <= duration, got dt={dt}, duration={duration}")
    ratio = duration / dt
    K = int(round(ratio))
    if abs(ratio - K) <= STEP_RTOL * ratio:
        return np.arange(K + 1) * dt
    K = int(np.floor(ratio))
    return np.append(np.arange(K + 1) * dt, duration)


def rk4(field: Callable[[np.ndarray], np.ndarray], x0, times) -> np.ndarray:
    """Classical fourth-order Runge-Kutta on the given time nodes.

    Raises :class:`DivergenceError` at the first non-finite state.
    """
    times = np.asarray(times, dtype=float)
    x = np.array(x0, dtype=float)
    out = np.empty((times.size,) + x.shape)
    out[0] = x
    for k in range(times.size - 1):
        h = times[k + 1] - times[k]
        # overflow is reported below as a DivergenceError
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = field(x)
            k2 = field(x + 0.5 * h * k1)
            k3 = field(x + 0.5 * h * k2)
            k4 = field(x + h * k3)
            x_new = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x_new)):
            raise DivergenceError(
                f"non-finite state after t={times[k]:.6g}", last_state=x.copy(), last_time=float(times[k])
            )
        x = x_new
        out[k + 1] = x
    return out


def integrate_rk4(system: OdeSystem, x0, duration: float, dt: float) -> Trajectory:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (system.dim,):
        raise InputError(f"initial condition must have shape ({system.dim},), got {x0.shape}")
    times = time_grid(duration, dt)
    return Trajectory(times, rk4(system, x0, times))


@dataclass(frozen=True)
class EvalGrid:
    """Uniform tensor grid over the box ``[lo, hi]`` with ``counts`` nodes per axis."""

    lo: tuple
    hi: tuple
    counts: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        if not (len(lo) == len(hi) == len(counts)):
            raise InputError("grid corners and counts must have the same dimension")
        if any(c < 1 for c in counts):
            raise InputError(f"grid counts must be >= 1, got {counts}")
        if any(b < a for a, b in zip(lo, hi)):
            raise InputError("grid upper corner must not be below the lower corner")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "counts", counts)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    def points(self) -> np.ndarray:
        """Grid nodes in row-major order (last coordinate varies fastest), shape (size, dim)."""
        axes = [np.linspace(a, b, c) if c > 1 else np.array([a]) for a, b, c in zip(self.lo, self.hi, self.counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class DatasetSpec:
    system: OdeSystem = DUFFING
    grid_min: tuple = (-3.0, -3.0)
    grid_max: tuple = (3.0, 3.0)
    grid_counts: tuple = (13, 13)
    duration: float = 1.0
    dt: float = 0.01
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        grid = EvalGrid(self.grid_min, self.grid_max, self.grid_counts)
        if grid.dim != self.system.dim:
            raise InputError(f"grid dimension {grid.dim} does not match system dimension {self.system.dim}")
        if not self.noise_std >= 0:
            raise InputError(f"noise_std must be nonnegative, got {self.noise_std}")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must fit in an unsigned 64-bit integer")
        time_grid(self.duration, self.dt)

    @property
    def grid(self) -> EvalGrid:
        return EvalGrid(self.grid_min, self.grid_max, self.grid_counts)

    @property
    def M(self) -> int:
        return self.grid.size

    def initial_conditions(self) -> np.ndarray:
        return self.grid.points()


def noise_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for the measurement noise of trajectory ``index``.

    Noise for sample k, component c is the (k * n + c)-th draw of this
    stream, so it depends only on (seed, index, k, c).
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def add_noise(traj: Trajectory, noise_std: float, seed: int, index: int) -> Trajectory:
    if noise_std == 0:
        return traj
    noise = noise_rng(seed, index).normal(0.0, noise_std, size=traj.states.shape)
    return Trajectory(traj.times, traj.states + noise)


def generate_dataset(spec: DatasetSpec) -> list[Trajectory]:
    """One trajectory per grid node (row-major), with optional i.i.d. Gaussian noise on every sample."""
    trajs = []
    for idx, x0 in enumerate(spec.initial_conditions()):
        try:
            tr = integrate_rk4(spec.system, x0, spec.duration, spec.dt)
        except DivergenceError as exc:
            raise DivergenceError(
                f"trajectory {idx} from initial condition {x0.tolist()} diverged: {exc}",
                last_state=exc.last_state, last_time=exc.last_time,
            ) from exc
        trajs.append(add_noise(tr, spec.noise_std, spec.seed, idx))
    return trajs


def halton_points(count: int, lo, hi, skip: int = 1) -> np.ndarray:
    """First ``count`` points of the unscrambled Halton sequence mapped to the box [lo, hi].

    Prefixes are nested, which makes this the sampler of choice for
    convergence-in-M studies. The first point (the lower corner) is skipped by default.
    """
    from scipy.stats import qmc

    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    u = qmc.Halton(d=lo.size, scramble=False).random(count + skip)[skip:]
    return lo + u * (hi - lo)


def true_field_grid(system: OdeSystem, grid: EvalGrid):
    """Grid nodes and the exact vector field there, as ``(points, values)``."""
    if grid.dim != system.dim:
        raise InputError(f"grid dimension {grid.dim} does not match system dimension {system.dim}")
    pts = grid.points()
    return pts, system(pts)
