"""Sampled trajectories, quadrature weights and occupation kernels.

Integrals along a trajectory always use the trajectory's own sample times as
quadrature nodes. Composite Simpson needs a uniform grid; when the number of
intervals is odd the last interval is closed with the trapezoid rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .kernel import KernelParams

QUAD_RULES = ("simpson", "trapezoid")
UNIFORM_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples ``states[k] = gamma(times[k])`` of one solution curve.

    ``states`` has shape (K + 1, n). At least three samples are required.
    """

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        x = np.array(self.states, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if t.ndim != 1:
            raise InputError(f"times must be 1-D, got shape {t.shape}")
        if x.ndim != 2 or x.shape[1] == 0:
            raise InputError(f"states must have shape (K+1, n), got {x.shape}")
        if t.size != x.shape[0]:
            raise InputError(f"{t.size} times but {x.shape[0]} states")
        if t.size < 3:
            raise InputError(f"a trajectory needs at least 3 samples, got {t.size}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
            raise InputError("trajectory contains non-finite values")
        if np.any(np.diff(t) <= 0):
            k = int(np.argmax(np.diff(t) <= 0)) + 1
            raise InputError(f"times must be strictly increasing (violated at sample {k})")
        t.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", x)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def num_samples(self) -> int:
        return self.times.size

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def start(self) -> np.ndarray:
        return self.states[0]

    @property
    def end(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "simpson"

    def __post_init__(self):
        if self.rule not in QUAD_RULES:
            raise InputError(f"unknown quadrature rule {self.rule!r}; expected one of {QUAD_RULES}")

    def weights(self, times) -> np.ndarray:
        return quadrature_weights(times, self.rule)


def is_uniform(times, rtol: float = UNIFORM_RTOL) -> bool:
    h = np.diff(np.asarray(times, dtype=float))
    hbar = h.mean()
    return bool(np.max(np.abs(h - hbar)) <= rtol * hbar)


def quadrature_weights(times, rule: str = "simpson") -> np.ndarray:
    """Weights ``w`` such that ``w @ g(times)`` approximates the integral of g."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise InputError("need at least two quadrature nodes")
    h = np.diff(t)
    if np.any(h <= 0):
        raise InputError("quadrature nodes must be strictly increasing")
    if rule == "trapezoid":
        w = np.zeros_like(t)
        w[:-1] += h / 2
        w[1:] += h / 2
        return w
    if rule != "simpson":
        raise InputError(f"unknown quadrature rule {rule!r}")
    if not is_uniform(t):
        raise InputError(
            "simpson rule requires a uniform time grid "
            f"(step sizes vary by {np.ptp(h) / h.mean():.3g} relative); use the trapezoid rule"
        )
    K = t.size - 1
    dt = (t[-1] - t[0]) / K
    w = np.zeros_like(t)
    even = K - (K % 2)
    if even >= 2:
        w[:even + 1:2] = 2.0
        w[1:even:2] = 4.0
        w[0] = w[even] = 1.0
        w[:even + 1] *= dt / 3.0
    if K % 2:
        # one trailing interval left over
        w[K - 1] += dt / 2
        w[K] += dt / 2
    return w


def _point(x, n):
    v = np.asarray(x, dtype=float)
    if v.shape != (n,):
        raise InputError(f"expected a point of dimension {n}, got shape {v.shape}")
    return v


def occupation_eval(traj: Trajectory, x, params: KernelParams, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Occupation kernel of ``traj`` evaluated at ``x``: integral of K(x, gamma(t)) dt."""
    x = _point(x, traj.n)
    w = quad.weights(traj.times)
    return float(w @ params.matrix(traj.states, x[None, :])[:, 0])


def occupation_eval_many(traj: Trajectory, X, params: KernelParams, quad: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Vectorised :func:`occupation_eval` over the rows of ``X`` (shape (p, n))."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != traj.n:
        raise InputError(f"expected points of dimension {traj.n}, got {X.shape[1]}")
    w = quad.weights(traj.times)
    return params.matrix(X, traj.states) @ w


def occupation_inner(traj_i: Trajectory, traj_j: Trajectory, params: KernelParams,
                     quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Inner product of two occupation kernels (tensor-product quadrature of the double integral)."""
    if traj_i.n != traj_j.n:
        raise InputError(f"dimension mismatch: {traj_i.n} vs {traj_j.n}")
    wi = quad.weights(traj_i.times)
    wj = quad.weights(traj_j.times)
    return float(wi @ params.matrix(traj_i.states, traj_j.states) @ wj)


def endpoint_displacement(traj: Trajectory) -> np.ndarray:
    return traj.end - traj.start


def central_difference(traj: Trajectory) -> np.ndarray:
    """Finite-difference velocity estimate at each sample (inspection only; not used for fitting)."""
    return np.gradient(traj.states, traj.times, axis=0, edge_order=2)
