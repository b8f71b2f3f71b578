"""SLDMD and occupation kernel regression (OKR) models.

Both estimators produce a vector field of the form ``f_hat(x) = A @ r(x)``
where ``r(x)[j]`` is the occupation kernel of training trajectory ``j``
evaluated at ``x``. SLDMD takes ``A = D @ pinv(G_r)``; OKR solves
``A @ (G_r + lam * I) = D``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import rk4, time_grid
from .errors import DivergenceError, InputError, RankError
from .kernel import KernelParams
from .operator_core import GramPack, pinv_svd
from .trajectory import QuadratureSpec, Trajectory, occupation_eval_many

METHODS = ("sldmd", "okr")


@dataclass(frozen=True, eq=False)
class Model:
    A: np.ndarray
    trajs: tuple
    params_r: KernelParams
    quad: QuadratureSpec
    method: str = "sldmd"
    lam: float = 0.0

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        trajs = tuple(self.trajs)
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")
        if A.ndim != 2 or A.shape[1] != len(trajs):
            raise InputError(f"coefficient matrix has shape {A.shape}, expected (n, {len(trajs)})")
        if trajs and A.shape[0] != trajs[0].n:
            raise InputError(f"coefficient matrix has {A.shape[0]} rows, state dimension is {trajs[0].n}")
        if self.method == "sldmd" and self.lam != 0:
            raise InputError("an SLDMD model has no regularisation (lam must be 0)")
        if self.lam < 0:
            raise InputError(f"lam must be nonnegative, got {self.lam}")
        A.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "trajs", trajs)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def M(self) -> int:
        return self.A.shape[1]

    def __call__(self, x):
        return eval_model(self, x)


@dataclass(frozen=True, eq=False)
class SingularTriple:
    """One singular value with the coefficient vectors of its singular functions.

    The left singular function is ``v @ d`` (kernel differences) and the right
    one is ``w @ r`` (occupation kernels). Signs are arbitrary up to a
    simultaneous flip of ``v`` and ``w``.
    """

    sigma: float
    v: np.ndarray
    w: np.ndarray


def fit_sldmd(pack: GramPack, rel_cutoff: float | None = None) -> Model:
    """SLDMD model ``A = D @ pinv(G_r)``.

    The pseudoinverse is applied to ``D`` factor by factor rather than formed
    explicitly; with n << M this is cheaper and the sum runs in the same
    order as the mode factorisation ``xi @ diag(Sigma) @ W.T``.
    """
    svd = pinv_svd(pack.G_r, rel_cutoff)[1]
    r = svd.rank
    A = ((pack.D @ svd.W[:, :r]) * svd.Sigma[:r]) @ svd.V[:, :r].T
    return Model(A, pack.trajs, pack.params_r, pack.quad, "sldmd", 0.0)


def fit_okr(pack: GramPack, lam: float) -> Model:
    """Occupation kernel regression with ridge parameter ``lam``.

    ``lam = 0`` is accepted only when ``G_r`` has full numerical rank; use
    :func:`fit_sldmd` otherwise.
    """
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0:
        raise InputError(f"regularisation parameter must be a nonnegative finite number, got {lam}")
    M = pack.M
    if lam == 0:
        rank = pinv_svd(pack.G_r)[1].rank
        if rank < M:
            raise RankError(f"G_r is numerically singular (rank {rank} < {M}); use fit_sldmd for lam = 0")
    system = pack.G_r + lam * np.eye(M)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        try:
            At = scipy.linalg.solve(system, pack.D.T, assume_a="pos")
        except np.linalg.LinAlgError:
            # not numerically positive definite at tiny lam: symmetric indefinite solve
            try:
                At = scipy.linalg.solve(system, pack.D.T, assume_a="sym")
            except np.linalg.LinAlgError as exc:
                raise RankError(f"G_r + {lam:g} I is singular") from exc
    return Model(At.T, pack.trajs, pack.params_r, pack.quad, "okr", lam)


def occupation_features(trajs, X, params_r: KernelParams, quad: QuadratureSpec) -> np.ndarray:
    """Matrix ``R[p, j] = r_j(X[p])`` of occupation-kernel evaluations."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.column_stack([occupation_eval_many(tr, X, params_r, quad) for tr in trajs])


def eval_model(model: Model, x) -> np.ndarray:
    """Evaluate ``f_hat`` at one point (shape (n,)) or a batch of points (shape (p, n))."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.ndim != 2 or X.shape[1] != model.n:
        raise InputError(f"expected points of dimension {model.n}, got shape {x.shape}")
    out = occupation_features(model.trajs, X, model.params_r, model.quad) @ model.A.T
    return out[0] if single else out


def singular_triples(pack: GramPack, rel_cutoff: float | None = None) -> list[SingularTriple]:
    """Singular values and singular-function coefficients of the finite-rank Liouville operator.

    They come from the SVD of ``pinv(G_r)``, sorted by nonincreasing sigma.
    """
    svd = pinv_svd(pack.G_r, rel_cutoff)[1]
    return [SingularTriple(float(svd.Sigma[i]), svd.V[:, i].copy(), svd.W[:, i].copy()) for i in range(pack.M)]


def eval_singular_function(pack: GramPack, triple: SingularTriple, side: str, x) -> float | np.ndarray:
    """Evaluate the left (``v @ d``) or right (``w @ r``) singular function at ``x``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != pack.n:
        raise InputError(f"expected points of dimension {pack.n}, got shape {x.shape}")
    if side == "left":
        S = np.array([tr.start for tr in pack.trajs])
        E = np.array([tr.end for tr in pack.trajs])
        feats = pack.params_d.matrix(X, E) - pack.params_d.matrix(X, S)
        vals = feats @ triple.v
    elif side == "right":
        vals = occupation_features(pack.trajs, X, pack.params_r, pack.quad) @ triple.w
    else:
        raise InputError(f"side must be 'left' or 'right', got {side!r}")
    return float(vals[0]) if single else vals


def extract_modes(pack: GramPack, rel_cutoff: float | None = None) -> np.ndarray:
    """Liouville modes ``xi = D @ V`` (one column per singular triple)."""
    svd = pinv_svd(pack.G_r, rel_cutoff)[1]
    return pack.D @ svd.V


def predict_flow(model: Model, x0, horizon: float, dt: float) -> Trajectory:
    """Integrate the fitted field from ``x0`` with fixed-step RK4."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.n,):
        raise InputError(f"initial condition must have shape ({model.n},), got {x0.shape}")
    times = time_grid(horizon, dt)
    return Trajectory(times, rk4(lambda x: eval_model(model, x), x0, times))
