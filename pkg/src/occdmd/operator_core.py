"""Gram matrices, displacement matrix, pseudoinverse and the finite-rank Liouville matrix.

Notation follows the estimator code: ``G_r`` is the Gram matrix of the
occupation kernels (range space), ``G_d`` the Gram matrix of the kernel
differences K_d(., end_i) - K_d(., start_i) (domain space) and ``D`` stacks
the endpoint displacements as columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .kernel import KernelParams
from .trajectory import QuadratureSpec, Trajectory, endpoint_displacement


def _check_trajs(trajs: Sequence[Trajectory]) -> int:
    if len(trajs) == 0:
        raise InputError("need at least one trajectory")
    n = trajs[0].n
    for k, tr in enumerate(trajs):
        if tr.n != n:
            raise InputError(f"trajectory {k} has dimension {tr.n}, expected {n}")
    return n


def _mirror_upper(G: np.ndarray) -> np.ndarray:
    return np.triu(G) + np.triu(G, 1).T


def gram_occupation(trajs: Sequence[Trajectory], params_r: KernelParams,
                    quad: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Occupation-kernel Gram matrix ``G[i, j] = <Gamma_j, Gamma_i>``.

    Only the upper triangle is computed; the lower triangle is mirrored.
    Each row is assembled with a single kernel block against the concatenated
    samples of trajectories ``i..M-1``.
    """
    _check_trajs(trajs)
    M = len(trajs)
    weights = [quad.weights(tr.times) for tr in trajs]
    sizes = np.array([tr.num_samples for tr in trajs])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    X = np.concatenate([tr.states for tr in trajs])
    w = np.concatenate(weights)
    G = np.zeros((M, M))
    for i, tr in enumerate(trajs):
        lo = offsets[i]
        block = weights[i] @ params_r.matrix(tr.states, X[lo:])
        G[i, i:] = np.add.reduceat(block * w[lo:], offsets[i:-1] - lo)
    return _mirror_upper(G)


def gram_kernel_diff(trajs: Sequence[Trajectory], params_d: KernelParams) -> np.ndarray:
    """Gram matrix of the kernel differences, from exact kernel evaluations at endpoints."""
    _check_trajs(trajs)
    S = np.array([tr.start for tr in trajs])
    E = np.array([tr.end for tr in trajs])
    k = params_d.matrix
    # entry (i, j) = K(e_j, e_i) - K(e_j, s_i) - K(s_j, e_i) + K(s_j, s_i)
    G = (k(E, E) - k(E, S)) - (k(S, E) - k(S, S))
    return _mirror_upper(G.T)


def displacement_matrix(trajs: Sequence[Trajectory]) -> np.ndarray:
    _check_trajs(trajs)
    return np.column_stack([endpoint_displacement(tr) for tr in trajs])


@dataclass(frozen=True, eq=False)
class GramPack:
    """Everything the estimators need from a trajectory set.

    ``trajs`` is kept so that fitted models and singular functions can be
    evaluated at new points.
    """

    G_r: np.ndarray
    G_d: np.ndarray
    D: np.ndarray
    trajs: tuple
    quad: QuadratureSpec
    params_d: KernelParams
    params_r: KernelParams

    @property
    def M(self) -> int:
        return self.G_r.shape[0]

    @property
    def n(self) -> int:
        return self.D.shape[0]


def build_gram_pack(trajs: Sequence[Trajectory], params_d: KernelParams = KernelParams(),
                    params_r: KernelParams = KernelParams(),
                    quad: QuadratureSpec = QuadratureSpec()) -> GramPack:
    trajs = tuple(trajs)
    return GramPack(
        G_r=gram_occupation(trajs, params_r, quad),
        G_d=gram_kernel_diff(trajs, params_d),
        D=displacement_matrix(trajs),
        trajs=trajs,
        quad=quad,
        params_d=params_d,
        params_r=params_r,
    )


@dataclass(frozen=True, eq=False)
class SvdResult:
    """SVD ``W @ diag(Sigma) @ V.T`` of a pseudoinverse.

    ``W`` and ``V`` are square orthogonal matrices; ``Sigma`` has
    ``min(W.shape[0], V.shape[0])`` entries, nonincreasing, with exact zeros
    past ``rank``.
    """

    W: np.ndarray
    Sigma: np.ndarray
    V: np.ndarray
    rank: int

    def reconstruct(self) -> np.ndarray:
        k = self.Sigma.size
        return (self.W[:, :k] * self.Sigma) @ self.V[:, :k].T


def default_cutoff(shape) -> float:
    return np.finfo(float).eps * max(shape)


def pinv_svd(A, rel_cutoff: float | None = None):
    """Moore-Penrose pseudoinverse by truncated SVD.

    Singular values ``s <= rel_cutoff * s_max`` are treated as zero. Returns
    ``(pinv, svd)`` where ``svd`` factors the *pseudoinverse*: its singular
    values are the reciprocals of the retained ones, sorted nonincreasing,
    and its left/right vectors are the input's right/left vectors.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise InputError(f"pinv_svd needs a non-empty 2-D matrix, got shape {A.shape}")
    if rel_cutoff is None:
        rel_cutoff = default_cutoff(A.shape)
    if rel_cutoff < 0:
        raise InputError(f"rel_cutoff must be nonnegative, got {rel_cutoff}")
    U, s, V = _svd(A)
    k = s.size
    rank = int(np.sum(s > rel_cutoff * s[0])) if s[0] > 0 else 0
    # largest 1/s comes from the smallest retained s
    order = np.concatenate([np.arange(rank)[::-1], np.arange(rank, k)])
    sigma = np.zeros(k)
    sigma[:rank] = 1.0 / s[:rank][::-1]
    W = V.copy()
    V = U.copy()
    W[:, :k] = W[:, order]
    V[:, :k] = V[:, order]
    pinv = (W[:, :rank] * sigma[:rank]) @ V[:, :rank].T
    return pinv, SvdResult(W=W, Sigma=sigma, V=V, rank=rank)


def _svd(A):
    """Full SVD ``A = U @ diag(s) @ V.T`` with ``s`` nonincreasing.

    Exactly symmetric input goes through a symmetric eigendecomposition, so
    the left and right singular vectors agree up to sign and the resulting
    pseudoinverse is symmetric to working precision. A general SVD of an
    ill-conditioned symmetric matrix only makes them agree to eps * cond.
    """
    if A.shape[0] == A.shape[1] and np.array_equal(A, A.T):
        lam, Q = np.linalg.eigh(A)
        order = np.argsort(-np.abs(lam), kind="stable")
        lam = lam[order]
        Q = Q[:, order]
        sign = np.where(lam < 0, -1.0, 1.0)
        return Q, np.abs(lam), Q * sign
    U, s, Vt = np.linalg.svd(A, full_matrices=True)
    return U, s, Vt.T


def finite_rank_matrix(G_r, G_d, rel_cutoff: float | None = None) -> np.ndarray:
    """Matrix representation ``G_r^+ G_d`` of the projected Liouville operator."""
    G_r = np.asarray(G_r, dtype=float)
    G_d = np.asarray(G_d, dtype=float)
    if G_r.ndim != 2 or G_r.shape[0] != G_r.shape[1] or G_r.shape != G_d.shape:
        raise InputError(f"expected two equal square matrices, got {G_r.shape} and {G_d.shape}")
    return pinv_svd(G_r, rel_cutoff)[0] @ G_d
