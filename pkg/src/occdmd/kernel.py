"""Exponential dot-product kernel K(x, y) = exp(x.y / mu).

The kernel is the only one used for both the domain and range spaces. It is
exposed as a small frozen dataclass so alternative kernels only need to
provide ``__call__`` (one point pair) and ``matrix`` (all pairs of two point
sets); Gram assembly never looks inside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class KernelParams:
    """Width parameter ``mu`` of the exponential dot-product kernel."""

    mu: float = 5.0

    def __post_init__(self):
        mu = float(self.mu)
        if not np.isfinite(mu) or mu <= 0.0:
            raise InputError(f"kernel parameter mu must be positive and finite, got {self.mu!r}")
        object.__setattr__(self, "mu", mu)

    def __call__(self, x, y) -> float:
        return eval_kernel(self, x, y)

    def matrix(self, X, Y) -> np.ndarray:
        """Kernel matrix ``K[i, j] = K(X[i], Y[j])`` for point sets of shape (p, n), (q, n).

        Dot products are formed by an explicit elementwise product and sum
        rather than BLAS, so every entry is computed identically to
        :func:`eval_kernel` regardless of its position in the matrix.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if X.shape[1] != Y.shape[1]:
            raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
        dots = (X[:, None, :] * Y[None, :, :]).sum(axis=-1)
        return np.exp(dots / self.mu)


def _vec(x, name):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InputError(f"{name} must be a non-empty 1-D vector, got shape {v.shape}")
    return v


def eval_kernel(params: KernelParams, x, y) -> float:
    x = _vec(x, "x")
    y = _vec(y, "y")
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.size} vs {y.size}")
    return float(np.exp((x * y).sum() / params.mu))


def eval_kernel_diff(params: KernelParams, x, start, end) -> float:
    """Kernel difference K(x, end) - K(x, start).

    This is the function the adjoint Liouville operator assigns to the
    occupation kernel of a trajectory running from ``start`` to ``end``.
    """
    return eval_kernel(params, x, end) - eval_kernel(params, x, start)
