import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from occdmd.errors import InputError
from occdmd.kernel import KernelParams, eval_kernel, eval_kernel_diff

coords = st.floats(-3, 3, allow_nan=False)
mus = st.floats(0.5, 20)


def points(n):
    return arrays(float, n, elements=coords)


def test_zero_dot_product():
    assert eval_kernel(KernelParams(5), [0, 0], [1, 2]) == 1.0


def test_orthogonal_inputs():
    assert eval_kernel(KernelParams(1), [1, 0], [0, 1]) == 1.0


def test_dot_product_equals_mu():
    assert eval_kernel(KernelParams(5), [1, 2], [1, 2]) == pytest.approx(math.e, rel=1e-15)


def test_kernel_diff_closed_trajectory():
    p = KernelParams(2.0)
    assert eval_kernel_diff(p, [0.3, -1.0], [1.0, 2.0], [1.0, 2.0]) == 0.0


def test_kernel_diff_at_origin():
    assert eval_kernel_diff(KernelParams(1), [0, 0], [2.5, -1.0], [0.1, 0.7]) == 0.0


def test_kernel_diff_value():
    got = eval_kernel_diff(KernelParams(5), [1, 0], [0, 0], [1, 0])
    assert got == pytest.approx(0.22140275816016985, rel=1e-14)


@pytest.mark.parametrize("mu", [0.0, -1.0, float("nan"), float("inf")])
def test_bad_mu(mu):
    with pytest.raises(InputError):
        KernelParams(mu)


def test_dimension_mismatch():
    with pytest.raises(InputError):
        eval_kernel(KernelParams(), [1.0, 2.0], [1.0])
    with pytest.raises(InputError):
        eval_kernel_diff(KernelParams(), [1.0], [1.0, 2.0], [0.0, 0.0])
    with pytest.raises(InputError):
        KernelParams().matrix(np.zeros((3, 2)), np.zeros((2, 3)))


@given(mus, points(3), points(3))
def test_symmetry_is_exact(mu, x, y):
    p = KernelParams(mu)
    assert eval_kernel(p, x, y) == eval_kernel(p, y, x)
    assert eval_kernel(p, x, y) > 0


@given(mus, points(2), points(2), points(2))
def test_kernel_diff_antisymmetric(mu, x, a, b):
    p = KernelParams(mu)
    assert eval_kernel_diff(p, x, a, b) == -eval_kernel_diff(p, x, b, a)


@settings(max_examples=50)
@given(mus, st.integers(1, 8), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_gram_psd(mu, m, n, seed):
    X = np.random.default_rng(seed).uniform(-3, 3, size=(m, n))
    ev = np.linalg.eigvalsh(KernelParams(mu).matrix(X, X))
    assert ev[0] >= -1e-10 * ev[-1]


@given(mus, points(2), points(2))
def test_matrix_matches_pointwise(mu, x, y):
    p = KernelParams(mu)
    K = p.matrix(np.array([x, y]), np.array([y, x]))
    assert K[0, 0] == eval_kernel(p, x, y)
    assert K[1, 1] == eval_kernel(p, y, x)
