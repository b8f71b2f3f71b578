import math

import numpy as np
import pytest

from occdmd.bench import run_lambda_sweep, default_lambdas
from occdmd.dynamics import DECAY_1D, DECAY_2D, DUFFING, DatasetSpec, duffing_energy, generate_dataset, integrate_rk4
from occdmd.errors import InputError, RankError
from occdmd.estimators import (
    Model,
    SingularTriple,
    eval_model,
    eval_singular_function,
    extract_modes,
    fit_okr,
    fit_sldmd,
    occupation_features,
    predict_flow,
    singular_triples,
)
from occdmd.kernel import KernelParams
from occdmd.operator_core import GramPack, build_gram_pack, pinv_svd
from occdmd.trajectory import QuadratureSpec, Trajectory, occupation_eval

from conftest import constant, rel_fro


def with_grams(pack, G_r=None, D=None):
    """Copy of ``pack`` with a substituted G_r and/or D."""
    return GramPack(
        G_r=pack.G_r if G_r is None else np.asarray(G_r, dtype=float),
        G_d=pack.G_d,
        D=pack.D if D is None else np.asarray(D, dtype=float),
        trajs=pack.trajs,
        quad=pack.quad,
        params_d=pack.params_d,
        params_r=pack.params_r,
    )


def closed_pack(M=3):
    trajs = []
    for k in range(M):
        t = np.linspace(0, 1, 11)
        x = np.column_stack([np.cos(2 * np.pi * t) + k, np.sin(2 * np.pi * t)])
        x[-1] = x[0]
        trajs.append(Trajectory(t, x))
    return build_gram_pack(trajs)


@pytest.fixture(scope="module")
def decay1d_model():
    trajs = [integrate_rk4(DECAY_1D, [x], 1.0, 0.01) for x in np.linspace(-1, 1, 10)]
    return fit_sldmd(build_gram_pack(trajs))


@pytest.fixture(scope="module")
def noisy_duffing():
    ds = generate_dataset(DatasetSpec(noise_std=1e-3, seed=1))
    return ds, build_gram_pack(ds)


class TestModel:
    def test_shape_checked(self, duffing_trajs):
        with pytest.raises(InputError):
            Model(np.zeros((2, 2)), duffing_trajs, KernelParams(), QuadratureSpec())
        with pytest.raises(InputError):
            Model(np.zeros((3, 3)), duffing_trajs, KernelParams(), QuadratureSpec())

    def test_sldmd_has_no_lambda(self, duffing_trajs):
        with pytest.raises(InputError):
            Model(np.zeros((2, 3)), duffing_trajs, KernelParams(), QuadratureSpec(), "sldmd", 0.1)


class TestFitSldmd:
    def test_closed_trajectories_give_zero_model(self):
        model = fit_sldmd(closed_pack())
        np.testing.assert_array_equal(model.A, 0.0)
        np.testing.assert_array_equal(eval_model(model, [0.3, 0.2]), 0.0)

    def test_identity_gram(self, duffing_pack):
        pk = with_grams(duffing_pack, G_r=np.eye(duffing_pack.M))
        np.testing.assert_allclose(fit_sldmd(pk).A, pk.D, rtol=1e-15)

    def test_linear_decay_1d(self, decay1d_model):
        X = np.linspace(-1, 1, 201)[:, None]
        err = np.abs(eval_model(decay1d_model, X)[:, 0] + X[:, 0]).max()
        assert err <= 1e-2

    def test_training_consistency_rank_deficient(self, duffing_pack):
        A = fit_sldmd(duffing_pack).A
        P = pinv_svd(duffing_pack.G_r)[0]
        lhs = A @ duffing_pack.G_r
        rhs = duffing_pack.D @ (P @ duffing_pack.G_r)
        assert rel_fro(lhs, rhs) <= 1e-6


class TestFitOkr:
    def test_large_lambda_vanishes(self, spiral_pack):
        lam = 1e12
        A = fit_okr(spiral_pack, lam).A
        assert np.linalg.norm(A, 2) <= np.linalg.norm(spiral_pack.D, 2) / lam * (1 + 1e-6)

    def test_small_lambda_matches_sldmd(self):
        rng = np.random.default_rng(2)
        B = rng.standard_normal((5, 5))
        base = build_gram_pack([constant(rng.uniform(-1, 1, 2), 1.0) for _ in range(5)])
        pk = with_grams(base, G_r=B @ B.T + np.eye(5), D=rng.standard_normal((2, 5)))
        assert rel_fro(fit_okr(pk, 1e-12).A, fit_sldmd(pk).A) <= 1e-6

    def test_gap_shrinks_with_lambda(self, spiral_pack):
        A_s = fit_sldmd(spiral_pack).A
        gaps = [rel_fro(fit_okr(spiral_pack, lam).A, A_s) for lam in (1e-4, 1e-8, 1e-12)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_solves_regularised_system(self, spiral_pack):
        lam = 0.3
        A = fit_okr(spiral_pack, lam).A
        resid = A @ (spiral_pack.G_r + lam * np.eye(spiral_pack.M)) - spiral_pack.D
        assert np.linalg.norm(resid) <= 1e-12 * np.linalg.norm(spiral_pack.D)

    def test_negative_lambda(self, spiral_pack):
        with pytest.raises(InputError):
            fit_okr(spiral_pack, -1.0)

    def test_zero_lambda_full_rank(self, spiral_pack):
        model = fit_okr(spiral_pack, 0.0)
        assert rel_fro(model.A, fit_sldmd(spiral_pack).A) <= 1e-12

    def test_zero_lambda_singular(self, duffing_trajs):
        pk = build_gram_pack([duffing_trajs[0], duffing_trajs[0]])
        with pytest.raises(RankError, match="fit_sldmd"):
            fit_okr(pk, 0.0)

    def test_noisy_duffing(self, noisy_duffing):
        ds, pk = noisy_duffing
        assert np.all(np.isfinite(fit_okr(pk, 1e-2).A))
        rows = run_lambda_sweep(ds, pk.params_d, pk.params_r, pk.quad, default_lambdas(), pack=pk)
        assert min(r.okr_err for r in rows) < rows[0].sldmd_err


class TestEvalModel:
    def test_zero_coefficients(self, duffing_trajs):
        model = Model(np.zeros((2, 3)), duffing_trajs, KernelParams(), QuadratureSpec(), "okr", 1.0)
        np.testing.assert_array_equal(eval_model(model, [1.0, 2.0]), [0.0, 0.0])

    def test_single_constant_trajectory(self):
        model = Model([[1.0]], [constant([0.0], 2.0)], KernelParams(5), QuadratureSpec())
        for x in (-2.0, 0.0, 1.5):
            assert eval_model(model, [x])[0] == pytest.approx(2.0, rel=1e-14)

    def test_batch_matches_single(self, decay1d_model):
        X = np.array([[-0.5], [0.25], [0.9]])
        batch = eval_model(decay1d_model, X)
        for k in range(3):
            np.testing.assert_allclose(eval_model(decay1d_model, X[k]), batch[k], rtol=1e-12)

    def test_duffing_at_equilibrium(self):
        pk = build_gram_pack(generate_dataset(DatasetSpec()))
        f = eval_model(fit_sldmd(pk), [1.0, 0.0])
        assert abs(f[1]) <= 1e-3

    def test_dimension_mismatch(self, decay1d_model):
        with pytest.raises(InputError):
            eval_model(decay1d_model, [1.0, 2.0])

    def test_integral_along_training_trajectory(self, spiral_pack):
        """Quadrature of f_hat along training trajectory j reproduces column j of D."""
        model = fit_sldmd(spiral_pack)
        for j, tr in enumerate(spiral_pack.trajs):
            w = spiral_pack.quad.weights(tr.times)
            integral = w @ eval_model(model, tr.states)
            np.testing.assert_allclose(integral, spiral_pack.D[:, j], rtol=1e-8, atol=1e-10)


class TestSingularTriples:
    def test_identity(self, duffing_pack):
        pk = with_grams(duffing_pack, G_r=np.eye(4), D=np.zeros((2, 4)))
        triples = singular_triples(pk)
        np.testing.assert_allclose([t.sigma for t in triples], 1.0)
        V = np.column_stack([t.v for t in triples])
        W = np.column_stack([t.w for t in triples])
        np.testing.assert_allclose(W @ V.T, np.eye(4), atol=1e-14)

    def test_diagonal(self, duffing_pack):
        pk = with_grams(duffing_pack, G_r=np.diag([4.0, 1.0]), D=np.zeros((2, 2)))
        np.testing.assert_allclose([t.sigma for t in singular_triples(pk)], [1.0, 0.25], rtol=1e-15)

    def test_duplicate_trajectory_rank(self, duffing_trajs):
        trajs = list(duffing_trajs) + [duffing_trajs[1]]
        pk = build_gram_pack(trajs)
        triples = singular_triples(pk)
        ev = np.linalg.eigvalsh(pk.G_r)
        rank = int(np.sum(ev > np.finfo(float).eps * pk.M * ev[-1]))
        assert rank == 3
        assert sum(t.sigma == 0.0 for t in triples) == pk.M - rank
        sig = [t.sigma for t in triples]
        assert sig == sorted(sig, reverse=True)

    def test_reconstructs_pseudoinverse(self, duffing_pack):
        triples = singular_triples(duffing_pack)
        recon = sum(t.sigma * np.outer(t.w, t.v) for t in triples)
        assert rel_fro(recon, pinv_svd(duffing_pack.G_r)[0]) <= 1e-10

    def test_coordinate_identity(self, duffing_pack):
        _, svd = pinv_svd(duffing_pack.G_r)
        lhs = pinv_svd(duffing_pack.G_r)[0] @ duffing_pack.G_d
        rhs = svd.W @ np.diag(svd.Sigma) @ svd.V.T @ duffing_pack.G_d
        assert rel_fro(rhs, lhs) <= 1e-10


class TestSingularFunctions:
    def test_zero_coefficients(self, duffing_pack):
        t = SingularTriple(1.0, np.zeros(duffing_pack.M), np.zeros(duffing_pack.M))
        for side in ("left", "right"):
            assert eval_singular_function(duffing_pack, t, side, [0.5, 0.5]) == 0.0

    def test_closed_trajectory_left_side(self):
        pk = closed_pack(M=1)
        t = singular_triples(pk)[0]
        for x in ([0.0, 0.0], [2.0, -1.0]):
            assert eval_singular_function(pk, t, "left", x) == 0.0

    def test_right_side_is_weighted_occupation_sum(self, duffing_pack):
        t = singular_triples(duffing_pack)[2]
        x = np.array([0.4, -1.3])
        expect = sum(wj * occupation_eval(tr, x, duffing_pack.params_r, duffing_pack.quad)
                     for wj, tr in zip(t.w, duffing_pack.trajs))
        got = eval_singular_function(duffing_pack, t, "right", x)
        assert got == pytest.approx(expect, rel=1e-12, abs=1e-12 * np.abs(t.w).sum())

    def test_left_side_is_weighted_kernel_difference_sum(self, duffing_pack):
        from occdmd.kernel import eval_kernel_diff

        t = singular_triples(duffing_pack)[0]
        x = np.array([-2.0, 0.7])
        expect = sum(vj * eval_kernel_diff(duffing_pack.params_d, x, tr.start, tr.end)
                     for vj, tr in zip(t.v, duffing_pack.trajs))
        got = eval_singular_function(duffing_pack, t, "left", x)
        assert got == pytest.approx(expect, rel=1e-12, abs=1e-12)

    def test_bad_side(self, duffing_pack):
        t = singular_triples(duffing_pack)[0]
        with pytest.raises(InputError):
            eval_singular_function(duffing_pack, t, "middle", [0.0, 0.0])
        with pytest.raises(InputError):
            eval_singular_function(duffing_pack, t, "left", [0.0])


class TestModes:
    def test_zero_displacements(self):
        np.testing.assert_array_equal(extract_modes(closed_pack()), 0.0)

    def test_identity_gram(self, duffing_pack):
        pk = with_grams(duffing_pack, G_r=np.eye(duffing_pack.M))
        xi = extract_modes(pk)
        _, svd = pinv_svd(np.eye(duffing_pack.M))
        np.testing.assert_allclose(xi, pk.D @ svd.V, rtol=1e-15)

    def test_factorisation(self, duffing_pack):
        xi = extract_modes(duffing_pack)
        _, svd = pinv_svd(duffing_pack.G_r)
        A = fit_sldmd(duffing_pack).A
        assert rel_fro(xi @ np.diag(svd.Sigma) @ svd.W.T, A) <= 1e-10


class TestPredictFlow:
    def test_zero_field(self, duffing_trajs):
        model = Model(np.zeros((2, 3)), duffing_trajs, KernelParams(), QuadratureSpec(), "okr", 1.0)
        tr = predict_flow(model, [0.5, -0.5], 1.0, 0.1)
        np.testing.assert_array_equal(tr.states, np.tile([0.5, -0.5], (tr.num_samples, 1)))

    def test_linear_decay(self, decay1d_model):
        tr = predict_flow(decay1d_model, [0.8], 1.0, 0.01)
        assert tr.end[0] == pytest.approx(0.8 * math.exp(-1), rel=2e-2)

    def test_duffing_energy(self):
        model = fit_sldmd(build_gram_pack(generate_dataset(DatasetSpec())))
        tr = predict_flow(model, [1.0, 0.0], 10.0, 0.05)
        drift = np.abs(duffing_energy(tr.states) - duffing_energy(tr.start)).max()
        assert drift <= 0.1
        assert np.abs(tr.states).max() < 3.5

    def test_bad_arguments(self, decay1d_model):
        with pytest.raises(InputError):
            predict_flow(decay1d_model, [0.0, 0.0], 1.0, 0.1)
        with pytest.raises(InputError):
            predict_flow(decay1d_model, [0.0], -1.0, 0.1)
