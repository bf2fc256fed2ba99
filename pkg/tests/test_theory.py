import math

import numpy as np
import pytest

from eqlab import mlp, sdtask, theory
from eqlab.rand import make_rng, spawn_rng


def test_handcrafted_structure():
    params = theory.build_handcrafted(5, rho=2.0)
    assert params.m == 4
    assert params.D == 10
    np.testing.assert_array_equal(params.a, [1.0, 1.0, -2.0, -2.0])
    with pytest.raises(ValueError):
        theory.build_handcrafted(5, rho=0.0)


def test_handcrafted_same_always_positive():
    d = 16
    params = theory.build_handcrafted(d, rho=7.0)
    snap = mlp.zero_snapshot(params)
    rng = make_rng(0)
    z = rng.normal(0, 1 / math.sqrt(d), size=(10_000, d))
    f = mlp.forward_centered(params, snap, np.concatenate([z, z], axis=1))
    assert np.all(f > 0)


def test_handcrafted_swap_symmetry():
    d = 8
    params = theory.build_handcrafted(d, rho=1.5)
    snap = mlp.zero_snapshot(params)
    rng = make_rng(1)
    for _ in range(20):
        z1 = rng.normal(0, 1 / math.sqrt(d), d)
        z2 = rng.normal(0, 1 / math.sqrt(d), d)
        f_ab = mlp.forward_centered(params, snap, np.concatenate([z1, z2]))
        f_ba = mlp.forward_centered(params, snap, np.concatenate([z2, z1]))
        assert np.isclose(abs(f_ab), abs(f_ba))


def test_handcrafted_diff_accuracy_values():
    assert theory.handcrafted_diff_accuracy(1.0) == pytest.approx(0.5)
    assert theory.handcrafted_diff_accuracy(1e12) == pytest.approx(1.0, abs=1e-9)
    # frozen from a 1e6-sample Monte-Carlo of u - rho v, u, v half-normal
    assert theory.handcrafted_diff_accuracy(1.5) == pytest.approx(0.6257, abs=5e-4)
    with pytest.raises(ValueError):
        theory.handcrafted_diff_accuracy(-1.0)


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0, 10.0])
def test_handcrafted_network_matches_closed_form(rho):
    d = 64
    params = theory.build_handcrafted(d, rho)
    snap = mlp.zero_snapshot(params)
    rng = spawn_rng(2, "hc", rho)
    n = 100_000
    za = rng.normal(0, 1 / math.sqrt(d), size=(n, d))
    zb = rng.normal(0, 1 / math.sqrt(d), size=(n, d))
    f = mlp.forward_centered(params, snap, np.concatenate([za, zb], axis=1))
    assert abs(np.mean(f < 0) - theory.handcrafted_diff_accuracy(rho)) < 0.01


def test_rich_accuracy_prediction_values():
    assert theory.rich_accuracy_prediction(2) == 0.75
    # frozen from 0.5 + 0.5 * norm.cdf(sqrt(2(L^2-L)/(13(pi-2))))
    assert theory.rich_accuracy_prediction(3) == pytest.approx(0.907865, abs=1e-4)
    assert theory.rich_accuracy_prediction(5) == pytest.approx(0.974839, abs=1e-4)
    with pytest.raises(ValueError):
        theory.rich_accuracy_prediction(1)


def test_rich_accuracy_prediction_monotone_to_one():
    vals = [theory.rich_accuracy_prediction(L) for L in range(3, 60)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert theory.rich_accuracy_prediction(10_000) == pytest.approx(1.0, abs=1e-12)


def test_margin_matrix_requires_balance_and_noiseless():
    pool = sdtask.sample_symbol_pool(8, 4, seed=0)
    batch = sdtask.make_train_batch(pool, 40, sdtask.NoiseSpec(0.0), make_rng(1))
    same_only = sdtask.Batch(x=batch.x[batch.y == 1], y=batch.y[batch.y == 1])
    with pytest.raises(ValueError):
        theory.empirical_margin_matrix(same_only)
    noisy = sdtask.make_train_batch(pool, 40, sdtask.NoiseSpec(0.1), make_rng(2))
    with pytest.raises(ValueError):
        theory.empirical_margin_matrix(noisy)


def test_margin_matrix_circulant_structure():
    # fresh symbols realize the large-pool limit the construction assumes
    d = 16
    batch = sdtask.make_test_batch(3000, d, sdtask.NoiseSpec(0.0), spawn_rng(3, "m"))
    mm = theory.empirical_margin_matrix(batch, normalize=True)
    assert mm.normalization == 2 * d
    quad = np.concatenate([np.diag(mm.X[:d, d:]), np.diag(mm.X[d:, :d])])
    assert np.all(quad > 0.8) and np.all(quad < 1.2)
    mask = np.ones_like(mm.X, dtype=bool)
    mask[np.arange(d), np.arange(d) + d] = False
    mask[np.arange(d) + d, np.arange(d)] = False
    assert np.max(np.abs(mm.X[mask])) < 0.2


def test_margin_matrix_diagonal_vanishes():
    pool = sdtask.sample_symbol_pool(64, 16, seed=4)
    batch = sdtask.make_train_batch(pool, 30_000, sdtask.NoiseSpec(0.0), make_rng(5))
    mm = theory.empirical_margin_matrix(batch, normalize=True)
    assert np.max(np.abs(np.diag(mm.X))) < 0.1


def test_margin_matrix_frobenius_shrinks_with_P():
    d = 16
    ideal = np.zeros((2 * d, 2 * d))
    ideal[np.arange(d), np.arange(d) + d] = 1.0
    ideal[np.arange(d) + d, np.arange(d)] = 1.0
    pool = sdtask.sample_symbol_pool(64, d, seed=6)
    b1 = sdtask.make_train_batch(pool, 3000, sdtask.NoiseSpec(0.0), spawn_rng(6, "a"))
    b2 = sdtask.make_train_batch(pool, 30_000, sdtask.NoiseSpec(0.0), spawn_rng(6, "b"))
    f1 = np.linalg.norm(theory.empirical_margin_matrix(b1, normalize=True).X - ideal)
    f2 = np.linalg.norm(theory.empirical_margin_matrix(b2, normalize=True).X - ideal)
    assert f2 < f1


def test_ideal_circulant_eigensystem():
    d = 4
    vals, vecs = theory.ideal_circulant_eigensystem(d)
    np.testing.assert_array_equal(vals, [1, -1, 1, -1, 1, -1, 1, -1])
    ideal = np.zeros((2 * d, 2 * d))
    ideal[np.arange(d), np.arange(d) + d] = 1.0
    ideal[np.arange(d) + d, np.arange(d)] = 1.0
    assert np.max(np.abs(ideal @ vecs - vecs * vals)) < 1e-10
    assert np.max(np.abs(vecs.T @ vecs - np.eye(2 * d))) < 1e-10


@pytest.mark.parametrize("d", [1, 3, 8])
def test_eigenvector_half_alignment(d):
    vals, vecs = theory.ideal_circulant_eigensystem(d)
    for ell in range(2 * d):
        v1, v2 = vecs[:d, ell], vecs[d:, ell]
        align = v1 @ v2 / (np.linalg.norm(v1) * np.linalg.norm(v2))
        assert abs(align - vals[ell]) < 1e-10


def test_ntk_kernel_values():
    assert theory.ntk_kernel(1.0) == pytest.approx(1.0, abs=1e-12)
    assert theory.ntk_kernel(-1.0) == pytest.approx(0.0, abs=1e-12)
    assert theory.ntk_kernel(0.0) == pytest.approx(1 / (2 * math.pi), abs=1e-12)
    assert theory.ntk_kernel(1.0 + 5e-13) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        theory.ntk_kernel(1.0 + 1e-9)
    arr = theory.ntk_kernel(np.array([0.0, 1.0]))
    assert arr.shape == (2,)


def test_ntk_kernel_matches_random_features():
    # gradient inner products at random init, 2e5 feature draws
    rng = spawn_rng(7, "ntk")
    n_feat, d_in = 200_000, 8
    W = rng.normal(size=(n_feat, d_in))
    a = rng.normal(size=n_feat)
    grid = [-1.0, -0.5, 0.0, 0.5, 1.0]
    mc = []
    for u in grid:
        x = np.zeros(d_in)
        x[0] = 1.0
        xp = np.zeros(d_in)
        xp[0] = u
        xp[1] = math.sqrt(max(0.0, 1 - u * u))
        h, hp = W @ x, W @ xp
        mc.append(
            np.mean(np.maximum(h, 0) * np.maximum(hp, 0) + a * a * (h > 0) * (hp > 0) * (x @ xp))
        )
    mc = np.array(mc)
    exact = theory.ntk_kernel(np.array(grid))
    scale = float(mc @ exact / (mc @ mc))
    dev = np.abs(scale * mc - exact) / np.maximum(np.abs(exact), 1e-12)
    assert dev.max() < 0.05


def test_taylor_kernel_expectation():
    assert theory.taylor_kernel_expectation(0.0, 0.0) == pytest.approx(1 / (2 * math.pi))
    assert theory.taylor_kernel_expectation(0.0, 1 / 64) == pytest.approx(
        0.1628851, abs=1e-6
    )
    with pytest.raises(ValueError):
        theory.taylor_kernel_expectation(0.5, 0.1)


def test_taylor_matches_monte_carlo():
    d = 256
    u = np.clip(spawn_rng(8, "tk").normal(0, 1 / math.sqrt(d), 200_000), -1, 1)
    mc = float(np.mean(theory.ntk_kernel(u)))
    assert abs(mc - theory.taylor_kernel_expectation(0.0, 1 / d)) < 2e-3


def test_dual_classifier_constraints():
    pool = sdtask.sample_symbol_pool(12, 8, seed=0)
    theory.build_restricted_dual_classifier(pool, 1.0, 1.1)
    with pytest.raises(ValueError):
        theory.build_restricted_dual_classifier(pool, 1.0, 2.5)
    with pytest.raises(ValueError):
        theory.build_restricted_dual_classifier(pool, 1.0, 0.9)
    bad_pool = sdtask.sample_symbol_pool(10, 8, seed=0)
    with pytest.raises(ValueError):
        theory.build_restricted_dual_classifier(bad_pool, 1.0, 1.1)


def test_dual_classifier_anchor_layout():
    pool = sdtask.sample_symbol_pool(12, 8, seed=1)
    clf = theory.build_restricted_dual_classifier(pool, 1.0, 1.1)
    assert clf.same_symbols == (0, 1, 2, 3)
    assert clf.diff_pairs == ((4, 5), (6, 7), (8, 9), (10, 11))
    flat = [i for pair in clf.diff_pairs for i in pair]
    assert len(set(flat)) == len(flat)  # non-overlapping pairs
    assert set(flat).isdisjoint(clf.same_symbols)
    assert len(clf.coefficients) == 8
    assert np.all(clf.coefficients[:4] > 0) and np.all(clf.coefficients[4:] < 0)


def test_dual_classifier_mean_logit_signs():
    d = 32
    pool = sdtask.sample_symbol_pool(12, d, seed=2)
    bplus, bminus = theory.balanced_dual_coefficients(d)
    clf = theory.build_restricted_dual_classifier(pool, bplus, bminus)
    rng = spawn_rng(9, "dl")
    half = 4000
    s = 1 / math.sqrt(d)
    zs = rng.normal(0, s, (half, d))
    za = rng.normal(0, s, (half, d))
    zb = rng.normal(0, s, (half, d))
    same_mean = clf.logits(np.concatenate([zs, zs], axis=1)).mean()
    diff_mean = clf.logits(np.concatenate([za, zb], axis=1)).mean()
    assert same_mean > 0
    assert diff_mean < 0


def test_lazy_scaling_exact_bound():
    fit = theory.lazy_scaling_curve(
        [8, 16, 32], math.exp(-1), lambda L, d: math.exp(-L / d**2)
    )
    assert fit.exponent == pytest.approx(2.0, abs=0.05)
    assert fit.points == [(8, 64), (16, 256), (32, 1024)]
    assert fit.censored == []


def test_lazy_scaling_censoring_and_validation():
    with pytest.raises(ValueError):
        theory.lazy_scaling_curve([], 0.5, lambda L, d: 0.0)
    with pytest.raises(ValueError):
        theory.lazy_scaling_curve([8, 16], 0.5, lambda L, d: 0.0)

    def stuck_at_32(L, d):
        return 1.0 if d == 32 else math.exp(-L / d**2)

    fit = theory.lazy_scaling_curve([8, 16, 32], math.exp(-1), stuck_at_32)
    assert fit.censored == [32]
    assert [p[0] for p in fit.points] == [8, 16]
