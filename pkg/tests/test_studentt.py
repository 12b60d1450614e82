import math

import numpy as np
import pytest
from scipy import stats

import alphafam as af
from alphafam import core, studentt

N2 = 3.0 / (4.0 * math.sqrt(5.0))


def random_params(d, alpha, seed):
    rng = np.random.default_rng(seed)
    a_mat = rng.normal(size=(d, d))
    return af.make_student_t(alpha, rng.normal(size=d), a_mat @ a_mat.T + d * np.eye(d))


class TestDensity:
    def test_alpha2_peak_value(self):
        p = af.make_student_t(2.0, [0.0], [[1.0]])
        assert studentt.density(p, [0.0]) == pytest.approx(N2, rel=1e-14)

    def test_alpha2_outside_support_is_zero(self):
        p = af.make_student_t(2.0, [0.0], [[1.0]])
        assert studentt.density(p, [3.0]) == 0.0
        assert studentt.log_density(p, [3.0]) == -math.inf

    def test_alpha_half_matches_t3_oracle(self):
        p = af.make_student_t(0.5, [0.0], [[1.0]])
        oracle = stats.t.pdf(1.2, df=3, loc=0.0, scale=math.sqrt(1.0 / 3.0))
        assert studentt.density(p, [1.2]) == pytest.approx(oracle, rel=1e-12)

    def test_positive_everywhere_iff_alpha_below_one(self):
        heavy = af.make_student_t(0.6, [0.0], [[1.0]])
        compactly = af.make_student_t(2.0, [0.0], [[1.0]])
        for x in (-50.0, -3.0, 0.0, 7.0, 40.0):
            assert studentt.density(heavy, [x]) > 0.0
        assert studentt.density(compactly, [7.0]) == 0.0

    def test_density_batch_matches_pointwise(self):
        p = random_params(2, 0.8, 7)
        pts = np.random.default_rng(8).normal(size=(20, 2))
        batch_vals = studentt.density_batch(p, pts)
        single = [studentt.density(p, x) for x in pts]
        assert np.allclose(batch_vals, single, rtol=1e-14)


class TestDecompose:
    def test_centered_unit_weights(self):
        p = af.make_student_t(0.5, [0.0], [[1.0]])
        dec, _ = studentt.decompose(p)
        assert dec.w1 == 0.0
        assert np.array_equal(dec.w2, [0.0])
        assert dec.w3 == pytest.approx([1.0], abs=1e-15)

    def test_d2_weight_blocks_match_matrix_arithmetic(self):
        # direct matrix arithmetic oracle at a valid order for d = 2
        alpha = 0.7
        mu = np.array([1.0, 0.0])
        p = af.make_student_t(alpha, mu, np.eye(2))
        dec, _ = studentt.decompose(p)
        b = (1.0 - alpha) / (2.0 * alpha - 2.0 * (1.0 - alpha))
        assert np.allclose(dec.w2, -2.0 * b * mu, rtol=1e-14)
        assert np.allclose(dec.w3, b * np.eye(2).ravel(), rtol=1e-14)
        assert dec.w1 == pytest.approx(b, rel=1e-14)

    @pytest.mark.parametrize("d,alpha,seed", [(1, 0.6, 1), (2, 0.8, 2), (3, 0.9, 3), (1, 2.0, 4), (2, 3.0, 5)])
    def test_reconstruction_matches_density(self, d, alpha, seed):
        p = random_params(d, alpha, seed)
        dec, desc = studentt.decompose(p)
        theta = af.pack_theta(p.mu, p.sigma_inv)
        rng = np.random.default_rng(seed + 100)
        if alpha < 1.0:
            pts = studentt.sample(p, 100, seed).data
        elif d == 1:
            pts = studentt.sample(p, 100, seed).data
        else:
            pts = p.mu + 0.05 * rng.normal(size=(100, d))
        for x in pts:
            dv = studentt.density(p, x)
            assert dv > 0.0
            rv = af.reconstruct_density(desc, theta, x)
            assert abs(rv - dv) / dv < 1e-12
            # the raw weight blocks rebuild the same bracket
            bracket = dec.bracket(x)
            assert p.norm_const * bracket ** (1.0 / (alpha - 1.0)) == pytest.approx(dv, rel=1e-12)

    def test_jacobian_blocks(self):
        p = random_params(2, 0.8, 11)
        _, desc = studentt.decompose(p)
        theta = af.pack_theta(p.mu, p.sigma_inv)
        jac = desc.w_jacobian(theta)
        b = p.b_alpha
        assert np.allclose(jac[:2, :2], -2.0 * b * p.sigma_inv, rtol=1e-14)
        assert np.allclose(jac[2:, :2], 0.0)
        assert np.allclose(jac[2:, 2:], b * np.eye(4), rtol=1e-14)
        # mu-gradient of the constant block
        g0 = desc.w0_grad(theta)
        assert np.allclose(g0[:2], 2.0 * b * p.sigma_inv @ p.mu, rtol=1e-13)
        assert np.allclose(g0[2:], b * np.outer(p.mu, p.mu).ravel(), rtol=1e-13)

    def test_jacobian_matches_finite_differences(self):
        p = random_params(2, 0.8, 12)
        _, desc = studentt.decompose(p)
        theta = af.pack_theta(p.mu, p.sigma_inv)
        h = 1e-7
        jac = desc.w_jacobian(theta)
        for r in range(theta.size):
            tp, tm = theta.copy(), theta.copy()
            tp[r] += h
            tm[r] -= h
            col = (desc.w_fn(tp) - desc.w_fn(tm)) / (2.0 * h)
            assert np.allclose(jac[:, r], col, atol=1e-6)


class TestSample:
    def test_deterministic_for_fixed_seed(self):
        p = af.make_student_t(0.7, [1.0], [[2.0]])
        a = studentt.sample(p, 500, 42).data
        b = studentt.sample(p, 500, 42).data
        c = studentt.sample(p, 500, 43).data
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_mean_within_three_se(self):
        p = af.make_student_t(0.5, [0.0], [[1.0]])
        x = studentt.sample(p, 200_000, 7).scalars()
        se = x.std(ddof=1) / math.sqrt(x.size)
        assert abs(x.mean()) <= 3.0 * se

    def test_quadratic_identity_within_three_se(self):
        # E[1 + b (X-mu)^2/sigma^2] = 1 + b for d = 1
        p = af.make_student_t(0.5, [0.0], [[1.0]])
        x = studentt.sample(p, 200_000, 11).scalars()
        y = 1.0 + p.b_alpha * x**2
        se = y.std(ddof=1) / math.sqrt(y.size)
        assert abs(y.mean() - (1.0 + p.b_alpha)) <= 3.0 * se

    def test_alpha2_draws_stay_in_support(self):
        p = af.make_student_t(2.0, [0.0], [[1.0]])
        x = studentt.sample(p, 50_000, 3).scalars()
        assert np.all(np.abs(x) <= math.sqrt(5.0))

    def test_covariance_within_five_percent(self):
        sig = np.array([[1.0, 0.4], [0.4, 2.0]])
        p = af.make_student_t(0.8, [0.0, 0.0], sig)
        draws = studentt.sample(p, 200_000, 12).data
        emp = np.cov(draws.T)
        assert np.linalg.norm(emp - sig) / np.linalg.norm(sig) < 0.05

    def test_multivariate_compact_sampling_unsupported(self):
        p = af.make_student_t(3.0, [0.0, 0.0], np.eye(2))
        with pytest.raises(core.UnsupportedConfigError):
            studentt.sample(p, 10, 0)


class TestScore:
    def test_location_block_vanishes_at_center(self):
        p = random_params(2, 0.8, 21)
        g = studentt.score(p, p.mu)
        assert np.allclose(g[:2], 0.0, atol=1e-15)

    @pytest.mark.parametrize("d,alpha,seed", [(1, 0.5, 31), (2, 0.8, 32), (1, 2.0, 33)])
    def test_matches_central_finite_differences(self, d, alpha, seed):
        p = random_params(d, alpha, seed)
        x = p.mu + 0.3 * np.ones(d)
        g = studentt.score(p, x)
        theta = af.pack_theta(p.mu, p.sigma_inv)
        h = 1e-6
        for r in range(theta.size):
            tp, tm = theta.copy(), theta.copy()
            tp[r] += h
            tm[r] -= h
            fd = (
                studentt.log_density_given_theta(tp, alpha, x)
                - studentt.log_density_given_theta(tm, alpha, x)
            ) / (2.0 * h)
            assert abs(g[r] - fd) / max(abs(fd), 1e-8) < 1e-5

    def test_boundary_raises(self):
        p = af.make_student_t(2.0, [0.0], [[1.0]])
        with pytest.raises(core.UndefinedScoreError):
            studentt.score(p, [math.sqrt(5.0)])
        with pytest.raises(core.UndefinedScoreError):
            studentt.score(p, [4.0])

    def test_zero_mean_within_three_se(self):
        p = af.make_student_t(0.5, [0.0], [[1.0]])
        draws = studentt.sample(p, 200_000, 9).data
        scores = studentt.score_batch(p, draws)
        assert np.all(np.isfinite(scores))
        means = scores.mean(axis=0)
        ses = scores.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
        assert np.all(np.abs(means) <= 3.0 * ses)

    def test_batch_agrees_with_single_point(self):
        p = random_params(2, 0.8, 41)
        pts = studentt.sample(p, 5, 2).data
        batch = studentt.score_batch(p, pts)
        for row, x in zip(batch, pts):
            assert np.allclose(row, studentt.score(p, x), rtol=1e-13)


class TestExpectationIdentity:
    @pytest.mark.parametrize("d,alpha,seed", [(1, 0.5, 11), (2, 0.8, 12), (3, 0.9, 13)])
    def test_mean_of_y_statistic(self, d, alpha, seed):
        p = random_params(d, alpha, seed + 50)
        draws = studentt.sample(p, 200_000, seed).data
        lam = p.sigma_inv
        quad_form = np.einsum("ni,ij,nj->n", draws, lam, draws)
        y = 1.0 + p.b_alpha * (
            quad_form - 2.0 * (lam @ p.mu) @ draws.T + p.mu @ lam @ p.mu
        )
        se = y.std(ddof=1) / math.sqrt(y.size)
        assert abs(y.mean() - (1.0 + d * p.b_alpha)) <= 3.0 * se
