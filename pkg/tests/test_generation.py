"""Generation chain: ground truth, model, anchor/synthetic draws, pushforward."""

from dataclasses import replace

import numpy as np
import pytest

from rblab import (AffineTransform, GaussianComponent, GenerationConfig, Gmm,
                   anchor_distribution, build_gt_gmm, build_model_m,
                   convolve_noise, pushforward_log_pdf, sample_anchor,
                   sample_synthetic)


class TestConfig:
    def test_defaults_match_reference_setup(self):
        cfg = GenerationConfig()
        assert (cfg.dim, cfg.k_anchor, cfg.j_unsampled, cfg.l_irrelevant) == (2, 2, 2, 2)
        assert cfg.n_per_anchor_component == 50
        assert cfg.n_resample == 1000
        assert cfg.noise_scale == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            GenerationConfig(k_anchor=0)
        with pytest.raises(ValueError):
            GenerationConfig(j_unsampled=-1)
        with pytest.raises(ValueError):
            GenerationConfig(noise_scale=-0.1)
        with pytest.raises(ValueError):
            GenerationConfig(dim=0)


class TestGroundTruth:
    def test_default_component_count_and_weights(self):
        gt = build_gt_gmm(GenerationConfig(master_seed=1))
        assert gt.n_components == 4
        np.testing.assert_allclose(gt.weights, 0.25, rtol=0, atol=1e-15)

    def test_single_component_minimal_case(self):
        gt = build_gt_gmm(GenerationConfig(k_anchor=1, j_unsampled=0, master_seed=2))
        assert gt.n_components == 1
        assert gt.weights[0] == 1.0

    def test_bit_exact_determinism(self):
        cfg = GenerationConfig(master_seed=33)
        assert build_gt_gmm(cfg) == build_gt_gmm(cfg)

    def test_means_inside_box(self):
        cfg = GenerationConfig(master_seed=3, mean_box=10.0)
        gt = build_gt_gmm(cfg)
        assert np.all(np.abs(gt.means) <= 10.0)


class TestModelM:
    def test_default_has_six_components(self):
        cfg = GenerationConfig(master_seed=4)
        m = build_model_m(build_gt_gmm(cfg), cfg)
        assert m.n_components == 6
        # gt part splits the mass left over by the irrelevant contamination
        w_irr = cfg.irrelevant_weight
        np.testing.assert_allclose(m.weights[:4], (1 - 2 * w_irr) / 4,
                                   rtol=0, atol=1e-15)
        np.testing.assert_allclose(m.weights[4:], w_irr, rtol=0, atol=1e-15)
        assert m.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_irrelevant_mass_capped_for_large_l(self):
        cfg = GenerationConfig(l_irrelevant=30, irrelevant_weight=0.04,
                               master_seed=4)
        m = build_model_m(build_gt_gmm(cfg), cfg)
        assert m.weights[4:].sum() == pytest.approx(0.8, abs=1e-12)

    def test_no_irrelevant_part_is_reweighted_gt(self):
        cfg = GenerationConfig(l_irrelevant=0, master_seed=5)
        gt = build_gt_gmm(cfg)
        m = build_model_m(gt, cfg)
        assert m.n_components == gt.n_components
        np.testing.assert_array_equal(m.means, gt.means)
        np.testing.assert_array_equal(m.covariances, gt.covariances)
        np.testing.assert_allclose(m.weights, gt.weights, rtol=0, atol=1e-15)

    def test_sweep_upper_end(self):
        cfg = GenerationConfig(l_irrelevant=13, master_seed=6)
        m = build_model_m(build_gt_gmm(cfg), cfg)
        assert m.n_components == 17

    def test_gt_components_preserved_in_order(self):
        cfg = GenerationConfig(master_seed=7)
        gt = build_gt_gmm(cfg)
        m = build_model_m(gt, cfg)
        np.testing.assert_array_equal(m.means[:4], gt.means)
        np.testing.assert_array_equal(m.covariances[:4], gt.covariances)

    def test_config_mismatch_detected(self):
        cfg = GenerationConfig(master_seed=8)
        gt = build_gt_gmm(cfg)
        with pytest.raises(ValueError, match="does not match"):
            build_model_m(gt, replace(cfg, j_unsampled=5))


class TestSampleAnchor:
    def test_default_row_count(self):
        cfg = GenerationConfig(master_seed=9)
        ds = sample_anchor(build_gt_gmm(cfg), cfg)
        assert ds.n == 100  # K=2 components, 50 rows each
        assert ds.provenance == "anchor"

    def test_minimal_case(self):
        cfg = GenerationConfig(k_anchor=1, j_unsampled=0,
                               n_per_anchor_component=1, master_seed=10)
        ds = sample_anchor(build_gt_gmm(cfg), cfg)
        assert ds.n == 1
        assert ds.component_labels[0] == 0

    def test_labels_restricted_to_anchor_part(self):
        cfg = GenerationConfig(master_seed=11)
        ds = sample_anchor(build_gt_gmm(cfg), cfg)
        assert set(ds.component_labels.tolist()) <= set(range(cfg.k_anchor))

    def test_too_few_components_rejected(self):
        cfg = GenerationConfig(k_anchor=1, j_unsampled=0, master_seed=12)
        gt = build_gt_gmm(cfg)
        with pytest.raises(ValueError, match="anchor part"):
            sample_anchor(gt, replace(cfg, k_anchor=5))


class TestSampleSynthetic:
    def test_default_row_count(self):
        cfg = GenerationConfig(master_seed=13)
        m = build_model_m(build_gt_gmm(cfg), cfg)
        ds = sample_synthetic(m, cfg)
        assert ds.n == 1000
        assert ds.provenance == "synthetic"

    def test_zero_noise_equals_raw_draws_bit_exactly(self):
        cfg = GenerationConfig(master_seed=14, noise_scale=0.0)
        m = build_model_m(build_gt_gmm(cfg), cfg)
        ds = sample_synthetic(m, cfg)
        raw = m.sample(cfg.n_resample, ds.seed)
        assert np.array_equal(ds.rows, raw.rows)

    def test_noise_convolution_covariance(self):
        # empirical covariance of noisy single-component draws matches
        # Sigma + sigma^2 I (the convolution law) at n=1e5
        sigma = 0.7
        cov = np.array([[1.0, 0.4], [0.4, 2.0]])
        m = Gmm([GaussianComponent(1.0, np.array([1.0, -1.0]), cov)])
        cfg = GenerationConfig(k_anchor=1, j_unsampled=0, l_irrelevant=0,
                               n_resample=100_000, noise_scale=sigma,
                               master_seed=15)
        ds = sample_synthetic(m, cfg)
        emp = np.cov(ds.rows, rowvar=False, bias=True)
        np.testing.assert_allclose(emp, cov + sigma ** 2 * np.eye(2), atol=0.05)

    def test_markov_chain_independence_from_anchor(self):
        # synthetic rows depend only on (m, config): drawing or perturbing
        # the anchor set cannot change them
        cfg = GenerationConfig(master_seed=16)
        gt = build_gt_gmm(cfg)
        m = build_model_m(gt, cfg)
        before = sample_synthetic(m, cfg)
        _ = sample_anchor(gt, cfg)
        _ = sample_anchor(gt, replace(cfg, n_per_anchor_component=99))
        after = sample_synthetic(m, cfg)
        assert np.array_equal(before.rows, after.rows)

    def test_stage_streams_are_independent(self):
        # changing the noise scale must not perturb the base draws
        cfg0 = GenerationConfig(master_seed=17, noise_scale=0.0)
        cfg1 = replace(cfg0, noise_scale=0.5)
        m = build_model_m(build_gt_gmm(cfg0), cfg0)
        base = sample_synthetic(m, cfg0)
        noisy = sample_synthetic(m, cfg1)
        assert np.array_equal(noisy.component_labels, base.component_labels)
        diff = noisy.rows - base.rows
        assert np.all(diff != 0)  # every row got noise
        assert abs(diff.std() - 0.5) < 0.02


class TestDistributionHelpers:
    def test_anchor_distribution_reweights_first_k(self):
        cfg = GenerationConfig(master_seed=18)
        gt = build_gt_gmm(cfg)
        anchor_dist = anchor_distribution(gt, cfg.k_anchor)
        assert anchor_dist.n_components == 2
        np.testing.assert_allclose(anchor_dist.weights, 0.5, rtol=0, atol=1e-15)
        np.testing.assert_array_equal(anchor_dist.means, gt.means[:2])

    def test_convolve_noise_exact_covariance_shift(self):
        cfg = GenerationConfig(master_seed=19)
        m = build_model_m(build_gt_gmm(cfg), cfg)
        sigma = 0.3
        out = convolve_noise(m, sigma)
        np.testing.assert_array_equal(
            out.covariances, m.covariances + sigma ** 2 * np.eye(2))
        np.testing.assert_array_equal(out.means, m.means)
        assert convolve_noise(m, 0.0) == m


class TestAffineTransform:
    def test_singular_matrix_rejected(self):
        with pytest.raises(ValueError, match="singular"):
            AffineTransform(matrix=np.array([[1.0, 2.0], [2.0, 4.0]]),
                            offset=np.zeros(2))

    def test_apply_invert_round_trip(self):
        rng = np.random.default_rng(20)
        t = AffineTransform(matrix=rng.normal(size=(2, 2)) + 2 * np.eye(2),
                            offset=rng.normal(size=2))
        pts = rng.normal(size=(30, 2))
        np.testing.assert_allclose(t.invert(t.apply(pts)), pts, atol=1e-12)


class TestPushforward:
    def test_identity_transform_is_identity(self):
        cfg = GenerationConfig(master_seed=21)
        g = build_gt_gmm(cfg)
        t = AffineTransform(matrix=np.eye(2), offset=np.zeros(2))
        rng = np.random.default_rng(0)
        pts = rng.normal(scale=5, size=(100, 2))
        np.testing.assert_allclose(pushforward_log_pdf(g, t, pts),
                                   g.log_pdf(pts), atol=1e-12)

    def test_gaussian_closed_form(self):
        rng = np.random.default_rng(22)
        mean = rng.normal(size=2)
        a = rng.normal(size=(2, 2))
        cov = a @ a.T + np.eye(2)
        base = Gmm([GaussianComponent(1.0, mean, cov)])
        t = AffineTransform(matrix=rng.normal(size=(2, 2)) + 2 * np.eye(2),
                            offset=rng.normal(size=2))
        image = Gmm([GaussianComponent(
            1.0, t.apply(mean), t.matrix @ cov @ t.matrix.T)])
        pts = rng.normal(scale=4, size=(1000, 2))
        np.testing.assert_allclose(pushforward_log_pdf(base, t, pts),
                                   image.log_pdf(pts), atol=1e-10)

    def test_matches_component_wise_transform_oracle(self):
        # oracle: transform each component and evaluate the resulting mixture
        rng = np.random.default_rng(23)
        weights = rng.dirichlet(np.ones(3))
        comps = []
        for k in range(3):
            a = rng.normal(size=(2, 2))
            comps.append(GaussianComponent(weights[k], rng.uniform(-3, 3, 2),
                                           a @ a.T + np.eye(2)))
        base = Gmm(comps)
        t = AffineTransform(matrix=rng.normal(size=(2, 2)) + 2 * np.eye(2),
                            offset=rng.normal(size=2))
        image = Gmm([GaussianComponent(
            c.weight, t.apply(c.mean), t.matrix @ c.covariance @ t.matrix.T)
            for c in base.components])
        pts = rng.normal(scale=5, size=(1000, 2))
        np.testing.assert_allclose(pushforward_log_pdf(base, t, pts),
                                   image.log_pdf(pts), atol=1e-10)

    def test_pushforward_integrates_to_one_1d(self):
        base = Gmm([GaussianComponent(0.5, np.array([-1.0]), np.eye(1)),
                    GaussianComponent(0.5, np.array([2.0]), 0.5 * np.eye(1))])
        t = AffineTransform(matrix=np.array([[2.5]]), offset=np.array([1.0]))
        xs = np.linspace(-30, 40, 6000)[:, None]
        dens = np.exp(pushforward_log_pdf(base, t, xs))
        mass = dens.sum() * (xs[1, 0] - xs[0, 0])
        assert mass == pytest.approx(1.0, abs=1e-3)

    def test_dimension_mismatch(self):
        base = build_gt_gmm(GenerationConfig(master_seed=24))
        t = AffineTransform(matrix=np.eye(3), offset=np.zeros(3))
        with pytest.raises(ValueError, match="dimension"):
            pushforward_log_pdf(base, t, np.zeros(3))
