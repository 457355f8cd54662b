"""Simulation of the synthetic-data generation process with mixtures.

A ground-truth mixture represents the target task: its first K components
are the only ones anchor data is sampled from, the next J are unsampled
task components.  The generative model extends the ground truth with L
task-irrelevant components and re-normalizes to uniform weights.
Synthetic data is resampled from the generative model, optionally with
isotropic revision noise added per row.

Each stage (ground-truth build, model build, anchor draw, synthetic draw,
noise draw) consumes its own sub-stream of the master seed, so changing
one stage's parameters never perturbs another stage's randomness; the
anchor rows never feed the synthetic draw (the stages form a chain
anchor -> model input -> synthetic).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gmm import DatasetMatrix, GaussianComponent, Gmm
from .seeding import (TAG_ANCHOR, TAG_GT, TAG_MODEL_M, TAG_NOISE,
                      TAG_SYNTHETIC, derive_seed)


@dataclass(frozen=True)
class GenerationConfig:
    """Knobs of the simulated generation process.

    k_anchor / j_unsampled components make up the ground truth;
    l_irrelevant extra components are added to the generative model.
    noise_scale is the standard deviation of the per-row revision noise
    applied to synthetic draws.
    """

    dim: int = 2
    k_anchor: int = 2
    j_unsampled: int = 2
    l_irrelevant: int = 2
    n_per_anchor_component: int = 50
    n_resample: int = 1000
    noise_scale: float = 0.0
    mean_box: float = 6.0
    cov_scale: float = 1.0
    irrelevant_weight: float = 0.04
    master_seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if self.k_anchor < 1:
            raise ValueError("k_anchor must be at least 1")
        if self.j_unsampled < 0 or self.l_irrelevant < 0:
            raise ValueError("component counts must be nonnegative")
        if self.n_per_anchor_component < 1:
            raise ValueError("n_per_anchor_component must be at least 1")
        if self.n_resample < 1:
            raise ValueError("n_resample must be at least 1")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        if self.mean_box <= 0 or self.cov_scale <= 0:
            raise ValueError("mean_box and cov_scale must be positive")
        if not 0.0 < self.irrelevant_weight < 1.0:
            raise ValueError("irrelevant_weight must lie in (0, 1)")


@dataclass(frozen=True)
class AffineTransform:
    """Invertible affine map x -> matrix @ x + offset."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float, copy=True)
        offset = np.atleast_1d(np.array(self.offset, dtype=float, copy=True))
        d = offset.shape[0]
        if matrix.shape != (d, d):
            raise ValueError(f"matrix must be {d}x{d}, got {matrix.shape}")
        sign, log_abs_det = np.linalg.slogdet(matrix)
        if sign == 0 or not np.isfinite(log_abs_det) or abs(np.linalg.det(matrix)) <= 1e-12:
            raise ValueError("transform matrix is singular")
        matrix.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "_log_abs_det", float(log_abs_det))

    @property
    def dim(self) -> int:
        return self.offset.shape[0]

    @property
    def log_abs_det(self) -> float:
        return self._log_abs_det

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.matrix.T + self.offset

    def invert(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x) - self.offset
        out = np.linalg.solve(self.matrix, pts.T).T
        return out[0] if single else out


def _draw_components(rng: np.random.Generator, count: int, dim: int,
                     mean_box: float, cov_scale: float):
    """Placement rule shared by ground truth and model: uniform-box means,
    random SPD covariances cov_scale * (A A^T + d I) / d."""
    means = rng.uniform(-mean_box, mean_box, size=(count, dim))
    covs = []
    eye = np.eye(dim)
    for _ in range(count):
        a = rng.standard_normal((dim, dim))
        covs.append(cov_scale * (a @ a.T + dim * eye) / dim)
    return means, covs


def build_gt_gmm(config: GenerationConfig) -> Gmm:
    """Ground-truth mixture with K + J equally weighted components.

    The first K components (in order) are the anchor-sample part.
    Deterministic given config.master_seed.
    """
    rng = np.random.default_rng(derive_seed(config.master_seed, TAG_GT))
    count = config.k_anchor + config.j_unsampled
    means, covs = _draw_components(rng, count, config.dim,
                                   config.mean_box, config.cov_scale)
    weight = 1.0 / count
    return Gmm([GaussianComponent(weight=weight, mean=means[i], covariance=covs[i])
                for i in range(count)])


def build_model_m(gt: Gmm, config: GenerationConfig) -> Gmm:
    """Generative model: all ground-truth components plus L task-irrelevant
    ones drawn by the same placement rule.

    Each irrelevant component carries the fixed weight share
    config.irrelevant_weight (a pre-trained model mostly matches the task,
    with a small contamination mass per stray mode); the ground-truth part
    splits the remaining mass equally.  The total irrelevant mass is capped
    at 0.8 so the mixture stays a valid task model for any L.
    """
    expected = config.k_anchor + config.j_unsampled
    if gt.n_components != expected or gt.dim != config.dim:
        raise ValueError("gt mixture does not match the configuration")
    rng = np.random.default_rng(derive_seed(config.master_seed, TAG_MODEL_M))
    extra_means, extra_covs = _draw_components(rng, config.l_irrelevant,
                                               config.dim, config.mean_box,
                                               config.cov_scale)
    l_count = config.l_irrelevant
    w_irr = min(config.irrelevant_weight, 0.8 / l_count) if l_count else 0.0
    w_gt = (1.0 - l_count * w_irr) / expected
    comps = [GaussianComponent(weight=w_gt, mean=c.mean, covariance=c.covariance)
             for c in gt.components]
    comps += [GaussianComponent(weight=w_irr, mean=extra_means[i],
                                covariance=extra_covs[i])
              for i in range(l_count)]
    return Gmm(comps)


def sample_anchor(gt: Gmm, config: GenerationConfig) -> DatasetMatrix:
    """N draws from each of the first K ground-truth components."""
    k = config.k_anchor
    if k > gt.n_components:
        raise ValueError(
            f"anchor part has {k} components but mixture has {gt.n_components}")
    seed = derive_seed(config.master_seed, TAG_ANCHOR)
    rng = np.random.default_rng(seed)
    n_each = config.n_per_anchor_component
    chols = gt.cholesky_factors
    blocks, labels = [], []
    for comp in range(k):
        z = rng.standard_normal((n_each, config.dim))
        blocks.append(gt.means[comp] + z @ chols[comp].T)
        labels.append(np.full(n_each, comp, dtype=int))
    return DatasetMatrix(rows=np.vstack(blocks), provenance="anchor",
                         seed=seed, component_labels=np.concatenate(labels))


def sample_synthetic(m: Gmm, config: GenerationConfig) -> DatasetMatrix:
    """n_resample draws from the generative model plus isotropic noise.

    Consumes only (m, config): the anchor rows never enter, and the noise
    uses its own sub-stream so noise_scale=0 reproduces the raw draws
    bit-exactly.
    """
    seed = derive_seed(config.master_seed, TAG_SYNTHETIC)
    base = m.sample(config.n_resample, seed)
    rows = base.rows
    if config.noise_scale > 0:
        noise_rng = np.random.default_rng(derive_seed(config.master_seed, TAG_NOISE))
        rows = rows + config.noise_scale * noise_rng.standard_normal(rows.shape)
    return DatasetMatrix(rows=rows, provenance="synthetic", seed=seed,
                         component_labels=base.component_labels)


def anchor_distribution(gt: Gmm, k_anchor: int) -> Gmm:
    """Restriction of the ground truth to its first K components,
    re-weighted to sum to 1: the distribution anchor data is drawn from."""
    if not 1 <= k_anchor <= gt.n_components:
        raise ValueError("k_anchor out of range")
    w = gt.weights[:k_anchor]
    w = w / w.sum()
    return Gmm([GaussianComponent(weight=float(w[i]), mean=c.mean,
                                  covariance=c.covariance)
                for i, c in enumerate(gt.components[:k_anchor])])


def convolve_noise(g: Gmm, noise_scale: float) -> Gmm:
    """Mixture of the same components with noise_scale^2 I added to every
    covariance: the exact law of a draw from g plus isotropic noise."""
    if noise_scale < 0:
        raise ValueError("noise_scale must be nonnegative")
    if noise_scale == 0:
        return Gmm(list(g.components))
    bump = noise_scale ** 2 * np.eye(g.dim)
    return Gmm([GaussianComponent(weight=float(c.weight), mean=c.mean,
                                  covariance=c.covariance + bump)
                for c in g.components])


def pushforward_log_pdf(base: Gmm, t: AffineTransform, x: np.ndarray):
    """Log-density of the image of `base` under `t`, by change of variables:
    log f_base(t^-1(x)) - log |det t.matrix|."""
    if t.dim != base.dim:
        raise ValueError(f"dimension mismatch: {t.dim} vs {base.dim}")
    pulled = t.invert(x)
    return base.log_pdf(pulled) - t.log_abs_det
