"""The simulated generation chain: target mixture, model, two datasets.

The target has K anchor-sampled components plus J unsampled ones; the
generative model adds L task-irrelevant components.  Anchor data sees
only the first K components, synthetic data is resampled from the model.
"""

import numpy as np

from rblab import (AffineTransform, GenerationConfig, anchor_distribution,
                   build_gt_gmm, build_model_m, convolve_noise,
                   pushforward_log_pdf, sample_anchor, sample_synthetic)

config = GenerationConfig(master_seed=11, noise_scale=0.2)
gt = build_gt_gmm(config)
model = build_model_m(gt, config)
print("ground truth components:", gt.n_components, "(K + J)")
print("model components:       ", model.n_components, "(K + J + L)")

anchor = sample_anchor(gt, config)
synthetic = sample_synthetic(model, config)
print("anchor rows:", anchor.n, "from components",
      sorted(set(anchor.component_labels.tolist())))
print("synthetic rows:", synthetic.n, "with noise_scale", config.noise_scale)

# the law of the anchor draw and the exact law of the noisy synthetic draw
print("anchor distribution weights:", anchor_distribution(gt, config.k_anchor).weights)
noisy_law = convolve_noise(model, config.noise_scale)
print("noise widens covariances by:",
      noisy_law.covariances[0][0, 0] - model.covariances[0][0, 0])

# prompts as reversible affine images of the anchor distribution
transform = AffineTransform(matrix=np.array([[2.0, 0.3], [0.0, 1.5]]),
                            offset=np.array([1.0, -1.0]))
x = transform.apply(gt.means[0])
print("pushforward log-density at the mapped first mean:",
      pushforward_log_pdf(anchor_distribution(gt, config.k_anchor), transform, x))
