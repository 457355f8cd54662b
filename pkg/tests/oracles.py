"""Independent oracle implementations used only by the tests.

Everything here is deliberately naive (direct sums, explicit loops,
nearest-neighbor estimators) and shares no code path with the library
implementations it checks.
"""

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gamma


def direct_mixture_pdf(weights, means, covs, x):
    """Non-log-space mixture density by direct summation (small problems)."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for w, mu, cov in zip(weights, means, covs):
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        d = mu.shape[0]
        diff = x - mu
        norm = 1.0 / np.sqrt((2 * np.pi) ** d * np.linalg.det(cov))
        total += w * norm * np.exp(-0.5 * diff @ np.linalg.solve(cov, diff))
    return total


def direct_responsibilities(weights, means, covs, rows):
    """E-step posteriors via direct (non-log) density evaluation."""
    n = rows.shape[0]
    k = len(weights)
    out = np.zeros((n, k))
    for i in range(n):
        for j in range(k):
            out[i, j] = weights[j] * direct_mixture_pdf(
                [1.0], [means[j]], [covs[j]], rows[i])
        out[i] /= out[i].sum()
    return out


def brute_force_hsic(k, l):
    """Biased HSIC V-statistic by the quadruple-sum definition."""
    n = k.shape[0]
    term1 = 0.0
    for i in range(n):
        for j in range(n):
            term1 += k[i, j] * l[i, j]
    term2 = 0.0
    for i in range(n):
        for j in range(n):
            for q in range(n):
                term2 += k[i, j] * l[i, q]
    term3 = 0.0
    for i in range(n):
        for j in range(n):
            for q in range(n):
                for r in range(n):
                    term3 += k[i, j] * l[q, r]
    return term1 / n ** 2 - 2.0 * term2 / n ** 3 + term3 / n ** 4


def knn_entropy(samples, k=4):
    """Kozachenko-Leonenko nearest-neighbor differential entropy (nats)."""
    samples = np.asarray(samples, dtype=float)
    n, d = samples.shape
    tree = cKDTree(samples)
    # k+1 because the nearest neighbor of a point is itself
    dist, _ = tree.query(samples, k=k + 1)
    eps = dist[:, k]
    log_ball_volume = (d / 2.0) * np.log(np.pi) - np.log(gamma(d / 2.0 + 1.0))
    return (digamma(n) - digamma(k) + log_ball_volume
            + d * np.mean(np.log(eps)))
