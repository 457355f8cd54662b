"""Expectation-maximization fitting of Gaussian mixtures.

Fits a fixed number of full-covariance components to a sample matrix with
restarts, k-means++ (or random-row) initialization, covariance ridge
regularization, and deterministic seeding.  The per-iteration mean
log-likelihood trace is kept on the result for convergence diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gmm import DatasetMatrix, GaussianComponent, Gmm
from .seeding import derive_seed

_LOG_2PI = float(np.log(2.0 * np.pi))
_EMPTY_MASS = 1e-10
_TIE_TOL = 1e-12

INIT_METHODS = ("kmeans_pp", "random_points")


@dataclass(frozen=True)
class FitConfig:
    """EM hyperparameters.

    rel_tol is on the relative improvement of the mean per-sample
    log-likelihood between consecutive iterations; reg_covar is added to
    every covariance diagonal at each M-step.
    """

    n_components: int
    max_iter: int = 500
    rel_tol: float = 1e-7
    reg_covar: float = 1e-6
    n_restarts: int = 4
    init_method: str = "kmeans_pp"
    seed: int = 0

    def __post_init__(self):
        if self.n_components < 1:
            raise ValueError("n_components must be at least 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.reg_covar < 0:
            raise ValueError("reg_covar must be nonnegative")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be at least 1")
        if self.init_method not in INIT_METHODS:
            raise ValueError(f"init_method must be one of {INIT_METHODS}")


@dataclass(frozen=True)
class FittedGmm:
    """EM result: fitted mixture plus convergence diagnostics.

    final_log_likelihood is the mean per-sample log-likelihood of `model`
    on the training data; log_likelihood_trace holds that quantity for
    every EM iteration of the winning restart.
    """

    model: Gmm
    final_log_likelihood: float
    n_iter: int
    converged: bool
    restart_index: int
    log_likelihood_trace: tuple[float, ...] = field(default=(), repr=False)


def responsibilities(model: Gmm, data: DatasetMatrix) -> np.ndarray:
    """Posterior component memberships, shape (n, K); rows sum to 1.

    Computed in log space: w_k N(x; mu_k, Sigma_k) normalized per row.
    """
    lp = model.component_log_pdf(data.rows)
    with np.errstate(divide="ignore"):
        lp = lp + np.log(model.weights)[None, :]
    shift = lp.max(axis=1, keepdims=True)
    r = np.exp(lp - shift)
    return r / r.sum(axis=1, keepdims=True)


def fit_gmm(data: DatasetMatrix, config: FitConfig) -> FittedGmm:
    """Best-of-restarts EM fit of `config.n_components` components.

    Deterministic given config.seed: restart r uses the sub-seed derived
    from (seed, r).  The winner is the restart with the highest final mean
    log-likelihood; ties within 1e-12 go to the lowest restart index.
    """
    rows = np.asarray(data.rows, dtype=float)
    n, d = rows.shape
    if n < config.n_components:
        raise ValueError(
            f"insufficient samples: {n} rows for {config.n_components} components")
    if config.reg_covar == 0.0 and np.all(rows == rows[0]):
        raise ValueError("degenerate covariance: all rows identical with reg_covar=0")

    best: tuple[float, int] | None = None
    best_run = None
    for r in range(config.n_restarts):
        rng = np.random.default_rng(derive_seed(config.seed, r))
        run = _em_single(rows, config, rng)
        key = run[1][-1]  # final mean log-likelihood
        if best is None or key > best[0] + _TIE_TOL:
            best = (key, r)
            best_run = run
    assert best is not None and best_run is not None
    params, trace, converged = best_run
    weights, means, covs = params
    model = Gmm([GaussianComponent(weight=float(w), mean=m, covariance=c)
                 for w, m, c in zip(weights, means, covs)])
    return FittedGmm(model=model,
                     final_log_likelihood=float(trace[-1]),
                     n_iter=len(trace),
                     converged=converged,
                     restart_index=best[1],
                     log_likelihood_trace=tuple(float(v) for v in trace))


# ---------------------------------------------------------------------------
# internals
# ---------------------------------------------------------------------------

def _component_log_pdf(rows, means, covs, quad_feats=None):
    """(n, K) Gaussian log-densities from raw parameter arrays.

    For d=2 the precision matrices and normalizers come from closed-form
    2x2 algebra and the Mahalanobis terms from one GEMM over precomputed
    monomials; other dimensions go through batched Cholesky factors.
    """
    n, d = rows.shape
    if d == 2:
        a = covs[:, 0, 0]
        b = covs[:, 0, 1]
        c = covs[:, 1, 1]
        det = a * c - b * b
        if np.any(a <= 0) or np.any(det <= 0):
            raise ValueError("degenerate covariance encountered during EM")
        # precision [[c,-b],[-b,a]]/det; mahal = p00 x0^2 + 2 p01 x0 x1
        # + p11 x1^2 - 2 (b0 x0 + b1 x1) + const
        p00 = c / det
        p01 = -b / det
        p11 = a / det
        quad_coef = np.stack([p00, 2.0 * p01, p11])            # (3, K)
        lin_coef = np.stack([p00 * means[:, 0] + p01 * means[:, 1],
                             p01 * means[:, 0] + p11 * means[:, 1]])
        const = (lin_coef[0] * means[:, 0] + lin_coef[1] * means[:, 1])
        if quad_feats is None:
            quad_feats = _monomials_2d(rows)
        mahal = quad_feats @ quad_coef - 2.0 * (rows @ lin_coef) + const[None, :]
        log_norms = -_LOG_2PI - 0.5 * np.log(det)
        return log_norms[None, :] - 0.5 * mahal
    try:
        chols = np.linalg.cholesky(covs)
    except np.linalg.LinAlgError:
        raise ValueError("degenerate covariance encountered during EM") from None
    inv_chols = np.linalg.inv(chols)
    log_norms = (-0.5 * d * _LOG_2PI
                 - np.log(np.diagonal(chols, axis1=1, axis2=2)).sum(axis=1))
    k = means.shape[0]
    prec = np.matmul(inv_chols.transpose(0, 2, 1), inv_chols)
    prec_mean = np.matmul(prec, means[:, :, None])[:, :, 0]
    mean_quad = (prec_mean * means).sum(axis=1)
    xp = (rows @ prec.transpose(1, 0, 2).reshape(d, k * d)).reshape(n, k, d)
    quad = (xp * rows[:, None, :]).sum(axis=2)
    mahal = quad - 2.0 * (rows @ prec_mean.T) + mean_quad[None, :]
    return log_norms[None, :] - 0.5 * mahal


def _monomials_2d(rows):
    """Per-row features [x0^2, x0*x1, x1^2], shared by E- and M-steps."""
    out = np.empty((rows.shape[0], 3))
    out[:, 0] = rows[:, 0] * rows[:, 0]
    out[:, 1] = rows[:, 0] * rows[:, 1]
    out[:, 2] = rows[:, 1] * rows[:, 1]
    return out


def _weighted_log_pdf(rows, weights, means, covs, quad_feats=None):
    # EM keeps every weight strictly positive (init and re-seeding both
    # renormalize), so the log never sees zero here
    return (_component_log_pdf(rows, means, covs, quad_feats)
            + np.log(weights)[None, :])


def _em_single(rows, config: FitConfig, rng):
    """One EM run.  Returns ((weights, means, covs), trace, converged)."""
    n, d = rows.shape
    data_cov = np.cov(rows, rowvar=False, bias=True).reshape(d, d)
    fallback_cov = data_cov + max(config.reg_covar, 1e-12) * np.eye(d)
    reg_eye = config.reg_covar * np.eye(d)
    quad_feats = _monomials_2d(rows) if d == 2 else None

    params = _initialize(rows, config, rng, fallback_cov)
    trace: list[float] = []
    converged = False
    ll_prev = -np.inf
    for _ in range(config.max_iter):
        weights, means, covs = params
        lp = _weighted_log_pdf(rows, weights, means, covs, quad_feats)
        shift = lp.max(axis=1, keepdims=True)
        log_mix = shift[:, 0] + np.log(np.exp(lp - shift).sum(axis=1))
        ll = float(log_mix.mean())
        trace.append(ll)
        if np.isfinite(ll_prev) and (ll - ll_prev) < config.rel_tol * max(abs(ll_prev), 1e-12):
            converged = True
            break
        ll_prev = ll
        np.subtract(lp, log_mix[:, None], out=lp)
        resp = np.exp(lp, out=lp)
        params = _m_step(rows, resp, config.reg_covar, log_mix, fallback_cov,
                         reg_eye, quad_feats)
    else:
        # max_iter M-steps done; evaluate the final parameters once more
        weights, means, covs = params
        lp = _weighted_log_pdf(rows, weights, means, covs, quad_feats)
        shift = lp.max(axis=1, keepdims=True)
        log_mix = shift[:, 0] + np.log(np.exp(lp - shift).sum(axis=1))
        trace.append(float(log_mix.mean()))
    return params, trace, converged


def _m_step(rows, resp, reg_covar, log_mix, fallback_cov, reg_eye,
            quad_feats=None):
    n, d = rows.shape
    mass = resp.sum(axis=0)
    empty = np.flatnonzero(mass < _EMPTY_MASS)
    safe_mass = np.maximum(mass, _EMPTY_MASS)
    weights = mass / n
    means = (resp.T @ rows) / safe_mass[:, None]
    if d == 2 and quad_feats is not None:
        # second moments from one GEMM, then subtract the mean outer product
        second = (resp.T @ quad_feats) / safe_mass[:, None]        # (K, 3)
        k = means.shape[0]
        covs = np.empty((k, 2, 2))
        covs[:, 0, 0] = second[:, 0] - means[:, 0] * means[:, 0]
        covs[:, 0, 1] = second[:, 1] - means[:, 0] * means[:, 1]
        covs[:, 1, 0] = covs[:, 0, 1]
        covs[:, 1, 1] = second[:, 2] - means[:, 1] * means[:, 1]
        covs += reg_eye[None, :, :]
    else:
        diff = rows[None, :, :] - means[:, None, :]                # (K, n, d)
        weighted = diff * resp.T[:, :, None]
        covs = np.matmul(weighted.transpose(0, 2, 1), diff) / safe_mass[:, None, None]
        covs += reg_eye[None, :, :]

    if empty.size:
        # components that lost all responsibility mass are re-seeded at the
        # points the current mixture explains worst
        order = np.argsort(log_mix, kind="stable")
        for slot, comp in enumerate(empty):
            idx = order[slot % n]
            means[comp] = rows[idx]
            covs[comp] = fallback_cov
            weights[comp] = 1.0 / n
        weights = weights / weights.sum()
    return weights, means, covs


def _initialize(rows, config: FitConfig, rng, fallback_cov):
    n, d = rows.shape
    k = config.n_components
    if config.init_method == "random_points":
        idx = rng.choice(n, size=k, replace=False)
        means = rows[idx].copy()
        covs = np.repeat(fallback_cov[None, :, :], k, axis=0)
        weights = np.full(k, 1.0 / k)
        return weights, means, covs

    centers = _kmeans_pp_centers(rows, k, rng)
    d2 = ((rows[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    weights = np.full(k, 1.0 / n)
    means = centers.copy()
    covs = np.repeat(fallback_cov[None, :, :], k, axis=0)
    for j in range(k):
        members = rows[assign == j]
        if members.shape[0] >= 1:
            weights[j] = members.shape[0] / n
            means[j] = members.mean(axis=0)
        if members.shape[0] >= 2:
            centered = members - means[j]
            covs[j] = (centered.T @ centered) / members.shape[0]
            covs[j] += max(config.reg_covar, 1e-12) * np.eye(d)
    return weights / weights.sum(), means, covs


def _kmeans_pp_centers(rows, k, rng):
    n = rows.shape[0]
    centers = [rows[int(rng.integers(n))]]
    d2 = ((rows - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            probs = d2 / total
            idx = int(rng.choice(n, p=probs))
        else:
            idx = int(rng.integers(n))
        centers.append(rows[idx])
        d2 = np.minimum(d2, ((rows - centers[-1]) ** 2).sum(axis=1))
    return np.stack(centers)
