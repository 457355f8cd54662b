"""Finite Gaussian mixtures: representation, density evaluation, sampling.

A :class:`Gmm` is an immutable weighted list of full-covariance Gaussian
components.  Cholesky factorization at construction time is the single
positive-definiteness gate and doubles as the sampling transform; every
later operation reuses the cached factors.  All entropies and divergences
in this package are in nats.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

_LOG_2PI = float(np.log(2.0 * np.pi))

PROVENANCE_TAGS = ("anchor", "synthetic", "resampled")


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GaussianComponent:
    """One mixture component: weight, mean vector, full covariance matrix.

    The covariance must be symmetric within 1e-12 and admit a Cholesky
    factorization; both are checked at construction.
    """

    weight: float
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = _readonly(np.atleast_1d(self.mean))
        cov = _readonly(np.atleast_2d(self.covariance))
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ValueError(f"covariance must be {d}x{d}, got {cov.shape}")
        if not (0.0 <= self.weight <= 1.0):
            raise ValueError(f"weight must be in [0, 1], got {self.weight}")
        if not np.all(np.abs(cov - cov.T) <= 1e-12):
            raise ValueError("covariance is not symmetric within 1e-12")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance is not positive definite") from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


class Gmm:
    """Weighted mixture of multivariate Gaussians.

    Component weights must sum to 1 within 1e-10 and all components must
    share one dimension.  Instances are immutable; density evaluation and
    sampling are pure functions of the stored parameters (and a seed).
    """

    __slots__ = ("components", "dim", "_weights", "_means", "_covs",
                 "_chols", "_inv_chols", "_log_norms", "_log_weights",
                 "_prec_cat", "_prec_mean", "_mean_quad")

    def __init__(self, components):
        components = tuple(components)
        if len(components) == 0:
            raise ValueError("mixture needs at least one component")
        dim = components[0].dim
        for c in components:
            if c.dim != dim:
                raise ValueError("components disagree on dimension")
        weights = np.array([c.weight for c in components], dtype=float)
        total = weights.sum()
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"component weights sum to {total!r}, not 1")

        object.__setattr__(self, "components", components)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "_weights", _readonly(weights))
        object.__setattr__(self, "_means",
                           _readonly(np.stack([c.mean for c in components])))
        object.__setattr__(self, "_covs",
                           _readonly(np.stack([c.covariance for c in components])))
        chols = np.linalg.cholesky(self._covs)
        inv_chols = np.linalg.inv(chols)
        # log of each component's Gaussian normalization constant
        log_det_half = np.log(np.diagonal(chols, axis1=1, axis2=2)).sum(axis=1)
        log_norms = -0.5 * dim * _LOG_2PI - log_det_half
        with np.errstate(divide="ignore"):
            log_weights = np.log(weights)
        object.__setattr__(self, "_chols", _readonly(chols))
        object.__setattr__(self, "_inv_chols", _readonly(inv_chols))
        object.__setattr__(self, "_log_norms", _readonly(log_norms))
        object.__setattr__(self, "_log_weights", _readonly(log_weights))
        # Precision cache for the quadratic-form density kernel:
        # mahal_k(x) = x'P_k x - 2 x'P_k mu_k + mu_k'P_k mu_k, evaluated as
        # two GEMMs over all components at once.
        prec = np.matmul(inv_chols.transpose(0, 2, 1), inv_chols)
        prec_mean = np.matmul(prec, self._means[:, :, None])[:, :, 0]
        mean_quad = (prec_mean * self._means).sum(axis=1)
        object.__setattr__(self, "_prec_cat",
                           _readonly(prec.transpose(1, 0, 2).reshape(dim, -1)))
        object.__setattr__(self, "_prec_mean", _readonly(prec_mean))
        object.__setattr__(self, "_mean_quad", _readonly(mean_quad))

    def __setattr__(self, name, value):
        raise AttributeError("Gmm is immutable")

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def means(self) -> np.ndarray:
        return self._means

    @property
    def covariances(self) -> np.ndarray:
        return self._covs

    @property
    def cholesky_factors(self) -> np.ndarray:
        return self._chols

    def component_log_pdf(self, x: np.ndarray) -> np.ndarray:
        """Per-component Gaussian log-densities, shape (n, K).

        Accepts a single point (d,) or a batch (n, d).
        """
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValueError(
                f"point dimension {pts.shape[1]} != mixture dimension {self.dim}")
        n, d = pts.shape
        k = self.n_components
        xp = (pts @ self._prec_cat).reshape(n, k, d)              # x'P_k
        quad = (xp * pts[:, None, :]).sum(axis=2)                 # (n, K)
        cross = pts @ self._prec_mean.T                           # (n, K)
        mahal = quad - 2.0 * cross + self._mean_quad[None, :]
        return self._log_norms[None, :] - 0.5 * mahal             # (n, K)

    def log_pdf(self, x: np.ndarray):
        """Mixture log-density log sum_k w_k N(x; mu_k, Sigma_k).

        Computed with a max-shifted log-sum-exp so log-densities as low as
        -700 survive without intermediate underflow.  A (d,) input yields a
        float, an (n, d) input an (n,) array.
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        lp = self.component_log_pdf(x) + self._log_weights[None, :]
        shift = np.max(lp, axis=1, keepdims=True)
        out = shift[:, 0] + np.log(np.exp(lp - shift).sum(axis=1))
        return float(out[0]) if single else out

    def sample(self, n: int, seed: int) -> "DatasetMatrix":
        """Draw n rows: categorical component pick, then mean + L @ z.

        Deterministic given (self, n, seed); component labels are recorded
        per row.
        """
        if n < 1:
            raise ValueError("sample size must be at least 1")
        rng = np.random.default_rng(int(seed) & ((1 << 64) - 1))
        labels = rng.choice(self.n_components, size=n, p=self._weights)
        z = rng.standard_normal((n, self.dim))
        rows = self._means[labels] + np.einsum(
            "nij,nj->ni", self._chols[labels], z)
        return DatasetMatrix(rows=rows, provenance="resampled", seed=int(seed),
                             component_labels=labels)

    def mean(self) -> np.ndarray:
        """Mixture mean sum_k w_k mu_k."""
        return self._weights @ self._means

    def covariance(self) -> np.ndarray:
        """Mixture covariance sum_k w_k (Sigma_k + mu_k mu_k^T) - mu mu^T."""
        mu = self.mean()
        second = np.einsum("k,kij->ij", self._weights, self._covs)
        second += np.einsum("k,ki,kj->ij", self._weights, self._means, self._means)
        return second - np.outer(mu, mu)

    def __eq__(self, other):
        if not isinstance(other, Gmm):
            return NotImplemented
        return (self.dim == other.dim
                and self.n_components == other.n_components
                and np.array_equal(self._weights, other._weights)
                and np.array_equal(self._means, other._means)
                and np.array_equal(self._covs, other._covs))

    def __repr__(self):
        return f"Gmm(n_components={self.n_components}, dim={self.dim})"


@dataclass(frozen=True)
class DatasetMatrix:
    """n x d sample matrix with provenance and the seed that drew it.

    Re-drawing from the same source mixture with the same seed reproduces
    the rows bit-exactly.
    """

    rows: np.ndarray
    provenance: str
    seed: int
    component_labels: np.ndarray | None = field(default=None)

    def __post_init__(self):
        rows = _readonly(np.atleast_2d(self.rows))
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError("rows must be a nonempty n x d matrix")
        if self.provenance not in PROVENANCE_TAGS:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        labels = self.component_labels
        if labels is not None:
            labels = np.array(labels, dtype=int, copy=True)
            if labels.shape != (rows.shape[0],):
                raise ValueError("component_labels length must match row count")
            labels.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "component_labels", labels)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def with_provenance(self, tag: str) -> "DatasetMatrix":
        return DatasetMatrix(rows=self.rows, provenance=tag, seed=self.seed,
                             component_labels=self.component_labels)


def gaussian_entropy(covariance: np.ndarray) -> float:
    """Differential entropy of N(mu, Sigma): 0.5 * ln((2 pi e)^d det Sigma)."""
    cov = np.atleast_2d(np.asarray(covariance, dtype=float))
    d = cov.shape[0]
    if cov.shape != (d, d):
        raise ValueError("covariance must be square")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError("covariance is not positive definite") from None
    log_det = 2.0 * np.log(np.diagonal(chol)).sum()
    return 0.5 * (d * (_LOG_2PI + 1.0) + log_det)


def gaussian_kl(mean0, cov0, mean1, cov1) -> float:
    """Closed-form KL(N0 || N1) in nats.

    0.5 * (tr(S1^-1 S0) + (m1-m0)^T S1^-1 (m1-m0) - d + ln det S1/det S0)
    """
    m0 = np.atleast_1d(np.asarray(mean0, dtype=float))
    m1 = np.atleast_1d(np.asarray(mean1, dtype=float))
    c0 = np.atleast_2d(np.asarray(cov0, dtype=float))
    c1 = np.atleast_2d(np.asarray(cov1, dtype=float))
    d = m0.shape[0]
    if m1.shape != (d,) or c0.shape != (d, d) or c1.shape != (d, d):
        raise ValueError("dimension mismatch between the two Gaussians")
    try:
        l0 = np.linalg.cholesky(c0)
        l1 = np.linalg.cholesky(c1)
    except np.linalg.LinAlgError:
        raise ValueError("covariance is not positive definite") from None
    l1_inv = np.linalg.inv(l1)
    # tr(S1^-1 S0) = |L1^-1 L0|_F^2 ; mahalanobis via the same factor
    a = l1_inv @ l0
    trace_term = float(np.sum(a * a))
    z = l1_inv @ (m1 - m0)
    mahal = float(z @ z)
    log_det_ratio = 2.0 * (np.log(np.diagonal(l1)).sum()
                           - np.log(np.diagonal(l0)).sum())
    return 0.5 * (trace_term + mahal - d + log_det_ratio)


# ---------------------------------------------------------------------------
# Serialization: plain-text structured model files and dataset CSV
# ---------------------------------------------------------------------------

def gmm_to_dict(g: Gmm) -> dict:
    return {
        "dim": g.dim,
        "components": [
            {
                "weight": float(c.weight),
                "mean": [float(v) for v in c.mean],
                "covariance": [[float(v) for v in row] for row in c.covariance],
            }
            for c in g.components
        ],
    }


def gmm_from_dict(doc: dict) -> Gmm:
    dim = int(doc["dim"])
    comps = []
    for entry in doc["components"]:
        c = GaussianComponent(weight=float(entry["weight"]),
                              mean=np.asarray(entry["mean"], dtype=float),
                              covariance=np.asarray(entry["covariance"], dtype=float))
        if c.dim != dim:
            raise ValueError("component dimension disagrees with file header")
        comps.append(c)
    return Gmm(comps)


def save_gmm(g: Gmm, path: str | os.PathLike) -> None:
    """Write a mixture to a structured text file (JSON).

    Floats are emitted in shortest round-trip form, so load(save(g))
    reproduces every parameter bit-exactly.
    """
    text = json.dumps(gmm_to_dict(g), indent=2)
    _atomic_write_text(path, text + "\n")


def load_gmm(path: str | os.PathLike) -> Gmm:
    with open(path, "r", encoding="utf-8") as fh:
        return gmm_from_dict(json.load(fh))


def dataset_to_csv(ds: DatasetMatrix, path: str | os.PathLike) -> None:
    """Write rows as CSV with header x0..x{d-1},component,provenance.

    UTF-8, LF endings, shortest round-trip float formatting.
    """
    d = ds.dim
    header = ",".join([f"x{i}" for i in range(d)] + ["component", "provenance"])
    lines = [header]
    labels = ds.component_labels
    for i in range(ds.n):
        coords = ",".join(repr(float(v)) for v in ds.rows[i])
        comp = "" if labels is None else str(int(labels[i]))
        lines.append(f"{coords},{comp},{ds.provenance}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def dataset_from_csv(path: str | os.PathLike,
                     seed: int = 0) -> DatasetMatrix:
    """Parse a dataset CSV; malformed rows raise with their line number."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) < 3 or header[-2] != "component" or header[-1] != "provenance":
        raise ValueError(f"{path}: line 1: bad header {lines[0]!r}")
    d = len(header) - 2
    for i, name in enumerate(header[:d]):
        if name != f"x{i}":
            raise ValueError(f"{path}: line 1: expected column x{i}, got {name!r}")
    rows, labels, provs = [], [], []
    has_labels = True
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != d + 2:
            raise ValueError(
                f"{path}: line {lineno}: expected {d + 2} fields, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts[:d]])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric coordinate") from None
        if parts[d] == "":
            has_labels = False
        else:
            try:
                labels.append(int(parts[d]))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad component label") from None
        provs.append(parts[d + 1])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    prov = provs[0] if provs and provs[0] in PROVENANCE_TAGS else "resampled"
    return DatasetMatrix(
        rows=np.asarray(rows, dtype=float),
        provenance=prov,
        seed=seed,
        component_labels=np.asarray(labels, dtype=int) if has_labels and labels else None,
    )


def _atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write-then-rename so interrupted runs never leave partial files."""
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)
