"""Model-selection clustering: GMM sweeps scored by BIC, k-means by silhouette.

The EM and Lloyd iterations are implemented here (not delegated) so that
initialization, stopping rules, regularization, and tie-breaking are exactly
the documented ones and every fit is deterministic given its seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from ._rng import child_seed, generator

COVARIANCE_TYPES = ("full", "tied", "diag", "spherical")
_REG = 1e-6
_TOL = 1e-3
_MAX_ITER = 100
_LOG2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GmmFit:
    k: int
    covariance_type: str
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    log_likelihood: float
    bic: float
    labels: np.ndarray
    converged: bool
    log_likelihood_path: list[float]


@dataclass(frozen=True)
class KMeansFit:
    k: int
    centers: np.ndarray
    labels: np.ndarray
    inertia: float


@dataclass(frozen=True)
class SweepResult:
    """Best fit plus the (configuration, score) table for every candidate."""

    best: object
    table: list[tuple[dict, float]]


def _validate_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"data must be a nonempty 2-D array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data entries must be finite")
    return x


def _kmeans_pp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(m)]
    closest = np.sum((x - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            centers[c] = x[rng.integers(m)]
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), r))
            centers[c] = x[min(idx, m - 1)]
        closest = np.minimum(closest, np.sum((x - centers[c]) ** 2, axis=1))
    return centers


def _m_step(x: np.ndarray, resp: np.ndarray, covariance_type: str):
    m, d = x.shape
    nk = resp.sum(axis=0) + 10.0 * np.finfo(float).eps
    weights = nk / m
    means = (resp.T @ x) / nk[:, None]
    if covariance_type == "full":
        cov = np.empty((len(nk), d, d))
        for c in range(len(nk)):
            diff = x - means[c]
            cov[c] = (resp[:, c][:, None] * diff).T @ diff / nk[c]
            cov[c].flat[:: d + 1] += _REG
    elif covariance_type == "tied":
        cov = np.zeros((d, d))
        for c in range(len(nk)):
            diff = x - means[c]
            cov += (resp[:, c][:, None] * diff).T @ diff
        cov /= m
        cov.flat[:: d + 1] += _REG
    elif covariance_type == "diag":
        avg_sq = (resp.T @ (x * x)) / nk[:, None]
        cov = avg_sq - means**2 + _REG
    else:  # spherical
        avg_sq = (resp.T @ (x * x)) / nk[:, None]
        cov = (avg_sq - means**2).mean(axis=1) + _REG
    return weights, means, cov


def _log_gaussian(x: np.ndarray, means: np.ndarray, cov, covariance_type: str) -> np.ndarray:
    m, d = x.shape
    k = means.shape[0]
    out = np.empty((m, k))
    if covariance_type == "full":
        for c in range(k):
            chol = np.linalg.cholesky(cov[c])
            diff = x - means[c]
            z = solve_triangular(chol, diff.T, lower=True)
            logdet = 2.0 * np.sum(np.log(np.diag(chol)))
            out[:, c] = -0.5 * (d * _LOG2PI + logdet + np.sum(z * z, axis=0))
    elif covariance_type == "tied":
        chol = np.linalg.cholesky(cov)
        logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        for c in range(k):
            diff = x - means[c]
            z = solve_triangular(chol, diff.T, lower=True)
            out[:, c] = -0.5 * (d * _LOG2PI + logdet + np.sum(z * z, axis=0))
    elif covariance_type == "diag":
        for c in range(k):
            diff = x - means[c]
            out[:, c] = -0.5 * (
                d * _LOG2PI + np.sum(np.log(cov[c])) + np.sum(diff * diff / cov[c], axis=1)
            )
    else:  # spherical
        for c in range(k):
            diff = x - means[c]
            out[:, c] = -0.5 * (
                d * _LOG2PI + d * np.log(cov[c]) + np.sum(diff * diff, axis=1) / cov[c]
            )
    return out


def _e_step(x, weights, means, cov, covariance_type):
    weighted = _log_gaussian(x, means, cov, covariance_type) + np.log(weights)
    norm = logsumexp(weighted, axis=1)
    resp = np.exp(weighted - norm[:, None])
    return resp, float(norm.sum())


def gmm_n_params(k: int, d: int, covariance_type: str) -> int:
    cov_params = {
        "full": k * d * (d + 1) // 2,
        "tied": d * (d + 1) // 2,
        "diag": k * d,
        "spherical": k,
    }[covariance_type]
    return (k - 1) + k * d + cov_params


def gmm_fit(data, k: int, covariance_type: str = "full", seed: int = 0) -> GmmFit:
    """EM fit of a k-component Gaussian mixture.

    Initialization is a hard assignment to k-means++ centers; iteration stops
    when the mean per-point log-likelihood improves by less than 1e-3, or
    after 100 updates. Covariances carry a 1e-6 diagonal regularizer.
    """
    x = _validate_data(data)
    m, d = x.shape
    if covariance_type not in COVARIANCE_TYPES:
        raise ValueError(f"unknown covariance type {covariance_type!r}")
    if not (1 <= k <= m):
        raise ValueError(f"k must lie in [1, {m}], got {k}")
    rng = generator(seed)
    centers = _kmeans_pp_centers(x, k, rng)
    dist = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    resp = np.zeros((m, k))
    resp[np.arange(m), np.argmin(dist, axis=1)] = 1.0
    weights, means, cov = _m_step(x, resp, covariance_type)

    path: list[float] = []
    prev = -np.inf
    converged = False
    for _ in range(_MAX_ITER):
        resp, ll = _e_step(x, weights, means, cov, covariance_type)
        path.append(ll)
        if (ll - prev) / m < _TOL:
            converged = True
            break
        prev = ll
        weights, means, cov = _m_step(x, resp, covariance_type)
    else:
        resp, ll = _e_step(x, weights, means, cov, covariance_type)
        path.append(ll)

    bic = -2.0 * ll + gmm_n_params(k, d, covariance_type) * np.log(m)
    return GmmFit(
        k=k,
        covariance_type=covariance_type,
        weights=weights,
        means=means,
        covariances=cov,
        log_likelihood=ll,
        bic=float(bic),
        labels=np.argmax(resp, axis=1),
        converged=converged,
        log_likelihood_path=path,
    )


def gmm_sweep(
    data,
    k_range,
    covariance_types=COVARIANCE_TYPES,
    seed: int = 0,
) -> SweepResult:
    """Fit every (k, covariance type) pair; lowest BIC wins.

    Ties prefer the smaller k, then the earlier covariance type in the
    canonical order full, tied, diag, spherical.
    """
    ks = [int(k) for k in k_range]
    types = list(covariance_types)
    if not ks or not types:
        raise ValueError("k_range and covariance_types must be nonempty")
    for t in types:
        if t not in COVARIANCE_TYPES:
            raise ValueError(f"unknown covariance type {t!r}")
    table: list[tuple[dict, float]] = []
    fits: list[tuple[tuple, GmmFit]] = []
    for k in ks:
        for t in types:
            fit = gmm_fit(data, k, t, seed=child_seed(seed, k, COVARIANCE_TYPES.index(t)))
            table.append(({"k": k, "covariance_type": t}, fit.bic))
            fits.append(((fit.bic, k, COVARIANCE_TYPES.index(t)), fit))
    best = min(fits, key=lambda item: item[0])[1]
    return SweepResult(best=best, table=table)


def _lloyd(x: np.ndarray, k: int, rng: np.random.Generator) -> KMeansFit:
    m = x.shape[0]
    centers = _kmeans_pp_centers(x, k, rng)
    labels = np.full(m, -1)
    for _ in range(300):
        dist = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(dist, axis=1)
        # re-seed any emptied cluster with the point farthest from its center
        for c in range(k):
            if not np.any(new_labels == c):
                far = int(np.argmax(dist[np.arange(m), new_labels]))
                new_labels[far] = c
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = x[labels == c].mean(axis=0)
    dist = ((x - centers[labels]) ** 2).sum(axis=1)
    return KMeansFit(k=k, centers=centers, labels=labels, inertia=float(dist.sum()))


def kmeans_fit(data, k: int, seed: int = 0, restarts: int = 10) -> KMeansFit:
    """Best of `restarts` Lloyd runs (k-means++ starts), by inertia."""
    x = _validate_data(data)
    if not (1 <= k <= x.shape[0]):
        raise ValueError(f"k must lie in [1, {x.shape[0]}], got {k}")
    best: KMeansFit | None = None
    for r in range(restarts):
        fit = _lloyd(x, k, generator(child_seed(seed, k, r)))
        if best is None or fit.inertia < best.inertia:
            best = fit
    return best


def silhouette_score(data, labels) -> float:
    """Mean silhouette over all points; singleton clusters contribute 0."""
    x = _validate_data(data)
    lab = np.asarray(labels)
    if lab.shape != (x.shape[0],):
        raise ValueError(f"labels must have shape ({x.shape[0]},), got {lab.shape}")
    uniq = np.unique(lab)
    if uniq.size < 2:
        raise ValueError("silhouette needs at least two clusters")
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    scores = np.zeros(x.shape[0])
    masks = {c: lab == c for c in uniq}
    sizes = {c: int(masks[c].sum()) for c in uniq}
    for i in range(x.shape[0]):
        own = lab[i]
        if sizes[own] == 1:
            continue  # convention: singleton contributes 0
        a = dist[i, masks[own]].sum() / (sizes[own] - 1)
        b = min(dist[i, masks[c]].mean() for c in uniq if c != own)
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def kmeans_sweep(data, k_range, seed: int = 0) -> SweepResult:
    """k-means over a k range, scored by silhouette (higher wins, ties to
    smaller k). Every k must satisfy 2 <= k <= m - 1."""
    x = _validate_data(data)
    ks = [int(k) for k in k_range]
    if not ks:
        raise ValueError("k_range must be nonempty")
    m = x.shape[0]
    for k in ks:
        if not (2 <= k <= m - 1):
            raise ValueError(f"every k must satisfy 2 <= k <= {m - 1}, got {k}")
    table: list[tuple[dict, float]] = []
    candidates: list[tuple[tuple, KMeansFit]] = []
    for k in ks:
        fit = kmeans_fit(x, k, seed=seed)
        score = silhouette_score(x, fit.labels)
        table.append(({"k": k}, score))
        candidates.append(((-score, k), fit))
    best = min(candidates, key=lambda item: item[0])[1]
    return SweepResult(best=best, table=table)
