"""Two-graph hypothesis tests on spectral embeddings.

The latent position test bootstraps a Procrustes statistic from dot-product
graphs fit to each input; the latent distribution test permutes a kernel MMD
statistic. Both report p = (1 + #{null >= observed}) / (1 + B), so p is never
exactly 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from ._rng import child_seed, edge_weight_streams, generator
from .embed import _topk_symmetric_positions, ase
from .graphs import Graph, graph_properties, symmetrize


@dataclass(frozen=True)
class TestResult:
    statistic: float
    null_stats: np.ndarray
    p_value: float
    method: str
    d_used: int
    n_bootstraps: int
    seed: int

    def __post_init__(self):
        null = np.asarray(self.null_stats, dtype=float)
        object.__setattr__(self, "null_stats", null)
        if null.shape != (self.n_bootstraps,):
            raise ValueError(f"expected {self.n_bootstraps} null stats, got {null.shape}")
        expected = (1 + int(np.count_nonzero(null >= self.statistic))) / (1 + self.n_bootstraps)
        if abs(self.p_value - expected) > 1e-12:
            raise ValueError("p_value does not match (1 + exceedances) / (1 + B)")


def procrustes_align(x1: np.ndarray, x2: np.ndarray) -> tuple[np.ndarray, float]:
    """Orthogonal matrix W minimizing ||x1 - x2 W||_F, plus that distance."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape or x1.ndim != 2:
        raise ValueError(f"shapes must match, got {x1.shape} and {x2.shape}")
    u, _, vt = np.linalg.svd(x2.T @ x1)
    w = u @ vt
    return w, float(np.linalg.norm(x1 - x2 @ w))


def _check_binary_undirected(g: Graph, name: str) -> None:
    if g.directed:
        raise ValueError(f"{name} must be undirected")
    if graph_properties(g).is_weighted:
        raise ValueError(f"{name} must be binary")


def _shared_dimension(g1: Graph, g2: Graph, d: int | None) -> int:
    if d is not None:
        if d < 1:
            raise ValueError(f"d must be >= 1, got {d}")
        return int(d)
    return max(ase(g1).d, ase(g2).d)


def _bootstrap_embed(triu_p, ii, jj, n: int, d: int, seed: int) -> np.ndarray:
    """One null replicate: sample a dot-product graph (same upper-triangle
    draw scheme as sample_ier) and embed it at a fixed d, skipping the
    per-call validation of the public constructors."""
    edge_rng, _ = edge_weight_streams(seed)
    u = edge_rng.random(ii.size)
    present = u < triu_p
    a = np.zeros((n, n))
    a[ii[present], jj[present]] = 1.0
    a[jj[present], ii[present]] = 1.0
    deg = a.sum(axis=1)
    np.fill_diagonal(a, deg / max(n - 1, 1))
    return _topk_symmetric_positions(a, d)


def _rdpg_null_distribution(x: np.ndarray, d: int, n_boot: int, seed: int, side: int) -> np.ndarray:
    p = x @ x.T
    p = np.clip((p + p.T) / 2.0, 0.0, 1.0)
    np.fill_diagonal(p, 0.0)
    n = p.shape[0]
    ii, jj = np.triu_indices(n, k=1)
    triu_p = p[ii, jj]
    stats = np.empty(n_boot)
    for b in range(n_boot):
        xa = _bootstrap_embed(triu_p, ii, jj, n, d, child_seed(seed, side, b, 0))
        xb = _bootstrap_embed(triu_p, ii, jj, n, d, child_seed(seed, side, b, 1))
        stats[b] = procrustes_align(xa, xb)[1]
    return stats


def latent_position_test(
    g1: Graph,
    g2: Graph,
    d: int | None = None,
    n_bootstraps: int = 200,
    seed: int = 0,
) -> TestResult:
    """Parametric bootstrap test of equal latent positions (same node set).

    The statistic is the Procrustes distance between the two ASE embeddings at
    a shared d (given, or the max of the automatic choices). Null samples are
    pairs of dot-product graphs bootstrapped from each embedding in turn; the
    reported p-value is the more conservative of the two sides.
    """
    _check_binary_undirected(g1, "g1")
    _check_binary_undirected(g2, "g2")
    if g1.n != g2.n:
        raise ValueError(f"graphs must share a node set, got n = {g1.n} and {g2.n}")
    if n_bootstraps < 1:
        raise ValueError(f"n_bootstraps must be >= 1, got {n_bootstraps}")
    d_used = _shared_dimension(g1, g2, d)
    x1 = ase(g1, d=d_used).X
    x2 = ase(g2, d=d_used).X
    statistic = procrustes_align(x1, x2)[1]
    null1 = _rdpg_null_distribution(x1, d_used, n_bootstraps, seed, side=0)
    null2 = _rdpg_null_distribution(x2, d_used, n_bootstraps, seed, side=1)
    p1 = (1 + int(np.count_nonzero(null1 >= statistic))) / (1 + n_bootstraps)
    p2 = (1 + int(np.count_nonzero(null2 >= statistic))) / (1 + n_bootstraps)
    # conservative symmetrization: keep the side with the larger p-value (the
    # stored null sample always reproduces the reported p-value)
    null, p = (null2, p2) if p2 > p1 else (null1, p1)
    return TestResult(
        statistic=statistic,
        null_stats=null,
        p_value=p,
        method="latent_position",
        d_used=d_used,
        n_bootstraps=n_bootstraps,
        seed=seed,
    )


def mmd_ustat(z1: np.ndarray, z2: np.ndarray, bandwidth: float | None = None) -> float:
    """Unbiased squared-MMD U-statistic with a Gaussian kernel.

    bandwidth defaults to the median pairwise distance of the pooled sample
    (1.0 when that median is 0). Can be negative, since the diagonal kernel
    terms are excluded.
    """
    z1 = np.atleast_2d(np.asarray(z1, dtype=float))
    z2 = np.atleast_2d(np.asarray(z2, dtype=float))
    if z1.shape[1] != z2.shape[1]:
        raise ValueError(f"dimension mismatch: {z1.shape[1]} vs {z2.shape[1]}")
    n1, n2 = z1.shape[0], z2.shape[0]
    if n1 < 2 or n2 < 2:
        raise ValueError("each sample needs at least 2 points")
    if bandwidth is None:
        bandwidth = median_bandwidth(np.vstack([z1, z2]))
    elif bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    gamma = 1.0 / (2.0 * bandwidth * bandwidth)
    sq1 = np.sum(z1 * z1, axis=1)
    sq2 = np.sum(z2 * z2, axis=1)
    k11 = np.exp(-gamma * np.maximum(sq1[:, None] + sq1[None, :] - 2.0 * (z1 @ z1.T), 0.0))
    k22 = np.exp(-gamma * np.maximum(sq2[:, None] + sq2[None, :] - 2.0 * (z2 @ z2.T), 0.0))
    k12 = np.exp(-gamma * np.maximum(sq1[:, None] + sq2[None, :] - 2.0 * (z1 @ z2.T), 0.0))
    term1 = (k11.sum() - np.trace(k11)) / (n1 * (n1 - 1))
    term2 = (k22.sum() - np.trace(k22)) / (n2 * (n2 - 1))
    cross = 2.0 * k12.sum() / (n1 * n2)
    return float(term1 + term2 - cross)


def median_bandwidth(pooled: np.ndarray) -> float:
    """Median pairwise Euclidean distance; 1.0 if that median is 0."""
    dists = pdist(np.asarray(pooled, dtype=float))
    med = float(np.median(dists)) if dists.size else 0.0
    return med if med > 0 else 1.0


def _median_sign_flip(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Flip columns of x2 where doing so brings its medians closer to x1's."""
    m1 = np.median(x1, axis=0)
    m2 = np.median(x2, axis=0)
    flip = np.abs(m1 + m2) < np.abs(m1 - m2)
    signs = np.where(flip, -1.0, 1.0)
    return x2 * signs


def latent_distribution_test(
    g1: Graph,
    g2: Graph,
    d: int | None = None,
    n_bootstraps: int = 200,
    seed: int = 0,
) -> TestResult:
    """Kernel permutation test of equal latent distributions (sizes may differ).

    Directed inputs are symmetrized by averaging. Embeddings at a shared d are
    aligned by per-dimension median sign flips; the Gaussian-kernel MMD
    bandwidth is the pooled median distance and stays fixed across the B
    permutations of the pooled rows.
    """
    for g, name in ((g1, "g1"), (g2, "g2")):
        if graph_properties(g).is_weighted:
            raise ValueError(f"{name} must be binary")
    if g1.directed:
        g1 = symmetrize(g1, "average")
    if g2.directed:
        g2 = symmetrize(g2, "average")
    if g1.n < 2 or g2.n < 2:
        raise ValueError("each graph needs at least 2 nodes")
    if n_bootstraps < 1:
        raise ValueError(f"n_bootstraps must be >= 1, got {n_bootstraps}")
    d_used = _shared_dimension(g1, g2, d)
    x1 = ase(g1, d=d_used).X
    x2 = _median_sign_flip(x1, ase(g2, d=d_used).X)
    pooled = np.vstack([x1, x2])
    bandwidth = median_bandwidth(pooled)
    statistic = mmd_ustat(x1, x2, bandwidth)
    n1 = x1.shape[0]
    null = np.empty(n_bootstraps)
    for b in range(n_bootstraps):
        perm = generator(child_seed(seed, b)).permutation(pooled.shape[0])
        null[b] = mmd_ustat(pooled[perm[:n1]], pooled[perm[n1:]], bandwidth)
    p = (1 + int(np.count_nonzero(null >= statistic))) / (1 + n_bootstraps)
    return TestResult(
        statistic=statistic,
        null_stats=null,
        p_value=p,
        method="latent_distribution",
        d_used=d_used,
        n_bootstraps=n_bootstraps,
        seed=seed,
    )


def test_result_to_json(result: TestResult) -> dict:
    return {
        "method": result.method,
        "statistic": result.statistic,
        "p_value": result.p_value,
        "d_used": result.d_used,
        "n_bootstraps": result.n_bootstraps,
        "seed": result.seed,
        "null_stats": [float(v) for v in result.null_stats],
    }


def test_result_json_dumps(result: TestResult) -> str:
    return json.dumps(test_result_to_json(result), sort_keys=True)
