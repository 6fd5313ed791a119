"""Spectral embeddings of adjacency and Laplacian matrices.

All embeddings share one SVD pipeline: optional diagonal augmentation, dense
singular value decomposition (computed through the symmetric eigensolver when
the matrix is exactly symmetric, which is cheaper and numerically equivalent),
automatic dimension selection by profile-likelihood elbows, a deterministic
sign convention (the largest-magnitude entry of each left singular vector is
made positive), and scaling by the square root of the singular values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graphs import Graph

_SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class ElbowSelection:
    """Output of select_dimension: cumulative elbow indices plus diagnostics."""

    elbows: list[int]
    likelihood_profiles: list[np.ndarray]
    values: np.ndarray


@dataclass(frozen=True)
class Embedding:
    """Latent positions: X always, Y only for directed inputs."""

    X: np.ndarray
    Y: np.ndarray | None
    singular_values: np.ndarray
    d: int


def _profile_log_likelihood(seg: np.ndarray) -> np.ndarray:
    """Log likelihood of every split q = 1..L under a two-mean, pooled-variance
    Gaussian model; the variance is floored so exactly low-rank inputs work."""
    length = seg.size
    q = np.arange(1, length + 1, dtype=float)
    csum = np.cumsum(seg)
    csq = np.cumsum(seg * seg)
    mu1 = csum / q
    ss1 = csq - q * mu1 * mu1
    tail_n = length - q
    tail_sum = csum[-1] - csum
    tail_sq = csq[-1] - csq
    with np.errstate(invalid="ignore", divide="ignore"):
        mu2 = np.where(tail_n > 0, tail_sum / np.maximum(tail_n, 1), 0.0)
    ss2 = tail_sq - tail_n * mu2 * mu2
    ss = np.maximum(ss1, 0.0) + np.maximum(ss2, 0.0)
    var = np.maximum(ss / length, _SIGMA_FLOOR)
    return -0.5 * length * np.log(2.0 * np.pi * var) - ss / (2.0 * var)


def select_dimension(values, n_elbows: int = 2) -> ElbowSelection:
    """Recursive profile-likelihood elbow detection on a nonincreasing spectrum.

    Each round picks the split maximizing the two-mean Gaussian profile
    likelihood (smallest index on ties), records the cumulative index, and
    recurses on the remaining tail until n_elbows are found or the values are
    exhausted.
    """
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("values must be nonempty")
    if n_elbows < 1:
        raise ValueError(f"n_elbows must be >= 1, got {n_elbows}")
    if not np.all(np.isfinite(vals)) or vals.min() <= 0:
        raise ValueError("values must be positive and finite")
    if np.any(np.diff(vals) > 0):
        raise ValueError("values must be nonincreasing")
    elbows: list[int] = []
    profiles: list[np.ndarray] = []
    offset = 0
    seg = vals
    while len(elbows) < n_elbows and seg.size > 0:
        ll = _profile_log_likelihood(seg)
        q = int(np.argmax(ll)) + 1  # argmax returns the smallest index on ties
        profiles.append(ll)
        elbows.append(offset + q)
        offset += q
        seg = seg[q:]
    return ElbowSelection(elbows=elbows, likelihood_profiles=profiles, values=vals)


def _augmented_adjacency(g: Graph) -> np.ndarray:
    """Copy of the adjacency with the diagonal replaced by degree / (n - 1)."""
    a = np.array(g.adjacency)
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    if g.directed:
        deg = (off.sum(axis=1) + off.sum(axis=0)) / 2.0
    else:
        deg = off.sum(axis=1)
    denom = max(g.n - 1, 1)
    np.fill_diagonal(a, deg / denom)
    return a


def _positive_rank(s: np.ndarray, shape: tuple[int, int]) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = s[0] * max(shape) * np.finfo(float).eps
    return int(np.count_nonzero(s > tol))


def _pick_dimension(s: np.ndarray, shape, d: int | None, n_elbows: int, n: int) -> int:
    rank = _positive_rank(s, shape)
    if rank == 0:
        raise ValueError("matrix has no positive singular values (all-zero input?)")
    if d is not None:
        if not (1 <= d <= n):
            raise ValueError(f"d must lie in [1, {n}], got {d}")
        if d > rank:
            raise ValueError(f"d = {d} exceeds the positive rank {rank}")
        return int(d)
    sel = select_dimension(s[:rank], n_elbows=n_elbows)
    return sel.elbows[1] if len(sel.elbows) >= 2 else sel.elbows[0]


def _symmetric_factors(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left singular vectors and singular values of an exactly symmetric
    matrix via the eigendecomposition (s = |lambda|, descending)."""
    w, v = np.linalg.eigh(mat)
    order = np.argsort(-np.abs(w), kind="stable")
    return v[:, order], np.abs(w)[order]


def _topk_symmetric_positions(mat: np.ndarray, d: int) -> np.ndarray:
    """X = U_d sqrt(S_d) for an exactly symmetric matrix at a fixed d.

    Uses a truncated Lanczos solve (deterministic start vector) when d is much
    smaller than n, falling back to the full decomposition whenever the
    truncated solve fails or cannot certify d positive singular values. Sign
    convention matches _spectral_embed.
    """
    n = mat.shape[0]
    if d + 2 < n // 4:
        from scipy.sparse.linalg import ArpackError, eigsh

        try:
            w, v = eigsh(mat, k=d, which="LM", v0=np.full(n, 1.0 / np.sqrt(n)))
        except ArpackError:
            w = None
        if w is not None:
            order = np.argsort(-np.abs(w), kind="stable")
            s = np.abs(w)[order]
            if s[-1] > s[0] * n * np.finfo(float).eps:
                u = v[:, order]
                anchor = np.argmax(np.abs(u), axis=0)
                signs = np.where(u[anchor, np.arange(d)] < 0.0, -1.0, 1.0)
                return (u * signs) * np.sqrt(s)
    return _spectral_embed(mat, False, d, 2).X


def _spectral_embed(mat: np.ndarray, directed: bool, d: int | None, n_elbows: int) -> Embedding:
    if not directed and np.array_equal(mat, mat.T):
        u, s = _symmetric_factors(mat)
        vt = None
    else:
        u, s, vt = np.linalg.svd(mat)
    dim = _pick_dimension(s, mat.shape, d, n_elbows, mat.shape[0])
    ud = u[:, :dim].copy()
    # sign convention: largest-magnitude entry of each left vector positive
    anchor = np.argmax(np.abs(ud), axis=0)
    signs = np.where(ud[anchor, np.arange(dim)] < 0.0, -1.0, 1.0)
    ud *= signs
    scale = np.sqrt(s[:dim])
    x = ud * scale
    if directed:
        vd = vt[:dim].T.copy()
        vd *= signs
        y = vd * scale
    else:
        y = None
    return Embedding(X=x, Y=y, singular_values=s[:dim].copy(), d=dim)


def ase(g: Graph, d: int | None = None, n_elbows: int = 2) -> Embedding:
    """Adjacency spectral embedding with diagonal augmentation.

    d defaults to the second profile-likelihood elbow of the singular values
    (the first when only one exists). Directed graphs get separate left/right
    positions (X, Y).
    """
    if g.n == 0:
        raise ValueError("cannot embed an empty graph")
    return _spectral_embed(_augmented_adjacency(g), g.directed, d, n_elbows)


def lse(g: Graph, d: int | None = None, regularizer: float = 0.0, n_elbows: int = 2) -> Embedding:
    """Laplacian spectral embedding of D^(-1/2) A D^(-1/2) with degree offset tau.

    Degrees are full row sums (averaged with column sums for directed input).
    A zero-degree node with regularizer 0 is an error; drop it (LCC) or pass a
    positive regularizer.
    """
    if g.n == 0:
        raise ValueError("cannot embed an empty graph")
    if regularizer < 0:
        raise ValueError(f"regularizer must be >= 0, got {regularizer}")
    a = g.adjacency
    deg = (a.sum(axis=1) + a.sum(axis=0)) / 2.0
    dt = deg + regularizer
    if np.any(dt <= 0):
        bad = int(np.argmin(dt))
        raise ValueError(
            f"node {bad} has degree 0 with regularizer 0; take the largest "
            "connected component first or use a positive regularizer"
        )
    inv_sqrt = 1.0 / np.sqrt(dt)
    lap = a * np.outer(inv_sqrt, inv_sqrt)
    return _spectral_embed(lap, g.directed, d, n_elbows)


def omnibus_matrix(graphs: list[Graph]) -> np.ndarray:
    """The mn x mn matrix whose (i, j) block is (A_i + A_j) / 2."""
    m = len(graphs)
    n = graphs[0].n
    stack = np.stack([g.adjacency for g in graphs])
    pairs = (stack[:, None, :, :] + stack[None, :, :, :]) / 2.0
    return pairs.transpose(0, 2, 1, 3).reshape(m * n, m * n)


def omnibus_embed(graphs: list[Graph], d: int | None = None, n_elbows: int = 2) -> list[Embedding]:
    """Joint embedding of several undirected graphs on one node set.

    The omnibus matrix is diagonally augmented and embedded like a single
    graph; row block i of the result is graph i's embedding. All returned
    embeddings share d and the singular values.
    """
    if len(graphs) < 2:
        raise ValueError("omnibus embedding needs at least two graphs")
    n = graphs[0].n
    for i, g in enumerate(graphs):
        if g.directed:
            raise ValueError(f"graph {i} is directed; omnibus requires undirected graphs")
        if g.n != n:
            raise ValueError(f"graph {i} has {g.n} nodes, expected {n}")
    if n == 0:
        raise ValueError("cannot embed empty graphs")
    m = len(graphs)
    omni = omnibus_matrix(graphs)
    big = Graph(omni, directed=False)
    emb = _spectral_embed(_augmented_adjacency(big), False, d, n_elbows)
    return [
        Embedding(
            X=emb.X[i * n : (i + 1) * n].copy(),
            Y=None,
            singular_values=emb.singular_values,
            d=emb.d,
        )
        for i in range(m)
    ]


@dataclass(frozen=True)
class MaseEmbedding:
    """Shared basis (n x d) plus one d x d score matrix per graph."""

    basis: np.ndarray
    scores: list[np.ndarray]
    d: int


def mase(graphs: list[Graph], d: int | None = None, n_elbows: int = 2) -> MaseEmbedding:
    """Multiple-graph embedding via a shared left singular basis.

    Each graph contributes its unscaled augmented-adjacency singular vectors;
    the concatenation's leading d left singular vectors form the shared basis
    V, and graph i's score matrix is V' A_i V.
    """
    if len(graphs) < 2:
        raise ValueError("mase needs at least two graphs")
    n = graphs[0].n
    for i, g in enumerate(graphs):
        if g.directed:
            raise ValueError(f"graph {i} is directed; mase requires undirected graphs")
        if g.n != n:
            raise ValueError(f"graph {i} has {g.n} nodes, expected {n}")
    if n == 0:
        raise ValueError("cannot embed empty graphs")
    bases = []
    for g in graphs:
        mat = _augmented_adjacency(g)
        u, s, _ = np.linalg.svd(mat)
        di = _pick_dimension(s, mat.shape, d, n_elbows, n)
        bases.append(u[:, :di])
    concat = np.hstack(bases)
    u, s, _ = np.linalg.svd(concat)
    dim = _pick_dimension(s, concat.shape, d, n_elbows, min(concat.shape))
    basis = u[:, :dim].copy()
    anchor = np.argmax(np.abs(basis), axis=0)
    signs = np.where(basis[anchor, np.arange(dim)] < 0.0, -1.0, 1.0)
    basis *= signs
    scores = [basis.T @ g.adjacency @ basis for g in graphs]
    return MaseEmbedding(basis=basis, scores=scores, d=dim)


def embedding_to_json(emb: Embedding) -> dict:
    return {
        "d": emb.d,
        "singular_values": [float(v) for v in emb.singular_values],
        "X": [[float(v) for v in row] for row in emb.X],
        "Y": None if emb.Y is None else [[float(v) for v in row] for row in emb.Y],
    }


def embedding_from_json(obj: dict) -> Embedding:
    x = np.array(obj["X"], dtype=float)
    y = None if obj.get("Y") is None else np.array(obj["Y"], dtype=float)
    return Embedding(
        X=x,
        Y=y,
        singular_values=np.array(obj["singular_values"], dtype=float),
        d=int(obj["d"]),
    )


def embedding_json_dumps(emb: Embedding) -> str:
    return json.dumps(embedding_to_json(emb), sort_keys=True)


def embedding_csv(emb: Embedding) -> str:
    """One row per node: X columns, then Y columns for directed embeddings."""
    full = emb.X if emb.Y is None else np.hstack([emb.X, emb.Y])
    return "\n".join(",".join(repr(float(v)) for v in row) for row in full) + "\n"
