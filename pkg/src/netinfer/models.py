"""Edge-probability model fits and their goodness-of-fit summaries.

Every fit produces a full n x n p_mat so models of different complexity are
compared on the same footing: sum of squared errors, Bernoulli
log-likelihood (probabilities clipped away from 0/1), and BIC with each
model's parameter count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import sims
from .cluster import gmm_sweep
from .embed import ase
from .graphs import Graph, graph_properties

MODEL_KINDS = ("er", "sbm", "dcer", "dcsbm", "rdpg", "ier")
_CLIP = 1e-6


@dataclass(frozen=True)
class ModelFit:
    kind: str
    p_mat: np.ndarray
    params: dict
    n_params: int
    directed: bool
    loops: bool

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        p = np.asarray(self.p_mat, dtype=float)
        if p.size:
            if p.min() < 0 or p.max() > 1:
                raise ValueError("p_mat entries must lie in [0, 1]")
            if not self.directed and not np.array_equal(p, p.T):
                raise ValueError("undirected fit requires a symmetric p_mat")
            if not self.loops and np.any(np.diag(p) != 0):
                raise ValueError("loopless fit requires a zero p_mat diagonal")


@dataclass(frozen=True)
class GoodnessOfFit:
    mse: float
    log_likelihood: float
    n_params: int
    bic: float


def _require_unweighted(g: Graph, purpose: str) -> None:
    if graph_properties(g).is_weighted:
        raise ValueError(f"{purpose} requires a binary graph; symmetrize/binarize first")


def _has_loops(g: Graph) -> bool:
    return not graph_properties(g).is_loopless


def _modeled_mask(n: int, loops: bool) -> np.ndarray:
    # all off-diagonal entries (both triangles), plus the diagonal when loops
    # are modeled; used for edge counts, MSE, likelihood, and BIC alike
    mask = np.ones((n, n), dtype=bool)
    if not loops:
        np.fill_diagonal(mask, False)
    return mask


def _potential_edges(n: int, directed: bool, loops: bool) -> int:
    base = n * (n - 1) if directed else n * (n - 1) // 2
    return base + (n if loops else 0)


def _edge_count(g: Graph, loops: bool) -> int:
    a = g.adjacency != 0
    if g.directed:
        count = int(np.count_nonzero(a)) - int(np.count_nonzero(np.diag(a)))
    else:
        count = int(np.count_nonzero(np.triu(a, 1)))
    if loops:
        count += int(np.count_nonzero(np.diag(a)))
    return count


def fit_er(g: Graph) -> ModelFit:
    """Single shared edge probability: edge count over potential edges."""
    _require_unweighted(g, "fit_er")
    loops = _has_loops(g)
    potential = _potential_edges(g.n, g.directed, loops)
    p = _edge_count(g, loops) / potential if potential else 0.0
    p_mat = np.full((g.n, g.n), p)
    if not loops:
        np.fill_diagonal(p_mat, 0.0)
    return ModelFit("er", p_mat, {"p": float(p)}, 1, g.directed, loops)


def _canonical_blocks(labels) -> tuple[np.ndarray, list]:
    order = sorted(set(labels), key=str)
    index = {lab: i for i, lab in enumerate(order)}
    return np.array([index[lab] for lab in labels]), order


def _estimate_labels(g: Graph, n_blocks: int | None, seed: int) -> tuple[list[int], dict]:
    emb = ase(g)
    data = emb.X if emb.Y is None else np.hstack([emb.X, emb.Y])
    if n_blocks is not None:
        k_range = [int(n_blocks)]
    else:
        k_range = list(range(2, max(2, min(10, g.n // 5)) + 1))
    sweep = gmm_sweep(data, k_range, seed=seed)
    meta = {"k_range": k_range, "selected_k": int(sweep.best.k)}
    return [int(c) for c in sweep.best.labels], meta


def _block_tallies(g: Graph, assignments: np.ndarray, k: int, loops: bool):
    """Per block pair: nonzero-edge count and potential-edge count.

    Undirected graphs count each between-block edge once and each within-block
    edge once; potentials are n_a*n_b between and C(n_a, 2) (+n_a with loops)
    within. Directed graphs count ordered pairs.
    """
    a = g.adjacency != 0
    sizes = np.bincount(assignments, minlength=k)
    counts = np.zeros((k, k))
    potential = np.zeros((k, k))
    masks = [assignments == b for b in range(k)]
    for bi in range(k):
        for bj in range(k):
            sub = a[np.ix_(masks[bi], masks[bj])]
            if bi != bj:
                if not g.directed and bj < bi:
                    continue
                counts[bi, bj] = np.count_nonzero(sub)
                potential[bi, bj] = sizes[bi] * sizes[bj]
                if not g.directed:
                    counts[bj, bi] = counts[bi, bj]
                    potential[bj, bi] = potential[bi, bj]
            else:
                diag = np.count_nonzero(np.diag(sub))
                if g.directed:
                    counts[bi, bj] = np.count_nonzero(sub) - diag
                    potential[bi, bj] = sizes[bi] * (sizes[bi] - 1)
                else:
                    counts[bi, bj] = np.count_nonzero(np.triu(sub, 1))
                    potential[bi, bj] = sizes[bi] * (sizes[bi] - 1) // 2
                if loops:
                    counts[bi, bj] += diag
                    potential[bi, bj] += sizes[bi]
    return counts, potential


def fit_sbm(g: Graph, labels=None, n_blocks: int | None = None, seed: int = 0) -> ModelFit:
    """Blockwise edge frequencies.

    With labels given they are used as-is; otherwise they are estimated by a
    GMM sweep over the ASE embedding (k fixed to n_blocks when provided, else
    swept over 2..max(2, min(10, n//5))).
    """
    _require_unweighted(g, "fit_sbm")
    loops = _has_loops(g)
    meta: dict = {}
    if labels is None:
        labels, meta = _estimate_labels(g, n_blocks, seed)
    if len(labels) != g.n:
        raise ValueError(f"labels must have length {g.n}, got {len(labels)}")
    assignments, order = _canonical_blocks(labels)
    k = len(order)
    counts, potential = _block_tallies(g, assignments, k, loops)
    with np.errstate(invalid="ignore"):
        block_p = np.where(potential > 0, counts / np.maximum(potential, 1), 0.0)
    zero_pairs = [
        [order[i], order[j]] for i, j in zip(*np.nonzero(potential == 0)) if g.directed or i <= j
    ]
    p_mat = block_p[np.ix_(assignments, assignments)]
    if not loops:
        np.fill_diagonal(p_mat, 0.0)
    n_params = k * k if g.directed else k * (k + 1) // 2
    params = {
        "labels": [order[b] for b in assignments],
        "block_names": order,
        "block_probs": block_p,
        "zero_potential_pairs": zero_pairs,
        **meta,
    }
    return ModelFit("sbm", p_mat, params, n_params, g.directed, loops)


def _degree_fractions(g: Graph, assignments: np.ndarray, k: int) -> np.ndarray:
    a = g.adjacency != 0
    deg = a.sum(axis=1) + (a.sum(axis=0) if g.directed else 0)
    theta = np.empty(g.n)
    for b in range(k):
        mask = assignments == b
        total = deg[mask].sum()
        # a block with no edges gets uniform weights
        theta[mask] = deg[mask] / total if total > 0 else 1.0 / mask.sum()
    return theta


def fit_dcsbm(g: Graph, labels=None, n_blocks: int | None = None, seed: int = 0) -> ModelFit:
    """Degree-corrected blocks: p_ij = theta_i * theta_j * n_a * n_b * B[z_i][z_j].

    theta is each node's share of its block's total degree and B is the
    blockwise edge frequency, so equal degrees within every block reduce the
    fit to the plain block model. p_mat is clipped into [0, 1].
    """
    _require_unweighted(g, "fit_dcsbm")
    loops = _has_loops(g)
    meta: dict = {}
    if labels is None:
        labels, meta = _estimate_labels(g, n_blocks, seed)
    if len(labels) != g.n:
        raise ValueError(f"labels must have length {g.n}, got {len(labels)}")
    assignments, order = _canonical_blocks(labels)
    k = len(order)
    counts, potential = _block_tallies(g, assignments, k, loops)
    with np.errstate(invalid="ignore"):
        block_p = np.where(potential > 0, counts / np.maximum(potential, 1), 0.0)
    theta = _degree_fractions(g, assignments, k)
    sizes = np.bincount(assignments, minlength=k).astype(float)
    scaled = theta * sizes[assignments]  # block-regular graphs give all ones
    p_mat = np.outer(scaled, scaled) * block_p[np.ix_(assignments, assignments)]
    p_mat = np.clip(p_mat, 0.0, 1.0)
    if not g.directed:
        p_mat = (p_mat + p_mat.T) / 2.0
    if not loops:
        np.fill_diagonal(p_mat, 0.0)
    base = k * k if g.directed else k * (k + 1) // 2
    n_params = base + (g.n - k)
    params = {
        "labels": [order[b] for b in assignments],
        "block_names": order,
        "block_probs": block_p,
        "degree_corrections": theta,
        **meta,
    }
    return ModelFit("dcsbm", p_mat, params, n_params, g.directed, loops)


def fit_dcer(g: Graph) -> ModelFit:
    """Degree-corrected single block (K = 1); parameter count 1 + (n - 1)."""
    fit = fit_dcsbm(g, labels=[0] * g.n)
    return ModelFit("dcer", fit.p_mat, fit.params, fit.n_params, fit.directed, fit.loops)


def fit_rdpg(g: Graph, d: int | None = None) -> ModelFit:
    """Dot products of the ASE latent positions, clipped into [0, 1]."""
    _require_unweighted(g, "fit_rdpg")
    loops = _has_loops(g)
    emb = ase(g, d=d)
    if emb.Y is None:
        p_mat = emb.X @ emb.X.T
        p_mat = (p_mat + p_mat.T) / 2.0
    else:
        p_mat = emb.X @ emb.Y.T
    p_mat = np.clip(p_mat, 0.0, 1.0)
    if not loops:
        np.fill_diagonal(p_mat, 0.0)
    n_params = g.n * emb.d * (2 if g.directed else 1)
    params = {"latent": emb.X, "latent_right": emb.Y, "d": emb.d}
    return ModelFit("rdpg", p_mat, params, n_params, g.directed, loops)


def fit_ier(g: Graph) -> ModelFit:
    """Saturated model: p_mat is the observed binary adjacency itself."""
    _require_unweighted(g, "fit_ier")
    loops = _has_loops(g)
    p_mat = (g.adjacency != 0).astype(float)
    n_params = _potential_edges(g.n, g.directed, loops)
    return ModelFit("ier", p_mat, {}, n_params, g.directed, loops)


def goodness_of_fit(fit: ModelFit, g: Graph) -> GoodnessOfFit:
    """Sum-squared error, clipped Bernoulli log-likelihood, and BIC.

    The squared error sums over all modeled matrix entries (off-diagonals in
    both triangles, plus the diagonal when loops are modeled), so a symmetric
    matrix counts each edge twice. The likelihood sums over each potential
    edge once (unordered pairs for undirected graphs), which is also the
    observation count in the BIC penalty.
    """
    if fit.p_mat.shape != g.adjacency.shape:
        raise ValueError(
            f"fit is for shape {fit.p_mat.shape}, graph has shape {g.adjacency.shape}"
        )
    _require_unweighted(g, "goodness_of_fit")
    a = (g.adjacency != 0).astype(float)
    sq_mask = _modeled_mask(g.n, fit.loops)
    mse = float(np.sum((a[sq_mask] - fit.p_mat[sq_mask]) ** 2))
    if g.directed:
        like_mask = sq_mask
    else:
        like_mask = np.triu(np.ones((g.n, g.n), dtype=bool), k=1)
        if fit.loops:
            like_mask |= np.eye(g.n, dtype=bool)
    al = a[like_mask]
    clipped = np.clip(fit.p_mat[like_mask], _CLIP, 1.0 - _CLIP)
    log_likelihood = float(np.sum(al * np.log(clipped) + (1.0 - al) * np.log1p(-clipped)))
    n_entries = int(like_mask.sum())
    bic = -2.0 * log_likelihood + fit.n_params * np.log(n_entries) if n_entries else 0.0
    return GoodnessOfFit(
        mse=mse, log_likelihood=log_likelihood, n_params=fit.n_params, bic=float(bic)
    )


def sample_from_fit(fit: ModelFit, seed: int = 0) -> Graph:
    return sims.sample_ier(fit.p_mat, fit.directed, fit.loops, None, seed)


_FITTERS = {
    "er": lambda g, **kw: fit_er(g),
    "sbm": lambda g, **kw: fit_sbm(g, **kw),
    "dcer": lambda g, **kw: fit_dcer(g),
    "dcsbm": lambda g, **kw: fit_dcsbm(g, **kw),
    "rdpg": lambda g, **kw: fit_rdpg(g, d=kw.get("d")),
    "ier": lambda g, **kw: fit_ier(g),
}


def fit_model(kind: str, g: Graph, labels=None, n_blocks=None, d=None, seed: int = 0) -> ModelFit:
    """Dispatch a fit by kind; label/block arguments apply where meaningful."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    kwargs: dict = {}
    if kind in ("sbm", "dcsbm"):
        kwargs = {"labels": labels, "n_blocks": n_blocks, "seed": seed}
    elif kind == "rdpg":
        kwargs = {"d": d}
    return _FITTERS[kind](g, **kwargs)


def model_fit_to_json(fit: ModelFit, p_mat_file: str | None = None) -> dict:
    """JSON-safe summary; large arrays (p_mat, latents) are exported separately."""
    params: dict = {}
    for key, value in fit.params.items():
        if isinstance(value, np.ndarray):
            params[key] = value.tolist()
        elif key == "labels" or key == "block_names":
            params[key] = [int(v) if isinstance(v, (int, np.integer)) else str(v) for v in value]
        else:
            params[key] = value
    if "latent" in params:
        del params["latent"]
    if "latent_right" in params:
        del params["latent_right"]
    out = {
        "kind": fit.kind,
        "n_params": fit.n_params,
        "params": params,
    }
    if p_mat_file is not None:
        out["p_mat_file"] = p_mat_file
    return out


def model_fit_json_dumps(fit: ModelFit) -> str:
    return json.dumps(model_fit_to_json(fit), sort_keys=True)
