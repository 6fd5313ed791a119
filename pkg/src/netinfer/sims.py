"""Random-graph samplers: Bernoulli edge models with optional weight draws.

Every sampler is deterministic given its seed. Edge support is drawn from one
Philox stream and weights from an independent jumped stream, so the support
pattern of a weighted sample equals the unweighted sample with the same seed
(provided the weight distribution has no mass at exactly 0; a 0 draw erases
its edge).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._rng import edge_weight_streams
from .graphs import Graph

WEIGHT_KINDS = ("constant", "uniform", "normal", "poisson")


@dataclass(frozen=True)
class WeightDistribution:
    """Validated edge-weight law; build via the classmethod constructors."""

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float = 1.0) -> "WeightDistribution":
        if not np.isfinite(value) or value < 0:
            raise ValueError("constant weight must be finite and nonnegative")
        return cls("constant", (float(value),))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "WeightDistribution":
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("uniform bounds must be finite")
        if lo > hi:
            raise ValueError(f"uniform requires lo <= hi, got ({lo}, {hi})")
        if lo < 0:
            raise ValueError("uniform lo must be nonnegative (weights cannot be negative)")
        return cls("uniform", (float(lo), float(hi)))

    @classmethod
    def normal(cls, mean: float, sd: float) -> "WeightDistribution":
        if not (np.isfinite(mean) and np.isfinite(sd)):
            raise ValueError("normal parameters must be finite")
        if sd < 0:
            raise ValueError(f"normal requires sd >= 0, got {sd}")
        # draws are kept as-is, and negative weights are invalid graph entries
        if mean - 6.0 * sd < 0:
            raise ValueError("normal weights require mean - 6*sd >= 0")
        return cls("normal", (float(mean), float(sd)))

    @classmethod
    def poisson(cls, rate: float) -> "WeightDistribution":
        if not np.isfinite(rate) or rate < 0:
            raise ValueError(f"poisson requires rate >= 0, got {rate}")
        return cls("poisson", (float(rate),))

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, self.params[0])
        if self.kind == "uniform":
            lo, hi = self.params
            return rng.uniform(lo, hi, size)
        if self.kind == "normal":
            mean, sd = self.params
            return rng.normal(mean, sd, size)
        rate = self.params[0]
        return rng.poisson(rate, size).astype(float)

    def to_dict(self) -> dict:
        keys = {
            "constant": ("value",),
            "uniform": ("lo", "hi"),
            "normal": ("mean", "sd"),
            "poisson": ("rate",),
        }[self.kind]
        out: dict = {"kind": self.kind}
        out.update(zip(keys, self.params))
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "WeightDistribution":
        kind = obj.get("kind")
        if kind == "constant":
            return cls.constant(obj["value"])
        if kind == "uniform":
            return cls.uniform(obj["lo"], obj["hi"])
        if kind == "normal":
            return cls.normal(obj["mean"], obj["sd"])
        if kind == "poisson":
            return cls.poisson(obj["rate"])
        raise ValueError(f"unknown weight kind {kind!r}")


@dataclass(frozen=True)
class SbmParams:
    """Block-model parameters; degree corrections are rescaled to block max 1."""

    block_sizes: tuple[int, ...]
    block_probs: np.ndarray
    degree_corrections: np.ndarray | None = None
    directed: bool = False
    loops: bool = False

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("block_sizes must be positive integers")
        k = len(sizes)
        bp = np.array(self.block_probs, dtype=float)
        if bp.shape != (k, k):
            raise ValueError(f"block_probs must be {k}x{k}, got {bp.shape}")
        if not np.all(np.isfinite(bp)) or bp.min() < 0 or bp.max() > 1:
            raise ValueError("block_probs entries must lie in [0, 1]")
        if not self.directed and not np.array_equal(bp, bp.T):
            raise ValueError("undirected block_probs must be symmetric")
        bp.setflags(write=False)
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "block_probs", bp)
        if self.degree_corrections is not None:
            theta = np.array(self.degree_corrections, dtype=float)
            n = sum(sizes)
            if theta.shape != (n,):
                raise ValueError(f"degree_corrections must have length {n}, got {theta.shape}")
            if not np.all(np.isfinite(theta)) or theta.min() <= 0:
                raise ValueError("degree_corrections must be positive")
            # normalization convention: block max rescaled to 1
            start = 0
            for s in sizes:
                theta[start : start + s] /= theta[start : start + s].max()
                start += s
            theta.setflags(write=False)
            object.__setattr__(self, "degree_corrections", theta)

    @property
    def n(self) -> int:
        return sum(self.block_sizes)

    @property
    def block_assignments(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.block_sizes)), self.block_sizes)

    def to_dict(self) -> dict:
        return {
            "block_sizes": list(self.block_sizes),
            "block_probs": self.block_probs.tolist(),
            "degree_corrections": None
            if self.degree_corrections is None
            else self.degree_corrections.tolist(),
            "directed": self.directed,
            "loops": self.loops,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SbmParams":
        return cls(
            block_sizes=tuple(obj["block_sizes"]),
            block_probs=np.array(obj["block_probs"], dtype=float),
            degree_corrections=None
            if obj.get("degree_corrections") is None
            else np.array(obj["degree_corrections"], dtype=float),
            directed=bool(obj.get("directed", False)),
            loops=bool(obj.get("loops", False)),
        )


def _validate_probability_matrix(p: np.ndarray, directed: bool) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"probability matrix must be square, got shape {p.shape}")
    if p.size:
        if not np.all(np.isfinite(p)):
            raise ValueError("probability matrix entries must be finite")
        if p.min() < 0 or p.max() > 1:
            bad = np.unravel_index(int(np.argmax(np.abs(p - 0.5))), p.shape)
            raise ValueError(
                f"probability matrix entries must lie in [0, 1]; entry {tuple(int(b) for b in bad)} = {p[bad]}"
            )
    if not directed and not np.array_equal(p, p.T):
        raise ValueError("undirected sampling requires a symmetric probability matrix")
    return p


def sample_ier(
    p_mat,
    directed: bool = False,
    loops: bool = False,
    weights: WeightDistribution | None = None,
    seed: int = 0,
) -> Graph:
    """Independent-edge Bernoulli sample: edge (i, j) present iff U_ij < P_ij."""
    p = _validate_probability_matrix(p_mat, directed)
    n = p.shape[0]
    edge_rng, weight_rng = edge_weight_streams(seed)
    a = np.zeros((n, n))
    if directed:
        u = edge_rng.random((n, n))
        mask = u < p
        if not loops:
            np.fill_diagonal(mask, False)
        if weights is None:
            a[mask] = 1.0
        else:
            idx = np.nonzero(mask)
            a[idx] = weights.draw(weight_rng, idx[0].size)
    else:
        ii, jj = np.triu_indices(n, k=0 if loops else 1)
        u = edge_rng.random(ii.size)
        present = u < p[ii, jj]
        ei, ej = ii[present], jj[present]
        vals = np.ones(ei.size) if weights is None else weights.draw(weight_rng, ei.size)
        a[ei, ej] = vals
        a[ej, ei] = vals
    return Graph(a, directed=directed)


def sample_er_np(
    n: int,
    p: float,
    directed: bool = False,
    loops: bool = False,
    weights: WeightDistribution | None = None,
    seed: int = 0,
) -> Graph:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    return sample_ier(np.full((n, n), float(p)), directed, loops, weights, seed)


def sample_er_nm(
    n: int,
    m: int,
    directed: bool = False,
    loops: bool = False,
    seed: int = 0,
) -> Graph:
    """Uniform graph with exactly m edges over the distinct potential edges."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if directed:
        ii, jj = np.nonzero(~np.eye(n, dtype=bool)) if not loops else np.nonzero(np.ones((n, n), dtype=bool))
    else:
        ii, jj = np.triu_indices(n, k=0 if loops else 1)
    capacity = ii.size
    if m > capacity:
        raise ValueError(f"m = {m} exceeds the {capacity} potential edges")
    edge_rng, _ = edge_weight_streams(seed)
    chosen = edge_rng.choice(capacity, size=m, replace=False)
    a = np.zeros((n, n))
    a[ii[chosen], jj[chosen]] = 1.0
    if not directed:
        a[jj[chosen], ii[chosen]] = 1.0
    return Graph(a, directed=directed)


def sbm_probability_matrix(params: SbmParams) -> np.ndarray:
    """Expand block parameters into the full n x n edge-probability matrix."""
    z = params.block_assignments
    p = params.block_probs[np.ix_(z, z)]
    if params.degree_corrections is not None:
        theta = params.degree_corrections
        p = p * np.outer(theta, theta)
        if p.size and p.max() > 1.0:
            i, j = np.unravel_index(int(np.argmax(p)), p.shape)
            raise ValueError(
                f"degree-corrected probability exceeds 1 at node pair ({i}, {j}): {p[i, j]}"
            )
    return p


def sample_sbm(
    params: SbmParams,
    weights: WeightDistribution | None = None,
    seed: int = 0,
) -> Graph:
    """Sample an (DC)SBM; the result carries block assignments as labels."""
    p = sbm_probability_matrix(params)
    g = sample_ier(p, params.directed, params.loops, weights, seed)
    return replace(g, labels=tuple(int(b) for b in params.block_assignments))


def sample_rdpg(
    latent,
    latent_right=None,
    loops: bool = False,
    weights: WeightDistribution | None = None,
    seed: int = 0,
) -> Graph:
    """Random dot-product graph: P = X X' (undirected) or X Y' (directed)."""
    x = np.asarray(latent, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"latent positions must be 2-D, got shape {x.shape}")
    if latent_right is None:
        p = x @ x.T
        p = (p + p.T) / 2.0  # dot products are symmetric; enforce it exactly
        directed = False
    else:
        y = np.asarray(latent_right, dtype=float)
        if y.shape != x.shape:
            raise ValueError(f"latent_right shape {y.shape} != latent shape {x.shape}")
        p = x @ y.T
        directed = True
    if p.size and (p.min() < -1e-12 or p.max() > 1 + 1e-12):
        i, j = np.unravel_index(int(np.argmax(np.abs(p - 0.5))), p.shape)
        raise ValueError(f"latent dot product outside [0, 1] at node pair ({i}, {j}): {p[i, j]}")
    p = np.clip(p, 0.0, 1.0)
    return sample_ier(p, directed, loops, weights, seed)
