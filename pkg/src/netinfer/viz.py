"""Deterministic SVG emitters for adjacency heatmaps, overlays, and pairplots.

Output is plain SVG 1.1 text built with fixed-precision formatting, so the
same inputs always produce the same bytes and figures diff cleanly in tests.
No plotting dependency is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .graphs import Graph

SORT_MODES = ("none", "degree", "block_then_degree")

_BACKGROUND = (255, 255, 255)
_SEQ_HIGH = (8, 48, 107)
_DIV_LOW = (33, 102, 172)
_DIV_MID = (247, 247, 247)
_DIV_HIGH = (178, 24, 43)
_SEPARATOR = "#333333"

# categorical palette (one color per graph / block label)
_PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)


@dataclass(frozen=True)
class SortSpec:
    """Row/column ordering for matrix plots.

    mode "none" keeps the input order, "degree" sorts by total degree
    descending, "block_then_degree" orders blocks by size descending (ties by
    name) and nodes by degree descending within each block.
    """

    mode: str = "none"
    labels: tuple | None = None

    def __post_init__(self):
        if self.mode not in SORT_MODES:
            raise ValueError(f"unknown sort mode {self.mode!r}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))


def _sort_permutation(matrix: np.ndarray, mode: str, labels) -> list[int]:
    n = matrix.shape[0]
    if mode == "none":
        return list(range(n))
    degree = matrix.sum(axis=1) + matrix.sum(axis=0)
    if mode == "degree":
        return sorted(range(n), key=lambda i: (-degree[i], i))
    if labels is None:
        raise ValueError("block_then_degree sorting requires labels")
    if len(labels) != n:
        raise ValueError(f"labels must have length {n}, got {len(labels)}")
    sizes: dict = {}
    for lab in labels:
        sizes[lab] = sizes.get(lab, 0) + 1
    blocks = sorted(sizes, key=lambda lab: (-sizes[lab], str(lab)))
    out: list[int] = []
    for lab in blocks:
        members = [i for i in range(n) if labels[i] == lab]
        out.extend(sorted(members, key=lambda i: (-degree[i], i)))
    return out


def sort_indices(g: Graph, spec: SortSpec) -> list[int]:
    """Permutation of node indices realizing the spec's ordering on g."""
    labels = spec.labels if spec.labels is not None else g.labels
    return _sort_permutation(g.adjacency, spec.mode, labels)


def _hex(rgb: tuple[int, int, int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _lerp(a, b, t: float) -> tuple[int, int, int]:
    return tuple(int(round(a[i] + (b[i] - a[i]) * t)) for i in range(3))


def _color(value: float, vmin: float, vmax: float, colormap: str) -> str:
    t = 0.0 if vmax <= vmin else (value - vmin) / (vmax - vmin)
    t = min(max(t, 0.0), 1.0)
    if colormap == "sequential":
        return _hex(_lerp(_BACKGROUND, _SEQ_HIGH, t))
    if colormap == "diverging":
        if t < 0.5:
            return _hex(_lerp(_DIV_LOW, _DIV_MID, t * 2.0))
        return _hex(_lerp(_DIV_MID, _DIV_HIGH, (t - 0.5) * 2.0))
    raise ValueError(f"unknown colormap {colormap!r}")


def _cell_size(n: int) -> int:
    return max(2, min(24, 640 // n))


def _svg_open(width: int, height: int) -> str:
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">'
    )


def _title_text(title: str, x: int) -> list[str]:
    if not title:
        return []
    return [f'<text x="{x}" y="18" font-family="sans-serif" font-size="14">{escape(title)}</text>']


def _block_boundaries(sorted_labels) -> list[int]:
    cuts = []
    for r in range(len(sorted_labels) - 1):
        if sorted_labels[r] != sorted_labels[r + 1]:
            cuts.append(r + 1)
    return cuts


def heatmap_svg(
    matrix,
    spec: SortSpec = SortSpec(),
    title: str = "",
    colormap: str = "sequential",
    vmin: float | None = None,
    vmax: float | None = None,
) -> str:
    """Matrix heatmap: one rect per cell, linear color scale over [vmin, vmax]
    (matrix min/max when not given), block separator lines when labels exist."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"matrix must be square and nonempty, got shape {m.shape}")
    n = m.shape[0]
    perm = _sort_permutation(m, spec.mode, spec.labels)
    m = m[np.ix_(perm, perm)]
    labels = None if spec.labels is None else [spec.labels[i] for i in perm]
    lo = float(m.min()) if vmin is None else float(vmin)
    hi = float(m.max()) if vmax is None else float(vmax)
    cell = _cell_size(n)
    left, top = 20, 28
    width = left + n * cell + 20
    height = top + n * cell + 20
    parts = [_svg_open(width, height)]
    parts += _title_text(title, left)
    for i in range(n):
        for j in range(n):
            fill = _color(m[i, j], lo, hi, colormap)
            x = left + j * cell
            y = top + i * cell
            parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>')
    if labels is not None:
        span = n * cell
        for cut in _block_boundaries(labels):
            pos = cut * cell
            parts.append(
                f'<line x1="{left}" y1="{top + pos}" x2="{left + span}" y2="{top + pos}" '
                f'stroke="{_SEPARATOR}" stroke-width="1"/>'
            )
            parts.append(
                f'<line x1="{left + pos}" y1="{top}" x2="{left + pos}" y2="{top + span}" '
                f'stroke="{_SEPARATOR}" stroke-width="1"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def gridplot_svg(graphs: list[Graph], names=None, spec: SortSpec = SortSpec()) -> str:
    """Overlay several same-size graphs: one semitransparent marker per nonzero
    cell, one color per graph, shared ordering from the union support."""
    if not graphs:
        raise ValueError("need at least one graph")
    n = graphs[0].n
    for i, g in enumerate(graphs):
        if g.n != n:
            raise ValueError(f"graph {i} has {g.n} nodes, expected {n}")
    if n == 0:
        raise ValueError("graphs are empty")
    if len(graphs) > len(_PALETTE):
        raise ValueError(f"at most {len(_PALETTE)} graphs supported")
    if names is None:
        names = [f"graph {i}" for i in range(len(graphs))]
    if len(names) != len(graphs):
        raise ValueError(f"need {len(graphs)} names, got {len(names)}")
    union = np.zeros((n, n))
    for g in graphs:
        union += (g.adjacency != 0).astype(float)
    labels = spec.labels
    if labels is None:
        for g in graphs:
            if g.labels is not None:
                labels = g.labels
                break
    perm = _sort_permutation(union, spec.mode, labels)
    cell = _cell_size(n)
    left, top = 20, 28
    legend_w = 140
    width = left + n * cell + 20 + legend_w
    height = top + max(n * cell, 18 * len(graphs)) + 20
    inv = np.empty(n, dtype=int)
    inv[perm] = np.arange(n)
    parts = [_svg_open(width, height)]
    r = max(1, cell // 3)
    for gi, g in enumerate(graphs):
        color = _PALETTE[gi]
        ii, jj = np.nonzero(g.adjacency)
        for i, j in zip(ii, jj):
            cx = left + inv[j] * cell + cell // 2
            cy = top + inv[i] * cell + cell // 2
            parts.append(f'<circle cx="{cx}" cy="{cy}" r="{r}" fill="{color}" fill-opacity="0.5"/>')
    lx = left + n * cell + 20
    for gi, name in enumerate(names):
        ly = top + gi * 18
        parts.append(f'<rect x="{lx}" y="{ly}" width="12" height="12" fill="{_PALETTE[gi]}"/>')
        parts.append(
            f'<text x="{lx + 16}" y="{ly + 10}" font-family="sans-serif" font-size="11">'
            f"{escape(str(name))}</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _hist_counts(column: np.ndarray, lo: float, hi: float, bins: int = 10) -> np.ndarray:
    if hi <= lo:
        counts = np.zeros(bins)
        counts[0] = column.size
        return counts
    idx = np.clip(((column - lo) / (hi - lo) * bins).astype(int), 0, bins - 1)
    return np.bincount(idx, minlength=bins).astype(float)


def pairplot_svg(points, labels=None, dims=None, title: str = "") -> str:
    """Scatter-matrix of embedding dimensions, histograms on the diagonal,
    colors by label. dims defaults to the first min(d, 5) dimensions."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError(f"points must be a nonempty 2-D array, got shape {pts.shape}")
    m, d = pts.shape
    if dims is None:
        dims = list(range(min(d, 5)))
    dims = [int(v) for v in dims]
    for v in dims:
        if not (0 <= v < d):
            raise ValueError(f"dimension {v} out of range for d = {d}")
    if not dims:
        raise ValueError("dims must be nonempty")
    if labels is not None and len(labels) != m:
        raise ValueError(f"labels must have length {m}, got {len(labels)}")
    uniq = sorted(set(labels), key=str) if labels is not None else [None]
    if len(uniq) > len(_PALETTE):
        raise ValueError(f"at most {len(_PALETTE)} label classes supported")
    color_of = {lab: _PALETTE[i] for i, lab in enumerate(uniq)}
    point_colors = (
        [color_of[lab] for lab in labels] if labels is not None else [_PALETTE[0]] * m
    )
    k = len(dims)
    panel, gap, left, top = 140, 12, 24, 30
    width = left + k * panel + (k - 1) * gap + 20
    height = top + k * panel + (k - 1) * gap + 20
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    parts = [_svg_open(width, height)]
    parts += _title_text(title, left)

    def px(value: float, dim: int, origin: int) -> str:
        span = hi[dim] - lo[dim]
        t = 0.5 if span <= 0 else (value - lo[dim]) / span
        return f"{origin + t * panel:.2f}"

    def py(value: float, dim: int, origin: int) -> str:
        span = hi[dim] - lo[dim]
        t = 0.5 if span <= 0 else (value - lo[dim]) / span
        return f"{origin + (1.0 - t) * panel:.2f}"

    for r in range(k):
        for c in range(k):
            ox = left + c * (panel + gap)
            oy = top + r * (panel + gap)
            parts.append(
                f'<rect x="{ox}" y="{oy}" width="{panel}" height="{panel}" '
                'fill="none" stroke="#cccccc" stroke-width="1"/>'
            )
            if r == c:
                dim = dims[r]
                bins = 10
                per_label = [
                    _hist_counts(pts[[lab == u for lab in labels], dim] if labels is not None else pts[:, dim], lo[dim], hi[dim], bins)
                    for u in uniq
                ]
                peak = max(counts.max() for counts in per_label) or 1.0
                bar_w = panel / bins
                for u, counts in zip(uniq, per_label):
                    for b in range(bins):
                        if counts[b] == 0:
                            continue
                        bh = counts[b] / peak * (panel - 4)
                        bx = ox + b * bar_w
                        by = oy + panel - bh
                        parts.append(
                            f'<rect x="{bx:.2f}" y="{by:.2f}" width="{bar_w:.2f}" '
                            f'height="{bh:.2f}" fill="{color_of[u]}" fill-opacity="0.6"/>'
                        )
            else:
                xd, yd = dims[c], dims[r]
                for i in range(m):
                    parts.append(
                        f'<circle cx="{px(pts[i, xd], xd, ox)}" cy="{py(pts[i, yd], yd, oy)}" '
                        f'r="2" fill="{point_colors[i]}" fill-opacity="0.7"/>'
                    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
