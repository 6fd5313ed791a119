"""Dense graph container, format ingestion/export, and preprocessing utilities.

The adjacency is always a square float64 matrix; any nonzero entry is an edge
and its value is the edge weight. Undirected graphs must be exactly symmetric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


class ParseError(ValueError):
    """Malformed text input; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


@dataclass(frozen=True)
class Graph:
    """Immutable weighted graph.

    Parameters
    ----------
    adjacency : array_like, shape (n, n)
        Nonnegative finite weights; nonzero means an edge is present.
    directed : bool
        When False the adjacency must be exactly symmetric.
    node_names : sequence of str, optional
    labels : sequence, optional
        Categorical block labels, one per node.
    """

    adjacency: np.ndarray
    directed: bool = False
    node_names: tuple[str, ...] | None = None
    labels: tuple | None = None

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {a.shape}")
        if a.size:
            if not np.all(np.isfinite(a)):
                raise ValueError("adjacency entries must be finite")
            if a.min() < 0:
                raise ValueError("adjacency entries must be nonnegative")
        if not self.directed and not np.array_equal(a, a.T):
            raise ValueError("undirected graph requires an exactly symmetric adjacency")
        for field, attr in (("node_names", self.node_names), ("labels", self.labels)):
            if attr is not None and len(attr) != a.shape[0]:
                raise ValueError(f"{field} must have length {a.shape[0]}, got {len(attr)}")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)
        if self.node_names is not None:
            object.__setattr__(self, "node_names", tuple(str(s) for s in self.node_names))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]


@dataclass(frozen=True)
class GraphProperties:
    is_symmetric: bool
    is_loopless: bool
    is_weighted: bool
    is_fully_connected: bool


def graph_properties(g: Graph) -> GraphProperties:
    """Exact structural flags; no tolerance is applied anywhere."""
    a = g.adjacency
    return GraphProperties(
        is_symmetric=bool(np.array_equal(a, a.T)),
        is_loopless=bool(np.all(np.diag(a) == 0.0)),
        is_weighted=bool(np.any((a != 0.0) & (a != 1.0))),
        is_fully_connected=_component_labels(g)[0] == 1,
    )


def _component_labels(g: Graph) -> tuple[int, np.ndarray]:
    # weak connectivity on the binarized support union
    if g.n == 0:
        return 0, np.empty(0, dtype=int)
    support = (g.adjacency != 0) | (g.adjacency.T != 0)
    return connected_components(csr_matrix(support), directed=False)


def _induced_subgraph(g: Graph, keep: np.ndarray) -> Graph:
    sub = np.ascontiguousarray(g.adjacency[np.ix_(keep, keep)])
    names = tuple(g.node_names[i] for i in keep) if g.node_names is not None else None
    labels = tuple(g.labels[i] for i in keep) if g.labels is not None else None
    return Graph(sub, directed=g.directed, node_names=names, labels=labels)


def largest_connected_component(g: Graph) -> tuple[Graph, list[int]]:
    """Induced subgraph on the largest weakly-connected component.

    Ties are broken toward the component containing the smallest original node
    index. Returns (subgraph, kept original indices in ascending order).
    """
    if g.n == 0:
        raise ValueError("empty graph has no connected components")
    _, labels = _component_labels(g)
    sizes = np.bincount(labels)
    candidates = np.flatnonzero(sizes == sizes.max())
    # labels are assigned in first-encounter order, so the first occurrence of
    # each candidate label is that component's minimum node index
    chosen = min(candidates, key=lambda c: np.flatnonzero(labels == c)[0])
    keep = np.flatnonzero(labels == chosen)
    return _induced_subgraph(g, keep), [int(i) for i in keep]


def multigraph_lcc_intersection(graphs: list[Graph]) -> tuple[list[Graph], list[int]]:
    """Restrict every graph to the intersection of their LCC node sets."""
    if not graphs:
        raise ValueError("need at least one graph")
    n = graphs[0].n
    for i, g in enumerate(graphs):
        if g.n != n:
            raise ValueError(f"graph {i} has {g.n} nodes, expected {n}")
    common: set[int] | None = None
    for g in graphs:
        _, kept = largest_connected_component(g)
        common = set(kept) if common is None else common & set(kept)
    if not common:
        raise ValueError("LCC intersection is empty")
    keep = np.array(sorted(common), dtype=int)
    return [_induced_subgraph(g, keep) for g in graphs], [int(i) for i in keep]


def symmetrize(g: Graph, method: str = "average") -> Graph:
    """Force symmetry by averaging or by reflecting one triangle.

    method "avg"/"average": (A + A.T) / 2; "triu"/"tril": reflect that
    triangle (diagonal kept). The result is flagged undirected.
    """
    a = g.adjacency
    if method in ("avg", "average"):
        out = (a + a.T) / 2.0
    elif method == "triu":
        out = np.triu(a) + np.triu(a, 1).T
    elif method == "tril":
        out = np.tril(a) + np.tril(a, -1).T
    else:
        raise ValueError(f"unknown symmetrize method {method!r}")
    return Graph(out, directed=False, node_names=g.node_names, labels=g.labels)


def import_edge_list(text: str, directed: bool = False) -> Graph:
    """Parse `source,target[,weight]` lines into a Graph.

    Blank lines and `#` comments are skipped. Node order is first appearance.
    Duplicate edges overwrite. Missing weight means 1.0. Malformed lines raise
    ParseError with the line number.
    """
    order: dict[str, int] = {}
    edges: list[tuple[str, str, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3):
            raise ParseError(lineno, f"expected source,target[,weight], got {len(parts)} fields")
        src, dst = parts[0], parts[1]
        if not src or not dst:
            raise ParseError(lineno, "empty node name")
        weight = 1.0
        if len(parts) == 3:
            try:
                weight = float(parts[2])
            except ValueError:
                raise ParseError(lineno, f"non-numeric weight {parts[2]!r}") from None
            if not np.isfinite(weight):
                raise ParseError(lineno, "weight must be finite")
            if weight < 0:
                raise ParseError(lineno, "weight must be nonnegative")
        for name in (src, dst):
            order.setdefault(name, len(order))
        edges.append((src, dst, weight))
    n = len(order)
    a = np.zeros((n, n))
    for src, dst, weight in edges:
        i, j = order[src], order[dst]
        a[i, j] = weight
        if not directed:
            a[j, i] = weight
    return Graph(a, directed=directed, node_names=tuple(order))


def import_adjacency_csv(text: str, directed: bool = False) -> Graph:
    """Parse a square numeric grid (comma-separated rows) into a Graph."""
    rows: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(p) for p in line.split(",")])
        except ValueError:
            raise ParseError(lineno, "non-numeric matrix entry") from None
    n = len(rows)
    for lineno, row in enumerate(rows, start=1):
        if len(row) != n:
            raise ParseError(lineno, f"expected {n} columns, got {len(row)}")
    return Graph(np.array(rows, dtype=float).reshape(n, n), directed=directed)


def _looks_like_adjacency(text: str) -> bool:
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(line.split(","))
    if not rows:
        return False
    width = len(rows[0])
    if width != len(rows):
        return False
    try:
        for row in rows:
            if len(row) != width:
                return False
            for p in row:
                float(p)
    except ValueError:
        return False
    return True


def import_graph_csv(text: str, directed: bool = False, fmt: str = "auto") -> Graph:
    """Load either interchange format.

    fmt "edges" or "matrix" forces one parser; "auto" treats a square
    all-numeric grid as an adjacency matrix and anything else as an edge list.
    """
    if fmt == "edges":
        return import_edge_list(text, directed)
    if fmt == "matrix":
        return import_adjacency_csv(text, directed)
    if fmt != "auto":
        raise ValueError(f"unknown graph format {fmt!r}")
    if _looks_like_adjacency(text):
        return import_adjacency_csv(text, directed)
    return import_edge_list(text, directed)


def export_edge_list(g: Graph) -> str:
    """Emit `source,target,weight` lines (undirected edges written once, i <= j).

    Every node is first declared with a zero-weight self-line so that a
    reimport sees nodes in index order and keeps isolated nodes; a real
    self-loop later overwrites its declaration.
    """
    names = g.node_names if g.node_names is not None else tuple(str(i) for i in range(g.n))
    for name in names:
        if "," in name or "\n" in name or name.startswith("#"):
            raise ValueError(f"node name {name!r} cannot be written as CSV")
    a = g.adjacency
    if g.directed:
        ii, jj = np.nonzero(a)
    else:
        ii, jj = np.nonzero(np.triu(a))
    lines = [f"{name},{name},0.0" for name in names]
    lines += [f"{names[i]},{names[j]},{float(a[i, j])!r}" for i, j in zip(ii, jj)]
    return "\n".join(lines) + ("\n" if lines else "")


def graph_to_json(g: Graph) -> dict:
    """Lossless dict form: n, directed, node_names, edges sorted by (i, j)."""
    a = g.adjacency
    if g.directed:
        ii, jj = np.nonzero(a)
    else:
        ii, jj = np.nonzero(np.triu(a))
    edges = sorted([int(i), int(j), float(a[i, j])] for i, j in zip(ii, jj))
    names = list(g.node_names) if g.node_names is not None else None
    return {"n": g.n, "directed": g.directed, "node_names": names, "edges": edges}


def graph_from_json(obj: dict) -> Graph:
    n = int(obj["n"])
    directed = bool(obj["directed"])
    a = np.zeros((n, n))
    for i, j, w in obj["edges"]:
        a[i, j] = w
        if not directed:
            a[j, i] = w
    names = obj.get("node_names")
    return Graph(a, directed=directed, node_names=tuple(names) if names is not None else None)


def graph_json_dumps(g: Graph) -> str:
    return json.dumps(graph_to_json(g), sort_keys=True)


def graph_json_loads(text: str) -> Graph:
    return graph_from_json(json.loads(text))


def with_labels(g: Graph, labels) -> Graph:
    """Copy of g carrying the given block labels."""
    return replace(g, labels=tuple(labels))
