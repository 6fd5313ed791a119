"""Command-line interface.

Subcommands mirror the library: simulate, preprocess, embed, fit, test,
cluster, plot. Every run writes its outputs plus one manifest
(<output>.manifest.json) recording the command, normalized arguments, seed,
tool version, and produced files. Exit codes: 0 success, 1 usage error,
2 data/parameter error.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import cluster as _cluster
from . import embed as _embed
from . import graphs as _graphs
from . import inference as _inference
from . import models as _models
from . import sims as _sims
from . import viz as _viz


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; this tool reserves 2 for data
    # errors, so usage problems are rerouted to exit code 1
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from None


def _load_graph(path: str, directed: bool, fmt: str = "auto") -> _graphs.Graph:
    return _graphs.import_graph_csv(_read(path), directed=directed, fmt=fmt)


def _load_matrix(path: str) -> np.ndarray:
    rows = []
    for lineno, raw in enumerate(_read(path).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(p) for p in line.split(",")])
        except ValueError:
            raise ValueError(f"{path} line {lineno}: non-numeric entry") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValueError(f"{path} line {lineno}: ragged row")
    return np.array(rows, dtype=float)


def _load_labels(path: str) -> list[str]:
    labels = [line.strip() for line in _read(path).splitlines() if line.strip()]
    if not labels:
        raise ValueError(f"{path}: no labels")
    return labels


def _matrix_csv(matrix: np.ndarray) -> str:
    return "\n".join(",".join(repr(float(v)) for v in row) for row in matrix) + "\n"


def _parse_d(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"--d must be an integer or 'auto', got {text!r}") from None


def _parse_k_range(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise ValueError(f"bad k range {text!r}; use A:B or a comma list") from None


def _sort_spec(mode: str, labels) -> _viz.SortSpec:
    canonical = {"none": "none", "degree": "degree", "block": "block_then_degree"}
    if mode not in canonical:
        raise ValueError(f"unknown sort mode {mode!r}")
    return _viz.SortSpec(canonical[mode], labels)


_MANIFEST_SKIP = {"handler", "command_path", "seed", "threads"}


def _manifest(ns: argparse.Namespace, seed: int, outputs: list[str]) -> None:
    arguments = {}
    for key, value in vars(ns).items():
        if key in _MANIFEST_SKIP or key.startswith("_"):
            continue
        arguments[key] = value
    manifest = {
        "command": ns.command_path,
        "arguments": arguments,
        "seed": seed,
        "tool_version": __version__,
        "outputs": outputs,
    }
    _write(ns.output + ".manifest.json", _canonical_json(manifest))


def _resolve_seed(ns: argparse.Namespace) -> int:
    return secrets.randbits(32) if ns.seed is None else ns.seed


# ---------------------------------------------------------------- simulate


def _weights_from_arg(text: str | None) -> _sims.WeightDistribution | None:
    if text is None:
        return None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"--weights must be a JSON object: {exc}") from None
    return _sims.WeightDistribution.from_dict(obj)


def _cmd_simulate(ns) -> int:
    seed = _resolve_seed(ns)
    weights = _weights_from_arg(getattr(ns, "weights", None))
    if ns.model == "er":
        g = _sims.sample_er_np(ns.n, ns.p, ns.directed, ns.loops, weights, seed)
    elif ns.model == "er-nm":
        g = _sims.sample_er_nm(ns.n, ns.m, ns.directed, ns.loops, seed)
    elif ns.model == "sbm":
        params = _sims.SbmParams.from_dict(json.loads(_read(ns.params)))
        g = _sims.sample_sbm(params, weights, seed)
    else:  # rdpg
        latent = _load_matrix(ns.latent)
        right = _load_matrix(ns.latent_right) if ns.latent_right else None
        g = _sims.sample_rdpg(latent, right, ns.loops, weights, seed)
    outputs = [ns.output]
    _write(ns.output, _graphs.export_edge_list(g))
    if getattr(ns, "labels_out", None):
        if g.labels is None:
            raise ValueError("this model does not produce labels")
        _write(ns.labels_out, "\n".join(str(lab) for lab in g.labels) + "\n")
        outputs.append(ns.labels_out)
    _manifest(ns, seed, outputs)
    return 0


# -------------------------------------------------------------- preprocess


def _cmd_preprocess(ns) -> int:
    seed = _resolve_seed(ns)
    if ns.action == "intersect":
        gs = [_load_graph(p, ns.directed, ns.format) for p in ns.graphs]
        kept, _ = _graphs.multigraph_lcc_intersection(gs)
        outputs = []
        for i, g in enumerate(kept):
            path = f"{ns.output}{i}.csv"
            _write(path, _graphs.export_edge_list(g))
            outputs.append(path)
        ns_output_backup = ns.output
        ns.output = f"{ns_output_backup}0.csv"
        _manifest(ns, seed, outputs)
        ns.output = ns_output_backup
        return 0
    g = _load_graph(ns.graph, ns.directed, ns.format)
    if ns.action == "lcc":
        g, _ = _graphs.largest_connected_component(g)
    else:  # symmetrize
        g = _graphs.symmetrize(g, ns.method)
    _write(ns.output, _graphs.export_edge_list(g))
    _manifest(ns, seed, [ns.output])
    return 0


# ------------------------------------------------------------------- embed


def _cmd_embed(ns) -> int:
    seed = _resolve_seed(ns)
    d = _parse_d(ns.d)
    if ns.method in ("ase", "lse"):
        g = _load_graph(ns.graph, ns.directed, ns.format)
        if ns.method == "ase":
            emb = _embed.ase(g, d=d, n_elbows=ns.n_elbows)
        else:
            emb = _embed.lse(g, d=d, regularizer=ns.regularizer, n_elbows=ns.n_elbows)
        outputs = [ns.output]
        _write(ns.output, _canonical_json(_embed.embedding_to_json(emb)))
        if ns.csv:
            _write(ns.csv, _embed.embedding_csv(emb))
            outputs.append(ns.csv)
        _manifest(ns, seed, outputs)
        return 0
    gs = [_load_graph(p, False, ns.format) for p in ns.graphs]
    if ns.method == "omnibus":
        embs = _embed.omnibus_embed(gs, d=d, n_elbows=ns.n_elbows)
        outputs = []
        for i, emb in enumerate(embs):
            path = f"{ns.output}{i}.json"
            _write(path, _canonical_json(_embed.embedding_to_json(emb)))
            outputs.append(path)
        backup = ns.output
        ns.output = f"{backup}0.json"
        _manifest(ns, seed, outputs)
        ns.output = backup
        return 0
    res = _embed.mase(gs, d=d, n_elbows=ns.n_elbows)
    payload = {
        "d": res.d,
        "basis": [[float(v) for v in row] for row in res.basis],
        "scores": [[[float(v) for v in row] for row in s] for s in res.scores],
    }
    _write(ns.output, _canonical_json(payload))
    _manifest(ns, seed, [ns.output])
    return 0


# --------------------------------------------------------------------- fit


def _gof_row(fit: _models.ModelFit, g: _graphs.Graph) -> dict:
    gof = _models.goodness_of_fit(fit, g)
    return {
        "mse": gof.mse,
        "log_likelihood": gof.log_likelihood,
        "n_params": gof.n_params,
        "bic": gof.bic,
    }


def _cmd_fit(ns) -> int:
    seed = _resolve_seed(ns)
    g = _load_graph(ns.graph, ns.directed, ns.format)
    labels = _load_labels(ns.labels) if ns.labels else None
    if ns.model == "report":
        return _fit_report(ns, g, labels, seed)
    fit = _models.fit_model(
        ns.model, g, labels=labels, n_blocks=ns.k, d=_parse_d(ns.d), seed=seed
    )
    payload = _models.model_fit_to_json(fit, p_mat_file=ns.p_mat)
    payload["goodness_of_fit"] = _gof_row(fit, g)
    outputs = [ns.output]
    _write(ns.output, _canonical_json(payload))
    if ns.p_mat:
        _write(ns.p_mat, _matrix_csv(fit.p_mat))
        outputs.append(ns.p_mat)
    _manifest(ns, seed, outputs)
    return 0


def _fit_report(ns, g: _graphs.Graph, labels, seed: int) -> int:
    kinds = [k.strip() for k in ns.models.split(",") if k.strip()]
    if not kinds:
        raise _UsageError("fit report: --models must name at least one model")
    for kind in kinds:
        if kind not in _models.MODEL_KINDS:
            raise _UsageError(f"fit report: unknown model {kind!r}")
    fits = {
        kind: _models.fit_model(kind, g, labels=labels, n_blocks=ns.k, d=_parse_d(ns.d), seed=seed)
        for kind in kinds
    }
    table = {kind: _gof_row(fit, g) for kind, fit in fits.items()}
    best = min(table, key=lambda kind: (table[kind]["bic"], kinds.index(kind)))

    sort_labels = labels
    if sort_labels is None:
        for kind in ("sbm", "dcsbm"):
            if kind in fits and "labels" in fits[kind].params:
                sort_labels = fits[kind].params["labels"]
                break
    mode = ns.sort
    if mode == "block" and sort_labels is None:
        mode = "degree"
    spec = _sort_spec(mode, sort_labels)
    perm = _viz._sort_permutation(g.adjacency, spec.mode, spec.labels)
    sorted_labels = None if spec.labels is None else [spec.labels[i] for i in perm]
    vmin = vmax = None
    if ns.scale == "global":
        vmin = min(float(fit.p_mat.min()) for fit in fits.values())
        vmax = max(float(fit.p_mat.max()) for fit in fits.values())
    stem = ns.output[: -len(".json")] if ns.output.endswith(".json") else ns.output
    figures = []
    for kind in kinds:
        panel = fits[kind].p_mat[np.ix_(perm, perm)]
        svg = _viz.heatmap_svg(
            panel,
            _viz.SortSpec("none", sorted_labels),
            title=kind,
            colormap=ns.colormap,
            vmin=vmin,
            vmax=vmax,
        )
        path = f"{stem}_{kind}.svg"
        _write(path, svg)
        figures.append(path)
    report = {"models": table, "best_bic": best, "figures": figures, "sort": spec.mode}
    _write(ns.output, _canonical_json(report))
    _manifest(ns, seed, [ns.output] + figures)
    return 0


# -------------------------------------------------------------------- test


def _cmd_test(ns) -> int:
    seed = _resolve_seed(ns)
    g1 = _load_graph(ns.graph1, ns.directed, ns.format)
    g2 = _load_graph(ns.graph2, ns.directed, ns.format)
    d = _parse_d(ns.d)
    if ns.kind == "latent-position":
        result = _inference.latent_position_test(g1, g2, d=d, n_bootstraps=ns.bootstraps, seed=seed)
    else:
        result = _inference.latent_distribution_test(
            g1, g2, d=d, n_bootstraps=ns.bootstraps, seed=seed
        )
    _write(ns.output, _canonical_json(_inference.test_result_to_json(result)))
    _manifest(ns, seed, [ns.output])
    return 0


# ------------------------------------------------------------------ cluster


def _cmd_cluster(ns) -> int:
    seed = _resolve_seed(ns)
    data = _load_matrix(ns.data)
    k_range = _parse_k_range(ns.k_range)
    if ns.algorithm == "gmm":
        types = [t.strip() for t in ns.cov_types.split(",") if t.strip()]
        sweep = _cluster.gmm_sweep(data, k_range, types, seed=seed)
        best = sweep.best
        payload = {
            "algorithm": "gmm",
            "selected": {"k": best.k, "covariance_type": best.covariance_type},
            "bic": best.bic,
            "log_likelihood": best.log_likelihood,
            "converged": best.converged,
            "labels": [int(v) for v in best.labels],
            "table": [
                {**config, "score": score} for config, score in sweep.table
            ],
        }
    else:
        sweep = _cluster.kmeans_sweep(data, k_range, seed=seed)
        best = sweep.best
        payload = {
            "algorithm": "kmeans",
            "selected": {"k": best.k},
            "inertia": best.inertia,
            "labels": [int(v) for v in best.labels],
            "table": [
                {**config, "score": score} for config, score in sweep.table
            ],
        }
    _write(ns.output, _canonical_json(payload))
    _manifest(ns, seed, [ns.output])
    return 0


# -------------------------------------------------------------------- plot


def _cmd_plot(ns) -> int:
    seed = _resolve_seed(ns)
    labels = _load_labels(ns.labels) if getattr(ns, "labels", None) else None
    if ns.kind == "heatmap":
        g = _load_graph(ns.graph, ns.directed, ns.format)
        spec = _sort_spec(ns.sort, labels if labels is not None else g.labels)
        svg = _viz.heatmap_svg(g.adjacency, spec, title=ns.title, colormap=ns.colormap)
    elif ns.kind == "gridplot":
        gs = [_load_graph(p, ns.directed, ns.format) for p in ns.graphs]
        names = ns.names.split(",") if ns.names else None
        spec = _sort_spec(ns.sort, labels)
        svg = _viz.gridplot_svg(gs, names, spec)
    else:  # pairplot
        data = _load_matrix(ns.data)
        dims = [int(v) for v in ns.dims.split(",")] if ns.dims else None
        svg = _viz.pairplot_svg(data, labels=labels, dims=dims, title=ns.title)
    _write(ns.output, svg)
    _manifest(ns, seed, [ns.output])
    return 0


# ------------------------------------------------------------------ parser


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="RNG seed (generated when omitted)")
    sub.add_argument("--threads", type=int, default=None, help="max internal parallelism")
    sub.add_argument("-o", "--output", required=True, help="primary output path")


def _add_graph_input(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--directed", action="store_true", help="treat input edges as directed")
    sub.add_argument(
        "--format", choices=("auto", "edges", "matrix"), default="auto", help="input format"
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="netinfer", description=__doc__)
    parser.add_argument("--version", action="version", version=f"netinfer {__version__}")
    top = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    sim = top.add_parser("simulate", help="sample random graphs").add_subparsers(
        dest="model", required=True, parser_class=_Parser
    )
    for model in ("er", "er-nm", "sbm", "rdpg"):
        p = sim.add_parser(model)
        _add_common(p)
        p.add_argument("--directed", action="store_true")
        p.add_argument("--loops", action="store_true")
        if model in ("er", "er-nm"):
            p.add_argument("--n", type=int, required=True)
        if model == "er":
            p.add_argument("--p", type=float, required=True)
            p.add_argument("--weights", default=None, help="weight distribution JSON")
        if model == "er-nm":
            p.add_argument("--m", type=int, required=True)
        if model == "sbm":
            p.add_argument("--params", required=True, help="SbmParams JSON file")
            p.add_argument("--weights", default=None)
            p.add_argument("--labels-out", default=None, help="write block labels here")
        if model == "rdpg":
            p.add_argument("--latent", required=True, help="latent positions CSV")
            p.add_argument("--latent-right", default=None)
            p.add_argument("--weights", default=None)
        p.set_defaults(handler=_cmd_simulate, command_path=f"simulate {model}")

    pre = top.add_parser("preprocess", help="clean graphs").add_subparsers(
        dest="action", required=True, parser_class=_Parser
    )
    for action in ("lcc", "symmetrize", "intersect"):
        p = pre.add_parser(action)
        _add_common(p)
        _add_graph_input(p)
        if action == "intersect":
            p.add_argument("graphs", nargs="+")
        else:
            p.add_argument("graph")
        if action == "symmetrize":
            p.add_argument("--method", choices=("average", "avg", "triu", "tril"), default="average")
        p.set_defaults(handler=_cmd_preprocess, command_path=f"preprocess {action}")

    emb = top.add_parser("embed", help="spectral embeddings").add_subparsers(
        dest="method", required=True, parser_class=_Parser
    )
    for method in ("ase", "lse", "omnibus", "mase"):
        p = emb.add_parser(method)
        _add_common(p)
        p.add_argument("--format", choices=("auto", "edges", "matrix"), default="auto")
        p.add_argument("--d", default="auto", help="embedding dimension or 'auto'")
        p.add_argument("--n-elbows", type=int, default=2)
        if method in ("ase", "lse"):
            p.add_argument("graph")
            p.add_argument("--directed", action="store_true")
            p.add_argument("--csv", default=None, help="also write positions as CSV")
        else:
            p.add_argument("graphs", nargs="+")
        if method == "lse":
            p.add_argument("--regularizer", type=float, default=0.0)
        p.set_defaults(handler=_cmd_embed, command_path=f"embed {method}")

    fit = top.add_parser("fit", help="fit edge-probability models").add_subparsers(
        dest="model", required=True, parser_class=_Parser
    )
    for model in _models.MODEL_KINDS + ("report",):
        p = fit.add_parser(model)
        _add_common(p)
        _add_graph_input(p)
        p.add_argument("graph")
        p.add_argument("--labels", default=None, help="block labels file (one per line)")
        p.add_argument("--k", type=int, default=None, help="number of blocks when estimating")
        p.add_argument("--d", default="auto")
        if model == "report":
            p.add_argument("--models", required=True, help="comma list of model kinds")
            p.add_argument("--sort", choices=("none", "degree", "block"), default="block")
            p.add_argument("--scale", choices=("per-panel", "global"), default="per-panel")
            p.add_argument("--colormap", choices=("sequential", "diverging"), default="sequential")
        else:
            p.add_argument("--p-mat", default=None, help="write the fitted p_mat as CSV")
        p.set_defaults(handler=_cmd_fit, command_path=f"fit {model}")

    tst = top.add_parser("test", help="two-graph hypothesis tests").add_subparsers(
        dest="kind", required=True, parser_class=_Parser
    )
    for kind in ("latent-position", "latent-distribution"):
        p = tst.add_parser(kind)
        _add_common(p)
        _add_graph_input(p)
        p.add_argument("graph1")
        p.add_argument("graph2")
        p.add_argument("--d", default="auto")
        p.add_argument("--bootstraps", type=int, default=200)
        p.set_defaults(handler=_cmd_test, command_path=f"test {kind}")

    clu = top.add_parser("cluster", help="model-selection clustering").add_subparsers(
        dest="algorithm", required=True, parser_class=_Parser
    )
    for algorithm in ("gmm", "kmeans"):
        p = clu.add_parser(algorithm)
        _add_common(p)
        p.add_argument("data", help="points CSV, one row per observation")
        p.add_argument("--k-range", required=True, help="A:B inclusive or comma list")
        if algorithm == "gmm":
            p.add_argument("--cov-types", default=",".join(_cluster.COVARIANCE_TYPES))
        p.set_defaults(handler=_cmd_cluster, command_path=f"cluster {algorithm}")

    plo = top.add_parser("plot", help="deterministic SVG figures").add_subparsers(
        dest="kind", required=True, parser_class=_Parser
    )
    for kind in ("heatmap", "gridplot", "pairplot"):
        p = plo.add_parser(kind)
        _add_common(p)
        if kind == "heatmap":
            p.add_argument("graph")
            _add_graph_input(p)
            p.add_argument("--sort", choices=("none", "degree", "block"), default="none")
            p.add_argument("--labels", default=None)
            p.add_argument("--colormap", choices=("sequential", "diverging"), default="sequential")
            p.add_argument("--title", default="")
        elif kind == "gridplot":
            p.add_argument("graphs", nargs="+")
            _add_graph_input(p)
            p.add_argument("--sort", choices=("none", "degree", "block"), default="none")
            p.add_argument("--labels", default=None)
            p.add_argument("--names", default=None, help="comma list of legend names")
        else:
            p.add_argument("data", help="points CSV")
            p.add_argument("--labels", default=None)
            p.add_argument("--dims", default=None, help="comma list of dimensions")
            p.add_argument("--title", default="")
        p.set_defaults(handler=_cmd_plot, command_path=f"plot {kind}")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if ns.threads is not None and ns.threads < 1:
        print("netinfer: error: --threads must be >= 1", file=sys.stderr)
        return 1
    try:
        return ns.handler(ns)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"netinfer: error: {exc}", file=sys.stderr)
        return 2
