"""Model estimators, goodness of fit, and refitting round trips."""

import json

import numpy as np
import pytest

from netinfer import (
    MODEL_KINDS,
    Graph,
    ModelFit,
    SbmParams,
    fit_dcer,
    fit_dcsbm,
    fit_er,
    fit_ier,
    fit_model,
    fit_rdpg,
    fit_sbm,
    goodness_of_fit,
    sample_from_fit,
    sample_sbm,
)
from netinfer.models import model_fit_to_json


def path_graph():
    # edges 0-1 and 0-2 on three nodes
    a = np.zeros((3, 3))
    a[0, 1] = a[1, 0] = 1.0
    a[0, 2] = a[2, 0] = 1.0
    return Graph(a)


def two_pair_graph():
    # edges 0-1 and 2-3 on four nodes
    a = np.zeros((4, 4))
    a[0, 1] = a[1, 0] = 1.0
    a[2, 3] = a[3, 2] = 1.0
    return Graph(a)


def planted_two_block(seed=0):
    params = SbmParams(
        block_sizes=(150, 150),
        block_probs=np.array([[0.5, 0.1], [0.1, 0.5]]),
    )
    return sample_sbm(params, seed=seed), params


def degree_skew_chain(seed=0):
    """Three-block sample with a linear degree ramp, used for nesting checks."""
    params = SbmParams(
        block_sizes=(70, 70, 60),
        block_probs=np.array(
            [[0.5, 0.1, 0.08], [0.1, 0.4, 0.06], [0.08, 0.06, 0.35]]
        ),
        degree_corrections=np.linspace(0.4, 1.6, 200),
    )
    return sample_sbm(params, seed=seed)


class TestFitEr:
    def test_edge_fraction(self):
        fit = fit_er(path_graph())
        assert fit.kind == "er"
        assert fit.params["p"] == pytest.approx(2.0 / 3.0, abs=1e-15)
        assert fit.n_params == 1

    def test_empty_graph(self):
        fit = fit_er(Graph(np.zeros((5, 5))))
        assert fit.params["p"] == 0.0
        assert np.all(fit.p_mat == 0.0)

    def test_complete_directed(self):
        a = np.ones((4, 4)) - np.eye(4)
        fit = fit_er(Graph(a, directed=True))
        assert fit.params["p"] == 1.0
        assert fit.n_params == 1

    def test_p_mat_structure(self):
        fit = fit_er(path_graph())
        off = ~np.eye(3, dtype=bool)
        assert np.all(fit.p_mat[off] == fit.params["p"])
        assert np.all(np.diag(fit.p_mat) == 0.0)

    def test_weighted_rejected(self):
        a = np.zeros((3, 3))
        a[0, 1] = a[1, 0] = 2.5
        with pytest.raises(ValueError, match="binary"):
            fit_er(Graph(a))


class TestFitSbm:
    def test_block_frequencies_by_hand(self):
        fit = fit_sbm(path_graph(), labels=["a", "a", "b"])
        # within-a: 1 edge / 1 pair; a-b: 1 edge / 2 pairs; within-b: no pairs
        assert np.allclose(
            fit.params["block_probs"], [[1.0, 0.5], [0.5, 0.0]], atol=1e-15
        )
        assert fit.params["block_names"] == ["a", "b"]

    def test_four_node_blocks(self):
        a = np.zeros((4, 4))
        a[0, 1] = a[1, 0] = 1.0
        a[0, 2] = a[2, 0] = 1.0
        fit = fit_sbm(Graph(a), labels=["a", "a", "b", "b"])
        assert np.allclose(
            fit.params["block_probs"], [[1.0, 0.25], [0.25, 0.0]], atol=1e-15
        )
        assert fit.n_params == 3

    def test_single_block_matches_er(self):
        g = two_pair_graph()
        sbm = fit_sbm(g, labels=["x"] * 4)
        er = fit_er(g)
        assert np.array_equal(sbm.p_mat, er.p_mat)

    def test_recovers_planted_probabilities(self):
        g, params = planted_two_block(seed=0)
        fit = fit_sbm(g, labels=list(g.labels))
        dev = np.abs(fit.params["block_probs"] - params.block_probs).max()
        assert dev <= 0.05

    def test_zero_potential_pairs(self):
        a = np.zeros((3, 3))
        a[0, 1] = a[1, 0] = 1.0
        fit = fit_sbm(Graph(a), labels=["a", "a", "b"])
        # the singleton block has no within-block pairs
        assert fit.params["zero_potential_pairs"] == [["b", "b"]]

    def test_estimated_labels_recover_blocks(self):
        g, _ = planted_two_block(seed=0)
        fit = fit_sbm(g, n_blocks=2, seed=0)
        est = np.array(fit.params["labels"])
        truth = np.array(g.labels)
        err = min(np.mean(est != truth), np.mean(est != 1 - truth))
        assert err == 0.0
        assert fit.params["k_range"] == [2]
        assert fit.params["selected_k"] == 2

    def test_default_k_range_scales_with_n(self):
        params = SbmParams(
            block_sizes=(8, 7), block_probs=np.array([[0.9, 0.1], [0.1, 0.9]])
        )
        g = sample_sbm(params, seed=3)
        fit = fit_sbm(g)
        assert fit.params["k_range"] == [2, 3]
        assert fit.params["selected_k"] in fit.params["k_range"]

    def test_directed_parameter_count(self):
        params = SbmParams(
            block_sizes=(20, 20),
            block_probs=np.array([[0.5, 0.2], [0.3, 0.4]]),
            directed=True,
        )
        g = sample_sbm(params, seed=4)
        fit = fit_sbm(g, labels=list(g.labels))
        assert fit.n_params == 4
        assert fit.directed

    def test_undirected_p_mat_symmetric_hollow(self):
        g, _ = planted_two_block(seed=1)
        fit = fit_sbm(g, labels=list(g.labels))
        assert np.array_equal(fit.p_mat, fit.p_mat.T)
        assert np.all(np.diag(fit.p_mat) == 0.0)

    def test_label_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            fit_sbm(two_pair_graph(), labels=["a"])


class TestFitDcsbm:
    def test_degree_fractions_by_hand(self):
        fit = fit_dcsbm(path_graph(), labels=["a", "a", "b"])
        # degrees (2, 1, 1); block-a total 3, block-b total 1
        assert np.allclose(
            fit.params["degree_corrections"], [2 / 3, 1 / 3, 1.0], atol=1e-15
        )
        assert np.allclose(
            fit.params["block_probs"], [[1.0, 0.5], [0.5, 0.0]], atol=1e-15
        )
        assert fit.n_params == 4

    def test_degree_fractions_sum_per_block(self):
        g = degree_skew_chain(seed=0)
        fit = fit_dcsbm(g, labels=list(g.labels))
        theta = np.asarray(fit.params["degree_corrections"])
        labels = np.array(fit.params["labels"])
        for name in fit.params["block_names"]:
            assert theta[labels == name].sum() == pytest.approx(1.0, abs=1e-12)

    def test_block_regular_reduces_to_sbm(self):
        # two disjoint triangles: every node has equal degree within its block
        a = np.zeros((6, 6))
        for i, j in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]:
            a[i, j] = a[j, i] = 1.0
        g = Graph(a)
        labels = ["a"] * 3 + ["b"] * 3
        dc = fit_dcsbm(g, labels=labels)
        plain = fit_sbm(g, labels=labels)
        assert np.abs(dc.p_mat - plain.p_mat).max() == 0.0

    def test_biregular_bipartite_reduces_to_sbm(self):
        a = np.zeros((6, 6))
        a[:3, 3:] = 1.0
        a[3:, :3] = 1.0
        g = Graph(a)
        labels = ["a"] * 3 + ["b"] * 3
        dc = fit_dcsbm(g, labels=labels)
        plain = fit_sbm(g, labels=labels)
        assert np.abs(dc.p_mat - plain.p_mat).max() == 0.0

    def test_improves_on_sbm_under_degree_skew(self):
        rng = np.random.default_rng(0)
        theta = rng.pareto(3.0, 200) + 0.2
        params = SbmParams(
            block_sizes=(100, 100),
            block_probs=np.array([[0.5, 0.1], [0.1, 0.5]]),
            degree_corrections=theta,
        )
        g = sample_sbm(params, seed=1)
        labels = list(g.labels)
        mse_dc = goodness_of_fit(fit_dcsbm(g, labels=labels), g).mse
        mse_plain = goodness_of_fit(fit_sbm(g, labels=labels), g).mse
        assert mse_dc < mse_plain

    def test_p_mat_within_unit_interval(self):
        g = degree_skew_chain(seed=2)
        fit = fit_dcsbm(g, labels=list(g.labels))
        assert fit.p_mat.min() >= 0.0
        assert fit.p_mat.max() <= 1.0

    def test_estimated_labels_metadata(self):
        params = SbmParams(
            block_sizes=(8, 7), block_probs=np.array([[0.9, 0.1], [0.1, 0.9]])
        )
        g = sample_sbm(params, seed=3)
        fit = fit_dcsbm(g, n_blocks=2, seed=0)
        assert fit.params["k_range"] == [2]
        assert fit.params["selected_k"] == 2


class TestFitDcer:
    def test_single_block_reduction(self):
        g = path_graph()
        fit = fit_dcer(g)
        assert fit.kind == "dcer"
        assert fit.n_params == 1 + (g.n - 1)
        same = fit_dcsbm(g, labels=[0] * g.n)
        assert np.array_equal(fit.p_mat, same.p_mat)

    def test_parameter_count_scales(self):
        g = degree_skew_chain(seed=0)
        assert fit_dcer(g).n_params == 200


class TestFitRdpg:
    def test_complete_graph_rank_one(self):
        a = np.ones((4, 4)) - np.eye(4)
        fit = fit_rdpg(Graph(a), d=1)
        off = ~np.eye(4, dtype=bool)
        assert np.abs(fit.p_mat[off] - 1.0).max() <= 1e-6
        assert fit.n_params == 4

    def test_p_mat_clipped(self):
        g = degree_skew_chain(seed=0)
        fit = fit_rdpg(g, d=3)
        assert fit.p_mat.min() >= 0.0
        assert fit.p_mat.max() <= 1.0

    def test_latent_positions_stored(self):
        g, _ = planted_two_block(seed=0)
        fit = fit_rdpg(g, d=2)
        assert fit.params["latent"].shape == (300, 2)
        assert fit.params["d"] == 2
        assert fit.n_params == 600

    def test_directed_parameter_count(self):
        params = SbmParams(
            block_sizes=(30, 30),
            block_probs=np.array([[0.5, 0.2], [0.3, 0.4]]),
            directed=True,
        )
        g = sample_sbm(params, seed=2)
        fit = fit_rdpg(g, d=2)
        assert fit.n_params == 240

    @pytest.mark.parametrize("d", [0, 9])
    def test_dimension_out_of_range(self, d):
        with pytest.raises(ValueError, match="d must"):
            fit_rdpg(two_pair_graph(), d=d)


class TestFitIer:
    def test_reproduces_adjacency(self):
        g = path_graph()
        fit = fit_ier(g)
        assert np.array_equal(fit.p_mat, (g.adjacency != 0).astype(float))

    def test_parameter_count(self):
        assert fit_ier(Graph(np.zeros((10, 10)))).n_params == 45

    def test_zero_squared_error(self):
        g = degree_skew_chain(seed=1)
        gof = goodness_of_fit(fit_ier(g), g)
        assert gof.mse == 0.0

    def test_log_likelihood_near_zero(self):
        g = two_pair_graph()
        gof = goodness_of_fit(fit_ier(g), g)
        # six pairs, each clipped to probability 1e-6 from its observed value
        expected = 2 * np.log(1.0 - 1e-6) + 4 * np.log1p(-1e-6)
        assert gof.log_likelihood == pytest.approx(expected, abs=1e-12)
        assert gof.log_likelihood == pytest.approx(-6e-6, rel=1e-4)


class TestGoodnessOfFit:
    def test_half_probability_by_hand(self):
        p_mat = np.array([[0.0, 0.5], [0.5, 0.0]])
        fit = ModelFit("er", p_mat, {"p": 0.5}, 1, False, False)
        g = Graph(np.array([[0.0, 1.0], [1.0, 0.0]]))
        gof = goodness_of_fit(fit, g)
        assert gof.log_likelihood == pytest.approx(np.log(0.5), abs=1e-15)
        assert gof.mse == pytest.approx(0.5, abs=1e-15)
        # one likelihood entry: bic = -2*ll + 1*log(1)
        assert gof.bic == pytest.approx(-2.0 * np.log(0.5), abs=1e-12)

    def test_nested_models_improve_monotonically(self):
        g = degree_skew_chain(seed=0)
        labels = list(g.labels)
        chain = [
            fit_er(g),
            fit_sbm(g, labels=labels),
            fit_dcsbm(g, labels=labels),
            fit_rdpg(g, d=3),
            fit_ier(g),
        ]
        gofs = [goodness_of_fit(f, g) for f in chain]
        mses = [gof.mse for gof in gofs]
        lls = [gof.log_likelihood for gof in gofs]
        assert all(a > b for a, b in zip(mses, mses[1:]))
        assert all(a < b for a, b in zip(lls, lls[1:]))

    def test_bic_penalizes_overparameterization(self):
        g = degree_skew_chain(seed=0)
        labels = list(g.labels)
        bic_dc = goodness_of_fit(fit_dcsbm(g, labels=labels), g).bic
        bic_er = goodness_of_fit(fit_er(g), g).bic
        assert bic_dc < bic_er

    def test_shape_mismatch_rejected(self):
        fit = fit_er(two_pair_graph())
        with pytest.raises(ValueError, match="shape"):
            goodness_of_fit(fit, Graph(np.zeros((3, 3))))

    def test_weighted_graph_rejected(self):
        fit = fit_er(path_graph())
        a = np.zeros((3, 3))
        a[0, 1] = a[1, 0] = 2.0
        with pytest.raises(ValueError, match="binary"):
            goodness_of_fit(fit, Graph(a))


class TestSampleFromFit:
    def test_deterministic(self):
        fit = fit_er(two_pair_graph())
        s1 = sample_from_fit(fit, seed=9)
        s2 = sample_from_fit(fit, seed=9)
        assert np.array_equal(s1.adjacency, s2.adjacency)

    def test_empty_fit_samples_empty(self):
        fit = fit_er(Graph(np.zeros((6, 6))))
        assert np.all(sample_from_fit(fit, seed=1).adjacency == 0)

    def test_ier_fit_resamples_exactly(self):
        g = path_graph()
        fit = fit_ier(g)
        assert np.array_equal(sample_from_fit(fit, seed=3).adjacency, g.adjacency)

    def test_sbm_fit_resample_densities(self):
        g, _ = planted_two_block(seed=0)
        fit = fit_sbm(g, labels=list(g.labels))
        resampled = sample_from_fit(fit, seed=5)
        b = fit.params["block_probs"]
        within = resampled.adjacency[:150, :150].sum() / 2 / (150 * 149 / 2)
        between = resampled.adjacency[:150, 150:].sum() / (150 * 150)
        assert abs(within - b[0][0]) <= 3 * np.sqrt(b[0][0] * (1 - b[0][0]) / (150 * 149 / 2))
        assert abs(between - b[0][1]) <= 3 * np.sqrt(b[0][1] * (1 - b[0][1]) / 22500)


class TestFitModel:
    def test_dispatches_every_kind(self):
        g, _ = planted_two_block(seed=0)
        labels = list(g.labels)
        expected_n_params = {
            "er": 1,
            "sbm": 3,
            "dcer": 300,
            "dcsbm": 301,
            "rdpg": 600,
            "ier": 44850,
        }
        for kind in MODEL_KINDS:
            fit = fit_model(
                kind,
                g,
                labels=labels if kind in ("sbm", "dcsbm") else None,
                d=2 if kind == "rdpg" else None,
            )
            assert fit.kind == kind
            assert fit.n_params == expected_n_params[kind]

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown model kind"):
            fit_model("blah", two_pair_graph())


class TestModelFitJson:
    def test_key_set(self):
        fit = fit_er(two_pair_graph())
        out = model_fit_to_json(fit)
        assert sorted(out) == ["kind", "n_params", "params"]

    def test_p_mat_file_passthrough(self):
        fit = fit_er(two_pair_graph())
        out = model_fit_to_json(fit, p_mat_file="p.csv")
        assert out["p_mat_file"] == "p.csv"

    def test_rdpg_latents_omitted(self):
        fit = fit_rdpg(two_pair_graph(), d=1)
        out = model_fit_to_json(fit)
        assert sorted(out["params"]) == ["d"]

    def test_serializable(self):
        g = path_graph()
        for fit in (fit_sbm(g, labels=["a", "a", "b"]), fit_dcsbm(g, labels=["a", "a", "b"])):
            text = json.dumps(model_fit_to_json(fit))
            back = json.loads(text)
            assert back["params"]["block_names"] == ["a", "b"]
