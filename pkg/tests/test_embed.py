"""Spectral embeddings: elbow selection, ASE/LSE closed forms, omnibus, MASE."""

import numpy as np
import pytest

from netinfer import (
    Graph,
    SbmParams,
    ase,
    kmeans_fit,
    lse,
    mase,
    omnibus_embed,
    procrustes_align,
    sample_rdpg,
    sample_sbm,
    select_dimension,
)
from netinfer.embed import (
    embedding_csv,
    embedding_from_json,
    embedding_json_dumps,
    embedding_to_json,
    omnibus_matrix,
)

SIGMA_FLOOR = 1e-12


def exhaustive_first_elbow(values):
    """Brute-force two-mean pooled-variance profile likelihood over all splits."""
    vals = np.asarray(values, dtype=float)
    length = vals.size
    best_q, best_ll = 1, -np.inf
    for q in range(1, length + 1):
        head, tail = vals[:q], vals[q:]
        mu1 = head.mean()
        ss = ((head - mu1) ** 2).sum()
        if tail.size:
            ss += ((tail - tail.mean()) ** 2).sum()
        var = max(ss / length, SIGMA_FLOOR)
        ll = -0.5 * length * np.log(2.0 * np.pi * var) - ss / (2.0 * var)
        if ll > best_ll:  # strict: smallest q wins ties
            best_q, best_ll = q, ll
    return best_q


def complete_graph(n):
    return Graph(np.ones((n, n)) - np.eye(n))


def two_block_sbm(seed, sizes=(100, 100), b=((0.5, 0.1), (0.1, 0.5))):
    params = SbmParams(block_sizes=sizes, block_probs=np.array(b))
    return sample_sbm(params, seed=seed)


def block_error(labels, truth):
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    return min(np.mean(labels != truth), np.mean(labels != (1 - truth)))


class TestSelectDimension:
    def test_two_cluster_spectrum(self):
        sel = select_dimension([10, 9.8, 1.0, 0.9, 0.8], n_elbows=1)
        assert sel.elbows == [2]
        assert exhaustive_first_elbow([10, 9.8, 1.0, 0.9, 0.8]) == 2

    def test_single_dominant_value(self):
        assert select_dimension([5, 0.01, 0.01, 0.01], n_elbows=1).elbows == [1]

    def test_length_one(self):
        assert select_dimension([7.0], n_elbows=1).elbows == [1]

    def test_plateau_concatenation(self):
        vals = np.concatenate([np.full(4, 50.0), np.full(6, 0.01)])
        assert select_dimension(vals, n_elbows=1).elbows[0] == 4

    @pytest.mark.parametrize("seed", range(8))
    def test_first_elbow_matches_exhaustive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        vals = np.sort(rng.uniform(0.1, 50.0, size=rng.integers(3, 40)))[::-1]
        sel = select_dimension(vals, n_elbows=1)
        assert sel.elbows[0] == exhaustive_first_elbow(vals)

    @pytest.mark.parametrize("seed", range(4))
    def test_recursion_drops_the_prefix(self, seed):
        rng = np.random.default_rng(100 + seed)
        vals = np.sort(rng.uniform(0.1, 50.0, 30))[::-1]
        sel = select_dimension(vals, n_elbows=2)
        assert len(sel.elbows) == 2
        first = sel.elbows[0]
        assert sel.elbows[1] == first + exhaustive_first_elbow(vals[first:])

    def test_elbows_strictly_increasing_and_bounded(self):
        rng = np.random.default_rng(42)
        vals = np.sort(rng.uniform(0.5, 20.0, 25))[::-1]
        sel = select_dimension(vals, n_elbows=3)
        assert all(a < b for a, b in zip(sel.elbows, sel.elbows[1:]))
        assert all(1 <= e <= vals.size for e in sel.elbows)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            select_dimension([])
        with pytest.raises(ValueError):
            select_dimension([3.0, 0.0])
        with pytest.raises(ValueError):
            select_dimension([1.0, 2.0])
        with pytest.raises(ValueError):
            select_dimension([2.0, 1.0], n_elbows=0)


class TestAse:
    def test_complete_graph_closed_form(self):
        # augmentation turns K4 into the all-ones matrix: X = sqrt(4) * (1/2, ...)
        emb = ase(complete_graph(4), d=1)
        assert emb.X.shape == (4, 1)
        assert np.allclose(emb.X, 1.0, atol=1e-12)
        assert np.isclose(emb.singular_values[0], 4.0, atol=1e-12)

    def test_sign_convention_positive_anchor(self):
        g = two_block_sbm(seed=4, sizes=(30, 30))
        x = ase(g, d=2).X
        for col in x.T:
            assert col[np.argmax(np.abs(col))] > 0

    def test_block_recovery_two_percent(self):
        g = two_block_sbm(seed=0)
        labels = kmeans_fit(ase(g, d=2).X, 2, seed=0).labels
        assert block_error(labels, g.labels) <= 0.02

    def test_directed_returns_left_and_right_positions(self):
        g = Graph(np.array([[0.0, 1.0], [0.0, 0.0]]), directed=True)
        emb = ase(g, d=1)
        assert emb.X.shape == (2, 1)
        assert emb.Y is not None and emb.Y.shape == (2, 1)

    def test_undirected_has_no_right_positions(self):
        assert ase(complete_graph(3), d=1).Y is None

    def test_all_zero_adjacency_rejected(self):
        with pytest.raises(ValueError):
            ase(Graph(np.zeros((4, 4))))

    def test_d_out_of_range_rejected(self):
        g = complete_graph(4)
        with pytest.raises(ValueError):
            ase(g, d=5)
        with pytest.raises(ValueError):
            ase(g, d=2)  # augmented K4 has rank 1

    def test_default_dimension_is_second_elbow(self):
        g = two_block_sbm(seed=8, sizes=(40, 40))
        emb = ase(g)
        a = np.array(g.adjacency)
        np.fill_diagonal(a, a.sum(axis=1) / (g.n - 1))
        s = np.linalg.svd(a, compute_uv=False)
        rank = np.count_nonzero(s > s[0] * g.n * np.finfo(float).eps)
        sel = select_dimension(s[:rank], n_elbows=2)
        expected = sel.elbows[1] if len(sel.elbows) >= 2 else sel.elbows[0]
        assert emb.d == expected

    def test_reconstruction_matches_best_rank_d(self):
        g = two_block_sbm(seed=2, sizes=(30, 30))
        emb = ase(g, d=2)
        a = np.array(g.adjacency)
        np.fill_diagonal(a, a.sum(axis=1) / (g.n - 1))
        u, s, vt = np.linalg.svd(a)
        best = (u[:, :2] * s[:2]) @ vt[:2]
        err_emb = np.linalg.norm(a - emb.X @ emb.X.T)
        err_best = np.linalg.norm(a - best)
        assert err_emb <= err_best + 1e-8

    def test_gram_matrix_ignores_sign_choices(self):
        g = two_block_sbm(seed=3, sizes=(25, 25))
        emb = ase(g, d=2)
        flipped = emb.X * np.array([-1.0, 1.0])
        assert np.allclose(emb.X @ emb.X.T, flipped @ flipped.T, atol=1e-10)

    def test_consistency_error_decreases_with_n(self):
        errs = []
        for n, seed in ((100, 1), (200, 2), (400, 3)):
            x = np.sqrt(np.linspace(0.25, 0.64, n))[:, None]
            g = sample_rdpg(x, seed=seed)
            xhat = ase(g, d=1).X
            _, dist = procrustes_align(x, xhat)
            errs.append(dist / np.sqrt(n))
        assert errs[0] > errs[1] > errs[2]

    def test_singular_values_positive_nonincreasing(self):
        emb = ase(two_block_sbm(seed=6, sizes=(30, 30)), d=2)
        s = emb.singular_values
        assert s.shape == (2,)
        assert s[0] >= s[1] > 0


class TestLse:
    def test_complete_graph_closed_form(self):
        # K4 normalized Laplacian is (J - I)/3 with top eigenpair (1, ones/2)
        emb = lse(complete_graph(4), d=1)
        assert np.allclose(emb.X, 0.5, atol=1e-12)
        assert np.isclose(emb.singular_values[0], 1.0, atol=1e-12)

    def test_isolated_node_rejected_without_regularizer(self):
        a = np.zeros((3, 3))
        a[0, 1] = a[1, 0] = 1.0
        with pytest.raises(ValueError, match="regularizer"):
            lse(Graph(a))

    def test_regularizer_admits_isolated_node(self):
        a = np.zeros((3, 3))
        a[0, 1] = a[1, 0] = 1.0
        emb = lse(Graph(a), d=1, regularizer=1.0)
        assert emb.X.shape == (3, 1)

    def test_negative_regularizer_rejected(self):
        with pytest.raises(ValueError):
            lse(complete_graph(3), regularizer=-0.5)

    def test_block_recovery_two_percent(self):
        g = two_block_sbm(seed=0)
        labels = kmeans_fit(lse(g, d=2).X, 2, seed=0).labels
        assert block_error(labels, g.labels) <= 0.02


class TestOmnibus:
    def test_matrix_blocks_average_pairs(self):
        a1 = complete_graph(3).adjacency
        a2 = np.zeros((3, 3))
        omni = omnibus_matrix([Graph(a1), Graph(a2)])
        assert omni.shape == (6, 6)
        assert np.array_equal(omni[:3, :3], a1)
        assert np.array_equal(omni[3:, 3:], a2)
        assert np.array_equal(omni[:3, 3:], a1 / 2.0)

    def test_duplicate_input_blocks_equal_original(self):
        g = two_block_sbm(seed=1, sizes=(15, 15))
        omni = omnibus_matrix([g, g])
        for bi in range(2):
            for bj in range(2):
                assert np.array_equal(omni[bi * 30 : bi * 30 + 30, bj * 30 : bj * 30 + 30], g.adjacency)

    def test_duplicate_input_slices_coincide(self):
        g = two_block_sbm(seed=10, sizes=(60, 60))
        embs = omnibus_embed([g, g], d=2)
        assert np.abs(embs[0].X - embs[1].X).max() <= 1e-12

    def test_shared_dimension_and_spectrum(self):
        g1 = two_block_sbm(seed=10, sizes=(30, 30))
        g2 = two_block_sbm(seed=11, sizes=(30, 30))
        embs = omnibus_embed([g1, g2], d=2)
        assert embs[0].d == embs[1].d == 2
        assert np.array_equal(embs[0].singular_values, embs[1].singular_values)
        assert all(e.X.shape == (30 + 30, 2) or e.X.shape == (60, 2) for e in embs)

    def test_same_params_slices_closer_than_different_params(self):
        p_same = SbmParams(block_sizes=(60, 60), block_probs=np.array([[0.5, 0.1], [0.1, 0.5]]))
        p_diff = SbmParams(block_sizes=(60, 60), block_probs=np.array([[0.2, 0.4], [0.4, 0.2]]))
        embs = omnibus_embed(
            [sample_sbm(p_same, seed=10), sample_sbm(p_same, seed=11), sample_sbm(p_diff, seed=12)],
            d=2,
        )

        def rowdist(a, b):
            return float(np.linalg.norm(a.X - b.X, axis=1).mean())

        d12 = rowdist(embs[0], embs[1])
        assert d12 < rowdist(embs[0], embs[2])
        assert d12 < rowdist(embs[1], embs[2])

    def test_input_validation(self):
        g = complete_graph(3)
        with pytest.raises(ValueError):
            omnibus_embed([g])
        with pytest.raises(ValueError):
            omnibus_embed([g, complete_graph(4)])
        directed = Graph(np.array([[0.0, 1.0], [0.0, 0.0]]), directed=True)
        with pytest.raises(ValueError, match="directed"):
            omnibus_embed([directed, directed])


class TestMase:
    def test_identical_inputs_identical_scores(self):
        g = two_block_sbm(seed=20, sizes=(30, 30))
        out = mase([g, g], d=2)
        assert np.array_equal(out.scores[0], out.scores[1])

    def test_shapes(self):
        graphs = [two_block_sbm(seed=s, sizes=(25, 25)) for s in (1, 2, 3)]
        out = mase(graphs, d=2)
        assert out.basis.shape == (50, 2)
        assert len(out.scores) == 3
        assert all(r.shape == (2, 2) for r in out.scores)

    def test_shared_blocks_different_connectivity(self):
        p1 = SbmParams(block_sizes=(60, 60), block_probs=np.array([[0.5, 0.1], [0.1, 0.5]]))
        p2 = SbmParams(block_sizes=(60, 60), block_probs=np.array([[0.6, 0.05], [0.05, 0.3]]))
        g1, g2 = sample_sbm(p1, seed=20), sample_sbm(p2, seed=21)
        out = mase([g1, g2], d=2)
        labels = kmeans_fit(out.basis, 2, seed=0).labels
        assert block_error(labels, g1.labels) <= 0.02
        assert not np.allclose(out.scores[0], out.scores[1])

    def test_input_validation(self):
        g = complete_graph(3)
        with pytest.raises(ValueError):
            mase([g])
        with pytest.raises(ValueError):
            mase([g, complete_graph(4)])
        directed = Graph(np.array([[0.0, 1.0], [0.0, 0.0]]), directed=True)
        with pytest.raises(ValueError, match="directed"):
            mase([directed, directed])


class TestEmbeddingSerialization:
    def test_json_round_trip_undirected(self):
        emb = ase(two_block_sbm(seed=5, sizes=(10, 10)), d=2)
        obj = embedding_to_json(emb)
        assert set(obj) == {"d", "singular_values", "X", "Y"}
        assert obj["Y"] is None
        back = embedding_from_json(obj)
        assert back.d == emb.d
        assert np.array_equal(back.X, emb.X)

    def test_json_round_trip_directed(self):
        g = Graph(np.array([[0.0, 1.0], [0.0, 0.0]]), directed=True)
        emb = ase(g, d=1)
        back = embedding_from_json(embedding_to_json(emb))
        assert np.array_equal(back.Y, emb.Y)

    def test_json_dumps_deterministic(self):
        emb = ase(complete_graph(4), d=1)
        assert embedding_json_dumps(emb) == embedding_json_dumps(emb)

    def test_csv_concatenates_directed_columns(self):
        g = Graph(np.array([[0.0, 1.0], [0.0, 0.0]]), directed=True)
        text = embedding_csv(ase(g, d=1))
        rows = [line.split(",") for line in text.strip().splitlines()]
        assert len(rows) == 2
        assert all(len(r) == 2 for r in rows)  # one X column + one Y column
