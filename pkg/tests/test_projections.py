"""2-D embeddings, out-of-sample placement, and cluster separation scores."""

import numpy as np
import pytest

from tsxplain.errors import (
    DimensionMismatchError,
    InvalidParamsError,
    PerplexityTooLargeError,
)
from tsxplain.projections import (
    KernelPCA2D,
    PCA2D,
    ProjectionCell,
    TSNE2D,
    cluster_score,
    fit_projection,
    project_oos,
    set_visibility,
)


def _three_blobs(n=20, spread=0.3, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]])
    pts = np.vstack([rng.normal(c, spread, size=(n, 2)) for c in centers])
    return pts, np.repeat([0, 1, 2], n)


def _knn_purity(coords, labels, k=5):
    from scipy.spatial.distance import cdist

    D = cdist(coords, coords)
    np.fill_diagonal(D, np.inf)
    nn = np.argsort(D, axis=1, kind="stable")[:, :k]
    return float((labels[nn] == labels[:, None]).mean())


# -- pca ----------------------------------------------------------------------


def test_pca_recovers_a_line_and_flags_rank_one():
    X = np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    p = PCA2D().fit(X)
    assert p.degenerate_
    np.testing.assert_allclose(p.components_[0], [1, 2] / np.sqrt(5), atol=1e-9)
    np.testing.assert_array_equal(p.components_[1], [0.0, 0.0])
    assert np.all(p.coords_[:, 1] == 0.0)
    # spacing along the line is preserved exactly
    np.testing.assert_allclose(np.diff(p.coords_[:, 0]), np.sqrt(5), atol=1e-4)


def test_pca_oos_continues_the_line():
    X = np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    p = PCA2D().fit(X)
    out = p.transform(np.array([4.0, 8.0]))
    np.testing.assert_allclose(out, [[2.5 * np.sqrt(5), 0.0]], atol=1e-4)


def test_pca_training_rows_transform_to_their_coords():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 6))
    p = PCA2D().fit(X)
    np.testing.assert_allclose(p.transform(X), p.coords_, atol=1e-5)
    assert not p.degenerate_


def test_pca_sign_convention_is_stable():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(20, 4))
    a = PCA2D().fit(X).components_
    b = PCA2D().fit(X.copy()).components_
    np.testing.assert_array_equal(a, b)
    for row in a:
        assert row[np.argmax(np.abs(row))] >= 0


def test_pca_input_validation():
    with pytest.raises(InvalidParamsError):
        PCA2D().fit(np.ones((2, 3)))
    p = PCA2D().fit(np.random.default_rng(0).normal(size=(5, 3)))
    with pytest.raises(DimensionMismatchError):
        p.transform(np.ones(4))


# -- kernel pca ---------------------------------------------------------------


def test_kpca_duplicate_row_lands_on_the_original():
    X = np.random.default_rng(0).normal(size=(12, 4))
    k = KernelPCA2D().fit(X)
    assert k.coords_.shape == (12, 2)
    np.testing.assert_allclose(k.transform(X[3]), k.coords_[3][None, :], atol=1e-5)


def test_kpca_gamma_heuristic():
    X = np.random.default_rng(0).normal(size=(12, 4))
    k = KernelPCA2D().fit(X)
    assert k.gamma_ == pytest.approx(1.0 / (4 * X.var()))
    k2 = KernelPCA2D(gamma=0.5).fit(X)
    assert k2.gamma_ == 0.5


def test_kpca_flat_kernel_is_degenerate_not_fatal():
    # gamma ~ 0 makes every kernel entry 1, so the centered matrix vanishes
    X = np.random.default_rng(0).normal(size=(12, 4))
    k = KernelPCA2D(gamma=1e-14).fit(X)
    assert k.degenerate_
    np.testing.assert_array_equal(k.coords_, np.zeros((12, 2)))


def test_kpca_separates_blobs():
    pts, labels = _three_blobs()
    k = KernelPCA2D().fit(pts)
    assert _knn_purity(k.coords_, labels) >= 0.9


def test_kpca_rejects_bad_gamma():
    with pytest.raises(InvalidParamsError):
        KernelPCA2D(gamma=0.0).fit(np.ones((5, 3)) + np.eye(5, 3))


# -- tsne ---------------------------------------------------------------------


def test_tsne_separates_blobs_and_reports_kl():
    pts, labels = _three_blobs()
    t = TSNE2D(iters=400, seed=0).fit(pts)
    assert _knn_purity(t.coords_, labels) == 1.0
    assert t.kl_final_ < t.kl_checkpoint_
    assert t.kl_final_ < 0.5


def test_tsne_is_deterministic():
    pts, _ = _three_blobs(n=5)
    a = TSNE2D(iters=120, seed=0).fit(pts).coords_
    b = TSNE2D(iters=120, seed=0).fit(pts).coords_
    np.testing.assert_array_equal(a, b)


def test_tsne_oos_interpolates_near_duplicates():
    pts, _ = _three_blobs()
    t = TSNE2D(iters=300, seed=0).fit(pts)
    placed = t.transform(pts[7])[0]
    assert np.linalg.norm(placed - t.coords_[7]) < 1e-3 * t.coords_.std()


def test_tsne_oos_respects_cluster_geometry():
    pts, labels = _three_blobs()
    t = TSNE2D(iters=300, seed=0).fit(pts)
    probe = t.transform(np.array([8.0, 0.2]))[0]  # near the second blob
    blob1 = t.coords_[labels == 1].mean(axis=0)
    blob0 = t.coords_[labels == 0].mean(axis=0)
    assert np.linalg.norm(probe - blob1) < np.linalg.norm(probe - blob0)


def test_tsne_refuses_small_fits():
    with pytest.raises(PerplexityTooLargeError):
        TSNE2D().fit(np.random.default_rng(0).normal(size=(9, 3)))
    with pytest.raises(PerplexityTooLargeError):
        TSNE2D(perplexity=30.0).fit(np.random.default_rng(0).normal(size=(20, 3)))
    with pytest.raises(InvalidParamsError):
        TSNE2D(perplexity=0.5).fit(np.random.default_rng(0).normal(size=(20, 3)))
    with pytest.raises(InvalidParamsError):
        TSNE2D(iters=0).fit(np.random.default_rng(0).normal(size=(20, 3)))


def test_tsne_default_perplexity_shrinks_with_n():
    pts, _ = _three_blobs(n=4)  # 12 rows
    t = TSNE2D(iters=50).fit(pts)
    assert t.perplexity_ == pytest.approx(11 / 3)


def test_fit_projection_dispatch():
    X = np.random.default_rng(0).normal(size=(12, 4))
    assert isinstance(fit_projection("pca", X), PCA2D)
    assert isinstance(fit_projection("kpca", X), KernelPCA2D)
    assert isinstance(fit_projection("tsne", X), TSNE2D)
    with pytest.raises(InvalidParamsError):
        fit_projection("umap", X)


# -- cluster scores -----------------------------------------------------------

# two tight clusters: scatter 0.1 each, centroids 10 apart
TIGHT = np.array([[0.0, 0.1], [0.0, -0.1], [10.0, 0.1], [10.0, -0.1]])
GROUPS = np.array([0, 0, 1, 1])


def test_cluster_score_hand_values():
    s = cluster_score(TIGHT, GROUPS, GROUPS, pred_weight=2.0)
    assert s.db_labels == pytest.approx(0.02, abs=1e-9)
    assert s.cdist_labels == pytest.approx(10.0, abs=1e-9)
    # both groupings identical, so combined equals the per-grouping score
    assert s.combined == pytest.approx(10.0 / 1.02, abs=1e-9)


def test_cluster_score_translation_invariance():
    a = cluster_score(TIGHT, GROUPS, GROUPS)
    b = cluster_score(TIGHT + 137.5, GROUPS, GROUPS)
    assert b.db_labels == pytest.approx(a.db_labels, abs=1e-6)
    assert b.cdist_labels == pytest.approx(a.cdist_labels, abs=1e-6)


def test_cluster_score_scale_behavior():
    a = cluster_score(TIGHT, GROUPS, GROUPS)
    b = cluster_score(TIGHT * 3.0, GROUPS, GROUPS)
    assert b.db_labels == pytest.approx(a.db_labels, abs=1e-6)  # ratio cancels
    assert b.cdist_labels == pytest.approx(3.0 * a.cdist_labels, rel=1e-9)


def test_cluster_score_weighs_predictions():
    # labels separate the same points poorly, preds perfectly
    coords = np.array([[0.0, 0.0], [10.0, 0.0], [0.1, 0.0], [10.1, 0.0]])
    labels = np.array([0, 0, 1, 1])
    preds = np.array([0, 1, 0, 1])
    s = cluster_score(coords, labels, preds, pred_weight=2.0)
    g_l = s.cdist_labels / (1 + s.db_labels)
    g_p = s.cdist_preds / (1 + s.db_preds)
    assert s.combined == pytest.approx((2 * g_p + g_l) / 3.0)
    assert g_p > g_l


def test_cluster_score_single_class_grouping_flagged():
    s = cluster_score(TIGHT, np.zeros(4), GROUPS)
    assert s.degenerate_labels and not s.degenerate_preds
    assert s.combined == pytest.approx((2 * (10.0 / 1.02) + 0.0) / 3.0)


def test_cluster_score_coincident_centroids():
    # same centroid for both groups: infinitely bad ratio, g pinned to 0
    coords = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    groups = np.array([0, 0, 1, 1])
    s = cluster_score(coords, groups, groups)
    assert np.isinf(s.db_labels)
    assert s.combined == 0.0
    doc = s.to_doc()
    assert doc["db_labels"] is None  # json cannot carry inf
    assert doc["combined"] == 0.0


def test_cluster_score_alignment_guard():
    with pytest.raises(InvalidParamsError):
        cluster_score(TIGHT, np.zeros(3), GROUPS)


# -- grid cells ---------------------------------------------------------------


def _cell(source, technique, combined):
    score = cluster_score(TIGHT * combined / (10.0 / 1.02), GROUPS, GROUPS)
    c = ProjectionCell(source, technique, TIGHT.astype(np.float32), state=None, score=score)
    assert c.score.combined == pytest.approx(combined, rel=1e-6)
    return c


def test_set_visibility_hides_weak_cells_keeps_best_per_source():
    cells = [
        _cell("raw", "pca", 10.0),
        _cell("raw", "tsne", 1.0),
        _cell("fft_mag", "pca", 0.1),
        _cell("fft_mag", "tsne", 0.2),
    ]
    set_visibility(cells)
    # median 0.6, cutoff 0.3: the weak source misses it but keeps its best
    assert [c.visible for c in cells] == [True, True, False, True]


def test_set_visibility_ignores_unscored_cells():
    plain = ProjectionCell("raw", "pca", TIGHT.astype(np.float32))
    out = set_visibility([plain])
    assert out[0].visible


def test_cell_doc_shape():
    state = PCA2D().fit(np.random.default_rng(0).normal(size=(6, 4)))
    cell = ProjectionCell(
        "raw", "pca", state.coords_, state=state,
        score=cluster_score(state.coords_, GROUPS.repeat(0)[:0].size * [0] + [0, 0, 0, 1, 1, 1], [0, 0, 0, 1, 1, 1]),
    )
    doc = cell.to_doc()
    assert doc["source"] == "raw" and doc["technique"] == "pca"
    assert len(doc["coords"]) == 6 and len(doc["coords"][0]) == 2
    assert doc["degenerate"] is False
    assert doc["visible"] is True
    assert set(doc["score"]) >= {"combined", "db_labels", "cdist_preds"}


def test_project_oos_uses_fitted_state():
    X = np.random.default_rng(0).normal(size=(10, 4))
    state = PCA2D().fit(X)
    cell = ProjectionCell("raw", "pca", state.coords_, state=state)
    x, y = project_oos(cell, X[2])
    np.testing.assert_allclose([x, y], state.coords_[2], atol=1e-6)
    with pytest.raises(InvalidParamsError):
        project_oos(ProjectionCell("raw", "pca", state.coords_), X[2])
