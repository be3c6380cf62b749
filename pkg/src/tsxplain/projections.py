"""2-D embeddings of source matrices, cluster scoring, and visibility.

Three technique families keep projection artifacts honest: linear (PCA),
kernel (RBF kernel PCA), manifold (exact t-SNE). Every fitted estimator can
place a new row without refitting, so edited samples land in an unchanged
reference frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator

from .errors import InvalidParamsError, PerplexityTooLargeError
from .validation import check_matrix, check_row_matches

TECHNIQUE_NAMES = ("pca", "kpca", "tsne")


def _sq_dists(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    D = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.fill_diagonal(D, 0.0)
    return np.maximum(D, 0.0)


class PCA2D(BaseEstimator):
    """Top-2 principal components with a deterministic sign convention.

    Rank below 2 is flagged (``degenerate_``), never raised: the missing
    coordinate is pinned to zero so downstream consumers still get 2-D.
    """

    def fit(self, X, y=None):
        X = check_matrix(X, min_rows=3, min_cols=2)
        self.n_features_in_ = X.shape[1]
        self.mean_ = X.mean(axis=0)
        Xc = X - self.mean_
        _, S, Vt = np.linalg.svd(Xc, full_matrices=False)
        tol = max(X.shape) * np.finfo(np.float64).eps * (S[0] if S.size else 0.0)
        rank = int(np.sum(S > tol))

        components = Vt[:2].copy()
        for i in range(2):
            if i >= rank:
                components[i] = 0.0
                continue
            j = int(np.argmax(np.abs(components[i])))
            if components[i, j] < 0:
                components[i] = -components[i]
        self.components_ = components
        self.degenerate_ = rank < 2
        self.singular_values_ = S[:2].copy()
        self.coords_ = (Xc @ components.T).astype(np.float32)
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        X = np.vstack([check_row_matches(r, self.n_features_in_) for r in X])
        return ((X - self.mean_) @ self.components_.T).astype(np.float32)


class KernelPCA2D(BaseEstimator):
    """RBF kernel PCA; out-of-sample rows via the Nystroem extension."""

    def __init__(self, gamma=None):
        self.gamma = gamma

    def fit(self, X, y=None):
        X = check_matrix(X, min_rows=3, min_cols=1)
        n, d = X.shape
        self.n_features_in_ = d
        if self.gamma is None:
            var = X.var()
            self.gamma_ = 1.0 / (d * var) if var > 1e-12 else 1.0
        else:
            if self.gamma <= 0:
                raise InvalidParamsError("gamma must be > 0")
            self.gamma_ = float(self.gamma)
        self.X_fit_ = X

        K = np.exp(-self.gamma_ * _sq_dists(X))
        self.col_means_ = K.mean(axis=0)
        self.all_mean_ = float(K.mean())
        ones = np.full((n, n), 1.0 / n)
        Kc = K - ones @ K - K @ ones + ones @ K @ ones

        eigvals, eigvecs = np.linalg.eigh(Kc)
        lam = eigvals[::-1][:2].copy()
        vec = eigvecs[:, ::-1][:, :2].copy()
        tol = 1e-12 * n
        usable = lam > tol
        self.degenerate_ = not bool(usable.all())

        for i in range(2):
            if not usable[i]:
                lam[i] = 0.0
                vec[:, i] = 0.0
                continue
            j = int(np.argmax(np.abs(vec[:, i])))
            if vec[j, i] < 0:
                vec[:, i] = -vec[:, i]
        self.lambdas_ = lam
        self.alphas_ = vec
        coords = vec * np.sqrt(lam)[None, :]
        self.coords_ = coords.astype(np.float32)
        # projection weights: alpha / sqrt(lambda), zero where degenerate
        self._proj = np.where(usable[None, :], vec / np.sqrt(np.where(lam > 0, lam, 1.0)), 0.0)
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        X = np.vstack([check_row_matches(r, self.n_features_in_) for r in X])
        k = np.exp(-self.gamma_ * cdist(X, self.X_fit_, "sqeuclidean"))
        kc = k - k.mean(axis=1, keepdims=True) - self.col_means_[None, :] + self.all_mean_
        return (kc @ self._proj).astype(np.float32)


def _hbeta(dist_row: np.ndarray, beta: float):
    P = np.exp(-dist_row * beta)
    sumP = max(P.sum(), 1e-300)
    H = np.log(sumP) + beta * float(np.sum(dist_row * P)) / sumP
    return H, P / sumP


def _conditional_probs(D: np.ndarray, perplexity: float, tol: float = 1e-4, max_tries: int = 50):
    """Per-row precision search matching the target entropy log(perplexity)."""
    n = D.shape[0]
    P = np.zeros((n, n))
    target = np.log(perplexity)
    for i in range(n):
        mask = np.arange(n) != i
        Di = D[i, mask]
        beta, betamin, betamax = 1.0, -np.inf, np.inf
        H, row = _hbeta(Di, beta)
        tries = 0
        while abs(H - target) > tol and tries < max_tries:
            if H > target:
                betamin = beta
                beta = beta * 2.0 if np.isinf(betamax) else (beta + betamax) / 2.0
            else:
                betamax = beta
                beta = beta / 2.0 if np.isinf(betamin) else (beta + betamin) / 2.0
            H, row = _hbeta(Di, beta)
            tries += 1
        P[i, mask] = row
    return P


class TSNE2D(BaseEstimator):
    """Exact t-SNE with deterministic PCA initialization.

    Early exaggeration x12 for the first 250 iterations, momentum 0.5 then
    0.8, plain momentum descent with per-iteration centering. New rows are
    placed by inverse-distance-weighted interpolation over the embedded
    coords of the k nearest training rows; the optimizer never reruns.
    """

    _EXAGGERATION = 12.0
    _SWITCH_ITER = 250

    def __init__(self, perplexity=None, iters=1000, seed=0, k_oos=5):
        self.perplexity = perplexity
        self.iters = iters
        self.seed = seed
        self.k_oos = k_oos

    def fit(self, X, y=None):
        X = check_matrix(X, min_rows=3, min_cols=1)
        n = X.shape[0]
        if n < 10:
            raise PerplexityTooLargeError(f"need N >= 10 rows, got {n}")
        if self.perplexity is None:
            perplexity = min(30.0, (n - 1) / 3.0)
        else:
            perplexity = float(self.perplexity)
            if perplexity < 1:
                raise InvalidParamsError("perplexity must be >= 1")
            if 3.0 * perplexity > n - 1:
                raise PerplexityTooLargeError(
                    f"perplexity {perplexity} too large for {n} rows"
                )
        if self.iters < 1:
            raise InvalidParamsError("iters must be >= 1")
        self.n_features_in_ = X.shape[1]
        self.X_fit_ = X
        self.perplexity_ = perplexity

        D = _sq_dists(X)
        P = _conditional_probs(D, perplexity)
        P = (P + P.T) / (2.0 * n)
        P = np.maximum(P, 1e-12)

        init = PCA2D().fit(X).coords_.astype(np.float64)
        spread = init.std()
        Y = init / spread * 1e-2 if spread > 0 else np.zeros_like(init)

        lr = max(n / 12.0, 50.0)
        velocity = np.zeros_like(Y)
        P_eff = P * self._EXAGGERATION
        switch = min(self._SWITCH_ITER, self.iters)
        self.kl_checkpoint_ = None

        for it in range(self.iters):
            num = 1.0 / (1.0 + _sq_dists(Y))
            np.fill_diagonal(num, 0.0)
            Q = np.maximum(num / num.sum(), 1e-12)
            if it == switch:
                P_eff = P
                self.kl_checkpoint_ = float(np.sum(P * np.log(P / Q)))
            momentum = 0.5 if it < self._SWITCH_ITER else 0.8
            PQn = (P_eff - Q) * num
            grad = 4.0 * (PQn.sum(axis=1)[:, None] * Y - PQn @ Y)
            velocity = momentum * velocity - lr * grad
            Y = Y + velocity
            Y = Y - Y.mean(axis=0)

        num = 1.0 / (1.0 + _sq_dists(Y))
        np.fill_diagonal(num, 0.0)
        Q = np.maximum(num / num.sum(), 1e-12)
        self.kl_final_ = float(np.sum(P * np.log(P / Q)))
        self.coords_ = Y.astype(np.float32)
        self.degenerate_ = False
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        X = np.vstack([check_row_matches(r, self.n_features_in_) for r in X])
        d = cdist(X, self.X_fit_)
        k = min(self.k_oos, self.X_fit_.shape[0])
        out = np.empty((X.shape[0], 2))
        coords = self.coords_.astype(np.float64)
        for i in range(X.shape[0]):
            nearest = np.argsort(d[i], kind="stable")[:k]
            w = 1.0 / (d[i, nearest] + 1e-9)
            out[i] = (coords[nearest] * w[:, None]).sum(axis=0) / w.sum()
        return out.astype(np.float32)


def fit_projection(technique: str, matrix, seed: int = 0):
    if technique == "pca":
        return PCA2D().fit(matrix)
    if technique == "kpca":
        return KernelPCA2D().fit(matrix)
    if technique == "tsne":
        return TSNE2D(seed=seed).fit(matrix)
    raise InvalidParamsError(f"unknown technique {technique!r}")


# -- cluster scoring --------------------------------------------------------


@dataclass
class ClusterScore:
    db_labels: float
    db_preds: float
    cdist_labels: float
    cdist_preds: float
    combined: float
    degenerate_labels: bool = False
    degenerate_preds: bool = False

    def to_doc(self) -> dict:
        def clean(v):
            return float(v) if np.isfinite(v) else None

        return {
            "db_labels": clean(self.db_labels),
            "db_preds": clean(self.db_preds),
            "cdist_labels": clean(self.cdist_labels),
            "cdist_preds": clean(self.cdist_preds),
            "combined": float(self.combined),
            "degenerate_labels": self.degenerate_labels,
            "degenerate_preds": self.degenerate_preds,
        }


def _grouping_stats(coords: np.ndarray, groups: np.ndarray):
    """(davies_bouldin, mean centroid distance) or None for single-class."""
    uniq = np.unique(groups)
    if uniq.size < 2:
        return None
    centroids = np.stack([coords[groups == u].mean(axis=0) for u in uniq])
    scatter = np.array(
        [np.linalg.norm(coords[groups == u] - centroids[i], axis=1).mean() for i, u in enumerate(uniq)]
    )
    M = cdist(centroids, centroids)
    k = uniq.size
    R = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            # coincident centroids make the pair infinitely bad
            R[i, j] = (scatter[i] + scatter[j]) / M[i, j] if M[i, j] > 0 else np.inf
    db = float(np.mean(np.max(R, axis=1)))
    tri = M[np.triu_indices(k, 1)]
    return db, float(tri.mean())


def _g(db: float, cd: float) -> float:
    return cd / (1.0 + db) if np.isfinite(db) else 0.0


def cluster_score(coords, labels, preds, pred_weight: float = 2.0) -> ClusterScore:
    """Separation quality under both groupings, prediction-weighted.

    g = cdist / (1 + davies_bouldin) per grouping, higher better;
    combined = (pred_weight * g_preds + g_labels) / (pred_weight + 1).
    A single-class grouping contributes g = 0 and is flagged.
    """
    coords = check_matrix(coords, min_rows=1, min_cols=2)
    labels = np.asarray(labels).ravel()
    preds = np.asarray(preds).ravel()
    if labels.shape[0] != coords.shape[0] or preds.shape[0] != coords.shape[0]:
        raise InvalidParamsError("labels/preds must align with coords rows")

    lab = _grouping_stats(coords, labels)
    prd = _grouping_stats(coords, preds)
    db_l, cd_l = lab if lab else (0.0, 0.0)
    db_p, cd_p = prd if prd else (0.0, 0.0)
    g_l = _g(db_l, cd_l) if lab else 0.0
    g_p = _g(db_p, cd_p) if prd else 0.0
    combined = (pred_weight * g_p + g_l) / (pred_weight + 1.0)
    return ClusterScore(
        db_labels=db_l,
        db_preds=db_p,
        cdist_labels=cd_l,
        cdist_preds=cd_p,
        combined=float(combined),
        degenerate_labels=lab is None,
        degenerate_preds=prd is None,
    )


# -- the projection grid ----------------------------------------------------


@dataclass
class ProjectionCell:
    source: str
    technique: str
    coords: np.ndarray  # (N, 2) float32
    state: object = None  # fitted estimator
    score: ClusterScore | None = None
    visible: bool = True

    def to_doc(self) -> dict:
        return {
            "source": self.source,
            "technique": self.technique,
            "coords": np.asarray(self.coords, dtype=np.float32).tolist(),
            "score": self.score.to_doc() if self.score else None,
            "degenerate": bool(getattr(self.state, "degenerate_", False)),
            "visible": bool(self.visible),
        }


def set_visibility(cells) -> list:
    """Hide weak cells: keep combined >= half the grid median, plus the best
    cell of every source column regardless."""
    cells = list(cells)
    scored = [c for c in cells if c.score is not None]
    if not scored:
        return cells
    median = float(np.median([c.score.combined for c in scored]))
    for c in scored:
        c.visible = c.score.combined >= 0.5 * median
    best: dict = {}
    for c in scored:
        cur = best.get(c.source)
        if cur is None or c.score.combined > cur.score.combined:
            best[c.source] = c
    for c in best.values():
        c.visible = True
    return cells


def project_oos(cell: ProjectionCell, new_row) -> tuple:
    """Place one new row in a fitted cell's frame; never refits."""
    if cell.state is None:
        raise InvalidParamsError("cell has no fitted state")
    coords = cell.state.transform(np.asarray(new_row, dtype=np.float64)[None, :])[0]
    return float(coords[0]), float(coords[1])
