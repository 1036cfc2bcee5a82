"""Supervised learners used as nuisance estimators.

The built-in learner is an exact-split gradient-boosted tree ensemble with
squared loss (regression) and logistic loss (classification).  Split gains and
leaf values use the second-order formulation with an L2 leaf penalty
``reg_lambda``, so the tuned hyperparameters are (n_estimators, max_depth,
reg_lambda).  The learning rate is fixed at 0.3 and is not part of the search
grid.

A table-lookup "exact" learner is provided for purely categorical designs: it
returns empirical conditional means / class frequencies per feature
combination and is the reference nuisance for the oracle test suites.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

FORMAT_VERSION = 1

DEFAULT_LEARNING_RATE = 0.3
PROB_CLIP = 1e-6
# Minimum hessian mass per child; small enough that tiny logistic fixtures
# (hessian <= 0.25 per row) can still split.
MIN_CHILD_HESS = 1e-3


class LearnerError(ValueError):
    pass


@dataclass(frozen=True)
class LearnerGrid:
    """Hyperparameter search space for the boosted learners."""

    n_estimators: tuple[int, ...] = (5, 10, 20, 50, 100)
    max_depth: tuple[int, ...] = (1, 2, 3, 4, 5)
    reg_lambda: tuple[float, ...] = (0.5, 1.0, 2.0, 5.0)

    def __post_init__(self):
        for name in ("n_estimators", "max_depth", "reg_lambda"):
            vals = getattr(self, name)
            if len(vals) == 0:
                raise LearnerError(f"empty grid for {name}")
            if any(v <= 0 for v in vals):
                raise LearnerError(f"non-positive value in grid for {name}")

    def points(self):
        """Grid points in lexicographic order (the tie-break order)."""
        return list(
            product(
                sorted(self.n_estimators),
                sorted(self.max_depth),
                sorted(self.reg_lambda),
            )
        )


def _as_matrix(features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise LearnerError("feature matrix must be 2-dimensional")
    if not np.all(np.isfinite(x)):
        raise LearnerError("non-finite feature values")
    return x


# ---------------------------------------------------------------------------
# Single tree: exact greedy splits over observed unique values
# ---------------------------------------------------------------------------


@dataclass
class _Tree:
    feature: np.ndarray    # int, -1 marks a leaf
    threshold: np.ndarray  # split sends x <= threshold to the left child
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, x: np.ndarray) -> np.ndarray:
        idx = np.zeros(x.shape[0], dtype=np.int64)
        active = self.feature[idx] >= 0
        while np.any(active):
            rows = np.nonzero(active)[0]
            node = idx[rows]
            go_left = x[rows, self.feature[node]] <= self.threshold[node]
            idx[rows] = np.where(go_left, self.left[node], self.right[node])
            active = self.feature[idx] >= 0
        return self.value[idx]

    def to_lists(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_lists(cls, d):
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=np.float64),
        )


class _Design:
    """Pre-sorted view of the training design used by every boosting round."""

    def __init__(self, x: np.ndarray):
        self.n, self.n_feat = x.shape
        self.codes = []      # integer code of each row into the unique values
        self.n_codes = []
        self.cut_values = []  # numeric midpoint threshold for cut index c
        for f in range(self.n_feat):
            uniq, codes = np.unique(x[:, f], return_inverse=True)
            self.codes.append(codes.astype(np.int64))
            self.n_codes.append(len(uniq))
            if len(uniq) >= 2:
                self.cut_values.append((uniq[:-1] + uniq[1:]) / 2.0)
            else:
                self.cut_values.append(np.empty(0))


def _grow_tree(design: _Design, grad, hess, max_depth, reg_lambda):
    feature: list[int] = []
    threshold: list[float] = []
    cut_code: list[int] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        cut_code.append(-1)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    node_of_row = np.zeros(design.n, dtype=np.int64)
    frontier = [root]

    for _ in range(max_depth):
        if not frontier:
            break
        m = len(frontier)
        local = np.full(len(feature), -1, dtype=np.int64)
        local[frontier] = np.arange(m)
        row_local = local[node_of_row]
        mask = row_local >= 0
        rl = row_local[mask]
        g = grad[mask]
        h = hess[mask]

        g_tot = np.bincount(rl, weights=g, minlength=m)
        h_tot = np.bincount(rl, weights=h, minlength=m)
        parent_score = g_tot**2 / (h_tot + reg_lambda)

        best_gain = np.zeros(m)
        best_feat = np.full(m, -1, dtype=np.int64)
        best_cut = np.zeros(m, dtype=np.int64)

        for f in range(design.n_feat):
            k = design.n_codes[f]
            if k < 2:
                continue
            key = rl * k + design.codes[f][mask]
            g_bins = np.bincount(key, weights=g, minlength=m * k).reshape(m, k)
            h_bins = np.bincount(key, weights=h, minlength=m * k).reshape(m, k)
            gl = np.cumsum(g_bins, axis=1)[:, :-1]
            hl = np.cumsum(h_bins, axis=1)[:, :-1]
            gr = g_tot[:, None] - gl
            hr = h_tot[:, None] - hl
            gain = (
                gl**2 / (hl + reg_lambda)
                + gr**2 / (hr + reg_lambda)
                - parent_score[:, None]
            )
            gain[(hl < MIN_CHILD_HESS) | (hr < MIN_CHILD_HESS)] = -np.inf
            ci = np.argmax(gain, axis=1)
            cg = gain[np.arange(m), ci]
            better = cg > best_gain + 1e-12
            best_gain[better] = cg[better]
            best_feat[better] = f
            best_cut[better] = ci[better]

        made_split = False
        for i, node in enumerate(frontier):
            if best_feat[i] < 0 or best_gain[i] <= 0:
                continue
            f = int(best_feat[i])
            c = int(best_cut[i])
            feature[node] = f
            cut_code[node] = c
            threshold[node] = float(design.cut_values[f][c])
            left[node] = new_node()
            right[node] = new_node()
            made_split = True
        if not made_split:
            break

        feat_arr = np.asarray(feature)
        nd = node_of_row
        just_split = (feat_arr[nd] >= 0) & (np.asarray(left)[nd] >= len(local))
        # route rows of nodes split in this round using the code comparison
        rows = np.nonzero(just_split)[0]
        if rows.size:
            node_ids = nd[rows]
            go_left = np.empty(rows.shape[0], dtype=bool)
            for f in np.unique(feat_arr[node_ids]):
                sel = feat_arr[node_ids] == f
                codes_f = design.codes[f][rows[sel]]
                go_left[sel] = codes_f <= np.asarray(cut_code)[node_ids[sel]]
            node_of_row[rows] = np.where(
                go_left, np.asarray(left)[node_ids], np.asarray(right)[node_ids]
            )
        frontier = [n for n in range(len(feature)) if feature[n] == -1 and n >= len(local)]

    g_leaf = np.bincount(node_of_row, weights=grad, minlength=len(feature))
    h_leaf = np.bincount(node_of_row, weights=hess, minlength=len(feature))
    feat_arr = np.asarray(feature)
    for node in range(len(feature)):
        if feat_arr[node] < 0:
            value[node] = float(-g_leaf[node] / (h_leaf[node] + reg_lambda))

    return _Tree(
        feature=feat_arr,
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# Boosted ensembles
# ---------------------------------------------------------------------------


@dataclass
class BoostedRegressor:
    """Gradient-boosted trees with squared loss."""

    n_estimators: int = 50
    max_depth: int = 3
    reg_lambda: float = 1.0
    learning_rate: float = DEFAULT_LEARNING_RATE

    def fit(self, features, targets, sample_weight=None):
        x = _as_matrix(features)
        y = np.asarray(targets, dtype=np.float64)
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise LearnerError("targets must be a vector matching the feature rows")
        if y.shape[0] < 2:
            raise LearnerError("need at least 2 training rows")
        if not np.all(np.isfinite(y)):
            raise LearnerError("non-finite targets")
        w = np.ones_like(y) if sample_weight is None else np.asarray(sample_weight, float)
        if np.any(w < 0) or w.sum() <= 0:
            raise LearnerError("sample weights must be nonnegative with positive sum")

        self.n_features_ = x.shape[1]
        self.base_ = float(np.average(y, weights=w))
        design = _Design(x)
        self.trees_ = []
        pred = np.full(y.shape[0], self.base_)
        self.train_mse_path_ = [float(np.average((y - pred) ** 2, weights=w))]
        for _ in range(self.n_estimators):
            grad = w * (pred - y)
            hess = w.copy()
            tree = _grow_tree(design, grad, hess, self.max_depth, self.reg_lambda)
            pred = pred + self.learning_rate * tree.predict(x)
            self.trees_.append(tree)
            self.train_mse_path_.append(float(np.average((y - pred) ** 2, weights=w)))
        return self

    def _check_schema(self, x):
        if x.shape[1] != self.n_features_:
            raise LearnerError(
                f"expected {self.n_features_} features, got {x.shape[1]}"
            )

    def predict(self, features) -> np.ndarray:
        x = _as_matrix(features)
        self._check_schema(x)
        out = np.full(x.shape[0], self.base_)
        for tree in self.trees_:
            out += self.learning_rate * tree.predict(x)
        return out

    def staged_predict(self, features) -> np.ndarray:
        """Cumulative predictions after 0..n_estimators rounds, shape (T+1, n)."""
        x = _as_matrix(features)
        self._check_schema(x)
        out = np.empty((len(self.trees_) + 1, x.shape[0]))
        out[0] = self.base_
        for t, tree in enumerate(self.trees_):
            out[t + 1] = out[t] + self.learning_rate * tree.predict(x)
        return out

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "boosted_regressor",
            "params": {
                "n_estimators": self.n_estimators,
                "max_depth": self.max_depth,
                "reg_lambda": self.reg_lambda,
                "learning_rate": self.learning_rate,
            },
            "n_features": self.n_features_,
            "base": self.base_,
            "trees": [t.to_lists() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != FORMAT_VERSION:
            raise LearnerError("unsupported model format version")
        model = cls(**d["params"])
        model.n_features_ = d["n_features"]
        model.base_ = d["base"]
        model.trees_ = [_Tree.from_lists(t) for t in d["trees"]]
        model.train_mse_path_ = []
        return model


@dataclass
class BoostedClassifier:
    """Boosted trees with logistic loss; multi-class via one-vs-rest.

    Predicted probabilities are clipped to [PROB_CLIP, 1 - PROB_CLIP] so that
    downstream inverse-propensity ratios stay finite.
    """

    n_estimators: int = 50
    max_depth: int = 3
    reg_lambda: float = 1.0
    learning_rate: float = DEFAULT_LEARNING_RATE

    def fit(self, features, labels, sample_weight=None):
        x = _as_matrix(features)
        y = np.asarray(labels)
        if y.shape[0] != x.shape[0]:
            raise LearnerError("labels must match the feature rows")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise LearnerError("need at least 2 classes in the labels")
        w = np.ones(y.shape[0]) if sample_weight is None else np.asarray(sample_weight, float)

        self.n_features_ = x.shape[1]
        design = _Design(x)
        self.boosters_ = []
        n_models = 1 if len(self.classes_) == 2 else len(self.classes_)
        for k in range(n_models):
            target = (y_idx == (k if n_models > 1 else 1)).astype(np.float64)
            p0 = float(np.clip(np.average(target, weights=w), PROB_CLIP, 1 - PROB_CLIP))
            base = float(np.log(p0 / (1 - p0)))
            raw = np.full(y.shape[0], base)
            trees = []
            for _ in range(self.n_estimators):
                p = 1.0 / (1.0 + np.exp(-raw))
                grad = w * (p - target)
                hess = w * p * (1 - p)
                tree = _grow_tree(design, grad, hess, self.max_depth, self.reg_lambda)
                raw = raw + self.learning_rate * tree.predict(x)
                trees.append(tree)
            self.boosters_.append({"base": base, "trees": trees})
        return self

    def _raw(self, x, booster, n_rounds=None):
        trees = booster["trees"] if n_rounds is None else booster["trees"][:n_rounds]
        out = np.full(x.shape[0], booster["base"])
        for tree in trees:
            out += self.learning_rate * tree.predict(x)
        return out

    def predict_proba(self, features, n_rounds=None) -> np.ndarray:
        x = _as_matrix(features)
        if x.shape[1] != self.n_features_:
            raise LearnerError(
                f"expected {self.n_features_} features, got {x.shape[1]}"
            )
        if len(self.boosters_) == 1:
            p1 = 1.0 / (1.0 + np.exp(-self._raw(x, self.boosters_[0], n_rounds)))
            proba = np.column_stack([1 - p1, p1])
        else:
            raws = np.column_stack(
                [1.0 / (1.0 + np.exp(-self._raw(x, b, n_rounds))) for b in self.boosters_]
            )
            proba = raws / raws.sum(axis=1, keepdims=True)
        proba = np.clip(proba, PROB_CLIP, 1 - PROB_CLIP)
        return proba / proba.sum(axis=1, keepdims=True)

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "boosted_classifier",
            "params": {
                "n_estimators": self.n_estimators,
                "max_depth": self.max_depth,
                "reg_lambda": self.reg_lambda,
                "learning_rate": self.learning_rate,
            },
            "n_features": self.n_features_,
            "classes": np.asarray(self.classes_).tolist(),
            "boosters": [
                {"base": b["base"], "trees": [t.to_lists() for t in b["trees"]]}
                for b in self.boosters_
            ],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != FORMAT_VERSION:
            raise LearnerError("unsupported model format version")
        model = cls(**d["params"])
        model.n_features_ = d["n_features"]
        model.classes_ = np.asarray(d["classes"])
        model.boosters_ = [
            {"base": b["base"], "trees": [_Tree.from_lists(t) for t in b["trees"]]}
            for b in d["boosters"]
        ]
        return model


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh)


def load_model(path):
    with open(path) as fh:
        d = json.load(fh)
    cls = {"boosted_regressor": BoostedRegressor, "boosted_classifier": BoostedClassifier}[
        d["kind"]
    ]
    return cls.from_dict(d)


# ---------------------------------------------------------------------------
# Cross-validated grid search
# ---------------------------------------------------------------------------


def _cv_folds(n, folds, seed):
    if folds < 2:
        raise LearnerError("need at least 2 folds")
    if n < folds:
        raise LearnerError(f"fewer rows ({n}) than folds ({folds})")
    rng = np.random.default_rng(seed)
    return np.array_split(rng.permutation(n), folds)


def grid_search(grid: LearnerGrid, features, targets, metric: str,
                folds: int = 5, seed: int = 0):
    """Select the grid point minimizing the mean cross-validated metric.

    metric: "mse" for regression targets, "brier" for class labels.  Ties are
    broken toward the lexicographically smallest
    (n_estimators, max_depth, reg_lambda).  For efficiency the largest tree
    count is boosted once per (depth, lambda) and the smaller counts are read
    off the staged predictions.
    """
    if metric not in ("mse", "brier"):
        raise LearnerError(f"unknown metric {metric!r}")
    x = _as_matrix(features)
    y = np.asarray(targets)
    fold_idx = _cv_folds(x.shape[0], folds, seed)
    n_est_sorted = sorted(grid.n_estimators)
    max_rounds = n_est_sorted[-1]

    scores = {}  # (n_estimators, depth, lam) -> sum of fold metrics
    for depth in sorted(grid.max_depth):
        for lam in sorted(grid.reg_lambda):
            for holdout in fold_idx:
                train = np.setdiff1d(np.arange(x.shape[0]), holdout, assume_unique=False)
                if metric == "mse":
                    model = BoostedRegressor(max_rounds, depth, lam).fit(x[train], y[train])
                    staged = model.staged_predict(x[holdout])
                    for t in n_est_sorted:
                        err = float(np.mean((staged[t] - y[holdout].astype(float)) ** 2))
                        scores[(t, depth, lam)] = scores.get((t, depth, lam), 0.0) + err
                else:
                    if len(np.unique(y[train])) < 2:
                        raise LearnerError("training fold with a single class")
                    model = BoostedClassifier(max_rounds, depth, lam).fit(x[train], y[train])
                    onehot = (
                        y[holdout][:, None] == model.classes_[None, :]
                    ).astype(float)
                    for t in n_est_sorted:
                        proba = model.predict_proba(x[holdout], n_rounds=t)
                        if len(model.classes_) == 2:
                            err = float(np.mean((proba[:, 1] - onehot[:, 1]) ** 2))
                        else:
                            err = float(np.mean(((proba - onehot) ** 2).sum(axis=1)))
                        scores[(t, depth, lam)] = scores.get((t, depth, lam), 0.0) + err

    best = None
    best_score = np.inf
    for point in grid.points():
        s = scores[point] / len(fold_idx)
        if s < best_score - 1e-15:
            best, best_score = point, s
    return {
        "n_estimators": best[0],
        "max_depth": best[1],
        "reg_lambda": best[2],
    }, best_score


def fit_regressor(features, targets, grid: LearnerGrid | None = None,
                  search_folds: int = 5, seed: int = 0, sample_weight=None,
                  **fixed) -> BoostedRegressor:
    """Boosted regression with MSE-selected hyperparameters.

    With a single-point grid (or grid=None plus explicit parameters) no search
    is run.  Requires at least 10 rows when searching.
    """
    x = _as_matrix(features)
    if x.shape[0] < 2:
        raise LearnerError("need at least 2 training rows")
    if grid is not None and len(grid.points()) > 1:
        if x.shape[0] < 10:
            raise LearnerError("need at least 10 rows for a grid search")
        params, score = grid_search(grid, x, targets, "mse", search_folds, seed)
    elif grid is not None:
        (t, d, l), score = grid.points()[0], None
        params = {"n_estimators": t, "max_depth": d, "reg_lambda": l}
    else:
        params, score = dict(fixed), None
    model = BoostedRegressor(**params).fit(x, targets, sample_weight=sample_weight)
    model.selected_params_ = params
    model.cv_metric_ = score
    return model


def fit_classifier(features, labels, grid: LearnerGrid | None = None,
                   search_folds: int = 5, seed: int = 0, sample_weight=None,
                   **fixed) -> BoostedClassifier:
    """Boosted classification with Brier-selected hyperparameters."""
    x = _as_matrix(features)
    if len(np.unique(np.asarray(labels))) < 2:
        raise LearnerError("need at least 2 classes in the labels")
    if grid is not None and len(grid.points()) > 1:
        params, score = grid_search(grid, x, labels, "brier", search_folds, seed)
    elif grid is not None:
        (t, d, l), score = grid.points()[0], None
        params = {"n_estimators": t, "max_depth": d, "reg_lambda": l}
    else:
        params, score = dict(fixed), None
    model = BoostedClassifier(**params).fit(x, labels, sample_weight=sample_weight)
    model.selected_params_ = params
    model.cv_metric_ = score
    return model


# ---------------------------------------------------------------------------
# Exact tabular learners (categorical designs only)
# ---------------------------------------------------------------------------


def _int_codes(features) -> np.ndarray:
    x = _as_matrix(features)
    rounded = np.round(x)
    if not np.array_equal(x, rounded):
        raise LearnerError("tabular exact learner requires categorical features")
    return np.ascontiguousarray(rounded.astype(np.int64))


def _row_keys(x: np.ndarray) -> np.ndarray:
    """Byte view of the rows; gives a total order usable with searchsorted."""
    return np.ascontiguousarray(x).view([("", x.dtype)] * x.shape[1]).ravel()


class _TableLookup:
    """Shared machinery: sorted unique training rows plus per-row payloads."""

    def _index(self, x: np.ndarray, unique_keys: np.ndarray) -> np.ndarray:
        """Position of each row in unique_keys, or -1 for unseen rows."""
        keys = _row_keys(x)
        pos = np.searchsorted(unique_keys, keys)
        pos = np.clip(pos, 0, len(unique_keys) - 1)
        found = unique_keys[pos] == keys
        return np.where(found, pos, -1)


class TabularRegressor(_TableLookup):
    """Empirical conditional mean per observed feature combination.

    Unseen combinations fall back to the global (weighted) mean.
    """

    def fit(self, features, targets, sample_weight=None):
        x = _int_codes(features)
        y = np.asarray(targets, dtype=np.float64)
        w = np.ones_like(y) if sample_weight is None else np.asarray(sample_weight, float)
        self.n_features_ = x.shape[1]
        self.global_mean_ = float(np.average(y, weights=w))
        keys = _row_keys(x)
        self.unique_keys_, inv = np.unique(keys, return_inverse=True)
        wsum = np.bincount(inv, weights=w, minlength=len(self.unique_keys_))
        ysum = np.bincount(inv, weights=w * y, minlength=len(self.unique_keys_))
        self.cell_means_ = np.where(wsum > 0, ysum / np.maximum(wsum, 1e-300),
                                    self.global_mean_)
        return self

    def predict(self, features) -> np.ndarray:
        x = _int_codes(features)
        if x.shape[1] != self.n_features_:
            raise LearnerError("feature schema mismatch")
        pos = self._index(x, self.unique_keys_)
        out = np.where(pos >= 0, self.cell_means_[np.maximum(pos, 0)], self.global_mean_)
        return out


class TabularClassifier(_TableLookup):
    """Empirical conditional class frequencies per feature combination."""

    def fit(self, features, labels, sample_weight=None):
        x = _int_codes(features)
        y = np.asarray(labels)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise LearnerError("need at least 2 classes in the labels")
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, float)
        self.n_features_ = x.shape[1]
        k = len(self.classes_)
        keys = _row_keys(x)
        self.unique_keys_, inv = np.unique(keys, return_inverse=True)
        counts = np.zeros((len(self.unique_keys_), k))
        for c in range(k):
            counts[:, c] = np.bincount(
                inv, weights=w * (y_idx == c), minlength=len(self.unique_keys_)
            )
        total = counts.sum(axis=0)
        self.global_freq_ = total / total.sum()
        self.cell_freqs_ = counts / counts.sum(axis=1, keepdims=True)
        return self

    def predict_proba(self, features) -> np.ndarray:
        x = _int_codes(features)
        if x.shape[1] != self.n_features_:
            raise LearnerError("feature schema mismatch")
        pos = self._index(x, self.unique_keys_)
        out = self.cell_freqs_[np.maximum(pos, 0)].copy()
        out[pos < 0] = self.global_freq_
        return out


# ---------------------------------------------------------------------------
# Factories: the pluggable interface the estimators consume
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoostedFactory:
    """Produces boosted learners; grid=None fits with the fixed parameters."""

    grid: LearnerGrid | None = None
    n_estimators: int = 50
    max_depth: int = 3
    reg_lambda: float = 1.0
    search_folds: int = 5
    seed: int = 0

    def regressor(self, features, targets, sample_weight=None):
        return fit_regressor(
            features, targets, grid=self.grid, search_folds=self.search_folds,
            seed=self.seed, sample_weight=sample_weight,
            n_estimators=self.n_estimators, max_depth=self.max_depth,
            reg_lambda=self.reg_lambda,
        )

    def classifier(self, features, labels, sample_weight=None):
        return fit_classifier(
            features, labels, grid=self.grid, search_folds=self.search_folds,
            seed=self.seed, sample_weight=sample_weight,
            n_estimators=self.n_estimators, max_depth=self.max_depth,
            reg_lambda=self.reg_lambda,
        )

    def describe(self) -> dict:
        if self.grid is not None:
            return {
                "learner": "boosted_trees",
                "grid": {
                    "n_estimators": list(self.grid.n_estimators),
                    "max_depth": list(self.grid.max_depth),
                    "reg_lambda": list(self.grid.reg_lambda),
                },
                "search_folds": self.search_folds,
                "learning_rate": DEFAULT_LEARNING_RATE,
            }
        return {
            "learner": "boosted_trees",
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "reg_lambda": self.reg_lambda,
            "learning_rate": DEFAULT_LEARNING_RATE,
        }


@dataclass(frozen=True)
class TabularExactFactory:
    """Exact empirical-table nuisances for fully categorical designs."""

    def regressor(self, features, targets, sample_weight=None):
        return TabularRegressor().fit(features, targets, sample_weight=sample_weight)

    def classifier(self, features, labels, sample_weight=None):
        return TabularClassifier().fit(features, labels, sample_weight=sample_weight)

    def describe(self) -> dict:
        return {"learner": "tabular_exact"}
