"""Second-order gradient-boosted regression trees for binary classification.

Trees are grown by exact greedy split search on the logistic-loss gradients
and hessians; see :func:`best_split` for the gain and tie-breaking rules.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Union

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DegenerateLabelsError, PancradError, SchemaError, VersionError

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class GbdtHyperParams:
    n_estimators: int = 3
    max_depth: int = 2
    learning_rate: float = 0.3
    l2_lambda: float = 1.0
    gamma_min_gain: float = 0.0
    min_child_weight: float = 1.0
    base_score: float = 0.5

    def __post_init__(self):
        if int(self.n_estimators) != self.n_estimators or self.n_estimators < 1:
            raise PancradError(f"n_estimators must be an integer >= 1, got {self.n_estimators}")
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise PancradError(f"max_depth must be an integer >= 1, got {self.max_depth}")
        if not 0 < self.learning_rate <= 1:
            raise PancradError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        if self.l2_lambda < 0 or self.gamma_min_gain < 0 or self.min_child_weight < 0:
            raise PancradError("l2_lambda, gamma_min_gain and min_child_weight must be >= 0")
        if not 0 < self.base_score < 1:
            raise PancradError(f"base_score must lie in (0, 1), got {self.base_score}")


@dataclass
class Leaf:
    weight: float


@dataclass
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[Leaf, Split]


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def logit(p):
    return float(np.log(p / (1.0 - p)))


def tree_output(node, X):
    out = np.empty(len(X))
    _route(node, X, np.arange(len(X)), out)
    return out


def _route(node, X, idx, out):
    if isinstance(node, Leaf):
        out[idx] = node.weight
        return
    goes_left = X[idx, node.feature] < node.threshold
    _route(node.left, X, idx[goes_left], out)
    _route(node.right, X, idx[~goes_left], out)


def tree_depth(node):
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def split_gain(g_left, h_left, g_right, h_right, l2_lambda, gamma):
    g, h = g_left + g_right, h_left + h_right
    return 0.5 * (g_left ** 2 / (h_left + l2_lambda) + g_right ** 2 / (h_right + l2_lambda)
                  - g ** 2 / (h + l2_lambda)) - gamma


def candidate_thresholds(values):
    """Midpoints between consecutive distinct sorted values."""
    uniq = np.unique(values)
    mids = (uniq[:-1] + uniq[1:]) / 2
    # adjacent floats can round the midpoint down onto the lower value
    return np.where(mids > uniq[:-1], mids, uniq[1:])


def best_split(X, grad, hess, idx, hp):
    """Best ``(gain, feature, threshold)`` over all features, or ``None``.

    Children with hessian sum below ``min_child_weight`` are not allowed and
    a split must have positive gain. Equal gains go to the lowest feature
    index, then the lowest threshold.
    """
    g_total, h_total = grad[idx].sum(), hess[idx].sum()
    best = None
    for f in range(X.shape[1]):
        col = X[idx, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        boundary = np.flatnonzero(xs[:-1] < xs[1:])
        if boundary.size == 0:
            continue
        g_left = np.cumsum(grad[idx][order])[boundary]
        h_left = np.cumsum(hess[idx][order])[boundary]
        g_right, h_right = g_total - g_left, h_total - h_left
        gains = split_gain(g_left, h_left, g_right, h_right, hp.l2_lambda, hp.gamma_min_gain)
        allowed = (h_left >= hp.min_child_weight) & (h_right >= hp.min_child_weight)
        gains = np.where(allowed, gains, -np.inf)
        k = int(np.argmax(gains))
        if gains[k] > 0 and (best is None or gains[k] > best[0]):
            lo, hi = xs[boundary[k]], xs[boundary[k] + 1]
            mid = (lo + hi) / 2
            best = (float(gains[k]), f, float(mid if mid > lo else hi))
    return best


def grow_tree(X, grad, hess, hp, idx=None, depth=0):
    if idx is None:
        idx = np.arange(len(X))
    split = best_split(X, grad, hess, idx, hp) if depth < hp.max_depth else None
    if split is None:
        return Leaf(float(-grad[idx].sum() / (hess[idx].sum() + hp.l2_lambda)))
    _, feature, threshold = split
    left = X[idx, feature] < threshold
    return Split(feature, threshold,
                 grow_tree(X, grad, hess, hp, idx[left], depth + 1),
                 grow_tree(X, grad, hess, hp, idx[~left], depth + 1))


def logistic_loss(y, margin):
    # log(1 + exp(-s*m)) written stably
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


@dataclass
class GbdtModel:
    trees: list
    learning_rate: float
    base_score: float
    feature_names: tuple

    def margin(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise SchemaError(f"expected {len(self.feature_names)} features, got array of shape {X.shape}")
        total = np.full(len(X), logit(self.base_score))
        for tree in self.trees:
            total += self.learning_rate * tree_output(tree, X)
        return total

    def predict_proba(self, X):
        return sigmoid(self.margin(X))


def train(X, y, hp=None, feature_names=None):
    """Fit a boosted ensemble; returns ``(model, per-round mean training loss)``."""
    hp = hp or GbdtHyperParams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(X) < 2 or len(np.unique(y)) < 2:
        raise DegenerateLabelsError("training needs at least two samples and both classes")
    if not np.all(np.isin(y, (0, 1))):
        raise DegenerateLabelsError("labels must be 0 or 1")
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(X.shape[1]))
    margin = np.full(len(X), logit(hp.base_score))
    losses = [logistic_loss(y, margin)]
    trees = []
    for _ in range(hp.n_estimators):
        p = sigmoid(margin)
        tree = grow_tree(X, p - y, p * (1 - p), hp)
        trees.append(tree)
        margin = margin + hp.learning_rate * tree_output(tree, X)
        losses.append(logistic_loss(y, margin))
    model = GbdtModel(trees, float(hp.learning_rate), float(hp.base_score), tuple(feature_names))
    return model, losses


def predict_proba(model, x):
    """Probability of class 1 for one feature vector (mapping or sequence)."""
    if isinstance(x, dict):
        if tuple(x) != model.feature_names:
            raise SchemaError("feature vector keys do not match the model schema")
        x = list(x.values())
    row = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return float(model.predict_proba(row)[0])


class GradientBoostedTreesClassifier(ClassifierMixin, BaseEstimator):
    """scikit-learn estimator around :func:`train` (labels must be 0/1)."""

    def __init__(self, n_estimators=3, max_depth=2, learning_rate=0.3, l2_lambda=1.0,
                 gamma_min_gain=0.0, min_child_weight=1.0, base_score=0.5):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.l2_lambda = l2_lambda
        self.gamma_min_gain = gamma_min_gain
        self.min_child_weight = min_child_weight
        self.base_score = base_score

    @classmethod
    def from_hyperparams(cls, hp):
        return cls(**asdict(hp))

    def hyperparams(self):
        return GbdtHyperParams(**{f.name: getattr(self, f.name) for f in fields(GbdtHyperParams)})

    def fit(self, X, y, feature_names=None):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y).ravel()
        if len(y) != len(X):
            raise ValueError(f"X has {len(X)} rows but y has {len(y)} labels")
        if feature_names is None and hasattr(X, "columns"):
            feature_names = [str(c) for c in X.columns]
        self.model_, self.train_loss_ = train(X, y, self.hyperparams(), feature_names)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        return self.model_.margin(check_array(X, dtype=np.float64))

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)


def _tree_to_nodes(node, out):
    if isinstance(node, Leaf):
        out.append({"leaf": node.weight})
    else:
        out.append({"feature": node.feature, "threshold": node.threshold})
        _tree_to_nodes(node.left, out)
        _tree_to_nodes(node.right, out)
    return out


def _nodes_to_tree(nodes, pos, n_features):
    if pos >= len(nodes):
        raise SchemaError("tree node list ends before the tree is complete")
    node = nodes[pos]
    if not isinstance(node, dict):
        raise SchemaError(f"tree node {pos} is not an object")
    if set(node) == {"leaf"}:
        return Leaf(float(node["leaf"])), pos + 1
    if set(node) != {"feature", "threshold"}:
        raise SchemaError(f"tree node {pos} has keys {sorted(node)}")
    feature = node["feature"]
    if not isinstance(feature, int) or not 0 <= feature < n_features:
        raise SchemaError(f"tree node {pos} references feature {feature!r}")
    left, pos2 = _nodes_to_tree(nodes, pos + 1, n_features)
    right, pos3 = _nodes_to_tree(nodes, pos2, n_features)
    return Split(feature, float(node["threshold"]), left, right), pos3


def model_to_dict(model):
    return {
        "version": MODEL_FORMAT_VERSION,
        "base_score": model.base_score,
        "learning_rate": model.learning_rate,
        "feature_names": list(model.feature_names),
        "trees": [{"nodes": _tree_to_nodes(t, [])} for t in model.trees],
    }


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise SchemaError("model document must be a JSON object")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise VersionError(f"unsupported model version {doc.get('version')!r}")
    missing = {"base_score", "learning_rate", "feature_names", "trees"} - set(doc)
    if missing:
        raise SchemaError(f"model document lacks {sorted(missing)}")
    names = tuple(doc["feature_names"])
    trees = []
    for k, entry in enumerate(doc["trees"]):
        nodes = entry.get("nodes") if isinstance(entry, dict) else None
        if not isinstance(nodes, list):
            raise SchemaError(f"tree {k} has no node list")
        tree, end = _nodes_to_tree(nodes, 0, len(names))
        if end != len(nodes):
            raise SchemaError(f"tree {k} has {len(nodes) - end} trailing nodes")
        trees.append(tree)
    return GbdtModel(trees, float(doc["learning_rate"]), float(doc["base_score"]), names)


def dumps_model(model):
    return json.dumps(model_to_dict(model), indent=1) + "\n"


def save_model(model, path):
    Path(path).write_text(dumps_model(model))


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(doc)


DEFAULT_GRID = tuple(
    GbdtHyperParams(n_estimators=n, max_depth=d, learning_rate=eta)
    for n in (1, 2, 3, 5, 10) for d in (1, 2, 3, 4) for eta in (0.1, 0.3)
)


def grid_search(records, grid=DEFAULT_GRID, k=5, seed=0):
    """Pick the configuration with the best stratified-CV mean accuracy.

    Ties prefer fewer estimators, then shallower trees, then grid order.
    Returns ``(best, [(hyperparams, mean accuracy), ...])``.
    """
    from .evaluation import cross_validate

    grid = list(grid)
    if not grid:
        raise PancradError("grid search needs at least one configuration")
    table = []
    for hp in grid:
        summary = cross_validate(records, hp, k=k, seed=seed)
        table.append((hp, summary.mean["accuracy"]))
    order = sorted(range(len(grid)), key=lambda i: (-table[i][1], grid[i].n_estimators, grid[i].max_depth, i))
    return grid[order[0]], table
