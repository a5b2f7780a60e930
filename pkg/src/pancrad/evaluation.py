"""Classification and segmentation metrics, stratified folds, and CV summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import PancradError, StratificationError
from .volume import check_aligned

METRICS = ("accuracy", "precision", "recall")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


class ConfusionResult(NamedTuple):
    counts: ConfusionCounts
    accuracy: float
    precision: float
    recall: float
    precision_degenerate: bool = False
    recall_degenerate: bool = False


def _ratio(num, den):
    return (num / den, False) if den > 0 else (0.0, True)


def confusion_metrics(pred, truth):
    """Accuracy, precision and recall for binary labels.

    Precision (recall) with no predicted (actual) positives is reported as 0
    and flagged degenerate.
    """
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise PancradError(f"length mismatch: {pred.size} predictions vs {truth.size} labels")
    if pred.size == 0:
        raise PancradError("confusion metrics need at least one sample")
    if not (np.isin(pred, (0, 1)).all() and np.isin(truth, (0, 1)).all()):
        raise PancradError("labels must be 0 or 1")
    tp = int(np.sum((pred == 1) & (truth == 1)))
    fp = int(np.sum((pred == 1) & (truth == 0)))
    tn = int(np.sum((pred == 0) & (truth == 0)))
    fn = int(np.sum((pred == 0) & (truth == 1)))
    precision, p_flag = _ratio(tp, tp + fp)
    recall, r_flag = _ratio(tp, tp + fn)
    return ConfusionResult(ConfusionCounts(tp, fp, tn, fn), (tp + tn) / pred.size,
                           precision, recall, p_flag, r_flag)


def _overlap_sets(a, b):
    check_aligned(a, b)
    return np.asarray(a.voxels) > 0, np.asarray(b.voxels) > 0


def _iou(x, y):
    union = np.count_nonzero(x | y)
    return 1.0 if union == 0 else np.count_nonzero(x & y) / union


def dice(a, b):
    """Dice overlap of two aligned masks; 1 when both are empty."""
    x, y = _overlap_sets(a, b)
    size = np.count_nonzero(x) + np.count_nonzero(y)
    return 1.0 if size == 0 else 2.0 * np.count_nonzero(x & y) / size


def foreground_iou(a, b):
    return _iou(*_overlap_sets(a, b))


def miou(a, b):
    """Mean of foreground and background IoU."""
    x, y = _overlap_sets(a, b)
    return 0.5 * (_iou(x, y) + _iou(~x, ~y))


def voxel_precision_recall(pred, truth):
    """Voxel-wise precision and recall of ``pred`` against ``truth``."""
    x, y = _overlap_sets(pred, truth)
    inter = np.count_nonzero(x & y)
    precision, _ = _ratio(inter, np.count_nonzero(x))
    recall, _ = _ratio(inter, np.count_nonzero(y))
    return precision, recall


def segmentation_metrics(pred, truth):
    precision, recall = voxel_precision_recall(pred, truth)
    return {"dice": dice(pred, truth), "miou": miou(pred, truth),
            "precision": precision, "recall": recall}


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    assignment: dict

    def fold_members(self, fold):
        return sorted(cid for cid, f in self.assignment.items() if f == fold)


def stratified_kfold(labels, k=5, seed=0):
    """Deal each class round-robin into ``k`` folds after a seeded shuffle.

    ``labels`` maps case_id to 0/1. Within a class the ids are sorted, then
    permuted by ``numpy.random.default_rng(seed)`` (classes processed in
    ascending label order from one generator), then case ``n`` goes to fold
    ``n % k``.
    """
    if k < 2:
        raise StratificationError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    assignment = {}
    for label in sorted(set(labels.values())):
        ids = sorted(cid for cid, lab in labels.items() if lab == label)
        if len(ids) < k:
            raise StratificationError(f"class {label} has {len(ids)} cases, fewer than k={k}")
        for n, pos in enumerate(rng.permutation(len(ids))):
            assignment[ids[pos]] = n % k
    return FoldAssignment(k, assignment)


class StratifiedRoundRobinKFold:
    """scikit-learn style splitter built on :func:`stratified_kfold`.

    Pass case ids as ``groups``; without them row positions are used.
    """

    def __init__(self, n_splits=5, seed=0):
        self.n_splits = n_splits
        self.seed = seed

    def get_n_splits(self, X=None, y=None, groups=None):
        return self.n_splits

    def split(self, X, y, groups=None):
        y = np.asarray(y)
        ids = list(groups) if groups is not None else [f"{i:09d}" for i in range(len(y))]
        folds = stratified_kfold(dict(zip(ids, y.tolist())), self.n_splits, self.seed)
        fold_of = np.array([folds.assignment[cid] for cid in ids])
        for f in range(self.n_splits):
            yield np.flatnonzero(fold_of != f), np.flatnonzero(fold_of == f)


@dataclass
class MetricSummary:
    """Per-fold metrics in percent with mean and population std."""

    per_fold: list
    mean: dict
    std: dict
    counts: list = field(default_factory=list)

    def formatted(self, metric):
        return f"{self.mean[metric]:.2f} (± {self.std[metric]:.2f})"

    def table(self):
        lines = ["Fold | Accuracy (%) | Precision (%) | Recall (%)"]
        for n, row in enumerate(self.per_fold, start=1):
            lines.append(f"{n:>4} | " + " | ".join(f"{v:.2f}" for v in row))
        lines.append("Average | " + " | ".join(self.formatted(m) for m in METRICS))
        return "\n".join(lines)

    def to_dict(self):
        return {
            "per_fold": [dict(zip(METRICS, row)) for row in self.per_fold],
            "mean": dict(self.mean),
            "std": dict(self.std),
            "confusion": [c.__dict__ for c in self.counts],
        }


def aggregate(per_fold):
    """Mean and population (divisor = number of folds) std of metric tuples."""
    rows = [tuple(float(v) for v in row) for row in per_fold]
    if not rows:
        raise PancradError("aggregate needs at least one fold")
    arr = np.array(rows)
    names = METRICS[:arr.shape[1]] if arr.shape[1] <= len(METRICS) else tuple(f"m{i}" for i in range(arr.shape[1]))
    mean = {n: float(arr[:, i].mean()) for i, n in enumerate(names)}
    std = {n: float(math.sqrt(np.mean((arr[:, i] - mean[n]) ** 2))) for i, n in enumerate(names)}
    return MetricSummary(rows, mean, std)


def cross_validate(records, hp=None, k=5, seed=0):
    """Stratified k-fold CV of the boosted-tree classifier over CaseRecords."""
    from .gbdt import GbdtHyperParams, train
    from .tables import records_to_arrays

    hp = hp or GbdtHyperParams()
    records = sorted(records, key=lambda r: r.case_id)
    ids, X, y = records_to_arrays(records)
    folds = stratified_kfold(dict(zip(ids, y.tolist())), k, seed)
    fold_of = np.array([folds.assignment[cid] for cid in ids])
    rows, counts = [], []
    for f in range(k):
        test = fold_of == f
        model, _ = train(X[~test], y[~test], hp)
        pred = (model.predict_proba(X[test]) >= 0.5).astype(int)
        res = confusion_metrics(pred, y[test])
        rows.append((100 * res.accuracy, 100 * res.precision, 100 * res.recall))
        counts.append(res.counts)
    summary = aggregate(rows)
    summary.counts = counts
    return summary
