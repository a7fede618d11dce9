"""Classification evaluation: confusion matrices and ROC/AUC curve families.

ROC curves are exact step curves over the unique score thresholds (ties
grouped), so the trapezoidal AUC equals the tie-corrected Mann-Whitney
statistic.  The macro average interpolates per-class curves onto a fixed
101-point FPR grid before averaging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MetricsError

MACRO_GRID_POINTS = 101


@dataclass(frozen=True)
class ConfusionMatrix:
    """C x C counts; rows index the true class, columns the predicted class."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise MetricsError("confusion matrix must be square")
        if (counts < 0).any():
            raise MetricsError("confusion matrix entries must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total)


@dataclass(frozen=True)
class RocCurve:
    """Ordered (FPR, TPR) points from (0,0) to (1,1) plus their trapezoidal AUC."""

    kind: str
    points: np.ndarray
    auc: float

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.float64))

    @property
    def fpr(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def tpr(self) -> np.ndarray:
        return self.points[:, 1]


def _trapezoid(x: np.ndarray, y: np.ndarray) -> float:
    return float(0.5 * np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1])))


def confusion_matrix(scores: np.ndarray, labels: np.ndarray) -> ConfusionMatrix:
    """Count argmax predictions against true labels.

    Ties in a score row resolve to the lowest class index.

    Raises:
        MetricsError: empty input or labels outside [0, C).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.ndim != 2 or scores.shape[0] == 0:
        raise MetricsError("scores must be a non-empty B x C matrix")
    class_count = scores.shape[1]
    if labels.shape != (scores.shape[0],):
        raise MetricsError("labels must align with score rows")
    if labels.min() < 0 or labels.max() >= class_count:
        raise MetricsError("labels must lie in [0, C)")
    predictions = scores.argmax(axis=1)
    counts = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(counts, (labels, predictions), 1)
    return ConfusionMatrix(counts)


def roc_binary(scores: np.ndarray, labels: np.ndarray, kind: str = "binary") -> RocCurve:
    """One ROC curve from real-valued scores and boolean labels.

    Thresholds sweep the unique scores in descending order (an implicit
    +infinity sentinel yields the (0,0) anchor); tied scores enter at one
    threshold, producing the diagonal tie segments whose trapezoid equals
    the Mann-Whitney probability P(s_pos > s_neg) + 0.5 P(s_pos = s_neg).

    Raises:
        MetricsError: labels all positive or all negative.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricsError("scores and labels must be equal-length vectors")
    positives = int(labels.sum())
    negatives = int(len(labels) - positives)
    if positives == 0 or negatives == 0:
        raise MetricsError(
            "ROC curve undefined: need at least one positive and one negative label"
        )
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # last index of each tie group
    boundary = np.flatnonzero(np.diff(sorted_scores) != 0.0)
    group_ends = np.concatenate([boundary, [len(sorted_scores) - 1]])
    tp_cum = np.cumsum(sorted_labels)[group_ends]
    fp_cum = group_ends + 1 - tp_cum
    fpr = np.concatenate([[0.0], fp_cum / negatives])
    tpr = np.concatenate([[0.0], tp_cum / positives])
    points = np.column_stack([fpr, tpr])
    return RocCurve(kind=kind, points=points, auc=_trapezoid(fpr, tpr))


def _require_all_classes(labels: np.ndarray, class_count: int) -> None:
    present = np.bincount(labels, minlength=class_count)
    for c in range(class_count):
        if present[c] == 0:
            raise MetricsError(f"class {c} absent from labels; its ROC curve is undefined")


def roc_per_class(scores: np.ndarray, labels: np.ndarray) -> list[RocCurve]:
    """One-vs-rest ROC curve per class (class c's column against labels == c)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    class_count = scores.shape[1]
    _require_all_classes(labels, class_count)
    return [
        roc_binary(scores[:, c], labels == c, kind=f"class_{c}")
        for c in range(class_count)
    ]


def roc_micro(scores: np.ndarray, labels: np.ndarray) -> RocCurve:
    """Micro-average: pool all B*C (score, one-hot indicator) pairs into one curve."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    class_count = scores.shape[1]
    _require_all_classes(labels, class_count)
    onehot = np.zeros_like(scores, dtype=bool)
    onehot[np.arange(len(labels)), labels] = True
    return roc_binary(scores.ravel(), onehot.ravel(), kind="micro")


def roc_macro(scores: np.ndarray, labels: np.ndarray) -> RocCurve:
    """Macro-average: equal-weight mean of per-class TPRs on a fixed FPR grid.

    Each per-class step curve is reduced to its upper envelope (highest TPR
    at each distinct FPR) and linearly interpolated onto the grid
    {0, 0.01, ..., 1}.  A (0,0) anchor is prepended when the averaged curve
    starts above zero so every stored curve begins at the origin.
    """
    curves = roc_per_class(scores, labels)
    grid = np.linspace(0.0, 1.0, MACRO_GRID_POINTS)
    mean_tpr = np.zeros_like(grid)
    for curve in curves:
        fpr, tpr = curve.fpr, curve.tpr
        # keep the last (= highest) TPR of each distinct FPR
        last = np.concatenate([np.flatnonzero(np.diff(fpr) != 0.0), [len(fpr) - 1]])
        mean_tpr += np.interp(grid, fpr[last], tpr[last])
    mean_tpr /= len(curves)
    points = np.column_stack([grid, mean_tpr])
    if mean_tpr[0] > 0.0:
        points = np.vstack([[0.0, 0.0], points])
    return RocCurve(kind="macro", points=points, auc=_trapezoid(points[:, 0], points[:, 1]))


def worst_case_line() -> RocCurve:
    """The random-guessing diagonal from (0,0) to (1,1); AUC exactly 0.5."""
    points = np.array([[0.0, 0.0], [1.0, 1.0]])
    return RocCurve(kind="worst_case", points=points, auc=0.5)


def roc_curve_set(scores: np.ndarray, labels: np.ndarray) -> list[RocCurve]:
    """Per-class curves plus micro, macro, and the worst-case baseline."""
    curves = roc_per_class(scores, labels)
    curves.append(roc_micro(scores, labels))
    curves.append(roc_macro(scores, labels))
    curves.append(worst_case_line())
    return curves
