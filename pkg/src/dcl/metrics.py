"""Class-balanced evaluation.

The headline metric averages the recall of both classes, so a constant
majority-class predictor scores exactly 0.5 no matter how lopsided the
data.  The plain hit-rate accuracy is kept alongside for contrast, since
on skewed data it rewards exactly that degenerate predictor.  "Positive"
always means the attribute's training-set minority class, fixed once per
run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(eq=False)
class ConfusionCounts:
    """Per-attribute confusion counts with the minority class as positive.
    Counts from disjoint chunks of data merge with ``+``."""

    tp: np.ndarray
    fp: np.ndarray
    tn: np.ndarray
    fn: np.ndarray

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.ndim != 1:
                raise ValueError("confusion counts must be one vector per field")
            if np.any(arr < 0):
                raise ValueError("confusion counts must be non-negative")
            setattr(self, name, arr)
        sizes = {self.tp.size, self.fp.size, self.tn.size, self.fn.size}
        if len(sizes) != 1:
            raise ValueError("confusion count fields must cover the same attributes")

    @property
    def num_attributes(self) -> int:
        return self.tp.size

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(tp=self.tp + other.tp, fp=self.fp + other.fp,
                               tn=self.tn + other.tn, fn=self.fn + other.fn)

    @classmethod
    def from_predictions(cls, predictions, labels, positive_classes) -> "ConfusionCounts":
        """Tally [attribute x sample] predictions against labels, treating
        ``positive_classes[a]`` as the positive label of attribute a."""
        predictions = np.asarray(predictions)
        labels = np.asarray(labels)
        if predictions.shape != labels.shape or predictions.ndim != 2:
            raise ValueError("predictions and labels must both be [attribute x sample]")
        pos = np.asarray(positive_classes).reshape(-1, 1)
        if pos.shape[0] != predictions.shape[0]:
            raise ValueError("one positive class per attribute required")
        actual_pos = labels == pos
        predicted_pos = predictions == pos
        return cls(
            tp=(actual_pos & predicted_pos).sum(axis=1),
            fp=(~actual_pos & predicted_pos).sum(axis=1),
            tn=(~actual_pos & ~predicted_pos).sum(axis=1),
            fn=(actual_pos & ~predicted_pos).sum(axis=1),
        )


def balanced_accuracy(counts: ConfusionCounts, attribute: int) -> float:
    """Mean of the two class recalls: (TP/P + TN/N) / 2."""
    tp, fp = counts.tp[attribute], counts.fp[attribute]
    tn, fn = counts.tn[attribute], counts.fn[attribute]
    positives = tp + fn
    negatives = tn + fp
    if positives == 0 or negatives == 0:
        raise DataError(f"attribute {attribute}: a class is absent from the eval split, metric undefined")
    return 0.5 * (tp / positives + tn / negatives)


def biased_accuracy(counts: ConfusionCounts, attribute: int) -> float:
    """Plain hit rate (TP+TN)/(P+N); inflated by class imbalance."""
    tp, fp = counts.tp[attribute], counts.fp[attribute]
    tn, fn = counts.tn[attribute], counts.fn[attribute]
    total = tp + fp + tn + fn
    if total == 0:
        raise DataError(f"attribute {attribute}: no samples to score")
    return (tp + tn) / total


def mean_accuracy(per_attribute_values) -> float:
    """Arithmetic mean across attributes."""
    values = np.asarray(per_attribute_values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("mean over zero attributes is undefined")
    return float(values.mean())


def predict_classes(logits, minority_classes) -> np.ndarray:
    """Argmax predictions [attribute x sample] from logits [sample x
    attribute x class].  An exact tie goes to the minority class, so the
    decision rule is deterministic and never favors the majority for free.
    """
    logits = np.asarray(logits)
    if logits.ndim != 3:
        raise ValueError("logits must be [sample x attribute x class]")
    minority = np.asarray(minority_classes, dtype=np.int64)
    if minority.shape != (logits.shape[1],):
        raise ValueError("one minority class per attribute required")
    pred = logits.argmax(axis=2)
    top = logits.max(axis=2)
    minority_score = np.take_along_axis(logits, minority[None, :, None], axis=2)[:, :, 0]
    pred = np.where(minority_score == top, minority[None, :], pred)
    return pred.T
