"""Loss functions with analytic gradients.

Three pieces make up the training objective:

  * a selectively weighted softmax cross-entropy over each attribute's
    logits, where the per-sample weights come from the batch composer,
  * a triplet hinge over each attribute's embeddings, built from mined
    (anchor, positive, negative) index triples,
  * their weighted sum, with the triplet share decaying over epochs.

Everything is plain numpy over float64; each loss returns its value and
the exact gradient with respect to its own inputs, and the model's
backward pass carries those gradients to the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NumericError

SQUARED_EUCLIDEAN = "squared_euclidean"
EUCLIDEAN = "euclidean"
DISTANCES = (SQUARED_EUCLIDEAN, EUCLIDEAN)


class TripletSet:
    """Mined (anchor, positive, negative) batch-index triples plus margin.

    Two construction forms exist.  The explicit form takes a [T x 3] index
    array directly.  The pool form (``from_pools``) takes three index pools
    and stands for their full cross product, minus any triple whose anchor
    and positive are the same sample; the triples are only materialized on
    demand, and the loss below exploits the product structure instead of
    expanding it.
    """

    __slots__ = ("margin", "anchors", "positives", "negatives", "__dict__")

    def __init__(self, triples, margin: float):
        if margin < 0.0:
            raise ValueError(f"margin must be >= 0, got {margin!r}")
        triples = np.asarray(triples, dtype=np.int64)
        if triples.size == 0:
            triples = np.empty((0, 3), dtype=np.int64)
        if triples.ndim != 2 or triples.shape[1] != 3:
            raise ValueError("triples must be a [T x 3] index array")
        if np.any(triples[:, 0] == triples[:, 1]):
            raise ValueError("a triple may not use the same sample as anchor and positive")
        self.margin = float(margin)
        self.anchors = self.positives = self.negatives = None
        self.__dict__["triples"] = triples

    @classmethod
    def from_pools(cls, anchors, positives, negatives, margin: float) -> "TripletSet":
        if margin < 0.0:
            raise ValueError(f"margin must be >= 0, got {margin!r}")
        obj = object.__new__(cls)
        obj.margin = float(margin)
        obj.anchors = np.asarray(anchors, dtype=np.int64).ravel()
        obj.positives = np.asarray(positives, dtype=np.int64).ravel()
        obj.negatives = np.asarray(negatives, dtype=np.int64).ravel()
        return obj

    @property
    def is_pooled(self) -> bool:
        return self.anchors is not None

    def __len__(self) -> int:
        if self.is_pooled:
            if min(self.anchors.size, self.positives.size, self.negatives.size) == 0:
                return 0
            pairs = int(np.sum(self.anchors[:, None] != self.positives[None, :]))
            return pairs * self.negatives.size
        return self.__dict__["triples"].shape[0]

    @cached_property
    def triples(self) -> np.ndarray:
        a, p, n = self.anchors, self.positives, self.negatives
        grid = np.stack(np.meshgrid(a, p, n, indexing="ij"), axis=-1).reshape(-1, 3)
        return grid[grid[:, 0] != grid[:, 1]]


@dataclass(frozen=True, eq=False)
class LossValue:
    """A scalar loss and its gradient with respect to the loss's inputs
    (logits for the cross-entropy, embeddings for the triplet hinge)."""

    value: float
    grad: np.ndarray


@dataclass(frozen=True, eq=False)
class CombinedLoss:
    """The full objective: classification plus weighted metric term.
    Carries one gradient per input kind since the two terms differentiate
    against different model outputs."""

    value: float
    logit_grad: np.ndarray
    embedding_grad: np.ndarray


def dsl_loss(logits, labels, weights, batch_size: int | None = None) -> LossValue:
    """Selectively weighted softmax cross-entropy.

    value = -(1/N) * sum_i w_i * log softmax(logits_i)[labels_i], with N the
    full batch size (default: the number of rows).  Weight-0 samples
    contribute exactly zero to both value and gradient, which is how
    composer-dropped samples stay silent without shrinking the arrays.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    if logits.ndim != 2:
        raise ValueError("logits must be [sample x class]")
    rows, classes = logits.shape
    if labels.shape != (rows,) or weights.shape != (rows,):
        raise ValueError("labels and weights must have one entry per logit row")
    if np.any(labels < 0) or np.any(labels >= classes):
        raise ValueError("label out of range")
    if np.any(weights < 0.0):
        raise ValueError("weights must be non-negative")
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits")
    n = rows if batch_size is None else int(batch_size)
    if n <= 0:
        raise ValueError(f"batch size must be positive, got {n}")

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    value = -float(np.dot(weights, log_probs[np.arange(rows), labels])) / n

    grad = np.exp(log_probs)
    grad[np.arange(rows), labels] -= 1.0
    grad *= (weights / n)[:, None]
    return LossValue(value=value, grad=grad)


def _pair_distances(x, y, metric):
    """All pairwise distances between rows of x and rows of y."""
    sq = (x**2).sum(axis=1)[:, None] + (y**2).sum(axis=1)[None, :] - 2.0 * (x @ y.T)
    np.maximum(sq, 0.0, out=sq)
    if metric == EUCLIDEAN:
        return np.sqrt(sq)
    return sq


def _hinge_loss_explicit(embeddings, triples, margin, metric):
    a = embeddings[triples[:, 0]]
    p = embeddings[triples[:, 1]]
    n = embeddings[triples[:, 2]]
    diff_ap = a - p
    diff_an = a - n
    d_ap = (diff_ap**2).sum(axis=1)
    d_an = (diff_an**2).sum(axis=1)
    if metric == EUCLIDEAN:
        d_ap = np.sqrt(d_ap)
        d_an = np.sqrt(d_an)
    hinge = margin + d_ap - d_an
    active = hinge > 0.0
    total = triples.shape[0]
    value = float(hinge[active].sum()) / total

    grad = np.zeros_like(embeddings)
    if metric == EUCLIDEAN:
        # d(d)/d(a) = (a - p) / d; a coincident pair has zero subgradient.
        scale_ap = np.where(active & (d_ap > 0.0), 1.0 / np.where(d_ap > 0.0, d_ap, 1.0), 0.0) / total
        scale_an = np.where(active & (d_an > 0.0), 1.0 / np.where(d_an > 0.0, d_an, 1.0), 0.0) / total
    else:
        scale_ap = np.where(active, 2.0, 0.0) / total
        scale_an = np.where(active, 2.0, 0.0) / total
    np.add.at(grad, triples[:, 0], scale_ap[:, None] * diff_ap - scale_an[:, None] * diff_an)
    np.add.at(grad, triples[:, 1], -scale_ap[:, None] * diff_ap)
    np.add.at(grad, triples[:, 2], scale_an[:, None] * diff_an)
    return LossValue(value=value, grad=grad)


def _hinge_loss_pooled(embeddings, ts: TripletSet, metric):
    """Same hinge, computed on the pool cross product without expanding it.

    With distance matrices D_ap [A x P] and D_an [A x N], the triple
    (i, j, k) is active when margin + D_ap[i, j] - D_an[i, k] > 0 and the
    anchor and positive are different samples.  Per-pair activity counts
    then turn the gradient into a handful of small matrix products.
    """
    a_idx, p_idx, n_idx = ts.anchors, ts.positives, ts.negatives
    a = embeddings[a_idx]
    p = embeddings[p_idx]
    n = embeddings[n_idx]
    d_ap = _pair_distances(a, p, metric)
    d_an = _pair_distances(a, n, metric)
    hinge = ts.margin + d_ap[:, :, None] - d_an[:, None, :]
    valid = (a_idx[:, None] != p_idx[None, :])[:, :, None]
    active = (hinge > 0.0) & valid
    total = int(valid.sum()) * n_idx.size
    value = float((hinge * active).sum()) / total

    count_ap = active.sum(axis=2).astype(np.float64)
    count_an = active.sum(axis=1).astype(np.float64)
    if metric == EUCLIDEAN:
        weight_ap = np.divide(count_ap, d_ap, out=np.zeros_like(count_ap), where=d_ap > 0.0)
        weight_an = np.divide(count_an, d_an, out=np.zeros_like(count_an), where=d_an > 0.0)
        grad_a = (
            (weight_ap.sum(axis=1) - weight_an.sum(axis=1))[:, None] * a
            - weight_ap @ p
            + weight_an @ n
        ) / total
        grad_p = (weight_ap.sum(axis=0)[:, None] * p - weight_ap.T @ a) / total
        grad_n = (weight_an.T @ a - weight_an.sum(axis=0)[:, None] * n) / total
    else:
        # Squared metric: the anchor's own terms cancel between the ap and
        # an sides because each active triple contributes both.
        grad_a = 2.0 / total * (count_an @ n - count_ap @ p)
        grad_p = 2.0 / total * (count_ap.sum(axis=0)[:, None] * p - count_ap.T @ a)
        grad_n = 2.0 / total * (count_an.T @ a - count_an.sum(axis=0)[:, None] * n)

    grad = np.zeros_like(embeddings)
    np.add.at(grad, a_idx, grad_a)
    np.add.at(grad, p_idx, grad_p)
    np.add.at(grad, n_idx, grad_n)
    return LossValue(value=value, grad=grad)


def tea_loss(embeddings, triplets: TripletSet, distance: str = SQUARED_EUCLIDEAN) -> LossValue:
    """Mean triplet hinge: (1/T) * sum max(0, margin + d(a,p) - d(a,n)).

    The subgradient at an exactly-met margin is 0, so a zero loss always
    comes with a zero gradient.  An empty triple set is not an error; it
    returns 0 with a zero gradient so an attribute with nothing to mine
    simply drops out of the objective for that batch.
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.ndim != 2:
        raise ValueError("embeddings must be [sample x dim]")
    if distance not in DISTANCES:
        raise ValueError(f"unknown distance {distance!r}, expected one of {DISTANCES}")
    if len(triplets) == 0:
        return LossValue(value=0.0, grad=np.zeros_like(embeddings))
    if triplets.is_pooled:
        pools = np.concatenate([triplets.anchors, triplets.positives, triplets.negatives])
        if pools.min() < 0 or pools.max() >= embeddings.shape[0]:
            raise ValueError("triple index out of range")
        return _hinge_loss_pooled(embeddings, triplets, distance)
    triples = triplets.triples
    if triples.min() < 0 or triples.max() >= embeddings.shape[0]:
        raise ValueError("triple index out of range")
    return _hinge_loss_explicit(embeddings, triples, triplets.margin, distance)


def crl_loss(embeddings, triplets: TripletSet, distance: str = SQUARED_EUCLIDEAN) -> LossValue:
    """Triplet hinge for the all-minority-anchor baseline.

    The formula is identical to ``tea_loss``; the baseline differs only in
    how the caller mines the anchor pool (every minority sample rather
    than just confidently classified ones).
    """
    return tea_loss(embeddings, triplets, distance)


def dcl_loss(dsl: LossValue, tea: LossValue, f_weight: float) -> CombinedLoss:
    """Combine classification and metric terms: dsl + f_weight * tea."""
    if f_weight < 0.0:
        raise ValueError(f"f_weight must be >= 0, got {f_weight!r}")
    return CombinedLoss(
        value=dsl.value + f_weight * tea.value,
        logit_grad=dsl.grad,
        embedding_grad=f_weight * tea.grad,
    )
