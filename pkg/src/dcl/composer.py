"""Turns a raw batch into per-attribute, per-sample loss weights.

For each attribute the batch's own class distribution is compared against
the epoch's target distribution.  Classes the batch over-represents are
thinned by randomly keeping only the target share of their samples (weight
1, rest weight 0); classes it under-represents are up-weighted instead
(every sample gets the same weight > 1).  Each attribute is treated
independently, so a sample silenced for one attribute can still carry full
weight for another.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .distribution import ClassDistribution
from .errors import DataError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BatchPlan:
    """Per-attribute, per-sample weights plus how many samples of each
    class kept a positive weight.  ``weights`` is [attribute x sample];
    ``selected_counts[a][c]`` counts weight > 0 samples of class ``c``."""

    weights: np.ndarray
    selected_counts: list[dict[int, int]]

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 2:
            raise ValueError("weights must be [attribute x sample]")
        if np.any(weights < 0.0):
            raise ValueError("weights must be non-negative")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def all_ones(cls, num_attributes: int, num_samples: int, batch_labels=None) -> "BatchPlan":
        """The no-op plan: every sample keeps weight 1 for every attribute."""
        counts: list[dict[int, int]] = []
        for a in range(num_attributes):
            if batch_labels is None:
                counts.append({})
            else:
                ids, n = np.unique(np.asarray(batch_labels)[a], return_counts=True)
                counts.append({int(c): int(k) for c, k in zip(ids, n)})
        return cls(weights=np.ones((num_attributes, num_samples)), selected_counts=counts)


def _attribute_rng(rng_seed: int, attribute: int) -> np.random.Generator:
    """One independent, reproducible stream per (seed, attribute) pair."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([rng_seed, attribute])))


def compose(batch_labels, targets: list[ClassDistribution], rng_seed: int) -> BatchPlan:
    """Weight a batch so each attribute approximates its target distribution.

    ``batch_labels`` is an [attribute x sample] matrix of class ids and
    ``targets`` holds one distribution per attribute, index aligned.  For
    every attribute and class j the ratio r = target_j / current_j decides
    the weight: r >= 1 up-weights all class-j samples to r, r < 1 keeps a
    random r fraction at weight 1 and zeroes the rest.  The kept count is
    floor(r * N_j) plus a seeded coin flip on the fractional part, so a
    class with r * N_j < 1 is not starved systematically.

    Per attribute, if fewer than two target classes appear in the batch
    there is nothing to re-balance against, so the whole attribute gets
    weight 0 for this batch (logged at debug level).  A batch label that no
    target knows about is a contract violation.  Identical inputs and seed
    give a bit-for-bit identical plan.
    """
    batch_labels = np.asarray(batch_labels, dtype=np.int64)
    if batch_labels.ndim != 2:
        raise ValueError("batch_labels must be [attribute x sample]")
    num_attributes, num_samples = batch_labels.shape
    if num_samples == 0:
        raise DataError("empty batch")
    if len(targets) != num_attributes:
        raise ValueError(f"{num_attributes} attributes but {len(targets)} targets")

    weights = np.zeros((num_attributes, num_samples))
    selected: list[dict[int, int]] = []
    for a in range(num_attributes):
        labels = batch_labels[a]
        target = targets[a]
        rng = _attribute_rng(rng_seed, a)
        counts = {int(c): int(n) for c, n in zip(*np.unique(labels, return_counts=True))}
        unknown = set(counts) - set(target.class_ids.tolist())
        if unknown:
            raise ValueError(f"attribute {a}: batch classes {sorted(unknown)} not in target")

        present = [int(c) for c in target.class_ids if c in counts]
        if not present:
            raise DataError(f"attribute {a}: no target class present in batch")
        if len(present) < 2:
            log.debug("attribute %d: only class %d present, zero-weighting batch", a, present[0])
            selected.append({c: 0 for c in counts})
            continue

        # Current distribution from the batch's own counts; the target is
        # restricted to the present classes and re-normalized the same way
        # (for the binary case this is the target itself).
        current = ClassDistribution.from_counts([counts[c] for c in present])
        target_present = np.array([target.ratio_of(c) for c in present])
        target_present = target_present / target_present.min()

        sel: dict[int, int] = {}
        for sorted_pos in range(current.num_classes):
            pos = int(current.class_ids[sorted_pos])
            class_id = present[pos]
            n_class = counts[class_id]
            r = float(target_present[pos]) / float(current.ratios[sorted_pos])
            members = np.nonzero(labels == class_id)[0]
            if r >= 1.0:
                weights[a, members] = r
                sel[class_id] = n_class
            else:
                n_keep_exact = r * n_class
                n_keep = int(np.floor(n_keep_exact))
                fraction = n_keep_exact - n_keep
                if fraction > 0.0 and rng.random() < fraction:
                    n_keep += 1
                keep = rng.choice(members, size=n_keep, replace=False)
                weights[a, keep] = 1.0
                sel[class_id] = n_keep
        selected.append(sel)

    return BatchPlan(weights=weights, selected_counts=selected)
