"""Per-attribute class distributions normalized to the minority class.

A distribution is a vector of count ratios sorted ascending, so the first
entry is always 1 (the minority class) and every other entry says how many
times larger that class is.  Raising the ratios elementwise to a power in
[0, 1] interpolates between the raw training distribution (power 1) and a
perfectly balanced one (power 0); that single knob is what the sampling
curriculum turns over the course of training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True, eq=False)
class ClassDistribution:
    """Class-count ratios (ascending, minority first) plus the class ids
    they belong to.  ``ratios[i]`` is the size of class ``class_ids[i]``
    relative to the smallest class."""

    ratios: np.ndarray
    class_ids: np.ndarray

    def __post_init__(self) -> None:
        ratios = np.asarray(self.ratios, dtype=np.float64)
        class_ids = np.asarray(self.class_ids, dtype=np.int64)
        if ratios.ndim != 1 or ratios.shape != class_ids.shape:
            raise ValueError("ratios and class_ids must be 1-D and the same length")
        if ratios.size < 2:
            raise ValueError("a distribution needs at least 2 classes")
        if ratios[0] != 1.0:
            raise ValueError(f"ratios must be normalized to the minority class, got ratios[0]={ratios[0]!r}")
        if np.any(np.diff(ratios) < 0.0):
            raise ValueError("ratios must be sorted ascending")
        if len(set(class_ids.tolist())) != class_ids.size:
            raise ValueError("class_ids must be distinct")
        ratios.setflags(write=False)
        class_ids.setflags(write=False)
        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "class_ids", class_ids)

    @classmethod
    def from_counts(cls, counts) -> "ClassDistribution":
        """Build a distribution from per-class sample counts.

        ``counts[c]`` is the number of samples whose class id is ``c``.
        Classes are reordered ascending by count (ties keep class-id order)
        and divided by the smallest count.  A zero count is an error: an
        absent class has no defined ratio and cannot be scheduled.
        """
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size < 2:
            raise ValueError("counts must be a 1-D vector with at least 2 classes")
        if np.any(counts <= 0):
            raise DataError(f"every class needs at least one sample, got counts {counts.tolist()}")
        order = np.argsort(counts, kind="stable")
        sorted_counts = counts[order]
        return cls(ratios=sorted_counts / float(sorted_counts[0]), class_ids=order)

    def target_at(self, g_value: float) -> "ClassDistribution":
        """Interpolate toward balance: every ratio is raised to ``g_value``.

        1 reproduces this distribution, 0 gives all-ones (balanced), and
        values in between shrink the imbalance smoothly.  Ordering and
        class ids are unchanged since x**g is monotone for x >= 1.
        """
        if not 0.0 <= g_value <= 1.0:
            raise ValueError(f"g_value must be in [0, 1], got {g_value!r}")
        return ClassDistribution(ratios=self.ratios**g_value, class_ids=self.class_ids)

    @property
    def num_classes(self) -> int:
        return int(self.ratios.size)

    def ratio_of(self, class_id: int) -> float:
        """Ratio for an original class id (not a sorted position)."""
        pos = np.nonzero(self.class_ids == class_id)[0]
        if pos.size == 0:
            raise ValueError(f"class id {class_id} not in distribution")
        return float(self.ratios[pos[0]])
