"""Curriculum speed curves.

A scheduler maps the current epoch to a value that decays from 1 at the
start of training toward 0 at the end.  The same machinery drives both the
sampling side (how fast each batch's target class distribution moves toward
balance) and the loss side (how fast emphasis shifts from metric learning
to plain classification).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError


class SchedulerKind(str, enum.Enum):
    CONVEX = "convex"
    LINEAR = "linear"
    CONCAVE = "concave"
    COMPOSITE = "composite"
    CONSTANT = "constant"


@dataclass(frozen=True)
class SchedulerFn:
    """A monotone non-increasing curve over integer epochs 0..total_epochs.

    The kind selects the closed form, written with the epoch fraction
    t = epoch / total_epochs:

      convex     cos(t * pi/2)        stays high early, drops late
      linear     1 - t
      concave    decay ** epoch       drops early, flattens out
      composite  cos(t * pi)/2 + 1/2  symmetric S-curve
      constant   constant_value       degenerate, for baseline configs

    ``decay`` applies only to the concave kind and must lie in (0, 1);
    ``constant_value`` applies only to the constant kind and must lie in
    [0, 1].  A concave curve never quite reaches 0 at the final epoch;
    that is accepted as-is.
    """

    kind: SchedulerKind
    total_epochs: int
    decay: float | None = None
    constant_value: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.total_epochs, int) or self.total_epochs < 1:
            raise ConfigError(f"total_epochs must be a positive integer, got {self.total_epochs!r}")
        if self.kind is SchedulerKind.CONCAVE:
            if self.decay is None or not 0.0 < self.decay < 1.0:
                raise ConfigError(f"concave scheduler needs decay in (0, 1), got {self.decay!r}")
        elif self.decay is not None:
            raise ConfigError(f"decay is only valid for the concave kind, not {self.kind.value}")
        if self.kind is SchedulerKind.CONSTANT:
            if self.constant_value is None or not 0.0 <= self.constant_value <= 1.0:
                raise ConfigError(
                    f"constant scheduler needs constant_value in [0, 1], got {self.constant_value!r}"
                )
        elif self.constant_value is not None:
            raise ConfigError(f"constant_value is only valid for the constant kind, not {self.kind.value}")

    def __call__(self, epoch: int) -> float:
        if not 0 <= epoch <= self.total_epochs:
            raise ValueError(f"epoch {epoch} outside [0, {self.total_epochs}]")
        if self.kind is SchedulerKind.CONSTANT:
            return self.constant_value
        t = epoch / self.total_epochs
        if self.kind is SchedulerKind.CONVEX:
            return math.cos(t * math.pi / 2.0)
        if self.kind is SchedulerKind.LINEAR:
            return 1.0 - t
        if self.kind is SchedulerKind.CONCAVE:
            return self.decay**epoch
        return 0.5 * math.cos(t * math.pi) + 0.5


@dataclass(frozen=True)
class LossScheduler:
    """Piecewise weight for the metric-learning term of the combined loss.

    Before the self-learn point (epoch fraction < ``self_learn_point``) the
    weight is ``base(epoch) + self_learn_ratio``; from that point on it is
    exactly ``self_learn_ratio``.  The curve is deliberately discontinuous
    at the switch unless the base already reached 0 there.
    """

    base: SchedulerFn
    self_learn_point: float = 0.3
    self_learn_ratio: float = 0.01

    def __post_init__(self) -> None:
        if not 0.0 <= self.self_learn_point <= 1.0:
            raise ConfigError(f"self_learn_point must be in [0, 1], got {self.self_learn_point!r}")
        if self.self_learn_ratio < 0.0:
            raise ConfigError(f"self_learn_ratio must be >= 0, got {self.self_learn_ratio!r}")

    def __call__(self, epoch: int) -> float:
        if not 0 <= epoch <= self.base.total_epochs:
            raise ValueError(f"epoch {epoch} outside [0, {self.base.total_epochs}]")
        # Compare epoch fractions so integer switch points land exactly
        # (18/60 == 0.3 bit for bit, while 0.3 * 60 does not equal 18.0).
        if epoch / self.base.total_epochs < self.self_learn_point:
            return self.base(epoch) + self.self_learn_ratio
        return self.self_learn_ratio
