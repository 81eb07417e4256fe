"""The training loop: schedulers drive batch weighting and loss mixing.

Each epoch evaluates the sampling scheduler g and the loss scheduler f
once.  Every shuffled batch is then forwarded, re-weighted toward the
epoch's target class distribution, mined for triplets on the surviving
samples, and updated with the combined objective: per-attribute weighted
cross-entropy plus f times the triplet hinge, summed over attributes.

Baselines are the same loop with degenerate settings: plain cross-entropy
pins g to 1 and f to 0, selective learning pins the target to balanced,
the triplet-regularized baseline pins g to 1 with a constant small f and
mines anchors from all minority samples, and the classic resampling and
cost-weighting baselines replace the composer with static per-attribute
weights.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .composer import compose
from .data import Dataset
from .distribution import ClassDistribution
from .errors import ConfigError, NumericError
from .losses import DISTANCES, SQUARED_EUCLIDEAN, TripletSet, tea_loss
from .metrics import ConfusionCounts, balanced_accuracy, biased_accuracy, mean_accuracy, predict_classes
from .model import DenseNet
from .schedulers import LossScheduler, SchedulerFn, SchedulerKind

log = logging.getLogger(__name__)

METHODS = ("dcl", "ce", "selective_learning", "crl_i", "oversample", "downsample", "cost_sensitive")

# Anchor mining modes.
ANCHORS_EASY = "easy"
ANCHORS_ALL_MINORITY = "all_minority"
ANCHORS_NONE = "none"

# Default self-learning ratio: the residual metric-loss weight after the
# self-learning point, and the fixed metric weight the crl_i preset uses.
DEFAULT_SELF_LEARN_RATIO = 0.01
DEFAULT_SELF_LEARN_POINT = 0.3

# Seed-stream tags so every consumer of randomness gets an independent,
# reproducible stream derived from the one run seed.
_STREAM_SHUFFLE = 3001
_STREAM_COMPOSE = 4001
_STREAM_STATIC = 5001


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run, minus the dataset.

    ``method`` selects a preset.  Only the "dcl" preset accepts scheduler
    overrides (``sampling_*``, ``loss_*``, ``self_learn_*``); the other
    presets pin their schedulers by definition and reject overrides so a
    config cannot silently contradict its own method name.
    """

    method: str = "dcl"
    epochs: int = 60
    batch_size: int = 128
    learning_rate: float = 0.003
    weight_decay: float = 0.0005
    seed: int = 0
    k: int = 25
    margin: float = 0.2
    sampling_kind: str | None = None
    sampling_param: float | None = None
    loss_kind: str | None = None
    loss_param: float | None = None
    self_learn_point: float | None = None
    self_learn_ratio: float | None = None
    distance: str = SQUARED_EUCLIDEAN
    trunk_widths: tuple[int, ...] = (256,)
    embedding_dim: int = 64

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.learning_rate <= 0.0:
            raise ConfigError("learning_rate must be > 0")
        if self.weight_decay < 0.0:
            raise ConfigError("weight_decay must be >= 0")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.margin < 0.0:
            raise ConfigError("margin must be >= 0")
        if self.distance not in DISTANCES:
            raise ConfigError(f"unknown distance {self.distance!r}")
        if self.method != "dcl":
            overrides = (self.sampling_kind, self.sampling_param, self.loss_kind,
                         self.loss_param, self.self_learn_point, self.self_learn_ratio)
            if any(v is not None for v in overrides):
                raise ConfigError(f"method {self.method!r} pins its schedulers; overrides are only valid for dcl")

    def to_dict(self) -> dict:
        return {
            "method": self.method, "epochs": self.epochs, "batch_size": self.batch_size,
            "learning_rate": self.learning_rate, "weight_decay": self.weight_decay,
            "seed": self.seed, "k": self.k, "margin": self.margin,
            "sampling_kind": self.sampling_kind, "sampling_param": self.sampling_param,
            "loss_kind": self.loss_kind, "loss_param": self.loss_param,
            "self_learn_point": self.self_learn_point, "self_learn_ratio": self.self_learn_ratio,
            "distance": self.distance, "trunk_widths": list(self.trunk_widths),
            "embedding_dim": self.embedding_dim,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        kwargs = dict(raw)
        if "trunk_widths" in kwargs:
            kwargs["trunk_widths"] = tuple(kwargs["trunk_widths"])
        return cls(**kwargs)


def _make_scheduler(kind: str | None, param: float | None, epochs: int, default_kind: str) -> SchedulerFn:
    kind = default_kind if kind is None else kind
    try:
        resolved = SchedulerKind(kind)
    except ValueError:
        raise ConfigError(f"unknown scheduler kind {kind!r}") from None
    if resolved is SchedulerKind.CONCAVE:
        if param is None:
            raise ConfigError("concave scheduler needs a decay parameter, e.g. concave:0.99")
        return SchedulerFn(kind=resolved, total_epochs=epochs, decay=param)
    if resolved is SchedulerKind.CONSTANT:
        if param is None:
            raise ConfigError("constant scheduler needs a value, e.g. constant:1")
        return SchedulerFn(kind=resolved, total_epochs=epochs, constant_value=param)
    if param is not None:
        raise ConfigError(f"scheduler kind {kind!r} takes no parameter")
    return SchedulerFn(kind=resolved, total_epochs=epochs)


@dataclass(frozen=True)
class ResolvedRun:
    """A RunConfig with its method preset expanded into the actual
    schedulers, mining mode, and (for the classic baselines) static
    per-attribute weighting."""

    sampling: SchedulerFn | None
    loss_weight: LossScheduler
    anchor_mode: str
    static_weighting: str | None  # None | oversample | downsample | cost_sensitive


def resolve(config: RunConfig) -> ResolvedRun:
    epochs = max(config.epochs, 1)  # schedulers need a positive span even for 0-epoch runs
    constant = lambda v: SchedulerFn(kind=SchedulerKind.CONSTANT, total_epochs=epochs, constant_value=v)
    f_zero = LossScheduler(base=constant(0.0), self_learn_point=0.0, self_learn_ratio=0.0)
    if config.method == "dcl":
        sampling = _make_scheduler(config.sampling_kind, config.sampling_param, epochs, "convex")
        base = _make_scheduler(config.loss_kind, config.loss_param, epochs, "composite")
        if base.kind is SchedulerKind.CONSTANT:
            # A constant f means exactly that value at every epoch, so the
            # self-learn switch is folded away: constant:0 is a pure
            # classification run, not "0 early, 0.01 late".
            if config.self_learn_point is not None or config.self_learn_ratio is not None:
                raise ConfigError("a constant loss scheduler ignores p and eps; do not set them together")
            loss_weight = LossScheduler(base=constant(0.0), self_learn_point=0.0,
                                        self_learn_ratio=base.constant_value)
        else:
            p = DEFAULT_SELF_LEARN_POINT if config.self_learn_point is None else config.self_learn_point
            eps = DEFAULT_SELF_LEARN_RATIO if config.self_learn_ratio is None else config.self_learn_ratio
            loss_weight = LossScheduler(base=base, self_learn_point=p, self_learn_ratio=eps)
        return ResolvedRun(sampling=sampling, loss_weight=loss_weight,
                           anchor_mode=ANCHORS_EASY, static_weighting=None)
    if config.method == "ce":
        return ResolvedRun(sampling=constant(1.0), loss_weight=f_zero,
                           anchor_mode=ANCHORS_NONE, static_weighting=None)
    if config.method == "selective_learning":
        return ResolvedRun(sampling=constant(0.0), loss_weight=f_zero,
                           anchor_mode=ANCHORS_NONE, static_weighting=None)
    if config.method == "crl_i":
        f_eps = LossScheduler(base=constant(0.0), self_learn_point=0.0,
                              self_learn_ratio=DEFAULT_SELF_LEARN_RATIO)
        return ResolvedRun(sampling=constant(1.0), loss_weight=f_eps,
                           anchor_mode=ANCHORS_ALL_MINORITY, static_weighting=None)
    # Classic baselines: no schedulers, fixed per-attribute weights.
    return ResolvedRun(sampling=None, loss_weight=f_zero,
                       anchor_mode=ANCHORS_NONE, static_weighting=config.method)


# -- mining ---------------------------------------------------------------


def _predicted_class(scores: np.ndarray, minority_class: int) -> np.ndarray:
    """Argmax with exact ties going to the minority class (the same rule
    the evaluation metric uses)."""
    pred = scores.argmax(axis=1)
    tie = scores[:, minority_class] == scores.max(axis=1)
    return np.where(tie, minority_class, pred)


def mine_easy_anchors(scores, labels, minority_class: int, k: int, eligible=None) -> np.ndarray:
    """Indices of the k most confident correctly predicted minority samples.

    ``scores`` is [sample x class] softmax output; confidence is the
    minority-class probability.  Samples outside ``eligible`` (e.g. ones
    the composer silenced) are never anchors.  Fewer than k candidates
    returns them all; none returns an empty array.
    """
    scores = np.asarray(scores)
    labels = np.asarray(labels)
    mask = labels == minority_class
    if eligible is not None:
        mask &= np.asarray(eligible, dtype=bool)
    mask &= _predicted_class(scores, minority_class) == labels
    candidates = np.nonzero(mask)[0]
    if candidates.size == 0:
        return candidates
    order = np.argsort(-scores[candidates, minority_class], kind="stable")
    return candidates[order[:k]]


def mine_hard_samples(scores, labels, minority_class: int, k: int, eligible=None):
    """Top-k hardest positives and negatives for a binary attribute.

    Hard positives are minority samples ranked by how strongly they score
    on the majority class; hard negatives are majority samples ranked by
    how strongly they score on the minority class.  Ranking only, no
    threshold: even a well-separated batch yields k of each.
    """
    scores = np.asarray(scores)
    labels = np.asarray(labels)
    if scores.shape[1] != 2:
        raise ValueError("hard mining ranks wrong-class scores, which needs binary attributes")
    majority_class = 1 - minority_class
    mask = np.ones(labels.shape[0], dtype=bool) if eligible is None else np.asarray(eligible, dtype=bool)

    pos_candidates = np.nonzero(mask & (labels == minority_class))[0]
    pos_order = np.argsort(-scores[pos_candidates, majority_class], kind="stable")
    neg_candidates = np.nonzero(mask & (labels == majority_class))[0]
    neg_order = np.argsort(-scores[neg_candidates, minority_class], kind="stable")
    return pos_candidates[pos_order[:k]], neg_candidates[neg_order[:k]]


def build_triplets(anchors, hard_pos, hard_neg, margin: float) -> TripletSet:
    """Full cross product of the three pools, minus triples whose anchor
    and positive are the same sample.  Any empty pool gives an empty set.
    """
    return TripletSet.from_pools(anchors, hard_pos, hard_neg, margin)


# -- the loop -------------------------------------------------------------


@dataclass(eq=False)
class TrainState:
    config: RunConfig
    resolved: ResolvedRun
    net: DenseNet
    train_x: np.ndarray
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray
    train_dists: list[ClassDistribution]
    minority_classes: np.ndarray
    static_weights: np.ndarray | None


@dataclass(eq=False)
class EpochReport:
    epoch: int
    g_value: float | None
    f_weight: float
    train_loss: float
    val_mean_balanced: float
    val_mean_biased: float
    per_attribute_balanced: np.ndarray
    per_attribute_biased: np.ndarray


def init_state(config: RunConfig, dataset: Dataset) -> TrainState:
    resolved = resolve(config)
    train_idx = dataset.split_indices("train")
    val_idx = dataset.split_indices("val")
    if train_idx.size == 0 or val_idx.size == 0:
        raise ConfigError("dataset needs non-empty train and val splits")
    train_dists = dataset.distributions("train")
    net = DenseNet(
        feature_dim=dataset.features.shape[1],
        num_attributes=dataset.num_attributes,
        trunk_widths=config.trunk_widths,
        embedding_dim=config.embedding_dim,
        num_classes=2,
        seed=config.seed,
    )
    train_y = dataset.labels[:, train_idx]
    if np.any(dataset.labels > 1):
        raise ConfigError("training expects binary attributes (labels 0/1)")
    state = TrainState(
        config=config,
        resolved=resolved,
        net=net,
        train_x=dataset.features[train_idx],
        train_y=train_y,
        val_x=dataset.features[val_idx],
        val_y=dataset.labels[:, val_idx],
        train_dists=train_dists,
        minority_classes=np.array([int(d.class_ids[0]) for d in train_dists]),
        static_weights=None,
    )
    if resolved.static_weighting is not None:
        state.static_weights = _static_weights(resolved.static_weighting, train_y, train_dists, config.seed)
    return state


def _static_weights(mode: str, train_y: np.ndarray, dists: list[ClassDistribution], seed: int) -> np.ndarray:
    """Fixed per-attribute sample weights for the classic baselines.

    oversample: minority weighted up to parity (equivalent in expectation
    to duplicating it).  downsample: one seeded majority subset of minority
    size keeps weight 1, the rest of the majority is dropped for the whole
    run.  cost_sensitive: inverse class-frequency weights.  Each attribute
    is balanced independently; with many attributes sharing one sample set
    there is no single resampled dataset that balances them all at once.
    """
    num_attributes, n = train_y.shape
    weights = np.ones((num_attributes, n))
    for a in range(num_attributes):
        minority = int(dists[a].class_ids[0])
        ratio = float(dists[a].ratios[-1])
        is_minority = train_y[a] == minority
        if mode == "oversample":
            weights[a, is_minority] = ratio
        elif mode == "cost_sensitive":
            counts = np.bincount(train_y[a], minlength=2)
            class_w = n / (2.0 * counts)
            weights[a] = class_w[train_y[a]]
        elif mode == "downsample":
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, _STREAM_STATIC, a])))
            majority_idx = np.nonzero(~is_minority)[0]
            keep = rng.choice(majority_idx, size=int(is_minority.sum()), replace=False)
            weights[a, majority_idx] = 0.0
            weights[a, keep] = 1.0
        else:
            raise ConfigError(f"unknown static weighting {mode!r}")
    return weights


def _log_softmax_all(logits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    shifted = logits - logits.max(axis=2, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=2, keepdims=True))
    return log_probs, np.exp(log_probs)


def _dsl_all(log_probs, probs, labels, weights, n: int):
    """Weighted cross-entropy for all attributes at once.

    Same math as ``losses.dsl_loss`` per attribute, vectorized over the
    attribute axis for the hot loop.  Returns per-attribute values and the
    stacked logit gradient.
    """
    labels_t = labels.T[:, :, None]
    picked = np.take_along_axis(log_probs, labels_t, axis=2)[:, :, 0]
    values = -(weights * picked.T).sum(axis=1) / n
    grad = probs.copy()
    np.put_along_axis(grad, labels_t, np.take_along_axis(grad, labels_t, axis=2) - 1.0, axis=2)
    grad *= (weights.T / n)[:, :, None]
    return values, grad


def _batch_plan(state: TrainState, batch_y: np.ndarray, batch_idx_in_epoch: int,
                epoch: int, g_value: float | None, targets) -> np.ndarray:
    if state.static_weights is not None:
        raise AssertionError("static plans are sliced, not composed")
    if g_value == 1.0:
        # Target equals the training distribution, of which the batch is
        # already a draw: nothing to correct, every sample keeps weight 1.
        return np.ones(batch_y.shape)
    seed_words = np.random.SeedSequence(
        [state.config.seed, _STREAM_COMPOSE, epoch, batch_idx_in_epoch]
    ).generate_state(1)
    plan = compose(batch_y, targets, int(seed_words[0]))
    return plan.weights


def train_epoch(state: TrainState, epoch: int) -> EpochReport:
    """One pass over the training split; returns the epoch report with
    validation metrics.  Raises NumericError with a per-attribute loss
    breakdown if the objective stops being finite.
    """
    config, resolved = state.config, state.resolved
    if not 0 <= epoch < config.epochs:
        raise ValueError(f"epoch {epoch} outside [0, {config.epochs})")
    g_value = resolved.sampling(epoch) if resolved.sampling is not None else None
    f_weight = resolved.loss_weight(epoch)
    targets = None
    if state.static_weights is None and g_value != 1.0:
        targets = [d.target_at(g_value) for d in state.train_dists]

    num_attributes, n_train = state.train_y.shape
    shuffle_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([config.seed, _STREAM_SHUFFLE, epoch]))
    )
    order = shuffle_rng.permutation(n_train)

    mine = resolved.anchor_mode != ANCHORS_NONE and f_weight > 0.0
    total_loss = 0.0
    n_batches = 0
    for start in range(0, n_train, config.batch_size):
        idx = order[start : start + config.batch_size]
        x = state.train_x[idx]
        y = state.train_y[:, idx]
        n = idx.size
        if state.static_weights is not None:
            weights = state.static_weights[:, idx]
        else:
            weights = _batch_plan(state, y, n_batches, epoch, g_value, targets)

        emb, logits, cache = state.net.forward(x)
        if not np.all(np.isfinite(logits)):
            raise NumericError(f"non-finite logits at epoch {epoch}, batch {n_batches}")
        log_probs, probs = _log_softmax_all(logits)
        dsl_values, logit_grad = _dsl_all(log_probs, probs, y, weights, n)

        tea_values = np.zeros(num_attributes)
        emb_grad = None
        if mine:
            emb_grad = np.zeros_like(emb)
            for a in range(num_attributes):
                eligible = weights[a] > 0.0
                minority = int(state.minority_classes[a])
                if resolved.anchor_mode == ANCHORS_EASY:
                    anchors = mine_easy_anchors(probs[:, a, :], y[a], minority, config.k, eligible)
                else:
                    anchors = np.nonzero(eligible & (y[a] == minority))[0]
                pos, neg = mine_hard_samples(probs[:, a, :], y[a], minority, config.k, eligible)
                triplets = build_triplets(anchors, pos, neg, config.margin)
                tea = tea_loss(emb[:, a, :], triplets, config.distance)
                tea_values[a] = tea.value
                if tea.value != 0.0 or np.any(tea.grad):
                    emb_grad[:, a, :] = f_weight * tea.grad

        batch_loss = float(dsl_values.sum() + f_weight * tea_values.sum())
        if not np.isfinite(batch_loss):
            breakdown = ", ".join(
                f"attr{a}: dsl={dsl_values[a]:.6g} tea={tea_values[a]:.6g}" for a in range(num_attributes)
            )
            raise NumericError(f"non-finite loss at epoch {epoch}, batch {n_batches}: {breakdown}")
        state.net.backward(cache, logit_grad, emb_grad)
        state.net.sgd_update(config.learning_rate, config.weight_decay)
        total_loss += batch_loss
        n_batches += 1

    counts = evaluate(state.net, state.val_x, state.val_y, state.minority_classes)
    per_balanced = np.array([balanced_accuracy(counts, a) for a in range(num_attributes)])
    per_biased = np.array([biased_accuracy(counts, a) for a in range(num_attributes)])
    report = EpochReport(
        epoch=epoch,
        g_value=g_value,
        f_weight=f_weight,
        train_loss=total_loss / max(n_batches, 1),
        val_mean_balanced=mean_accuracy(per_balanced),
        val_mean_biased=mean_accuracy(per_biased),
        per_attribute_balanced=per_balanced,
        per_attribute_biased=per_biased,
    )
    log.info("epoch %d: g=%s f=%.4g loss=%.5f val mA=%.4f", epoch,
             "-" if g_value is None else f"{g_value:.4g}", f_weight, report.train_loss,
             report.val_mean_balanced)
    return report


def evaluate(net: DenseNet, x: np.ndarray, y: np.ndarray, minority_classes,
             chunk: int = 1024) -> ConfusionCounts:
    """Confusion counts over a whole split, in chunks so memory stays flat."""
    total = None
    for start in range(0, x.shape[0], chunk):
        _, logits, _ = net.forward(x[start : start + chunk])
        pred = predict_classes(logits, minority_classes)
        counts = ConfusionCounts.from_predictions(pred, y[:, start : start + chunk], minority_classes)
        total = counts if total is None else total + counts
    if total is None:
        raise ValueError("cannot evaluate an empty split")
    return total


@dataclass(eq=False)
class RunResult:
    config: RunConfig
    epoch_reports: list[EpochReport]
    best_epoch: int | None
    best_val_balanced: float
    test_per_attribute: np.ndarray
    test_mean_balanced: float
    test_mean_biased: float
    wall_time_seconds: float
    out_dir: Path | None = None


def run(config: RunConfig, dataset: Dataset, out_dir=None) -> RunResult:
    """Train for the configured number of epochs and evaluate on the test
    split.  With ``out_dir`` set, writes per-epoch CSV logs, a JSON
    summary, and final/best checkpoints; every artifact except the summary
    (which records wall time) is byte-identical across reruns of the same
    config and seed.
    """
    started = time.monotonic()
    state = init_state(config, dataset)
    reports: list[EpochReport] = []
    best_epoch, best_val, best_params = None, -np.inf, None
    for epoch in range(config.epochs):
        report = train_epoch(state, epoch)
        reports.append(report)
        if report.val_mean_balanced > best_val:
            best_epoch, best_val = epoch, report.val_mean_balanced
            best_params = [p.copy() for _, p in state.net.parameters()]

    test_idx = dataset.split_indices("test")
    counts = evaluate(state.net, dataset.features[test_idx], dataset.labels[:, test_idx],
                      state.minority_classes)
    per_attr = np.array([balanced_accuracy(counts, a) for a in range(dataset.num_attributes)])
    per_biased = np.array([biased_accuracy(counts, a) for a in range(dataset.num_attributes)])
    if not reports:
        best_val = float("nan")

    result = RunResult(
        config=config,
        epoch_reports=reports,
        best_epoch=best_epoch,
        best_val_balanced=float(best_val),
        test_per_attribute=per_attr,
        test_mean_balanced=mean_accuracy(per_attr),
        test_mean_biased=mean_accuracy(per_biased),
        wall_time_seconds=time.monotonic() - started,
        out_dir=None if out_dir is None else Path(out_dir),
    )
    if out_dir is not None:
        _write_artifacts(result, state, best_params, dataset)
    return result


def _write_artifacts(result: RunResult, state: TrainState, best_params, dataset: Dataset) -> None:
    out = result.out_dir
    out.mkdir(parents=True, exist_ok=True)
    attr_names = dataset.attribute_names

    with open(out / "epochs.csv", "w", encoding="utf-8") as fh:
        fh.write("epoch,g_value,f_weight,train_loss,val_mean_balanced_accuracy,val_mean_biased_accuracy\n")
        for r in result.epoch_reports:
            g = "" if r.g_value is None else repr(float(r.g_value))
            fh.write(f"{r.epoch},{g},{float(r.f_weight)!r},{float(r.train_loss)!r},"
                     f"{float(r.val_mean_balanced)!r},{float(r.val_mean_biased)!r}\n")

    with open(out / "metrics.csv", "w", encoding="utf-8") as fh:
        fh.write("epoch,attribute,balanced_accuracy,biased_accuracy\n")
        for r in result.epoch_reports:
            for a, name in enumerate(attr_names):
                fh.write(f"{r.epoch},{name},{float(r.per_attribute_balanced[a])!r},"
                         f"{float(r.per_attribute_biased[a])!r}\n")

    state.net.save(out / "final.ckpt")
    if best_params is not None:
        current = [p.copy() for _, p in state.net.parameters()]
        for (_, live), saved in zip(state.net.parameters(), best_params):
            live[...] = saved
        state.net.save(out / "best.ckpt")
        for (_, live), saved in zip(state.net.parameters(), current):
            live[...] = saved

    summary = {
        "config": result.config.to_dict(),
        "best_epoch": result.best_epoch,
        "best_val_mean_balanced_accuracy": result.best_val_balanced,
        "test_mean_balanced_accuracy": result.test_mean_balanced,
        "test_mean_biased_accuracy": result.test_mean_biased,
        "test_per_attribute_balanced_accuracy":
            {name: float(v) for name, v in zip(attr_names, result.test_per_attribute)},
        "wall_time_seconds": result.wall_time_seconds,
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
