"""Dynamic curriculum learning for imbalanced binary-attribute classification.

A training engine where class rebalancing and loss mixing are driven by
monotone epoch schedules: batches drift from the natural class distribution
toward balance while the objective drifts from metric learning toward plain
classification.  Classic baselines (cross-entropy, selective learning,
triplet-regularized training, resampling, cost weighting) fall out as
degenerate schedule settings, which the test suite exploits as exact
oracles.
"""

from .composer import BatchPlan, compose
from .data import CsvSchema, Dataset, generate_synthetic, load_csv, save_csv
from .distribution import ClassDistribution
from .errors import ConfigError, DataError, DclError, NumericError
from .losses import (CombinedLoss, LossValue, TripletSet, crl_loss, dcl_loss,
                     dsl_loss, tea_loss)
from .metrics import (ConfusionCounts, balanced_accuracy, biased_accuracy,
                      mean_accuracy, predict_classes)
from .model import DenseNet
from .schedulers import LossScheduler, SchedulerFn, SchedulerKind
from .trainer import (RunConfig, RunResult, build_triplets, evaluate,
                      mine_easy_anchors, mine_hard_samples, resolve, run,
                      train_epoch)

__version__ = "0.1.0"

__all__ = [
    "BatchPlan", "ClassDistribution", "CombinedLoss", "ConfigError",
    "ConfusionCounts", "CsvSchema", "DataError", "Dataset", "DclError",
    "DenseNet", "LossScheduler", "LossValue", "NumericError", "RunConfig",
    "RunResult", "SchedulerFn", "SchedulerKind", "TripletSet",
    "balanced_accuracy", "biased_accuracy", "build_triplets", "compose",
    "crl_loss", "dcl_loss", "dsl_loss", "evaluate", "generate_synthetic",
    "load_csv", "mean_accuracy", "mine_easy_anchors", "mine_hard_samples",
    "predict_classes", "resolve", "run", "save_csv", "tea_loss",
    "train_epoch",
]
