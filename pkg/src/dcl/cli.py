"""Command-line front end: generate data, train, and compare methods.

Subcommands:

  generate   write a synthetic imbalanced dataset (CSV + JSON manifest)
  train      one training run; emits CSV logs, checkpoints, summary JSON,
             and PNG figures of the schedules and training curves
  compare    methods x seeds sweep (or an ablation build-up); emits a CSV
             table, an aligned text table, and a grouped-bar PNG

Exit codes: 0 success, 2 configuration or data problems, 3 numeric failure
during training.  The DCL_THREADS environment variable caps how many runs
of a comparison sweep execute in parallel.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import figures
from .data import (DESK_FEATURE_DIM, DESK_N_SAMPLES, DESK_NUM_ATTRIBUTES, Dataset,
                   generate_synthetic, load_csv, save_csv)
from .errors import ConfigError, DataError, NumericError
from .trainer import DEFAULT_SELF_LEARN_RATIO, METHODS, RunConfig, resolve, run

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

GROUP_NAMES = ("1-25", "25-50", ">50")
ABLATION_TOKENS = ("ss", "tl", "ls")


def assign_group(ratio: float) -> int:
    """Bucket an imbalance ratio into the reporting groups 1-25 / 25-50 / >50."""
    if ratio <= 25.0:
        return 0
    if ratio <= 50.0:
        return 1
    return 2


def _parse_scheduler_flag(text: str) -> tuple[str, float | None]:
    kind, sep, param = text.partition(":")
    if not kind:
        raise ConfigError(f"empty scheduler flag {text!r}")
    if not sep:
        return kind, None
    try:
        return kind, float(param)
    except ValueError:
        raise ConfigError(f"scheduler parameter in {text!r} must be a number") from None


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"--seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise ConfigError("at least one seed required")
    return seeds


def ablation_variants(tokens: list[str]) -> list[tuple[str, dict]]:
    """Build-up rows for an ablation: baseline, then one row per component
    added cumulatively.  ss = sampling schedule, tl = triplet loss at the
    fixed weight the crl_i preset uses, ls = decaying loss schedule on top
    of tl (large early weight, then the same fixed residual).
    """
    seen: list[str] = []
    for tok in tokens:
        if tok not in ABLATION_TOKENS:
            raise ConfigError(f"unknown ablation component {tok!r}, expected subset of {ABLATION_TOKENS}")
        if tok in seen:
            raise ConfigError(f"duplicate ablation component {tok!r}")
        if tok == "ls" and "tl" not in seen:
            raise ConfigError("ablation component ls needs tl before it (it schedules the triplet weight)")
        seen.append(tok)

    def overrides(components: list[str]) -> dict:
        cfg: dict = {}
        cfg["sampling_kind"], cfg["sampling_param"] = (
            (None, None) if "ss" in components else ("constant", 1.0))
        if "ls" in components:
            cfg["loss_kind"], cfg["loss_param"] = None, None
        elif "tl" in components:
            cfg["loss_kind"], cfg["loss_param"] = "constant", DEFAULT_SELF_LEARN_RATIO
        else:
            cfg["loss_kind"], cfg["loss_param"] = "constant", 0.0
        return {k: v for k, v in cfg.items() if v is not None or k.endswith("kind")}

    rows = [("baseline", overrides([]))]
    for i in range(len(seen)):
        components = seen[: i + 1]
        rows.append(("+" + "+".join(components), overrides(components)))
    return rows


def cmd_generate(args) -> int:
    if args.ratio_max < 1.0 or args.ratio_min < 1.0:
        raise ConfigError("imbalance ratios are majority:minority and must be >= 1")
    if args.ratio_max < args.ratio_min:
        raise ConfigError("--ratio-max must be >= --ratio-min")
    ratios = np.logspace(np.log10(args.ratio_min), np.log10(args.ratio_max), args.attrs)
    dataset = generate_synthetic(
        imbalance_ratios=ratios,
        n_samples=args.n,
        feature_dim=args.features,
        class_separation=args.separation,
        noise_sd=args.noise,
        seed=args.seed,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(dataset, out)
    print(f"wrote {out} ({dataset.num_samples} samples, {dataset.num_attributes} attributes, "
          f"ratios {ratios[0]:.3g}..{ratios[-1]:.3g})")
    print(f"wrote {out.with_suffix(out.suffix + '.manifest.json')}")
    return EXIT_OK


def _merged_run_config(args) -> tuple[RunConfig, str | None, str | None]:
    """File config (if any) overlaid with explicitly passed flags.
    Returns the config plus data/out paths, which may come from the file.
    """
    file_cfg: dict = {}
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    data_path = file_cfg.pop("data", None)
    out_path = file_cfg.pop("out", None)

    flag_cfg: dict = {}
    if args.method is not None:
        flag_cfg["method"] = args.method
    if args.g is not None:
        flag_cfg["sampling_kind"], flag_cfg["sampling_param"] = _parse_scheduler_flag(args.g)
    if args.f is not None:
        flag_cfg["loss_kind"], flag_cfg["loss_param"] = _parse_scheduler_flag(args.f)
    for flag, key in (("p", "self_learn_point"), ("eps", "self_learn_ratio"),
                      ("k", "k"), ("margin", "margin"), ("epochs", "epochs"),
                      ("batch", "batch_size"), ("lr", "learning_rate"),
                      ("wd", "weight_decay"), ("seed", "seed")):
        value = getattr(args, flag)
        if value is not None:
            flag_cfg[key] = value
    config = RunConfig.from_dict({**file_cfg, **flag_cfg})
    if args.data is not None:
        data_path = args.data
    if args.out is not None:
        out_path = args.out
    return config, data_path, out_path


def cmd_train(args) -> int:
    config, data_path, out_path = _merged_run_config(args)
    if data_path is None:
        raise ConfigError("no dataset: pass --data or put a \"data\" path in the config file")
    dataset = load_csv(data_path)
    out = Path(out_path) if out_path is not None else Path("runs") / f"{config.method}-seed{config.seed}"
    result = run(config, dataset, out_dir=out)

    resolved = resolve(config)
    figures.save_scheduler_curves(resolved.sampling, resolved.loss_weight,
                                  max(config.epochs, 1), out / "schedules.png")
    if result.epoch_reports:
        figures.save_training_curves(result.epoch_reports, out / "training_curves.png")
    best = "-" if result.best_epoch is None else str(result.best_epoch)
    print(f"method {config.method} seed {config.seed}: "
          f"best val mA {result.best_val_balanced:.4f} (epoch {best}), "
          f"test mA {result.test_mean_balanced:.4f}, biased {result.test_mean_biased:.4f}")
    print(f"artifacts in {out}")
    return EXIT_OK


_WORKER_DATASETS: dict[str, Dataset] = {}


def _sweep_one(data_path: str, config_dict: dict, label: str) -> dict:
    """Run one sweep cell; used directly and via worker processes."""
    if data_path not in _WORKER_DATASETS:
        _WORKER_DATASETS[data_path] = load_csv(data_path)
    dataset = _WORKER_DATASETS[data_path]
    config = RunConfig.from_dict(config_dict)
    result = run(config, dataset)
    return {
        "label": label,
        "seed": config.seed,
        "per_attribute": [float(v) for v in result.test_per_attribute],
        "mean": result.test_mean_balanced,
        "best_epoch": result.best_epoch,
    }


def _attribute_ratios(dataset: Dataset) -> list[float]:
    """Requested ratios from the manifest when available, realized train
    ratios otherwise."""
    manifest_ratios = dataset.manifest.get("imbalance_ratios")
    if manifest_ratios and len(manifest_ratios) == dataset.num_attributes:
        return [float(r) for r in manifest_ratios]
    log.warning("no manifest ratios; grouping by realized train-split ratios")
    return [float(d.ratios[-1]) for d in dataset.distributions("train")]


def cmd_compare(args) -> int:
    seeds = _parse_seeds(args.seeds)
    shared: dict = {}
    for flag, key in (("epochs", "epochs"), ("batch", "batch_size"), ("lr", "learning_rate"),
                      ("wd", "weight_decay"), ("k", "k"), ("margin", "margin")):
        value = getattr(args, flag)
        if value is not None:
            shared[key] = value

    rows: list[tuple[str, dict]] = []
    if args.ablate is not None:
        tokens = [tok.strip() for tok in args.ablate.split(",") if tok.strip()]
        for label, overrides in ablation_variants(tokens):
            rows.append((label, {"method": "dcl", **overrides, **shared}))
    else:
        methods = [tok.strip() for tok in args.methods.split(",") if tok.strip()]
        for method in methods:
            if method not in METHODS:
                raise ConfigError(f"unknown method {method!r}, expected one of {METHODS}")
            rows.append((method, {"method": method, **shared}))
    if not rows:
        raise ConfigError("nothing to compare")

    dataset = load_csv(args.data)  # validates the file before any training starts
    ratios = _attribute_ratios(dataset)
    groups = [assign_group(r) for r in ratios]

    tasks = []
    for label, cfg in rows:
        for seed in seeds:
            tasks.append((str(args.data), {**cfg, "seed": seed}, label))
    workers = int(os.environ.get("DCL_THREADS") or 0) or (os.cpu_count() or 1)
    workers = max(1, min(workers, len(tasks)))
    if workers == 1:
        results = [_sweep_one(*task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, *zip(*tasks)))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_comparison(out, [label for label, _ in rows], results, groups)
    print((out / "comparison.txt").read_text(encoding="utf-8"), end="")
    print(f"artifacts in {out}")
    return EXIT_OK


def _group_means(per_attribute: list[float], groups: list[int]) -> list[float | None]:
    means: list[float | None] = []
    for g in range(len(GROUP_NAMES)):
        vals = [v for v, grp in zip(per_attribute, groups) if grp == g]
        means.append(float(np.mean(vals)) if vals else None)
    return means


def _write_comparison(out: Path, labels: list[str], results: list[dict], groups: list[int]) -> None:
    with open(out / "comparison.csv", "w", encoding="utf-8") as fh:
        fh.write("method,seed,mean_balanced_accuracy,"
                 + ",".join(f"group_{name}" for name in GROUP_NAMES) + "\n")
        for res in results:
            cells = [res["label"], str(res["seed"]), repr(float(res["mean"]))]
            cells += ["" if m is None else repr(m) for m in _group_means(res["per_attribute"], groups)]
            fh.write(",".join(cells) + "\n")

    aggregated: dict[str, dict] = {}
    for label in labels:
        rows = [r for r in results if r["label"] == label]
        per_attr = np.mean([r["per_attribute"] for r in rows], axis=0)
        aggregated[label] = {
            "mean": float(np.mean([r["mean"] for r in rows])),
            "groups": _group_means(list(per_attr), groups),
            "n_seeds": len(rows),
        }

    width = max(len(label) for label in labels) + 2
    lines = ["method".ljust(width) + "  mean mA" + "".join(f"  {name:>8}" for name in GROUP_NAMES)]
    for label in labels:
        agg = aggregated[label]
        cells = "".join(f"  {'-':>8}" if m is None else f"  {m:>8.4f}" for m in agg["groups"])
        lines.append(label.ljust(width) + f"  {agg['mean']:7.4f}" + cells)
    table = "\n".join(lines) + "\n"
    (out / "comparison.txt").write_text(table, encoding="utf-8")

    present = [g for g in range(len(GROUP_NAMES)) if any(grp == g for grp in groups)]
    bar_rows = {label: [aggregated[label]["groups"][g] for g in present] for label in labels}
    figures.save_comparison_bars([GROUP_NAMES[g] for g in present], bar_rows, out / "comparison.png")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcl",
                                     description="dynamic curriculum learning for imbalanced attributes")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic imbalanced dataset")
    gen.add_argument("--attrs", type=int, default=DESK_NUM_ATTRIBUTES, help="number of binary attributes")
    gen.add_argument("--ratio-min", type=float, default=1.0, help="smallest imbalance ratio")
    gen.add_argument("--ratio-max", type=float, default=100.0, help="largest imbalance ratio")
    gen.add_argument("--n", type=int, default=DESK_N_SAMPLES, help="total samples")
    gen.add_argument("--features", type=int, default=DESK_FEATURE_DIM, help="feature dimension")
    gen.add_argument("--separation", type=float, default=3.0, help="class mean separation")
    gen.add_argument("--noise", type=float, default=1.0, help="isotropic noise standard deviation")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default="dataset.csv", help="output CSV path")
    gen.set_defaults(func=cmd_generate)

    tr = sub.add_parser("train", help="run one training configuration")
    tr.add_argument("--config", help="JSON config file; explicit flags override it")
    tr.add_argument("--method", choices=METHODS)
    tr.add_argument("--g", help="sampling scheduler kind[:param], e.g. convex or constant:1")
    tr.add_argument("--f", help="loss scheduler kind[:param], e.g. composite or constant:0")
    tr.add_argument("--p", type=float, help="self-learn point as a fraction of training")
    tr.add_argument("--eps", type=float, help="residual triplet weight after the self-learn point")
    tr.add_argument("--k", type=int, help="mining count per pool")
    tr.add_argument("--margin", type=float, help="triplet margin")
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--batch", type=int)
    tr.add_argument("--lr", type=float)
    tr.add_argument("--wd", type=float)
    tr.add_argument("--seed", type=int)
    tr.add_argument("--data", help="dataset CSV path")
    tr.add_argument("--out", help="artifact directory (default runs/<method>-seed<seed>)")
    tr.set_defaults(func=cmd_train)

    cmp_ = sub.add_parser("compare", help="methods x seeds sweep with a grouped report")
    cmp_.add_argument("--data", required=True, help="dataset CSV path")
    cmp_.add_argument("--methods", default="dcl,ce", help="comma-separated method list")
    cmp_.add_argument("--ablate", help="comma-separated build-up, e.g. ss,tl,ls (overrides --methods)")
    cmp_.add_argument("--seeds", default="0", help="comma-separated seeds")
    cmp_.add_argument("--epochs", type=int)
    cmp_.add_argument("--batch", type=int)
    cmp_.add_argument("--lr", type=float)
    cmp_.add_argument("--wd", type=float)
    cmp_.add_argument("--k", type=int)
    cmp_.add_argument("--margin", type=float)
    cmp_.add_argument("--out", default="compare", help="report directory")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr,
                        level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
