"""``emopipe`` command line: prepare, train, evaluate, predict, report."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from emopipe import corpus, encode, infer, labelspace, metrics, textnorm
from emopipe.config import CACHE_ENV, RunConfig, load_config
from emopipe.errors import CheckpointError, ConfigError, ContractError, EmopipeError
from emopipe.trainer import checkpoint as ckpt_io
from emopipe.trainer.backends import ReferenceBackend
from emopipe.trainer.loop import (
    HISTORY_COLUMNS,
    EpochLog,
    evaluate,
    format_history,
    history_from_csv,
    select_best,
    train,
)

logger = logging.getLogger("emopipe")

LABELED_SPLITS = ("train", "validation")


def _split_path(config: RunConfig, split: str) -> str:
    return {"train": config.train_path, "validation": config.val_path, "test": config.test_path}[split]


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _ensure(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _stamp(config: RunConfig) -> dict[str, str]:
    return {"config_hash": config.config_hash(), "run_key": config.run_key()}


def build_backends(config: RunConfig):
    """Return ``(tokenizer, classifier)`` for the configured backend."""
    if config.backend == "reference":
        return (
            encode.HashTokenizer(vocab_size=config.vocab_size),
            ReferenceBackend(vocab_size=config.vocab_size, dim=config.embed_dim, seed=config.seed),
        )
    from emopipe import adapters

    ok, detail = adapters.probe()
    if not ok:
        raise ConfigError(f"pretrained backend unavailable: {detail}")
    logger.info("pretrained backend: %s", detail)
    return (
        adapters.TransformersTokenizer(config.model_name),
        adapters.TransformersClassifier(config.model_name, seed=config.seed),
    )


def _labeled_features(config: RunConfig, split: str, tokenizer):
    """Load, clean, reduce and encode one labeled split."""
    ds = corpus.load_split(_split_path(config, split), labeled=True, split_name=split)
    clean = textnorm.preprocess_dataset(ds)
    reduction = labelspace.reduce_dataset(clean, config.neutral_policy)
    features = encode.encode_dataset(reduction.reduced, tokenizer, config.sequence_budget)
    return ds, reduction, features


def cmd_prepare(config: RunConfig, out=sys.stdout) -> dict[str, str]:
    tokenizer, _ = build_backends(config)
    prep_dir = config.run_dir / "prepare"
    manifest = {**_stamp(config), "tie_break": labelspace.TIE_BREAK, "neutral_policy": config.neutral_policy}
    tables = []
    for split in LABELED_SPLITS:
        ds, reduction, features = _labeled_features(config, split, tokenizer)
        for warning in corpus.validate(ds).warnings():
            logger.warning("%s: %s", split, warning)
        stats = corpus.class_distribution(ds)
        tables.append(corpus.format_distribution(stats, title=f"[{split}] {_split_path(config, split)}"))
        digest = encode.save_feature_set(features, config.cache_dir / split, extra=_stamp(config))
        per_split = {k: v for k, v in reduction.manifest().items() if k not in ("tie_break", "neutral_policy")}
        manifest.update({f"{split}.{k}": v for k, v in per_split.items()})
        manifest[f"{split}.rows"] = str(len(ds))
        manifest[f"{split}.records"] = str(len(features))
        manifest[f"{split}.features_sha256"] = digest
    manifest["tokenizer"] = tokenizer.fingerprint()
    manifest["sequence_budget"] = str(config.sequence_budget)

    table = "\n".join(tables)
    _write_text(prep_dir / "distribution.txt", f"# config_hash={config.config_hash()}\n{table}")
    ckpt_io.write_kv(_ensure(prep_dir) / "manifest.txt", manifest)
    _write_text(config.run_dir / "config.txt", f"# config_hash={config.config_hash()}\n{config.serialize()}")
    out.write(table)
    out.write(f"prepared caches in {config.cache_dir}\n")
    return manifest


def _load_cache(config: RunConfig, split: str, tokenizer) -> encode.FeatureSet:
    where = config.cache_dir / split
    if not (where / "header.json").is_file():
        raise ContractError(f"no prepared cache for {split!r} at {where}; run `emopipe prepare` first")
    features = encode.load_feature_set(where)
    if features.tokenizer_fingerprint != tokenizer.fingerprint():
        raise ContractError(
            f"cache {where} was built with tokenizer {features.tokenizer_fingerprint!r}, "
            f"current is {tokenizer.fingerprint()!r}; rerun `emopipe prepare`"
        )
    return features


def cmd_train(config: RunConfig, out=sys.stdout):
    tokenizer, backend = build_backends(config)
    train_set = _load_cache(config, "train", tokenizer)
    val_set = _load_cache(config, "validation", tokenizer)

    out.write(format_history([]))

    def show(log: EpochLog) -> None:
        out.write(format_history([log]).splitlines()[1] + "\n")
        out.flush()

    result = train(config.train_config(), train_set, val_set, backend, config.averaging, on_epoch=show)

    extra = {**_stamp(config), "tokenizer": tokenizer.fingerprint(), "averaging": config.averaging}
    prep_manifest = config.run_dir / "prepare" / "manifest.txt"
    if prep_manifest.is_file():
        extra.update({f"prepare.{k}": v for k, v in ckpt_io.read_kv(prep_manifest).items() if k not in extra})
    path = config.checkpoint_path
    ckpt_io.save_checkpoint(result, path, backend, extra=extra)
    if config.backend == "pretrained":
        backend.model.save_pretrained(path / "hf")
        tokenizer.tokenizer.save_pretrained(path / "hf")
    out.write(f"best epoch {result.best_epoch} (val_accuracy={result.best.val_accuracy:.4f}); checkpoint {path}\n")
    return result


def _restored_backends(config: RunConfig):
    tokenizer, backend = build_backends(config)
    path = config.checkpoint_path
    if not path.exists():
        raise CheckpointError(f"no checkpoint at {path}; run `emopipe train` first")
    ckpt = ckpt_io.load_checkpoint(path, sequence_budget=config.sequence_budget)
    kind = ckpt.manifest.get("backend.kind")
    if kind != config.backend:
        raise CheckpointError(f"{path}: checkpoint backend {kind!r} != configured {config.backend!r}")
    tok_fp = ckpt.manifest.get("tokenizer")
    if tok_fp is not None and tok_fp != tokenizer.fingerprint():
        raise CheckpointError(f"{path}: checkpoint tokenizer {tok_fp!r} != {tokenizer.fingerprint()!r}")
    ckpt.restore_into(backend)
    backend.set_mixed_precision(config.mixed_precision)
    return tokenizer, backend, ckpt


def cmd_evaluate(config: RunConfig, split: str = "validation", out=sys.stdout) -> dict[str, metrics.MetricsReport]:
    tokenizer, backend, _ = _restored_backends(config)
    _, _, features = _labeled_features(config, split, tokenizer)
    if len(features) == 0:
        raise ContractError(f"{split} split has no labeled, non-neutral samples to evaluate")
    ev = evaluate(backend, features)
    eval_dir = config.run_dir / "eval" / config.config_hash()
    reports = {}
    for mode in metrics.Averaging:
        rep = metrics.report(features.labels, ev.predictions, mode)
        table, record = metrics.render_report(rep)
        header = f"# config_hash={config.config_hash()} split={split}\n"
        _write_text(eval_dir / f"{split}.{mode.value}.txt", header + table)
        _write_text(eval_dir / f"{split}.{mode.value}.kv", header + f"loss={ev.loss!r}\n" + record)
        reports[mode.value] = rep
    out.write(metrics.render_table(reports[config.averaging]))
    out.write(f"reports written to {eval_dir}\n")
    return reports


def cmd_predict(config: RunConfig, out=sys.stdout) -> Path:
    tokenizer, backend, ckpt = _restored_backends(config)
    test = corpus.load_split(config.test_path, labeled=False, split_name="test")
    predictions = infer.predict_batch(test, backend, tokenizer, config.sequence_budget, config.batch_size)
    pred_dir = _ensure(config.run_dir / "predict" / config.config_hash())
    path = pred_dir / "submission.csv"
    rows = infer.write_submission(predictions, test, path, include_text=config.submission_text)
    counts = infer.prediction_counts(predictions)
    ckpt_io.write_kv(
        pred_dir / "submission.manifest.txt",
        {
            **_stamp(config),
            "test_path": config.test_path,
            "rows": str(rows),
            "checkpoint_sha256": ckpt.manifest.get("snapshot_sha256", ""),
            **{f"count.{k}": str(v) for k, v in counts.items()},
        },
    )
    out.write(f"wrote {rows} rows to {path}\n")
    for name, n in counts.items():
        out.write(f"{name:<10} {n:>6d}\n")
    return path


AGGREGATE_COLUMNS = HISTORY_COLUMNS[1:]


def aggregate_histories(histories: Sequence[Sequence[EpochLog]]) -> dict[str, tuple[float, float]]:
    """Mean and population std (ddof=0) of each metric at every run's best epoch."""
    if not histories:
        raise ContractError("need at least one history to aggregate")
    rows = [h[select_best(h) - 1] for h in histories]
    out = {}
    for col in AGGREGATE_COLUMNS:
        values = np.array([getattr(r, col) for r in rows], dtype=np.float64)
        out[col] = (float(values.mean()), float(values.std(ddof=0)))
    return out


def format_aggregate(agg: dict[str, tuple[float, float]], runs: int) -> str:
    lines = [
        f"# runs={runs}; one row per run = its best epoch (max val_accuracy, earliest on ties)",
        "# spread = population standard deviation (ddof=0) across runs",
        f"{'metric':<14} {'mean ± spread':>15} {'std':>8}",
    ]
    for col, (mean, std) in agg.items():
        lines.append(f"{col:<14} {f'{mean:.4f} ± {std:.2f}':>15} {std:>8.4f}")
    lines.append("")
    for col, (mean, std) in agg.items():
        lines.append(f"{col}.mean={mean!r}")
        lines.append(f"{col}.std={std!r}")
    return "\n".join(lines) + "\n"


def cmd_report(paths: Sequence[str | Path], out=sys.stdout, out_path: str | Path | None = None) -> str:
    histories = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            p = p / ckpt_io.HISTORY_FILE
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ContractError(f"cannot read history {p}: {exc.strerror}") from None
        try:
            history = history_from_csv(text)
        except (ContractError, ValueError) as exc:
            raise ContractError(f"{p}: {exc}") from None
        if not history:
            raise ContractError(f"{p}: history has no epochs")
        histories.append(history)
    text = format_aggregate(aggregate_histories(histories), len(histories))
    if out_path is not None:
        _write_text(Path(out_path), text)
    out.write(text)
    return text


def _parse_set(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--backend", choices=("reference", "pretrained"))
    common.add_argument("--budget", type=int, dest="sequence_budget", help="token budget per record (default 128)")
    common.add_argument("--averaging", choices=[m.value for m in metrics.Averaging])
    common.add_argument("--train", dest="train_path")
    common.add_argument("--val", dest="val_path")
    common.add_argument("--test", dest="test_path")
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--checkpoint-dir", dest="checkpoint_dir")
    common.add_argument("--epochs", type=int)
    common.add_argument("--lr", type=float, dest="learning_rate")
    common.add_argument("--batch-size", type=int, dest="batch_size")
    common.add_argument("--warmup-steps", type=int, dest="warmup_steps")
    common.add_argument("--mixed-precision", action=argparse.BooleanOptionalAction, default=None)
    common.add_argument("--neutral-policy", choices=[p.value for p in labelspace.NeutralPolicy])
    common.add_argument("--model-name", dest="model_name")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", default=[], help="override any config key")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="emopipe",
        description=f"Emotion classification pipeline. Feature caches honour ${CACHE_ENV}.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("prepare", parents=[common], help="clean, reduce and encode train/validation splits")
    sub.add_parser("train", parents=[common], help="fine-tune and save the best checkpoint")
    ev = sub.add_parser("evaluate", parents=[common], help="score a checkpoint on a labeled split")
    ev.add_argument("--split", choices=LABELED_SPLITS, default="validation")
    pr = sub.add_parser("predict", parents=[common], help="write a one-hot submission CSV for the test split")
    pr.add_argument("--no-text", action="store_true", help="omit the text column from the submission")
    rp = sub.add_parser("report", help="aggregate history CSVs across runs (mean ± std)")
    rp.add_argument("histories", nargs="+", help="history.csv files or checkpoint directories")
    rp.add_argument("--out", type=Path)
    return parser


_CONFIG_FLAGS = (
    "seed", "backend", "sequence_budget", "averaging", "train_path", "val_path", "test_path",
    "output_dir", "checkpoint_dir", "epochs", "learning_rate", "batch_size", "warmup_steps",
    "mixed_precision", "neutral_policy", "model_name",
)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, object] = _parse_set(args.set)
    overrides.update({k: getattr(args, k) for k in _CONFIG_FLAGS if getattr(args, k) is not None})
    if getattr(args, "no_text", False):
        overrides["submission_text"] = False
    return load_config(args.config, overrides)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "report":
            cmd_report(args.histories, out=sys.stdout, out_path=args.out)
            return 0
        config = config_from_args(args)
        if args.command == "prepare":
            cmd_prepare(config, out=sys.stdout)
        elif args.command == "train":
            cmd_train(config, out=sys.stdout)
        elif args.command == "evaluate":
            cmd_evaluate(config, args.split, out=sys.stdout)
        elif args.command == "predict":
            cmd_predict(config, out=sys.stdout)
    except ConfigError as exc:
        print(f"emopipe {args.command}: error: {exc} (see `emopipe {args.command} --help`)", file=sys.stderr)
        return 2
    except EmopipeError as exc:
        print(f"emopipe {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
