"""Command-line front end.

Subcommands mirror the pipeline stages: `synth` writes raw signal CSVs,
`features` turns them into feature CSVs, `train` fits seeded models and
writes metrics/curve/confusion files plus a checkpoint, `eval` and
`predict` apply a checkpoint, and `gradcheck` runs the gradient
cross-checks.  Every run is deterministic given the same inputs and flags.
Exit status is 0 only when the command completed without errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .data import (
    DEFAULT_SEGMENT_LENGTH,
    DEFAULT_SEGMENT_OVERLAP,
    DEFAULT_TARGET_RATE_HZ,
    LABELS,
    SHORT_LABELS,
    SynthConfig,
    dataset_from_features,
    downsample,
    extract_features,
    load_features_csv,
    load_signals_csv,
    save_features_csv,
    save_signals_csv,
    segment_signal,
    split,
    synth_generate,
)
from .gradcheck import run_gradient_checks
from .hybrid import (
    RunMetrics,
    SummaryReport,
    TrainConfig,
    confusion_row_percent,
    evaluate,
    hybrid_forward_batch,
    load_checkpoint,
    multi_seed_report,
    save_checkpoint,
    train_run,
)

_SHORT = [SHORT_LABELS[name] for name in LABELS]


def _cmd_synth(args) -> int:
    config = SynthConfig(
        signals_per_class=args.per_class,
        num_classes=args.classes,
        duration_s=args.duration,
        sample_rate_hz=args.rate,
        noise_std=args.noise,
    )
    signals = synth_generate(config, seed=args.seed)
    save_signals_csv(signals, args.out)
    print(f"wrote {len(signals)} signal block(s) to {args.out}")
    return 0


def _cmd_features(args) -> int:
    signals = load_signals_csv(args.input)
    features = []
    skipped = 0
    for i, signal in enumerate(signals):
        reduced = downsample(signal, args.target_rate)
        if reduced.samples.size < args.length:
            print(
                f"warning: block {i + 1} ({signal.label}) has only "
                f"{reduced.samples.size} samples after downsampling, "
                f"needs {args.length}; skipped",
                file=sys.stderr,
            )
            skipped += 1
            continue
        segments = segment_signal(reduced, args.length, args.overlap)
        features.extend(extract_features(s) for s in segments)
    if not features:
        raise ValueError("no block was long enough to produce a single segment")
    dataset = dataset_from_features(features)
    save_features_csv(dataset, args.out)
    print(
        f"wrote {len(dataset)} feature row(s) from {len(signals) - skipped} "
        f"block(s) ({skipped} skipped) to {args.out}"
    )
    return 0


def _format_metrics_row(seed, metrics: RunMetrics) -> str:
    return ",".join(
        [
            str(seed),
            repr(metrics.final_train_accuracy),
            repr(metrics.test_accuracy),
            repr(metrics.final_train_loss),
            repr(metrics.test_loss),
        ]
    )


def _write_metrics_csv(path, runs: list[RunMetrics], summary: list[float]) -> None:
    mean_tr_acc, std_tr_acc, mean_te_acc, std_te_acc = summary[:4]
    mean_tr_loss, std_tr_loss, mean_te_loss, std_te_loss = summary[4:]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("seed,train_acc,test_acc,train_loss,test_loss\n")
        for run in runs:
            fh.write(_format_metrics_row(run.seed, run) + "\n")
        fh.write(
            f"mean,{mean_tr_acc!r},{mean_te_acc!r},{mean_tr_loss!r},{mean_te_loss!r}\n"
        )
        fh.write(
            f"std,{std_tr_acc!r},{std_te_acc!r},{std_tr_loss!r},{std_te_loss!r}\n"
        )


def _write_curves_csv(path, metrics: RunMetrics) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("epoch,train_acc,train_loss\n")
        for epoch, (acc, loss) in enumerate(
            zip(metrics.epoch_train_accuracy, metrics.epoch_train_loss)
        ):
            fh.write(f"{epoch},{acc!r},{loss!r}\n")


def _write_confusion_csv(path, confusion: np.ndarray) -> None:
    percent = confusion_row_percent(confusion)
    accuracy = float(np.trace(confusion) / confusion.sum())
    with open(path, "w", encoding="ascii") as fh:
        fh.write("counts," + ",".join(_SHORT) + "\n")
        for name, row in zip(_SHORT, confusion):
            fh.write(name + "," + ",".join(str(int(v)) for v in row) + "\n")
        fh.write("row_percent," + ",".join(_SHORT) + "\n")
        for name, row in zip(_SHORT, percent):
            fh.write(name + "," + ",".join(repr(float(v)) for v in row) + "\n")
        fh.write(f"accuracy,{accuracy!r}\n")


def _print_confusion(confusion: np.ndarray) -> None:
    percent = confusion_row_percent(confusion)
    print("confusion matrix (rows = true class, row %):")
    print("      " + "".join(f"{name:>8}" for name in _SHORT))
    for name, row in zip(_SHORT, percent):
        print(f"  {name:>4}" + "".join(f"{v:8.1f}" for v in row))


def _cmd_train(args) -> int:
    dataset = load_features_csv(args.input)
    dataset = split(dataset, train_fraction=args.train_frac, seed=args.seed)
    config = TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch,
        num_runs=args.runs,
        base_seed=args.seed,
        gradient_method=args.gradient,
        train_fraction=args.train_frac,
    )
    os.makedirs(args.out, exist_ok=True)

    if args.runs == 1:
        model, metrics = train_run(dataset, config, seed=args.seed)
        runs = [metrics]
        summary = [
            metrics.final_train_accuracy, 0.0,
            metrics.test_accuracy, 0.0,
            metrics.final_train_loss, 0.0,
            metrics.test_loss, 0.0,
        ]
        pooled = metrics.confusion
        best_model = model
    else:
        report: SummaryReport = multi_seed_report(dataset, config)
        runs = report.runs
        summary = [
            report.mean_train_accuracy, report.std_train_accuracy,
            report.mean_test_accuracy, report.std_test_accuracy,
            report.mean_train_loss, report.std_train_loss,
            report.mean_test_loss, report.std_test_loss,
        ]
        pooled = report.pooled_confusion
        best_model = report.models[report.best_run_index()]

    _write_metrics_csv(os.path.join(args.out, "metrics.csv"), runs, summary)
    for run in runs:
        _write_curves_csv(os.path.join(args.out, f"curves_seed{run.seed}.csv"), run)
    _write_confusion_csv(os.path.join(args.out, "confusion.csv"), pooled)
    save_checkpoint(best_model, os.path.join(args.out, "model.json"))

    print(f"{len(runs)} run(s), {config.epochs} epochs each")
    print(f"train accuracy: {100 * summary[0]:.1f} +/- {100 * summary[1]:.1f} %")
    print(f"test accuracy:  {100 * summary[2]:.1f} +/- {100 * summary[3]:.1f} %")
    print(f"train loss:     {summary[4]:.3f} +/- {summary[5]:.3f}")
    print(f"test loss:      {summary[6]:.3f} +/- {summary[7]:.3f}")
    _print_confusion(pooled)
    print(f"wrote metrics, curves, confusion and model.json under {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = load_checkpoint(args.model)
    dataset = load_features_csv(args.input)
    result = evaluate(model, dataset.features, dataset.labels)
    print(f"samples:  {len(dataset)}")
    print(f"accuracy: {100 * result.accuracy:.2f} %")
    print(f"loss:     {result.loss:.6f}")
    _print_confusion(result.confusion)
    return 0


def _cmd_predict(args) -> int:
    model = load_checkpoint(args.model)
    dataset = load_features_csv(args.input)
    probs = hybrid_forward_batch(model, dataset.features)
    predicted = np.argmax(probs, axis=1)
    lines = ["predicted," + ",".join(f"p_{name}" for name in LABELS) + ",label"]
    for row, pick, label in zip(probs, predicted, dataset.labels):
        cells = [LABELS[pick]] + [repr(float(p)) for p in row] + [LABELS[label]]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
        print(f"wrote {len(dataset)} prediction(s) to {args.out}")
    else:
        sys.stdout.write(text)
    accuracy = float(np.mean(predicted == dataset.labels))
    print(f"accuracy against labels in file: {100 * accuracy:.2f} %")
    return 0


def _cmd_gradcheck(args) -> int:
    results = run_gradient_checks(seed=args.seed, corrupt=args.corrupt)
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<48} max {r.worst:.3e}  tol {r.tolerance:.0e}  {status}")
        failed = failed or not r.passed
    print("gradient checks " + ("FAILED" if failed else "passed"))
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdiag",
        description="Hybrid quantum-classical classifier for bearing vibration data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic labeled vibration records")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--out", default="signals.csv", help="output signal CSV")
    p.add_argument("--per-class", type=int, default=6, dest="per_class",
                   help="records per class (default 6)")
    p.add_argument("--classes", type=int, default=3,
                   help="number of classes, 1..3 (default 3)")
    p.add_argument("--duration", type=float, default=6.0,
                   help="record length in seconds (default 6.0)")
    p.add_argument("--rate", type=float, default=97656.0,
                   help="sample rate in Hz (default 97656)")
    p.add_argument("--noise", type=float, default=0.1,
                   help="white noise standard deviation (default 0.1)")
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("features", help="signal CSV -> feature CSV")
    p.add_argument("--in", required=True, dest="input", help="input signal CSV")
    p.add_argument("--out", default="features.csv", help="output feature CSV")
    p.add_argument("--target-rate", type=float, default=DEFAULT_TARGET_RATE_HZ,
                   dest="target_rate",
                   help=f"common rate after decimation (default {DEFAULT_TARGET_RATE_HZ:g})")
    p.add_argument("--length", type=int, default=DEFAULT_SEGMENT_LENGTH,
                   help=f"segment length in samples (default {DEFAULT_SEGMENT_LENGTH})")
    p.add_argument("--overlap", type=int, default=DEFAULT_SEGMENT_OVERLAP,
                   help=f"segment overlap in samples (default {DEFAULT_SEGMENT_OVERLAP})")
    p.set_defaults(handler=_cmd_features)

    p = sub.add_parser("train", help="train seeded model(s) on a feature CSV")
    p.add_argument("--in", required=True, dest="input", help="input feature CSV")
    p.add_argument("--out", default="train_out", help="output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="base seed; run r uses seed + r (default 0)")
    p.add_argument("--lr", type=float, default=0.01, help="Adam learning rate")
    p.add_argument("--epochs", type=int, default=150, help="epochs per run")
    p.add_argument("--batch", type=int, default=32, help="mini-batch size")
    p.add_argument("--runs", type=int, default=25, help="number of seeded runs")
    p.add_argument("--gradient", choices=("shift", "fd"), default="shift",
                   help="circuit gradient rule (default shift)")
    p.add_argument("--train-frac", type=float, default=0.8, dest="train_frac",
                   help="training share of the split (default 0.8)")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a feature CSV")
    p.add_argument("--model", required=True, help="checkpoint file")
    p.add_argument("--in", required=True, dest="input", help="input feature CSV")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("predict", help="per-row class probabilities")
    p.add_argument("--model", required=True, help="checkpoint file")
    p.add_argument("--in", required=True, dest="input", help="input feature CSV")
    p.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p.set_defaults(handler=_cmd_predict)

    p = sub.add_parser("gradcheck", help="cross-check analytic gradients")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--corrupt", action="store_true",
                   help="bias one analytic gradient on purpose (checker self-test)")
    p.set_defaults(handler=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
