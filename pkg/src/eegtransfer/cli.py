"""Command-line interface.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from eegtransfer.config import MODES, load_config
from eegtransfer.errors import ConfigError, DataError
from eegtransfer.experiment import (emit_report, run_d_sweep, run_experiment,
                                    stats_report)
from eegtransfer.io import (load_features, load_weights, save_dataset,
                            save_features)
from eegtransfer.svm import METRIC_NAMES
from eegtransfer.synth import generate_synthetic
from eegtransfer.transfer import train_and_test


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as configuration errors."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="eegtransfer",
                     description="Single-source EEG transfer-learning pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mode=False, repeats=False):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out-dir", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the command's base seed")
        if repeats:
            p.add_argument("--repeats", type=int, default=None,
                           help="override experiment.repeats")
        if mode:
            p.add_argument("--mode", choices=MODES, default=None,
                           help="override experiment.mode")

    p = sub.add_parser("synth", help="generate a synthetic source/target pair")
    common(p)

    p = sub.add_parser("featurize", help="manifest -> feature CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--manifest", required=True, help="dataset manifest JSON")
    p.add_argument("--out", required=True, help="output feature CSV")

    p = sub.add_parser("train", help="run the full experiment protocol")
    common(p, mode=True, repeats=True)

    p = sub.add_parser("evaluate", help="apply a saved weight matrix")
    p.add_argument("--weights", required=True)
    p.add_argument("--train", required=True, help="training feature CSV")
    p.add_argument("--test", required=True, help="test feature CSV")
    p.add_argument("--out", required=True, help="output metrics CSV")
    p.add_argument("--svm-c", type=float, default=1.0)
    p.add_argument("--svm-seed", type=int, default=24301)

    p = sub.add_parser("sweep-d", help="projected-dimension sensitivity sweep")
    common(p, repeats=True)
    p.add_argument("--d-values", default="2,10,50,100,300,500",
                   help="comma-separated projected dimensions")

    p = sub.add_parser("stats", help="statistical report from per-pair accuracies")
    p.add_argument("--input", required=True,
                   help="CSV: pair column then one accuracy column per method")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("report", help="render a results bundle")
    p.add_argument("--bundle", required=True, help="bundle directory")
    return parser


def _cmd_synth(args) -> None:
    cfg = load_config(args.config)
    if cfg.synth is None:
        raise ConfigError("config has no synth section")
    spec = cfg.synth if args.seed is None else replace(cfg.synth, seed=args.seed)
    source, target = generate_synthetic(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if spec.mode == "features":
        save_features(source, out / "source_features.csv")
        save_features(target, out / "target_features.csv")
        print(f"wrote feature CSVs to {out}")
    else:
        save_dataset(source, out / "source", "synthetic-source",
                     provenance=f"synthetic seed={spec.seed}")
        save_dataset(target, out / "target", "synthetic-target",
                     provenance=f"synthetic seed={spec.seed}")
        print(f"wrote trial manifests to {out}/source and {out}/target")


def _cmd_featurize(args) -> None:
    from eegtransfer.dsp import preprocess_trials
    from eegtransfer.features import featurize_set
    from eegtransfer.io import load_dataset

    cfg = load_config(args.config)
    trials = load_dataset(args.manifest)
    prepared = preprocess_trials(trials, cfg.bandpass, cfg.neighbors, cfg.channels)
    features = featurize_set(prepared, cfg.welch, cfg.bands)
    save_features(features, args.out)
    print(f"wrote {features.n}x{features.dim} feature matrix to {args.out}")


def _apply_overrides(cfg, args):
    if getattr(args, "repeats", None) is not None:
        if args.repeats < 1:
            raise ConfigError("--repeats must be >= 1")
        cfg.repeats = args.repeats
    if getattr(args, "mode", None) is not None:
        cfg.mode = args.mode
    if getattr(args, "seed", None) is not None:
        cfg.split_seed = args.seed
    return cfg


def _cmd_train(args) -> None:
    cfg = _apply_overrides(load_config(args.config), args)
    bundle = run_experiment(cfg, args.out_dir)
    emit_report(args.out_dir)
    done, failed = len(bundle.completed), len(bundle.failures)
    print(f"completed {done} repeat(s), {failed} failed; bundle at {args.out_dir}")
    if not bundle.completed:
        raise DataError("every repeat failed; see bundle.json")


def _cmd_evaluate(args) -> None:
    weights = load_weights(args.weights)
    train = load_features(args.train)
    test = load_features(args.test)
    outcome = train_and_test(weights, train, test, C=args.svm_c,
                             svm_seed=args.svm_seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    values = outcome.metrics.as_array()
    with open(out, "w", newline="") as fh:
        fh.write(",".join(METRIC_NAMES) + ",mean_test_latency_s\n")
        fh.write(",".join("%.17g" % v for v in values)
                 + ",%.17g\n" % outcome.mean_test_latency_s)
    print(f"accuracy {values[2]:.4f}; metrics written to {out}")


def _cmd_sweep_d(args) -> None:
    cfg = _apply_overrides(load_config(args.config), args)
    try:
        d_values = tuple(int(v) for v in args.d_values.split(","))
    except ValueError:
        raise ConfigError(f"bad --d-values {args.d_values!r}")
    path = run_d_sweep(cfg, args.out_dir, d_values)
    print(f"sweep summary at {path}")


def _cmd_stats(args) -> None:
    path = stats_report(args.input, args.out_dir)
    print(f"statistical report at {path}")


def _cmd_report(args) -> None:
    path = emit_report(args.bundle)
    print(f"report at {path}")


_COMMANDS = {
    "synth": _cmd_synth,
    "featurize": _cmd_featurize,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "sweep-d": _cmd_sweep_d,
    "stats": _cmd_stats,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        _COMMANDS[args.command](args)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:            # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
