"""Experiment orchestration: repeated runs, CSV emission, reports.

Each repeat re-splits the data with its own seeds, learns the projection on
the validation sets, evaluates on the train/test sets and also scores the
no-transfer baseline.  Metric CSVs contain no timing, so identical configs
reproduce them bitwise; wall-clock numbers live in timing.csv.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from eegtransfer import __version__
from eegtransfer.config import ExperimentConfig
from eegtransfer.data import (FeatureMatrix, SplitSpec, holdout_split,
                              same_subject_split)
from eegtransfer.dsp import preprocess_trials
from eegtransfer.errors import ConfigError, DataError, EegTransferError
from eegtransfer.features import featurize_set
from eegtransfer.io import FLOAT_FMT, load_dataset, load_features, save_weights
from eegtransfer.stats import (holm_bonferroni, paired_t, signed_ranks,
                               wilcoxon_signed_rank)
from eegtransfer.svm import METRIC_NAMES, predict, train_svm
from eegtransfer.synth import generate_synthetic
from eegtransfer.transfer import (TransferProblem, learn_projection,
                                  train_and_test)

WITH_TL = "with_tl"
WITHOUT_TL = "without_tl"


def _fmt(value: float) -> str:
    return FLOAT_FMT % value


@dataclass
class RepeatOutcome:
    repeat: int
    metrics: dict[str, np.ndarray]            # method -> six metric values
    train_seconds: float
    test_latency: dict[str, float]
    generations: int


@dataclass
class ResultsBundle:
    out_dir: Path
    config_sha256: str
    mode: str
    completed: list[RepeatOutcome] = field(default_factory=list)
    failures: dict[int, str] = field(default_factory=dict)

    def mean_accuracy(self, method: str = WITH_TL) -> float:
        acc = [o.metrics[method][2] for o in self.completed if method in o.metrics]
        if not acc:
            raise DataError("bundle holds no completed repeats")
        return float(np.mean(acc))


def resolve_datasets(cfg: ExperimentConfig) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Materialize source and target feature matrices per the config."""
    if cfg.synth is not None:
        source, target = generate_synthetic(cfg.synth)
        if cfg.synth.mode == "signals":
            source = _featurize(cfg, source)
            target = _featurize(cfg, target)
        return source, target
    if cfg.data_kind == "features":
        return load_features(cfg.source_path), load_features(cfg.target_path)
    source = _featurize(cfg, load_dataset(cfg.source_path))
    target = _featurize(cfg, load_dataset(cfg.target_path))
    return source, target


def _featurize(cfg: ExperimentConfig, trials) -> FeatureMatrix:
    prepared = preprocess_trials(trials, cfg.bandpass, cfg.neighbors, cfg.channels)
    return featurize_set(prepared, cfg.welch, cfg.bands)


def _split(cfg: ExperimentConfig, source: FeatureMatrix, target: FeatureMatrix,
           repeat: int):
    spec = SplitSpec(validation_source_fraction=cfg.validation_source_fraction,
                     source_seed=cfg.split_seed + 2 * repeat,
                     target_seed=cfg.split_seed + 2 * repeat + 1)
    if cfg.mode == "same-subject":
        return same_subject_split(target, spec)
    return holdout_split(source, target, spec)


def _run_repeat(cfg: ExperimentConfig, source: FeatureMatrix,
                target: FeatureMatrix, repeat: int, out_dir: Path,
                trace_writer, pareto_writer, want_scatter: bool):
    validation_source, train, validation_target, test = _split(
        cfg, source, target, repeat)
    metrics_by_method: dict[str, np.ndarray] = {}
    latency: dict[str, float] = {}
    train_seconds = 0.0
    generations = 0

    if cfg.mode != "baseline":
        problem = TransferProblem(validation_source, validation_target,
                                  d=cfg.d, svm_C=cfg.svm_C, svm_seed=cfg.svm_seed)
        t0 = time.perf_counter()
        learned = learn_projection(
            problem, cfg.maoo_config(problem.n, seed_offset=repeat))
        train_seconds = time.perf_counter() - t0
        generations = learned.result.generations
        for row in learned.trace:
            trace_writer.writerow([repeat, row.generation, _fmt(row.min_idist)]
                                  + [_fmt(v) for v in row.objective_max])
        for cand in learned.pareto_front:
            pareto_writer.writerow([repeat] + [_fmt(v) for v in cand.f]
                                   + [_fmt(cand.idist)])
        save_weights(learned.weights, out_dir / f"weights_r{repeat:03d}.csv")

        evaluation = train_and_test(learned.weights, train, test,
                                    C=cfg.svm_C, svm_seed=cfg.svm_seed)
        metrics_by_method[WITH_TL] = evaluation.metrics.as_array()
        latency[WITH_TL] = evaluation.mean_test_latency_s
        if want_scatter:
            _write_scatter(out_dir / "scatter.csv", learned.weights, train,
                           test, cfg)

    baseline = train_and_test(None, train, test, C=cfg.svm_C,
                              svm_seed=cfg.svm_seed)
    metrics_by_method[WITHOUT_TL] = baseline.metrics.as_array()
    latency[WITHOUT_TL] = baseline.mean_test_latency_s
    return RepeatOutcome(repeat, metrics_by_method, train_seconds, latency,
                         generations)


def _write_scatter(path: Path, weights, train: FeatureMatrix,
                   test: FeatureMatrix, cfg: ExperimentConfig) -> None:
    model = train_svm(train.data @ weights.entries.T, train.labels,
                      C=cfg.svm_C, seed=cfg.svm_seed)
    projected = test.data @ weights.entries.T
    predicted = predict(model, projected)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"proj_{j}" for j in range(projected.shape[1])]
                        + ["true_label", "predicted_label"])
        for row, t, p in zip(projected, test.labels, predicted):
            writer.writerow([_fmt(v) for v in row] + [int(t), int(p)])


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path) -> ResultsBundle:
    """Execute the configured protocol `repeats` times and write the bundle."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    source, target = resolve_datasets(cfg)
    bundle = ResultsBundle(out_dir, cfg.sha256, cfg.mode)

    trace_fh = open(out_dir / "trace.csv", "w", newline="")
    pareto_fh = open(out_dir / "pareto.csv", "w", newline="")
    trace_writer = csv.writer(trace_fh)
    pareto_writer = csv.writer(pareto_fh)
    trace_writer.writerow(["repeat", "generation", "min_idist"]
                          + [f"max_{m}" for m in METRIC_NAMES])
    pareto_writer.writerow(["repeat"] + list(METRIC_NAMES) + ["idist"])
    try:
        for repeat in range(cfg.repeats):
            try:
                outcome = _run_repeat(cfg, source, target, repeat, out_dir,
                                      trace_writer, pareto_writer,
                                      want_scatter=(repeat == 0))
                bundle.completed.append(outcome)
            except EegTransferError as exc:
                bundle.failures[repeat] = str(exc)
    finally:
        trace_fh.close()
        pareto_fh.close()

    _write_metrics_csv(out_dir / "metrics.csv", bundle)
    _write_timing_csv(out_dir / "timing.csv", bundle)
    _write_bundle_json(out_dir / "bundle.json", cfg, bundle)
    return bundle


def _methods(bundle: ResultsBundle) -> list[str]:
    methods = []
    for name in (WITH_TL, WITHOUT_TL):
        if any(name in o.metrics for o in bundle.completed):
            methods.append(name)
    return methods


def _write_metrics_csv(path: Path, bundle: ResultsBundle) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repeat", "method"] + list(METRIC_NAMES))
        for outcome in bundle.completed:
            for method in (WITH_TL, WITHOUT_TL):
                if method in outcome.metrics:
                    writer.writerow([outcome.repeat, method]
                                    + [_fmt(v) for v in outcome.metrics[method]])
        for method in _methods(bundle):
            stacked = np.stack([o.metrics[method] for o in bundle.completed
                                if method in o.metrics])
            writer.writerow(["mean", method] + [_fmt(v) for v in stacked.mean(axis=0)])
            writer.writerow(["std", method] + [_fmt(v) for v in stacked.std(axis=0)])


def _write_timing_csv(path: Path, bundle: ResultsBundle) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repeat", "method", "train_seconds",
                         "mean_test_latency_s", "generations"])
        for outcome in bundle.completed:
            for method, latency in outcome.test_latency.items():
                writer.writerow([outcome.repeat, method,
                                 _fmt(outcome.train_seconds), _fmt(latency),
                                 outcome.generations])


def _write_bundle_json(path: Path, cfg: ExperimentConfig,
                       bundle: ResultsBundle) -> None:
    payload = {
        "config_sha256": cfg.sha256,
        "package_version": __version__,
        "mode": cfg.mode,
        "repeats": cfg.repeats,
        "completed_repeats": [o.repeat for o in bundle.completed],
        "failed_repeats": {str(k): v for k, v in bundle.failures.items()},
        "files": {
            "metrics": "metrics.csv",
            "timing": "timing.csv",
            "trace": "trace.csv",
            "pareto": "pareto.csv",
        },
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def run_d_sweep(cfg: ExperimentConfig, out_dir: str | Path,
                d_values=(2, 10, 50, 100, 300, 500)) -> Path:
    """Repeat the experiment for each projected dimension; one summary row per d."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for d in d_values:
        sub_cfg = replace(cfg, d=int(d))
        bundle = run_experiment(sub_cfg, out_dir / f"d_{d:04d}")
        if not bundle.completed:
            raise EegTransferError(f"no repeat completed for d={d}")
        accuracy = bundle.mean_accuracy(WITH_TL)
        baseline = bundle.mean_accuracy(WITHOUT_TL)
        train_seconds = float(np.mean([o.train_seconds for o in bundle.completed]))
        rows.append((d, accuracy, baseline, train_seconds))
    sweep_path = out_dir / "sweep.csv"
    with open(sweep_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["d", "with_tl_accuracy", "without_tl_accuracy",
                         "train_seconds"])
        for d, acc, base, secs in rows:
            writer.writerow([d, _fmt(acc), _fmt(base), _fmt(secs)])
    return sweep_path


def emit_report(bundle_dir: str | Path) -> Path:
    """Render the bundle into a human-readable table plus plot-ready CSVs."""
    bundle_dir = Path(bundle_dir)
    metrics_path = bundle_dir / "metrics.csv"
    if not metrics_path.exists():
        raise DataError(f"{bundle_dir} holds no metrics.csv", code="missing-file")
    with open(metrics_path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DataError("metrics.csv is empty", code="geometry")
    header, body = rows[0], rows[1:]

    lines = []
    lines.append("  ".join(f"{name:>12}" for name in header))
    for row in body:
        lines.append("  ".join(
            f"{_round_cell(cell):>12}" for cell in row))
    report_path = bundle_dir / "report.txt"
    report_path.write_text("\n".join(lines) + "\n")

    # Fig.-5-style convergence curve: first repeat present in the trace.
    trace_path = bundle_dir / "trace.csv"
    if trace_path.exists():
        with open(trace_path, newline="") as fh:
            trace_rows = list(csv.reader(fh))
        if len(trace_rows) > 1:
            first_repeat = trace_rows[1][0]
            with open(bundle_dir / "convergence.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(trace_rows[0][1:])
                for row in trace_rows[1:]:
                    if row[0] == first_repeat:
                        writer.writerow(row[1:])
    return report_path


def _round_cell(cell: str) -> str:
    try:
        return f"{float(cell):.4f}"
    except ValueError:
        return cell


def stats_report(pairs_csv: str | Path, out_dir: str | Path) -> Path:
    """Statistical comparison of one proposed method against competitors.

    The input CSV needs a leading pair-identifier column followed by one
    accuracy column per method; the first method column is the proposed
    approach.  Emits per-pair differences and signed ranks plus the paired
    t, Wilcoxon signed rank and Holm-Bonferroni summaries.
    """
    pairs_csv = Path(pairs_csv)
    if not pairs_csv.exists():
        raise DataError(f"{pairs_csv} not found", code="missing-file")
    with open(pairs_csv, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3 or len(rows[0]) < 3:
        raise DataError("need >= 2 pairs and >= 2 method columns", code="geometry")
    header, body = rows[0], rows[1:]
    methods = header[1:]        # first method column is the proposed approach
    competitors = methods[1:]
    values = np.array([[float(v) for v in row[1:]] for row in body])
    diffs = {name: values[:, 0] - values[:, j + 1]
             for j, name in enumerate(competitors)}

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "stats_report.csv"
    t_results = {name: paired_t(d) for name, d in diffs.items()}
    w_results = {name: wilcoxon_signed_rank(d) for name, d in diffs.items()}
    holm_t = holm_bonferroni([t_results[n].p_value for n in competitors])
    holm_w = holm_bonferroni([w_results[n].p_value for n in competitors])

    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair"]
                        + [f"diff_{n}" for n in competitors]
                        + [f"signed_rank_{n}" for n in competitors])
        ranks = {n: signed_ranks(diffs[n]) for n in competitors}
        for i, row in enumerate(body):
            writer.writerow([row[0]]
                            + [_fmt(diffs[n][i]) for n in competitors]
                            + [_fmt(ranks[n][i]) for n in competitors])
        writer.writerow([])
        writer.writerow(["test", "competitor", "statistic", "p_value",
                         "sum_positive", "sum_negative", "decision"])
        for name in competitors:
            r = t_results[name]
            writer.writerow(["paired_t", name, _fmt(r.statistic), _fmt(r.p_value),
                             "", "", "R" if r.reject_h0_at_95 else "A"])
        for name in competitors:
            r = w_results[name]
            writer.writerow(["wilcoxon", name, _fmt(r.statistic), _fmt(r.p_value),
                             _fmt(r.sum_positive), _fmt(r.sum_negative),
                             "R" if r.reject_h0_at_95 else "A"])
        writer.writerow([])
        writer.writerow(["family", "competitor", "rank", "adjusted_alpha",
                         "decision"])
        for family, holm in (("paired_t", holm_t), ("wilcoxon", holm_w)):
            for name, entry in zip(competitors, holm):
                writer.writerow([family, name, entry.rank,
                                 _fmt(entry.adjusted_alpha),
                                 "R" if entry.reject else "A"])
    return out_path
