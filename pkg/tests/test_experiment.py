import csv
import json
from pathlib import Path

import numpy as np
import pytest

from eegtransfer.cli import main as cli_main
from eegtransfer.config import load_config, parse_config
from eegtransfer.errors import ConfigError
from eegtransfer.experiment import (emit_report, run_d_sweep, run_experiment,
                                    stats_report)

from conftest import EER_DIFFS, PSD_DIFFS, TSM_DIFFS


def tiny_config(mode="transfer", repeats=2, NP=12, G_max=8, trials=30):
    return {
        "experiment": {"mode": mode, "repeats": repeats, "split_seed": 100,
                       "d": 2},
        "svm": {"C": 1.0, "seed": 77},
        "maoo": {"NP": NP, "G_max": G_max, "seed": 5, "stop_window": 50},
        "synth": {"mode": "features", "trials_per_class": trials, "seed": 3,
                  "rotation_degrees": 90.0, "translation": 0.35,
                  "noise_sigma": 0.25, "dim": 40},
    }


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_experiment_bundle_layout(tmp_path):
    cfg = parse_config(tiny_config())
    bundle = run_experiment(cfg, tmp_path / "out")
    assert len(bundle.completed) == 2 and not bundle.failures

    rows = read_csv(tmp_path / "out" / "metrics.csv")
    header, body = rows[0], rows[1:]
    assert header == ["repeat", "method", "recall", "precision", "accuracy",
                      "f1", "specificity", "kappa"]
    # 2 repeats x 2 methods + mean/std x 2 methods
    assert len(body) == 2 * 2 + 4
    summary = {(r[0], r[1]) for r in body[-4:]}
    assert summary == {("mean", "with_tl"), ("std", "with_tl"),
                       ("mean", "without_tl"), ("std", "without_tl")}

    for name in ("trace.csv", "pareto.csv", "timing.csv", "bundle.json",
                 "weights_r000.csv", "weights_r001.csv", "scatter.csv"):
        assert (tmp_path / "out" / name).exists()

    meta = json.loads((tmp_path / "out" / "bundle.json").read_text())
    assert meta["config_sha256"] == cfg.sha256
    assert meta["completed_repeats"] == [0, 1]


def test_scatter_rows_match_test_set(tmp_path):
    cfg = parse_config(tiny_config(repeats=1))
    run_experiment(cfg, tmp_path / "out")
    scatter = read_csv(tmp_path / "out" / "scatter.csv")
    # per class: round(0.25 * 30) = 8 validation, 22 test -> 44 rows
    n_test = len(scatter) - 1
    assert n_test == 44
    assert scatter[0][-2:] == ["true_label", "predicted_label"]


def test_run_experiment_deterministic(tmp_path):
    cfg = parse_config(tiny_config())
    run_experiment(cfg, tmp_path / "a")
    run_experiment(parse_config(tiny_config()), tmp_path / "b")
    for name in ("metrics.csv", "trace.csv", "pareto.csv", "scatter.csv"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name


def test_baseline_mode_skips_optimizer(tmp_path):
    cfg = parse_config(tiny_config(mode="baseline", repeats=1))
    bundle = run_experiment(cfg, tmp_path / "out")
    methods = {m for o in bundle.completed for m in o.metrics}
    assert methods == {"without_tl"}
    assert len(read_csv(tmp_path / "out" / "trace.csv")) == 1   # header only


def test_same_subject_mode_runs(tmp_path):
    cfg = parse_config(tiny_config(mode="same-subject", repeats=1))
    bundle = run_experiment(cfg, tmp_path / "out")
    assert bundle.completed
    outcome = bundle.completed[0]
    assert set(outcome.metrics) == {"with_tl", "without_tl"}


def test_emit_report(tmp_path):
    cfg = parse_config(tiny_config(repeats=1))
    run_experiment(cfg, tmp_path / "out")
    report = emit_report(tmp_path / "out")
    text = report.read_text()
    assert "accuracy" in text and "mean" in text and "std" in text
    conv = read_csv(tmp_path / "out" / "convergence.csv")
    assert conv[0][0] == "generation"
    assert len(conv) > 2

    rows = read_csv(tmp_path / "out" / "metrics.csv")
    std_rows = [r for r in rows if r[0] == "std"]
    assert all(float(v) == 0.0 for r in std_rows for v in r[2:])   # single run


def test_d_sweep_summary(tmp_path):
    cfg = parse_config(tiny_config(repeats=1, NP=8, G_max=4))
    sweep = run_d_sweep(cfg, tmp_path / "sweep", d_values=(1, 2))
    rows = read_csv(sweep)
    assert rows[0] == ["d", "with_tl_accuracy", "without_tl_accuracy",
                       "train_seconds"]
    assert [r[0] for r in rows[1:]] == ["1", "2"]


def test_stats_report_reference_table(tmp_path):
    pairs = tmp_path / "pairs.csv"
    with open(pairs, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair", "proposed", "psd", "tsm", "eer"])
        base = 0.75
        for i in range(25):
            writer.writerow([f"p{i}", base, base - PSD_DIFFS[i],
                             base - TSM_DIFFS[i], base - EER_DIFFS[i]])
    out = stats_report(pairs, tmp_path / "stats")
    rows = read_csv(out)
    flat = {tuple(r[:2]): r for r in rows if len(r) == 7}   # test summary rows
    t_psd = flat[("paired_t", "psd")]
    assert float(t_psd[2]) == pytest.approx(7.1582, abs=5e-5)
    assert t_psd[-1] == "R"
    w_tsm = flat[("wilcoxon", "tsm")]
    assert float(w_tsm[2]) == 73.0
    assert float(w_tsm[4]) == 252.0 and float(w_tsm[5]) == 73.0
    assert w_tsm[-1] == "R"
    holm_rows = [r for r in rows if r and r[0] in ("paired_t", "wilcoxon")
                 and len(r) == 5]
    assert len(holm_rows) == 6
    alphas = sorted({round(float(r[3]), 4) for r in holm_rows})
    assert alphas == [0.0167, 0.0250, 0.0500]


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        parse_config({"experiment": {"mode": "nope"}})
    with pytest.raises(ConfigError):
        parse_config({})                      # no data and no synth
    with pytest.raises(ConfigError):
        parse_config({**tiny_config(), "maoo": []})


def test_config_hash_stable(tmp_path):
    doc = tiny_config()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    a = load_config(path)
    b = load_config(path)
    assert a.sha256 == b.sha256 and len(a.sha256) == 64


def test_cli_end_to_end(tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(tiny_config(repeats=1)))

    assert cli_main(["synth", "--config", str(config_path),
                     "--out-dir", str(tmp_path / "data")]) == 0
    assert (tmp_path / "data" / "source_features.csv").exists()

    assert cli_main(["train", "--config", str(config_path),
                     "--out-dir", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "metrics.csv").exists()
    assert (tmp_path / "run" / "report.txt").exists()

    metrics_out = tmp_path / "eval.csv"
    assert cli_main(["evaluate",
                     "--weights", str(tmp_path / "run" / "weights_r000.csv"),
                     "--train", str(tmp_path / "data" / "source_features.csv"),
                     "--test", str(tmp_path / "data" / "target_features.csv"),
                     "--out", str(metrics_out)]) == 0
    rows = read_csv(metrics_out)
    assert rows[0][:6] == ["recall", "precision", "accuracy", "f1",
                           "specificity", "kappa"]

    assert cli_main(["report", "--bundle", str(tmp_path / "run")]) == 0


def test_cli_signal_mode_featurize(tmp_path):
    doc = tiny_config(repeats=1)
    doc["synth"] = {"mode": "signals", "trials_per_class": 3, "seed": 2,
                    "epoch_samples": 120}
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(doc))
    assert cli_main(["synth", "--config", str(config_path),
                     "--out-dir", str(tmp_path / "data")]) == 0
    manifest = tmp_path / "data" / "source" / "manifest.json"
    assert manifest.exists()
    out_csv = tmp_path / "source_features.csv"
    assert cli_main(["featurize", "--config", str(config_path),
                     "--manifest", str(manifest),
                     "--out", str(out_csv)]) == 0
    rows = read_csv(out_csv)
    assert len(rows) == 7                      # header + 6 trials
    assert len(rows[0]) == 99                  # 98 features + label


def test_cli_exit_codes(tmp_path):
    assert cli_main(["train", "--config", str(tmp_path / "missing.json"),
                     "--out-dir", str(tmp_path / "x")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli_main(["train", "--config", str(bad),
                     "--out-dir", str(tmp_path / "x")]) == 1
    config_path = tmp_path / "config.json"
    doc = tiny_config(repeats=1)
    del doc["synth"]
    doc["data"] = {"source": str(tmp_path / "nope.csv"),
                   "target": str(tmp_path / "nope.csv"), "kind": "features"}
    config_path.write_text(json.dumps(doc))
    assert cli_main(["train", "--config", str(config_path),
                     "--out-dir", str(tmp_path / "x")]) == 2
    assert cli_main(["definitely-not-a-command"]) == 1
