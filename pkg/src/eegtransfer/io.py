"""Dataset manifests and CSV serialization.

A dataset lives in a directory holding a JSON manifest plus CSV trial
payloads (one row per sample, one column per channel, header = channel
names).  Trials may be pre-epoched (one file each) or sliced from a shared
continuous record via onsets.  Floats are written with 17 significant
digits so every round trip is bitwise exact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from eegtransfer.data import FeatureMatrix, TrialSet, WeightMatrix
from eegtransfer.dsp import epoch_slice
from eegtransfer.errors import DataError

MANIFEST_VERSION = 1
FLOAT_FMT = "%.17g"


def _fmt(value: float) -> str:
    return FLOAT_FMT % value


def _read_csv_matrix(path: Path) -> tuple[list[str], np.ndarray]:
    if not path.exists():
        raise DataError(f"missing trial file {path}", code="missing-file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty trial file {path}", code="geometry")
        rows = [[float(v) for v in row] for row in reader]
    if not rows:
        raise DataError(f"no samples in {path}", code="geometry")
    return header, np.asarray(rows, dtype=np.float64)


def _write_csv_matrix(path: Path, header: list[str], data: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in np.atleast_2d(data):
            writer.writerow([_fmt(v) for v in row])


def load_dataset(manifest_path: str | Path) -> TrialSet:
    """Read a manifest and materialize its TrialSet.

    Raises DataError with code "missing-file", "geometry" or "label"
    depending on what is wrong.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise DataError(f"manifest {manifest_path} not found", code="missing-file")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {manifest_path} is not valid JSON: {exc}",
                        code="parse")
    base = manifest_path.parent

    for key in ("format_version", "sample_rate_hz", "channel_names", "trials"):
        if key not in manifest:
            raise DataError(f"manifest misses required key {key!r}", code="parse")
    if manifest["format_version"] != MANIFEST_VERSION:
        raise DataError(
            f"unsupported manifest version {manifest['format_version']}", code="parse")
    channels = [str(c) for c in manifest["channel_names"]]
    entries = manifest["trials"]
    if not entries:
        raise DataError("manifest declares no trials", code="geometry")
    epoch_samples = manifest.get("epoch_samples")

    continuous = None
    if "continuous_path" in manifest:
        header, continuous = _read_csv_matrix(base / manifest["continuous_path"])
        if header != channels:
            raise DataError("continuous record header disagrees with manifest",
                            code="geometry")

    trials = []
    labels = []
    for k, entry in enumerate(entries):
        label = entry.get("label")
        if label not in (1, 2):
            raise DataError(f"trial {k} carries unknown label {label!r}",
                            code="label")
        labels.append(int(label))
        if "path" in entry:
            header, data = _read_csv_matrix(base / entry["path"])
            if header != channels:
                raise DataError(f"trial {k} header disagrees with manifest",
                                code="geometry")
            trials.append(data)
        elif "onset" in entry:
            if continuous is None or epoch_samples is None:
                raise DataError(
                    "onset entries need continuous_path and epoch_samples",
                    code="parse")
            trials.append(epoch_slice(continuous, [int(entry["onset"])],
                                      int(epoch_samples))[0])
        else:
            raise DataError(f"trial {k} has neither path nor onset", code="parse")

    shapes = {t.shape for t in trials}
    if len(shapes) != 1:
        raise DataError(f"trials disagree on geometry: {sorted(shapes)}",
                        code="geometry")
    if epoch_samples is not None and trials[0].shape[0] != int(epoch_samples):
        raise DataError(
            f"trials have {trials[0].shape[0]} samples, manifest declares "
            f"{epoch_samples}", code="geometry")
    return TrialSet(np.stack(trials), np.asarray(labels), tuple(channels),
                    float(manifest["sample_rate_hz"]))


def save_dataset(trials: TrialSet, directory: str | Path, subject: str,
                 provenance: str = "") -> Path:
    """Write a TrialSet as manifest + per-trial CSVs; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for k in range(trials.n_trials):
        name = f"trial_{k:04d}.csv"
        _write_csv_matrix(directory / name, list(trials.channel_names),
                          trials.trials[k])
        entries.append({"path": name, "label": int(trials.labels[k])})
    manifest = {
        "format_version": MANIFEST_VERSION,
        "subject": subject,
        "sample_rate_hz": trials.sample_rate_hz,
        "channel_names": list(trials.channel_names),
        "epoch_samples": trials.n_samples,
        "trials": entries,
        "provenance": provenance,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def save_features(features: FeatureMatrix, path: str | Path) -> None:
    """Feature CSV: feat_0..feat_{D-1} columns plus a label column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = [f"feat_{j}" for j in range(features.dim)] + ["label"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row, label in zip(features.data, features.labels):
            writer.writerow([_fmt(v) for v in row] + [int(label)])


def load_features(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    if not path.exists():
        raise DataError(f"feature file {path} not found", code="missing-file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "label":
            raise DataError(f"{path} lacks the feature/label header", code="parse")
        data, labels = [], []
        for row in reader:
            data.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
    if not data:
        raise DataError(f"{path} holds no instances", code="geometry")
    return FeatureMatrix(np.asarray(data), np.asarray(labels))


def save_weights(weights: WeightMatrix, path: str | Path) -> None:
    """Weight CSV with the two-line d / D header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["d", weights.d])
        writer.writerow(["D", weights.dim])
        for row in weights.entries:
            writer.writerow([_fmt(v) for v in row])


def load_weights(path: str | Path) -> WeightMatrix:
    path = Path(path)
    if not path.exists():
        raise DataError(f"weight file {path} not found", code="missing-file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            d_row = next(reader)
            dim_row = next(reader)
        except StopIteration:
            raise DataError(f"{path} misses the d/D header", code="parse")
        if d_row[0] != "d" or dim_row[0] != "D":
            raise DataError(f"{path} misses the d/D header", code="parse")
        d, dim = int(d_row[1]), int(dim_row[1])
        rows = [[float(v) for v in row] for row in reader]
    entries = np.asarray(rows, dtype=np.float64)
    if entries.shape != (d, dim):
        raise DataError(f"{path}: body is {entries.shape}, header says ({d}, {dim})",
                        code="geometry")
    return WeightMatrix(entries)
