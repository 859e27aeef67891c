"""Experiment configuration: one JSON document with per-module sections.

All randomness in a run flows from the named seeds in this file (split,
optimizer, solver, synthetic); nothing draws from ambient entropy.  The
SHA-256 of the canonicalized document is recorded in every results bundle
so reruns can be matched to their configuration.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from eegtransfer.dsp import REFERENCE_CHANNELS, NeighborMap, SosFilter
from eegtransfer.errors import ConfigError
from eegtransfer.features import BandSpec, WelchConfig
from eegtransfer.maoo import MaooConfig
from eegtransfer.synth import SynthSpec

MODES = ("transfer", "baseline", "same-subject")


@dataclass
class ExperimentConfig:
    """Validated, resolved view of one configuration document."""

    mode: str = "transfer"
    repeats: int = 1
    split_seed: int = 1000
    validation_source_fraction: float = 0.75
    d: int = 2
    svm_C: float = 1.0
    svm_seed: int = 24301
    maoo: dict = field(default_factory=dict)      # overrides applied on top of defaults
    welch: WelchConfig = field(default_factory=WelchConfig)
    bands: BandSpec = field(default_factory=BandSpec)
    bandpass: SosFilter = field(default_factory=SosFilter.default_bandpass)
    neighbors: NeighborMap = field(default_factory=NeighborMap.default)
    channels: tuple[str, ...] = REFERENCE_CHANNELS
    synth: SynthSpec | None = None
    source_path: str | None = None
    target_path: str | None = None
    data_kind: str = "features"                   # "features" | "trials"
    raw: dict = field(default_factory=dict)
    sha256: str = ""

    def maoo_config(self, n: int, seed_offset: int = 0) -> MaooConfig:
        params = dict(self.maoo)
        seed = params.pop("seed", 7)
        if "F_range" in params:
            params["F_range"] = tuple(params["F_range"])
        return MaooConfig(n=n, rng_seed=seed + seed_offset, **params)


def config_hash(document: dict) -> str:
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _section(document: dict, name: str) -> dict:
    value = document.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"section {name!r} must be an object")
    return value


def parse_config(document: dict) -> ExperimentConfig:
    """Build the validated config from a parsed JSON document."""
    if not isinstance(document, dict):
        raise ConfigError("config root must be an object")
    cfg = ExperimentConfig(raw=document, sha256=config_hash(document))

    exp = _section(document, "experiment")
    cfg.mode = exp.get("mode", cfg.mode)
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg.mode!r}")
    cfg.repeats = int(exp.get("repeats", cfg.repeats))
    if cfg.repeats < 1:
        raise ConfigError("repeats must be >= 1")
    cfg.split_seed = int(exp.get("split_seed", cfg.split_seed))
    cfg.validation_source_fraction = float(
        exp.get("validation_source_fraction", cfg.validation_source_fraction))
    cfg.d = int(exp.get("d", cfg.d))
    if cfg.d < 1:
        raise ConfigError("projected dimension d must be >= 1")

    svm = _section(document, "svm")
    cfg.svm_C = float(svm.get("C", cfg.svm_C))
    if cfg.svm_C <= 0:
        raise ConfigError("svm C must be positive")
    cfg.svm_seed = int(svm.get("seed", cfg.svm_seed))

    cfg.maoo = dict(_section(document, "maoo"))

    welch = _section(document, "welch")
    try:
        cfg.welch = WelchConfig(**{k: welch[k] for k in welch})
    except TypeError as exc:
        raise ConfigError(f"bad welch section: {exc}")

    if "bands" in document:
        cfg.bands = BandSpec(tuple(document["bands"]))

    dsp = _section(document, "dsp")
    if "sos" in dsp:
        cfg.bandpass = SosFilter(np.asarray(dsp["sos"], dtype=np.float64))
    if "neighbors" in dsp:
        cfg.neighbors = NeighborMap.from_dict(dsp["neighbors"])
    if "channels" in dsp:
        cfg.channels = tuple(str(c) for c in dsp["channels"])

    data = _section(document, "data")
    cfg.source_path = data.get("source")
    cfg.target_path = data.get("target")
    cfg.data_kind = data.get("kind", cfg.data_kind)
    if cfg.data_kind not in ("features", "trials"):
        raise ConfigError("data kind must be 'features' or 'trials'")

    if "synth" in document:
        synth = _section(document, "synth")
        try:
            spec = SynthSpec(**{k: tuple(v) if isinstance(v, list) else v
                                for k, v in synth.items()})
        except TypeError as exc:
            raise ConfigError(f"bad synth section: {exc}")
        cfg.synth = spec

    if cfg.synth is None and (cfg.source_path is None or cfg.target_path is None):
        raise ConfigError("config needs either a synth section or data paths")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}")
    return parse_config(document)
