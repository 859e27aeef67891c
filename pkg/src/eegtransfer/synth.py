"""Seeded synthetic source/target pairs for desk-scale experiments.

Feature mode draws Gaussian class clouds in the latent feature space; the
target subject's clouds are the source clouds rotated inside a two-axis
informative subspace and displaced by a seeded random offset vector of
scale `translation` on the remaining coordinates, a compact model of
inter-subject shift.  Signal mode synthesizes raw multichannel epochs
whose per-band sinusoid amplitudes carry the class information, for
end-to-end runs through the DSP and feature stages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from eegtransfer.data import FeatureMatrix, TrialSet
from eegtransfer.dsp import REFERENCE_CHANNELS, NeighborMap
from eegtransfer.errors import ConfigError

FEATURE_MODE = "features"
SIGNAL_MODE = "signals"


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the synthetic source/target family."""

    mode: str = FEATURE_MODE
    trials_per_class: int = 140
    seed: int = 0
    rotation_degrees: float = 90.0
    translation: float = 0.35
    # feature mode
    dim: int = 98
    class_separation: float = 1.2
    noise_sigma: float = 0.25
    informative_axes: tuple[int, int] = (0, 1)
    # signal mode
    sample_rate_hz: float = 100.0
    epoch_samples: int = 350
    mu_amplitude: float = 4.0
    beta_amplitude: float = 1.0
    signal_noise_sigma: float = 1.0

    def __post_init__(self):
        if self.mode not in (FEATURE_MODE, SIGNAL_MODE):
            raise ConfigError(f"unknown synth mode {self.mode!r}")
        if self.trials_per_class < 2:
            raise ConfigError("need at least 2 trials per class")
        if self.noise_sigma <= 0 or self.signal_noise_sigma <= 0:
            raise ConfigError("noise levels must be positive")
        a, b = self.informative_axes
        if not (0 <= a < self.dim and 0 <= b < self.dim and a != b):
            raise ConfigError("informative axes must be two distinct feature indices")


def _feature_subject(rng: np.random.Generator, spec: SynthSpec,
                     angle_rad: float, shift: np.ndarray | None) -> FeatureMatrix:
    a, b = spec.informative_axes
    n = spec.trials_per_class
    mu = spec.class_separation
    data = rng.standard_normal((2 * n, spec.dim)) * spec.noise_sigma
    da = mu * np.cos(angle_rad)
    db = mu * np.sin(angle_rad)
    data[:n, a] += da
    data[:n, b] += db
    data[n:, a] -= da
    data[n:, b] -= db
    if shift is not None:
        data += shift
    labels = np.concatenate([np.full(n, 1), np.full(n, 2)])
    return FeatureMatrix(data, labels)


def _signal_subject(rng: np.random.Generator, spec: SynthSpec,
                    angle_rad: float, translation: float) -> TrialSet:
    """Epochs over the reference channels plus their Laplacian neighbors.

    Class information lives in the (mu, beta) amplitude pair on the
    reference channels; the inter-subject transform rotates that pair and
    adds a common amplitude offset.  Neighbor channels carry noise only.
    """
    neighbors = NeighborMap.default()
    neighbor_names = sorted({n for c in REFERENCE_CHANNELS for n in neighbors[c]})
    channels = tuple(REFERENCE_CHANNELS) + tuple(neighbor_names)
    t = np.arange(spec.epoch_samples) / spec.sample_rate_hz
    base = np.array([spec.mu_amplitude, spec.beta_amplitude])
    rot = np.array([[np.cos(angle_rad), -np.sin(angle_rad)],
                    [np.sin(angle_rad), np.cos(angle_rad)]])
    trials = []
    labels = []
    for cls in (1, 2):
        amp = base if cls == 1 else base[::-1]
        amp = np.abs(rot @ amp) + translation
        for _ in range(spec.trials_per_class):
            epoch = rng.standard_normal(
                (spec.epoch_samples, len(channels))) * spec.signal_noise_sigma
            phase_mu = rng.random() * 2 * np.pi
            phase_beta = rng.random() * 2 * np.pi
            wave = (amp[0] * np.sin(2 * np.pi * 10.0 * t + phase_mu)
                    + amp[1] * np.sin(2 * np.pi * 20.0 * t + phase_beta))
            epoch[:, :len(REFERENCE_CHANNELS)] += wave[:, None]
            trials.append(epoch)
            labels.append(cls)
    return TrialSet(np.stack(trials), np.asarray(labels),
                    channels, spec.sample_rate_hz)


def generate_synthetic(spec: SynthSpec):
    """Source and target datasets drawn per the spec (seeded).

    Returns a (source, target) pair of FeatureMatrix in feature mode or
    TrialSet in signal mode.  The source uses the untransformed
    distribution; the target rotates the class means inside the
    informative plane and displaces the whole cloud by `translation` along
    a seeded random direction of the feature space (feature mode) or adds
    a common amplitude offset (signal mode).
    """
    rng = np.random.default_rng(spec.seed)
    angle = np.deg2rad(spec.rotation_degrees)
    if spec.mode == FEATURE_MODE:
        shift = None
        if spec.translation != 0.0:
            # displacement on the non-informative coordinates only, so the
            # informative-plane geometry stays interpretable
            shift = rng.normal(0.0, spec.translation, spec.dim)
            shift[list(spec.informative_axes)] = 0.0
        source = _feature_subject(rng, spec, 0.0, None)
        target = _feature_subject(rng, spec, angle, shift)
    else:
        source = _signal_subject(rng, spec, 0.0, 0.0)
        target = _signal_subject(rng, spec, angle, spec.translation)
    return source, target
