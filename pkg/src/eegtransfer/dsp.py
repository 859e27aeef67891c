"""Temporal and spatial conditioning of raw multichannel EEG epochs.

The shipped band-pass is a fixed elliptic second-order-section cascade
(passband 8-25 Hz, 1 dB ripple, 50 dB stopband, fs 100 Hz).  The
coefficients were designed once with a reference filter-design tool and are
locked in by the magnitude-response tests; users may override them through
the config file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.signal import sosfilt

from eegtransfer.errors import ConfigError, DataError

REFERENCE_CHANNELS = ("F3", "F4", "C3", "Cz", "C4", "P3", "P4")

# Elliptic band-pass cascade, prototype order 6 (12th-order band-pass),
# edges 8-25 Hz, 1 dB passband ripple, 50 dB stopband, fs 100 Hz.
# Rows: b0, b1, b2, a0, a1, a2 with a0 normalized to 1.
DEFAULT_BANDPASS_SOS = (
    (1.7011313182240768e-02, 2.6143094313592141e-02, 1.7011313182240768e-02,
     1.0, -6.5799108990355581e-01, 6.8242277828055709e-01),
    (1.0, -1.9657610632894649e+00, 9.9999999999999989e-01,
     1.0, -1.2969775055579480e+00, 7.5692374239777693e-01),
    (1.0, 5.2231550429436868e-01, 1.0000000000000002e+00,
     1.0, -1.8146731132582095e-01, 8.4356403699781746e-01),
    (1.0, -1.8512600690846486e+00, 9.9999999999999989e-01,
     1.0, -1.6297002957324251e+00, 9.1435500146477044e-01),
    (1.0, 2.5066456553830363e-01, 1.0000000000000002e+00,
     1.0, -1.7323039400535751e-03, 9.6148627268957731e-01),
    (1.0, -1.8050321203698951e+00, 9.9999999999999989e-01,
     1.0, -1.7357713445446044e+00, 9.8124445809647853e-01),
)


@dataclass(frozen=True)
class SosFilter:
    """Cascade of second-order sections with design metadata."""

    sections: np.ndarray        # (n_sections, 6): b0 b1 b2 a0 a1 a2, a0 == 1
    band_hz: tuple[float, float] = (8.0, 25.0)
    passband_ripple_db: float = 1.0
    stopband_atten_db: float = 50.0
    sample_rate_hz: float = 100.0

    def __post_init__(self):
        sections = np.asarray(self.sections, dtype=np.float64)
        if sections.ndim != 2 or sections.shape[1] != 6 or sections.shape[0] == 0:
            raise ConfigError("SOS sections must form a (n, 6) coefficient table")
        if not np.isfinite(sections).all():
            raise ConfigError("SOS sections contain non-finite coefficients")
        if not np.allclose(sections[:, 3], 1.0):
            raise ConfigError("SOS sections must be normalized to a0 = 1")
        for b0, b1, b2, a0, a1, a2 in sections:
            roots = np.roots([1.0, a1, a2])
            if np.any(np.abs(roots) >= 1.0):
                raise ConfigError(
                    f"unstable section: denominator roots {roots} on or outside unit circle")
        sections.setflags(write=False)
        object.__setattr__(self, "sections", sections)

    @property
    def order(self) -> int:
        return 2 * self.sections.shape[0]

    @classmethod
    def default_bandpass(cls) -> "SosFilter":
        return cls(np.array(DEFAULT_BANDPASS_SOS))


def apply_bandpass(filt: SosFilter, signal: np.ndarray) -> np.ndarray:
    """Run a single causal pass of the cascade with zero initial conditions.

    Output length equals input length.  No forward-backward (zero-phase)
    filtering is performed.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if not np.isfinite(signal).all():
        raise DataError("band-pass input contains non-finite samples")
    # sosfilt wants a writable coefficient buffer; sections are frozen
    return sosfilt(np.array(filt.sections), signal, axis=-1)


def bandpass_record(filt: SosFilter, record: np.ndarray) -> np.ndarray:
    """Filter every channel (column) of a (samples x channels) record."""
    record = np.asarray(record, dtype=np.float64)
    if record.ndim != 2:
        raise DataError("record must be (samples x channels)")
    return apply_bandpass(filt, record.T).T


class NeighborMap:
    """Channel -> exactly four neighbor channels, for the small Laplacian."""

    def __init__(self, mapping: dict[str, tuple[str, ...]]):
        clean: dict[str, tuple[str, ...]] = {}
        for channel, neighbors in mapping.items():
            neighbors = tuple(neighbors)
            if len(neighbors) != 4 or len(set(neighbors)) != 4:
                raise ConfigError(
                    f"channel {channel!r} must have exactly four distinct neighbors")
            if channel in neighbors:
                raise ConfigError(f"channel {channel!r} cannot be its own neighbor")
            clean[channel] = neighbors
        self._mapping = clean

    def __getitem__(self, channel: str) -> tuple[str, ...]:
        return self._mapping[channel]

    def __contains__(self, channel: str) -> bool:
        return channel in self._mapping

    def channels(self) -> tuple[str, ...]:
        return tuple(self._mapping)

    @classmethod
    def from_dict(cls, raw: dict) -> "NeighborMap":
        return cls({str(k): tuple(str(n) for n in v) for k, v in raw.items()})

    @classmethod
    def default(cls) -> "NeighborMap":
        """Neighbor choices for the seven reference channels on the extended
        10/20 montage, shipped as package data."""
        text = resources.files("eegtransfer").joinpath(
            "defaults/neighbors_1020.json").read_text()
        return cls.from_dict(json.loads(text))


def small_laplacian(trial: np.ndarray, channel_names: tuple[str, ...],
                    neighbors: NeighborMap,
                    target_channels: tuple[str, ...]) -> np.ndarray:
    """Subtract the mean of each target channel's four neighbors.

    Applied before channel selection, so neighbors may be channels that are
    not themselves selected.  Returns (samples x len(target_channels)).
    """
    trial = np.asarray(trial, dtype=np.float64)
    if trial.ndim != 2 or trial.shape[1] != len(channel_names):
        raise DataError("trial shape does not match channel names")
    index = {name: i for i, name in enumerate(channel_names)}
    out = np.empty((trial.shape[0], len(target_channels)))
    for j, channel in enumerate(target_channels):
        if channel not in index:
            raise DataError(f"channel {channel!r} missing from trial")
        if channel not in neighbors:
            raise DataError(f"no neighbor entry for channel {channel!r}")
        cols = []
        for n in neighbors[channel]:
            if n not in index:
                raise DataError(f"neighbor {n!r} of {channel!r} missing from trial")
            cols.append(index[n])
        out[:, j] = trial[:, index[channel]] - trial[:, cols].mean(axis=1)
    return out


def preprocess_trials(trials, filt: SosFilter, neighbors: NeighborMap,
                      target_channels: tuple[str, ...] = REFERENCE_CHANNELS):
    """Band-pass, small Laplacian and channel selection over a TrialSet.

    Epoched input is filtered per epoch; callers holding a continuous
    record should filter it with bandpass_record before slicing instead.
    """
    from eegtransfer.data import TrialSet   # local import to avoid a cycle

    processed = []
    for k in range(trials.n_trials):
        filtered = bandpass_record(filt, trials.trials[k])
        processed.append(small_laplacian(filtered, trials.channel_names,
                                         neighbors, target_channels))
    return TrialSet(np.stack(processed), trials.labels, tuple(target_channels),
                    trials.sample_rate_hz)


def epoch_slice(continuous: np.ndarray, onsets, length: int) -> np.ndarray:
    """Cut fixed-length epochs out of a continuous (samples x channels) record.

    Returns (n_onsets, length, channels).  Raises DataError for any onset
    whose window leaves the record.
    """
    continuous = np.asarray(continuous, dtype=np.float64)
    if continuous.ndim != 2:
        raise DataError("continuous record must be (samples x channels)")
    if length <= 0:
        raise DataError("epoch length must be positive")
    n = continuous.shape[0]
    trials = []
    for onset in onsets:
        onset = int(onset)
        if onset < 0 or onset + length > n:
            raise DataError(
                f"epoch [{onset}, {onset + length}) outside record of {n} samples")
        trials.append(continuous[onset:onset + length])
    return np.stack(trials)
