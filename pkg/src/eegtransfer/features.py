"""Welch-periodogram log-PSD features over the motor-imagery bands.

Segments are Hamming-windowed, zero-padded to the FFT length so bins land
on integral frequencies, scaled by window energy and sample rate, then
averaged.  No detrending or demeaning is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from eegtransfer.data import FeatureMatrix, TrialSet
from eegtransfer.errors import ConfigError, DataError

MU_BAND_HZ = (8, 9, 10, 11, 12)
CENTRAL_BETA_BAND_HZ = (16, 17, 18, 19, 20, 21, 22, 23, 24)


@dataclass(frozen=True)
class WelchConfig:
    """Averaged-periodogram parameters (defaults match the reference setup)."""

    window_length: int = 50
    overlap_fraction: float = 0.5
    window_kind: str = "hamming"
    fft_length: int = 100
    sample_rate_hz: float = 100.0
    log_floor: float = 1e-12

    def __post_init__(self):
        if self.window_length < 2:
            raise ConfigError("window_length must be at least 2 samples")
        if not (0.0 <= self.overlap_fraction < 1.0):
            raise ConfigError("overlap_fraction must lie in [0, 1)")
        if self.window_kind != "hamming":
            raise ConfigError(f"unsupported window kind {self.window_kind!r}")
        if self.fft_length < self.window_length:
            raise ConfigError("fft_length must be >= window_length")
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz must be positive")
        if self.log_floor <= 0:
            raise ConfigError("log_floor must be positive")

    @property
    def hop(self) -> int:
        return max(1, int(round(self.window_length * (1.0 - self.overlap_fraction))))

    @property
    def n_bins(self) -> int:
        return self.fft_length // 2 + 1

    def bin_frequencies(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.sample_rate_hz / self.fft_length


@dataclass(frozen=True)
class BandSpec:
    """Integral frequencies (Hz) kept from the one-sided PSD."""

    frequencies_hz: tuple[int, ...] = MU_BAND_HZ + CENTRAL_BETA_BAND_HZ

    def __post_init__(self):
        freqs = tuple(int(f) for f in self.frequencies_hz)
        if not freqs or sorted(set(freqs)) != list(freqs):
            raise ConfigError("band frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies_hz", freqs)

    def __len__(self) -> int:
        return len(self.frequencies_hz)

    def bin_indices(self, cfg: WelchConfig) -> np.ndarray:
        """Map each band frequency onto its FFT bin; all must be exact."""
        idx = []
        for f in self.frequencies_hz:
            pos = f * cfg.fft_length / cfg.sample_rate_hz
            if abs(pos - round(pos)) > 1e-9 or not (0 <= round(pos) < cfg.n_bins):
                raise ConfigError(
                    f"{f} Hz is not an FFT bin center for fft_length="
                    f"{cfg.fft_length}, fs={cfg.sample_rate_hz}")
            idx.append(int(round(pos)))
        return np.asarray(idx, dtype=np.int64)


def welch_psd(channel_epoch: np.ndarray, cfg: WelchConfig) -> np.ndarray:
    """One-sided PSD of a single-channel epoch, ``cfg.n_bins`` values.

    Average of modified periodograms: Hamming-windowed segments with
    ``cfg.hop`` spacing, zero-padded to ``cfg.fft_length``, magnitude
    squared, normalized by window energy and sample rate, doubled except at
    DC and Nyquist.
    """
    x = np.asarray(channel_epoch, dtype=np.float64)
    if x.ndim != 1:
        raise DataError("welch_psd expects a single-channel epoch")
    n = x.shape[0]
    win = cfg.window_length
    if n < win:
        raise DataError(f"epoch of {n} samples shorter than window {win}")
    window = np.hamming(win)
    energy = float(np.sum(window ** 2))
    n_segments = (n - win) // cfg.hop + 1
    psd = np.zeros(cfg.n_bins)
    for k in range(n_segments):
        seg = x[k * cfg.hop:k * cfg.hop + win] * window
        spectrum = np.fft.rfft(seg, cfg.fft_length)
        p = (spectrum.real ** 2 + spectrum.imag ** 2) / (cfg.sample_rate_hz * energy)
        if cfg.fft_length % 2 == 0:
            p[1:-1] *= 2.0
        else:
            p[1:] *= 2.0
        psd += p
    psd /= n_segments
    return psd


def extract_features(trial: np.ndarray, cfg: WelchConfig, bands: BandSpec) -> np.ndarray:
    """Log-PSD feature vector of one (samples x channels) trial.

    Per channel, in column order, appends log10(max(PSD[f], log_floor)) for
    each band frequency; the output has channels * len(bands) entries.
    """
    trial = np.asarray(trial, dtype=np.float64)
    if trial.ndim != 2:
        raise DataError("trial must be (samples x channels)")
    idx = bands.bin_indices(cfg)
    vec = np.empty(trial.shape[1] * len(bands))
    for c in range(trial.shape[1]):
        psd = welch_psd(trial[:, c], cfg)
        vec[c * len(bands):(c + 1) * len(bands)] = np.log10(
            np.maximum(psd[idx], cfg.log_floor))
    return vec


def featurize_set(trials: TrialSet, cfg: WelchConfig, bands: BandSpec) -> FeatureMatrix:
    """Feature matrix with one row per trial; labels carried through."""
    rows = [extract_features(trials.trials[i], cfg, bands)
            for i in range(trials.n_trials)]
    return FeatureMatrix(np.vstack(rows), trials.labels)
