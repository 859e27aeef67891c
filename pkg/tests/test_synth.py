import numpy as np
import pytest

from eegtransfer.data import FeatureMatrix
from eegtransfer.errors import ConfigError
from eegtransfer.svm import predict, train_svm
from eegtransfer.synth import SynthSpec, generate_synthetic


def accuracy(train, test):
    model = train_svm(train.data, train.labels, C=1.0, seed=1234)
    return float((predict(model, test.data) == test.labels).mean())


def test_identity_transform_matches_distributions():
    spec = SynthSpec(mode="features", trials_per_class=140, seed=5,
                     rotation_degrees=0.0, translation=0.0)
    source, target = generate_synthetic(spec)
    n = source.n
    sigma = spec.noise_sigma
    diff = np.abs(source.data.mean(axis=0) - target.data.mean(axis=0))
    # two independent draws of the same distribution: mean difference has
    # std sigma * sqrt(2 / n) per coordinate
    assert np.all(diff < 3.0 * sigma * np.sqrt(2.0 / n) + 1e-12)


def test_rotated_family_raw_vs_oracle_projection():
    spec = SynthSpec(mode="features", trials_per_class=140, seed=0,
                     rotation_degrees=90.0, translation=1.4,
                     class_separation=1.2, noise_sigma=0.25)
    source, target = generate_synthetic(spec)
    raw = accuracy(source, target)
    assert raw <= 0.65

    # rank-1 oracle: weight the two informative axes equally
    W = np.zeros((2, spec.dim))
    W[0, spec.informative_axes[0]] = 1.0
    W[0, spec.informative_axes[1]] = 1.0
    projected_src = FeatureMatrix(source.data @ W.T, source.labels)
    projected_tar = FeatureMatrix(target.data @ W.T, target.labels)
    assert accuracy(projected_src, projected_tar) >= 0.9


def test_same_seed_reproduces_datasets():
    spec = SynthSpec(mode="features", trials_per_class=20, seed=9,
                     translation=1.0)
    a_src, a_tar = generate_synthetic(spec)
    b_src, b_tar = generate_synthetic(spec)
    assert np.array_equal(a_src.data, b_src.data)
    assert np.array_equal(a_tar.data, b_tar.data)

    other = generate_synthetic(SynthSpec(mode="features", trials_per_class=20,
                                         seed=10, translation=1.0))
    assert not np.array_equal(a_src.data, other[0].data)


def test_signal_mode_geometry_and_determinism():
    spec = SynthSpec(mode="signals", trials_per_class=4, seed=2)
    source, target = generate_synthetic(spec)
    assert source.n_trials == 8 and target.n_trials == 8
    assert source.n_samples == 350
    assert source.channel_names[:7] == ("F3", "F4", "C3", "Cz", "C4", "P3", "P4")
    assert source.n_channels == len(set(source.channel_names))
    again_src, _ = generate_synthetic(spec)
    assert np.array_equal(source.trials, again_src.trials)


def test_spec_validation():
    with pytest.raises(ConfigError):
        SynthSpec(mode="nope")
    with pytest.raises(ConfigError):
        SynthSpec(trials_per_class=1)
    with pytest.raises(ConfigError):
        SynthSpec(noise_sigma=0.0)
    with pytest.raises(ConfigError):
        SynthSpec(informative_axes=(0, 0))
    with pytest.raises(ConfigError):
        SynthSpec(informative_axes=(0, 500))
