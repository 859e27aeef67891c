import numpy as np
import pytest

from eegtransfer.data import FeatureMatrix

# Per-pair accuracy differences of the proposed approach minus each
# competitor, 25 source-target pairs (statistics fixtures).
PSD_DIFFS = [0.0862, 0.0262, 0.0691, 0.0559, 0.1417, 0.1904, 0.1286, 0.2869,
             0.0262, 0.1119, 0.0702, 0.0322, 0.0619, 0.1119, 0.0286, 0.1892,
             0.1119, 0.1536, 0.2143, 0.2690, 0.1798, 0.3238, 0.0322, 0.0369,
             0.1429]
TSM_DIFFS = [-0.0238, 0.0155, -0.0095, 0.0416, 0.0845, 0.0226, -0.0142,
             -0.0167, -0.0023, 0.0405, 0.0166, 0.0107, -0.0286, 0.0404,
             0.0179, 0.1250, 0.0976, 0.0357, -0.0476, 0.1511, 0.0227, 0.0524,
             0.1179, 0.2762, -0.0607]
EER_DIFFS = [0.0083, 0.1262, 0.0405, 0.1309, 0.1488, 0.4011, 0.0108, 0.0940,
             0.0834, 0.0548, 0.1059, 0.0250, 0.0321, 0.0833, -0.0214, 0.2607,
             0.1905, 0.1607, 0.0417, 0.2690, 0.1191, 0.3381, 0.2000, 0.1619,
             -0.0321]


def balanced_features(n_per_class=140, dim=98, seed=0, separation=1.2,
                      sigma=0.25) -> FeatureMatrix:
    """Two Gaussian clouds separated along feature 0."""
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((2 * n_per_class, dim)) * sigma
    data[:n_per_class, 0] += separation
    data[n_per_class:, 0] -= separation
    labels = np.concatenate([np.full(n_per_class, 1), np.full(n_per_class, 2)])
    return FeatureMatrix(data, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
