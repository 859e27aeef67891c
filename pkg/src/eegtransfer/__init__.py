"""Single-source transfer learning for EEG classification.

A linear feature projection is evolved with a modified many-objective
differential-evolution algorithm so that a classifier trained on one
subject's projected features classifies another subject's projected
features well.
"""

from eegtransfer.data import FeatureMatrix, SplitSpec, TrialSet, WeightMatrix

__version__ = "0.1.0"

__all__ = ["TrialSet", "FeatureMatrix", "SplitSpec", "WeightMatrix", "__version__"]
