"""Predict personality dichotomies from social media footprints.

The package is organized by pipeline stage: `corpus` (parsing, labeling,
inclusion filtering), `textprep` (cleaning and tokenization), `features`
(per-user feature matrix and PCA), `balance` (class imbalance treatments),
`learn` (four classifiers), `evaluation` (cross-validated metrics),
`inference` (stepwise selection and association tests), `synthetic`
(labeled corpus generator), and `pipeline`/`cli` (file-based stages).
"""

from mbtilab.corpus import (
    DICHOTOMIES,
    DICHOTOMY_NAMES,
    MBTI_TYPES,
    FilterPolicy,
    MbtiType,
    UserRecord,
)
from mbtilab.errors import MbtiLabError
from mbtilab.features import FeatureMatrix
from mbtilab.pipeline import RunConfig

__version__ = "0.1.0"

__all__ = [
    "DICHOTOMIES",
    "DICHOTOMY_NAMES",
    "MBTI_TYPES",
    "FilterPolicy",
    "MbtiType",
    "UserRecord",
    "MbtiLabError",
    "FeatureMatrix",
    "RunConfig",
    "__version__",
]
