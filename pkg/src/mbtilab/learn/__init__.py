"""Binary classifiers with real-valued scoring.

predict_scores returns probabilities for logistic/GNB/forest models and raw
margins for the SVM; predict_labels thresholds at 0.5 or 0 accordingly.
"""

from __future__ import annotations

import numpy as np

from mbtilab.errors import ParameterError
from mbtilab.learn.forest import RfModel, Tree, fit_random_forest
from mbtilab.learn.logistic import LrModel, fit_logistic
from mbtilab.learn.naive_bayes import GnbModel, fit_gnb
from mbtilab.learn.serialize import (
    model_dumps,
    model_from_json,
    model_loads,
    model_to_json,
)
from mbtilab.learn.svm import SvmModel, fit_linear_svm

MODEL_KINDS = ("logistic", "gnb", "svm", "forest")

__all__ = [
    "LrModel",
    "GnbModel",
    "SvmModel",
    "RfModel",
    "Tree",
    "MODEL_KINDS",
    "fit_logistic",
    "fit_gnb",
    "fit_linear_svm",
    "fit_random_forest",
    "fit_model",
    "predict_scores",
    "predict_labels",
    "default_threshold",
    "model_to_json",
    "model_from_json",
    "model_dumps",
    "model_loads",
]


def fit_model(kind: str, X, y, sample_weights=None, seed: int = 0, **params):
    """Fit one of the four classifier kinds with its default settings."""
    if kind == "logistic":
        return fit_logistic(X, y, sample_weights=sample_weights, **params)
    if kind == "gnb":
        return fit_gnb(X, y, sample_weights=sample_weights, **params)
    if kind == "svm":
        return fit_linear_svm(X, y, sample_weights=sample_weights, seed=seed, **params)
    if kind == "forest":
        return fit_random_forest(X, y, sample_weights=sample_weights, seed=seed, **params)
    raise ParameterError(f"unknown model kind {kind!r}")


def predict_scores(model, X) -> np.ndarray:
    """Probabilities for probabilistic models, margins for the SVM."""
    if isinstance(model, (LrModel, GnbModel, RfModel)):
        return model.score(np.asarray(X, dtype=np.float64))
    if isinstance(model, SvmModel):
        return model.decision(np.asarray(X, dtype=np.float64))
    raise ParameterError(f"unknown model type {type(model).__name__}")


def default_threshold(model) -> float:
    return 0.0 if isinstance(model, SvmModel) else 0.5


def predict_labels(model, X, threshold: float | None = None) -> np.ndarray:
    if threshold is None:
        threshold = default_threshold(model)
    return (predict_scores(model, X) >= threshold).astype(np.int64)
