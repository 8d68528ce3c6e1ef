"""Versioned plain-text (JSON) model persistence.

Floats are stored as repr strings, so a load/save round trip reproduces
scores bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from mbtilab.errors import ParameterError
from mbtilab.learn.forest import RfModel, Tree
from mbtilab.learn.logistic import LrModel
from mbtilab.learn.naive_bayes import GnbModel
from mbtilab.learn.svm import SvmModel

FORMAT_VERSION = 1


def _enc_vec(values) -> list[str]:
    return [repr(float(v)) for v in np.asarray(values).ravel()]


def _dec_vec(values) -> np.ndarray:
    return np.array([float(v) for v in values], dtype=np.float64)


def model_to_json(model) -> dict:
    if isinstance(model, LrModel):
        return {
            "kind": "logistic",
            "version": FORMAT_VERSION,
            "intercept": repr(model.intercept),
            "coefficients": _enc_vec(model.coefficients),
            "standard_errors": (
                None if model.standard_errors is None else _enc_vec(model.standard_errors)
            ),
            "converged": model.converged,
            "iterations": model.iterations,
        }
    if isinstance(model, GnbModel):
        return {
            "kind": "gnb",
            "version": FORMAT_VERSION,
            "priors": _enc_vec(model.priors),
            "means": [_enc_vec(row) for row in model.means],
            "variances": [_enc_vec(row) for row in model.variances],
        }
    if isinstance(model, SvmModel):
        return {
            "kind": "svm",
            "version": FORMAT_VERSION,
            "weights": _enc_vec(model.weights),
            "bias": repr(model.bias),
            "lam": repr(model.lam),
        }
    if isinstance(model, RfModel):
        return {
            "kind": "forest",
            "version": FORMAT_VERSION,
            "n_trees": model.n_trees,
            "max_depth": model.max_depth,
            "min_leaf": model.min_leaf,
            "mtry": model.mtry,
            "n_features": model.n_features,
            "trees": [
                {
                    "feature": [int(v) for v in tree.feature],
                    "threshold": _enc_vec(tree.threshold),
                    "left": [int(v) for v in tree.left],
                    "right": [int(v) for v in tree.right],
                    "value": _enc_vec(tree.value),
                }
                for tree in model.trees
            ],
        }
    raise ParameterError(f"unknown model type {type(model).__name__}")


def model_from_json(doc: dict):
    kind = doc.get("kind")
    if doc.get("version") != FORMAT_VERSION:
        raise ParameterError(f"unsupported model format version {doc.get('version')!r}")
    if kind == "logistic":
        return LrModel(
            intercept=float(doc["intercept"]),
            coefficients=_dec_vec(doc["coefficients"]),
            standard_errors=(
                None
                if doc["standard_errors"] is None
                else _dec_vec(doc["standard_errors"])
            ),
            converged=bool(doc["converged"]),
            iterations=int(doc["iterations"]),
        )
    if kind == "gnb":
        return GnbModel(
            priors=_dec_vec(doc["priors"]),
            means=np.vstack([_dec_vec(r) for r in doc["means"]]),
            variances=np.vstack([_dec_vec(r) for r in doc["variances"]]),
        )
    if kind == "svm":
        return SvmModel(
            weights=_dec_vec(doc["weights"]),
            bias=float(doc["bias"]),
            lam=float(doc["lam"]),
        )
    if kind == "forest":
        trees = tuple(
            Tree(
                feature=np.asarray(t["feature"], dtype=np.int32),
                threshold=_dec_vec(t["threshold"]),
                left=np.asarray(t["left"], dtype=np.int32),
                right=np.asarray(t["right"], dtype=np.int32),
                value=_dec_vec(t["value"]),
            )
            for t in doc["trees"]
        )
        return RfModel(
            trees=trees,
            n_trees=int(doc["n_trees"]),
            max_depth=doc["max_depth"],
            min_leaf=int(doc["min_leaf"]),
            mtry=int(doc["mtry"]),
            n_features=int(doc["n_features"]),
        )
    raise ParameterError(f"unknown model kind {kind!r}")


def model_dumps(model) -> str:
    return json.dumps(model_to_json(model), sort_keys=True)


def model_loads(text: str):
    return model_from_json(json.loads(text))
