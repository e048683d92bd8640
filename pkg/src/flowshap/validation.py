"""Input validation helpers used by the estimators and metric functions."""

from __future__ import annotations

import numpy as np


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce ``X`` to a 2-D float64 array.

    Accepts plain arrays, sequences, or any object exposing a ``features``
    attribute (e.g. :class:`flowshap.data.Dataset`).
    """
    if hasattr(X, "features"):
        X = X.features
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    return arr


def as_float_vector(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    return arr


def check_same_length(a, b, names: str = "inputs") -> None:
    if len(a) != len(b):
        raise ValueError(f"{names} have mismatched lengths: {len(a)} vs {len(b)}")


def check_binary_labels(labels, require_both_classes: bool = False) -> np.ndarray:
    """Validate 0/1 labels; optionally require both classes to be present."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {arr.shape}")
    arr = arr.astype(np.int64)
    values = np.unique(arr)
    if not np.all(np.isin(values, (0, 1))):
        raise ValueError(f"labels must be 0/1, found values {values.tolist()}")
    if require_both_classes and values.size < 2:
        raise ValueError("both classes (0 and 1) must be present")
    return arr


def check_feature_dim(n_cols: int, expected: int, name: str = "input") -> None:
    if n_cols != expected:
        raise ValueError(f"{name} has {n_cols} features, expected {expected}")
