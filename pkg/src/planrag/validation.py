"""Input validation helpers for the estimator-facing API."""
from __future__ import annotations

import numpy as np


def check_feature_matrix(X, *, n_features: int | None = None) -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite values."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains NaN or infinite values")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(
            f"expected {n_features} features, got {X.shape[1]}")
    return X


def check_targets(y, n_rows: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != n_rows:
        raise ValueError(f"y has {y.shape[0]} rows, X has {n_rows}")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets contain NaN or infinite values")
    return y


def check_group_sizes(group, n_rows: int) -> np.ndarray:
    """Validate query-group sizes: positive ints that partition the rows."""
    group = np.asarray(group, dtype=np.int64).ravel()
    if group.size == 0:
        raise ValueError("group sizes are empty")
    if np.any(group <= 0):
        raise ValueError("group sizes must be positive")
    if int(group.sum()) != n_rows:
        raise ValueError(
            f"group sizes sum to {int(group.sum())}, expected {n_rows}")
    return group


def check_positive(name: str, value) -> None:
    if value is None or value <= 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
