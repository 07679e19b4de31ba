"""Small input-validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

__all__ = ["check_matrix", "check_labels", "check_probabilities"]


def check_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d feature matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite values")
    return X


def check_labels(y, n_rows: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n_rows:
        raise ValueError(f"labels must be 1-d of length {n_rows}, got shape {y.shape}")
    if not np.issubdtype(y.dtype, np.integer):
        yi = y.astype(np.int64)
        if not np.array_equal(yi, y):
            raise ValueError("labels must be integer class indices")
        y = yi
    if y.min(initial=0) < 0:
        raise ValueError("labels must be non-negative class indices")
    return y.astype(np.int64)


def check_probabilities(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError("expected a 1-d probability vector")
    if p.min(initial=0.0) < 0 or not np.isfinite(p).all():
        raise ValueError("probabilities must be finite and non-negative")
    if abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {float(p.sum())!r}, expected 1")
    return p
