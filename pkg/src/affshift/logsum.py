"""Deterministic log-domain reductions.

Every sum of exponentials in the package goes through `lse_tree`, which
reduces with a balanced pairwise tree whose shape depends only on the number
of terms.  Partial results combined in a fixed order therefore give bitwise
identical answers no matter how the work was split across threads.
"""
from __future__ import annotations

import math

import numpy as np


def lse_tree(values) -> float:
    """Log-sum-exp of a 1d array via a fixed balanced pairwise tree."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        return -math.inf
    while arr.size > 1:
        if arr.size % 2:
            arr = np.concatenate([arr, [-np.inf]])
        arr = np.logaddexp(arr[0::2], arr[1::2])
    return float(arr[0])


def lse_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    """Stable log-sum-exp along one axis; tolerates -inf slices."""
    arr = np.asarray(arr, dtype=float)
    mx = arr.max(axis=axis, keepdims=True)
    safe = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(arr - safe), axis=axis)) + np.squeeze(safe, axis=axis)
    return np.where(np.isfinite(np.squeeze(mx, axis=axis)), out, -np.inf)
