"""
Loss functions. Each returns (value, gradient with respect to the network output),
averaged over the batch.
"""

import numpy as np

from core.exceptions import RejectedInputError

LOSSES = ("mse", "cross_entropy", "binary_cross_entropy")

_CLIP = 1e-12


def _as_batch(output, target):
    y = np.atleast_2d(np.asarray(output, dtype=np.float64))
    t = np.atleast_2d(np.asarray(target, dtype=np.float64))
    if y.shape != t.shape:
        raise RejectedInputError(f"Loss target shape {t.shape} != output shape {y.shape}")
    return y, t


def mse(output, target):
    y, t = _as_batch(output, target)
    n = y.shape[0]
    diff = y - t
    return float((diff**2).sum() / n), 2.0 * diff / n


def cross_entropy(output, target):
    """Categorical cross-entropy on probability rows (softmax output)."""
    y, t = _as_batch(output, target)
    n = y.shape[0]
    p = np.clip(y, _CLIP, 1.0)
    return float(-(t * np.log(p)).sum() / n), -t / p / n


def binary_cross_entropy(output, target):
    """Binary cross-entropy on sigmoid outputs."""
    y, t = _as_batch(output, target)
    n = y.shape[0]
    p = np.clip(y, _CLIP, 1.0 - _CLIP)
    value = -(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)).sum() / n
    return float(value), (p - t) / (p * (1.0 - p)) / n


def get_loss(name):
    try:
        return {
            "mse": mse,
            "cross_entropy": cross_entropy,
            "binary_cross_entropy": binary_cross_entropy,
        }[name]
    except KeyError:
        raise RejectedInputError(f"Unknown loss '{name}'")
