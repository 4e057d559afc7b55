"""
Sampling helpers for softmax outputs.
"""

import numpy as np

from core.exceptions import RejectedInputError

_SUM_TOLERANCE = 1e-9


def sample_categorical(probabilities, rng):
    """
    Draw one index from a probability row.

    The row must be non-negative and sum to one within 1e-9. Uses a single
    uniform draw from ``rng`` so sequences are reproducible per seed.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise RejectedInputError("Probabilities must be a non-empty row")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise RejectedInputError("Probabilities must be finite and non-negative")
    total = p.sum()
    if abs(total - 1.0) > _SUM_TOLERANCE:
        raise RejectedInputError(f"Probabilities sum to {total!r}, not 1")
    cumulative = np.cumsum(p)
    index = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    # guards against landing past the last positive entry through roundoff
    return min(index, int(np.flatnonzero(p)[-1]))


def apply_temperature(probabilities, temperature):
    """
    Rescale a probability row by a sampling temperature.

    A temperature at or below 1e-6 collapses the row onto its argmax.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    if temperature <= 1e-6:
        out = np.zeros_like(p)
        out[int(np.argmax(p))] = 1.0
        return out
    if temperature == 1.0:
        return p / p.sum()
    logits = np.log(np.clip(p, 1e-300, None)) / temperature
    logits -= logits.max()
    scaled = np.exp(logits)
    return scaled / scaled.sum()
