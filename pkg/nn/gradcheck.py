"""
Finite-difference verification of analytic gradients.
"""

import numpy as np


def _loss_at(net, x, target):
    # a fresh rng per evaluation keeps dropout masks identical across probes
    output = net.forward(x, mode="train", rng=np.random.default_rng(0))
    value, grad = net.loss(output, target)
    return value, grad


def gradient_check(net, x, target, eps=1e-5, analytic=None):
    """
    Compare backward gradients with central differences.

    Args:
        net: object exposing forward/backward/loss/parameters/gradients
        x: probe input
        target: loss target
        eps: finite-difference step
        analytic: optional gradient dict replacing the backward result

    Returns:
        max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-12)
    """
    _, grad = _loss_at(net, x, target)
    net.backward(grad)
    if analytic is None:
        analytic = {name: value.copy() for name, value in net.gradients().items()}

    worst = 0.0
    for name, param in net.parameters().items():
        flat = param.reshape(-1)
        expected = np.asarray(analytic[name]).reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus, _ = _loss_at(net, x, target)
            flat[i] = original - eps
            minus, _ = _loss_at(net, x, target)
            flat[i] = original
            numeric = (plus - minus) / (2.0 * eps)
            scale = max(abs(expected[i]), abs(numeric), 1e-12)
            worst = max(worst, abs(expected[i] - numeric) / scale)
    return worst
