"""
Activation functions and their backward passes.

Backward functions take the activation output (and input where needed) and
the gradient w.r.t. the output, and return the gradient w.r.t. the input.
"""

from dataclasses import dataclass

import numpy as np

from core.exceptions import RejectedInputError

ACTIVATIONS = ("identity", "relu", "leaky_relu", "softmax", "sigmoid", "tanh")


@dataclass(frozen=True)
class Activation:
    name: str = "identity"
    slope: float = 0.2

    def __post_init__(self):
        if self.name not in ACTIVATIONS:
            raise RejectedInputError(f"Unknown activation '{self.name}'")

    def forward(self, z):
        if self.name == "identity":
            return z
        if self.name == "relu":
            return np.maximum(z, 0.0)
        if self.name == "leaky_relu":
            return np.where(z > 0, z, self.slope * z)
        if self.name == "sigmoid":
            return sigmoid(z)
        if self.name == "tanh":
            return np.tanh(z)
        return softmax(z)

    def backward(self, z, a, grad):
        if self.name == "identity":
            return grad
        if self.name == "relu":
            return grad * (z > 0)
        if self.name == "leaky_relu":
            return grad * np.where(z > 0, 1.0, self.slope)
        if self.name == "sigmoid":
            return grad * a * (1.0 - a)
        if self.name == "tanh":
            return grad * (1.0 - a * a)
        # softmax Jacobian-vector product, row-wise
        return a * (grad - np.sum(grad * a, axis=-1, keepdims=True))

    def to_dict(self):
        if self.name == "leaky_relu":
            return {"name": self.name, "slope": self.slope}
        return {"name": self.name}

    @classmethod
    def from_dict(cls, data):
        return cls(name=data["name"], slope=float(data.get("slope", 0.2)))


def sigmoid(z):
    """Numerically stable logistic function."""
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z):
    """Row-wise softmax with max subtraction."""
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)
