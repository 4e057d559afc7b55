"""
Layer set of the neural-network substrate.

Dense, LSTM, embedding, dropout, multiply and reshape layers in double
precision. Each layer caches what its backward pass needs when run in train
mode; backward without that cache is a protocol error.
"""

from dataclasses import dataclass, field

import numpy as np

from core.exceptions import ProtocolError, RejectedInputError

from .activations import Activation, sigmoid

LAYER_KINDS = ("dense", "lstm", "embedding", "dropout", "multiply", "reshape")


@dataclass(frozen=True)
class LayerSpec:
    """Static description of one layer."""

    kind: str
    input_dim: int
    output_dim: int
    activation: Activation = field(default_factory=Activation)
    l1_coefficient: float = 0.0
    dropout_rate: float = 0.0

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise RejectedInputError(f"Unknown layer kind '{self.kind}'")
        if self.input_dim < 1 or self.output_dim < 1:
            raise RejectedInputError(f"{self.kind} layer dimensions must be positive")
        if self.l1_coefficient < 0:
            raise RejectedInputError("l1_coefficient must be >= 0")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise RejectedInputError("dropout_rate must lie in [0, 1)")
        if self.kind in ("dropout", "multiply") and self.input_dim != self.output_dim:
            raise RejectedInputError(f"{self.kind} layer must keep its dimension")
        if self.kind == "reshape" and self.input_dim % self.output_dim:
            raise RejectedInputError("reshape input_dim must be a multiple of output_dim")

    def to_dict(self):
        return {
            "kind": self.kind,
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
            "activation": self.activation.to_dict(),
            "l1_coefficient": self.l1_coefficient,
            "dropout_rate": self.dropout_rate,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            kind=data["kind"],
            input_dim=int(data["input_dim"]),
            output_dim=int(data["output_dim"]),
            activation=Activation.from_dict(data["activation"]),
            l1_coefficient=float(data["l1_coefficient"]),
            dropout_rate=float(data["dropout_rate"]),
        )


def glorot_uniform(shape, rng):
    """Uniform in +-sqrt(6 / (fan_in + fan_out))."""
    fan_in, fan_out = shape[0], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Base class: parameters, gradients and the train-mode cache."""

    def __init__(self, spec):
        self.spec = spec
        self.params = {}
        self.grads = {}
        self._cache = None

    def forward(self, x, mode="eval", rng=None):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def _require_cache(self):
        if self._cache is None:
            raise ProtocolError(
                f"{self.spec.kind} backward called without a train-mode forward"
            )
        return self._cache

    def l1_penalty(self):
        return 0.0

    def _check_last_dim(self, x):
        if x.shape[-1] != self.spec.input_dim:
            raise RejectedInputError(
                f"{self.spec.kind} layer expects last dimension {self.spec.input_dim}, "
                f"got {x.shape[-1]}"
            )


class Dense(Layer):
    def __init__(self, spec, rng):
        super().__init__(spec)
        self.params = {
            "W": glorot_uniform((spec.input_dim, spec.output_dim), rng),
            "b": np.zeros(spec.output_dim),
        }

    def forward(self, x, mode="eval", rng=None):
        x = np.asarray(x, dtype=np.float64)
        self._check_last_dim(x)
        z = x @ self.params["W"] + self.params["b"]
        a = self.spec.activation.forward(z)
        if mode == "train":
            self._cache = (x, z, a)
        return a

    def backward(self, grad):
        x, z, a = self._require_cache()
        dz = self.spec.activation.backward(z, a, grad)
        W = self.params["W"]
        self.grads = {
            "W": x.T @ dz + self.spec.l1_coefficient * np.sign(W),
            "b": dz.sum(axis=0),
        }
        return dz @ W.T

    def l1_penalty(self):
        return self.spec.l1_coefficient * float(np.abs(self.params["W"]).sum())


def lstm_gates(W, b, x, h, c):
    """One LSTM step returning the new state and every gate (gate order i, f, g, o)."""
    hidden = h.shape[-1]
    z = np.concatenate([x, h], axis=-1) @ W + b
    i = sigmoid(z[..., :hidden])
    f = sigmoid(z[..., hidden : 2 * hidden])
    g = np.tanh(z[..., 2 * hidden : 3 * hidden])
    o = sigmoid(z[..., 3 * hidden :])
    c_new = f * c + i * g
    tanh_c = np.tanh(c_new)
    h_new = o * tanh_c
    return h_new, c_new, (i, f, g, o, tanh_c)


def lstm_step(W, b, x, h, c):
    """
    Advance an LSTM cell by one input row.

    Returns:
        (new hidden, new cell, output); the output is the new hidden state.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    h = np.atleast_2d(np.asarray(h, dtype=np.float64))
    c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    hidden = h.shape[-1]
    if W.shape != (x.shape[-1] + hidden, 4 * hidden) or b.shape != (4 * hidden,):
        raise RejectedInputError(
            f"LSTM parameters {W.shape}/{b.shape} do not fit input {x.shape[-1]} "
            f"and hidden {hidden}"
        )
    if c.shape != h.shape:
        raise RejectedInputError("LSTM cell and hidden state shapes differ")
    h_new, c_new, _ = lstm_gates(W, b, x, h, c)
    return h_new, c_new, h_new


class LSTM(Layer):
    """Single LSTM layer over (batch, time, features); outputs the last hidden state."""

    def __init__(self, spec, rng):
        super().__init__(spec)
        n_in, hidden = spec.input_dim, spec.output_dim
        self.params = {
            "W": glorot_uniform((n_in + hidden, 4 * hidden), rng),
            "b": np.zeros(4 * hidden),
        }

    def forward(self, x, mode="eval", rng=None):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 3:
            raise RejectedInputError("LSTM input must be (batch, time, features)")
        self._check_last_dim(x)
        batch, steps, _ = x.shape
        hidden = self.spec.output_dim
        h = np.zeros((batch, hidden))
        c = np.zeros((batch, hidden))
        W, b = self.params["W"], self.params["b"]
        trace = []
        for t in range(steps):
            h_prev, c_prev = h, c
            h, c, gates = lstm_gates(W, b, x[:, t, :], h_prev, c_prev)
            trace.append((h_prev, c_prev, gates))
        if mode == "train":
            self._cache = (x, trace)
        return h

    def backward(self, grad):
        x, trace = self._require_cache()
        W = self.params["W"]
        n_in = self.spec.input_dim
        hidden = self.spec.output_dim
        dW = np.zeros_like(W)
        db = np.zeros_like(self.params["b"])
        dx = np.zeros_like(x)
        dh = np.asarray(grad, dtype=np.float64)
        dc = np.zeros_like(dh)
        for t in reversed(range(x.shape[1])):
            h_prev, c_prev, (i, f, g, o, tanh_c) = trace[t]
            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c**2)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.concatenate(
                [di * i * (1 - i), df * f * (1 - f), dg * (1 - g**2), do * o * (1 - o)],
                axis=-1,
            )
            zin = np.concatenate([x[:, t, :], h_prev], axis=-1)
            dW += zin.T @ dz
            db += dz.sum(axis=0)
            dzin = dz @ W.T
            dx[:, t, :] = dzin[:, :n_in]
            dh = dzin[:, n_in : n_in + hidden]
            dc = dc * f
        dW += self.spec.l1_coefficient * np.sign(W)
        self.grads = {"W": dW, "b": db}
        return dx

    def l1_penalty(self):
        return self.spec.l1_coefficient * float(np.abs(self.params["W"]).sum())


class Embedding(Layer):
    """Lookup table from integer ids (input_dim = vocabulary size) to dense rows."""

    def __init__(self, spec, rng):
        super().__init__(spec)
        self.params = {"W": glorot_uniform((spec.input_dim, spec.output_dim), rng)}

    def forward(self, x, mode="eval", rng=None):
        ids = np.asarray(x)
        if not np.issubdtype(ids.dtype, np.integer):
            raise RejectedInputError("Embedding input must be integer ids")
        if ids.size and (ids.min() < 0 or ids.max() >= self.spec.input_dim):
            raise RejectedInputError(
                f"Embedding id outside vocabulary of size {self.spec.input_dim}"
            )
        if mode == "train":
            self._cache = ids
        return self.params["W"][ids]

    def backward(self, grad):
        ids = self._require_cache()
        dW = np.zeros_like(self.params["W"])
        np.add.at(dW, ids, grad)
        dW += self.spec.l1_coefficient * np.sign(self.params["W"])
        self.grads = {"W": dW}
        return None

    def l1_penalty(self):
        return self.spec.l1_coefficient * float(np.abs(self.params["W"]).sum())


class Dropout(Layer):
    """Inverted dropout: eval mode is the identity."""

    def forward(self, x, mode="eval", rng=None):
        x = np.asarray(x, dtype=np.float64)
        self._check_last_dim(x)
        rate = self.spec.dropout_rate
        if mode != "train" or rate == 0.0:
            if mode == "train":
                self._cache = np.ones_like(x)
            return x
        if rng is None:
            raise ProtocolError("Dropout in train mode needs an explicit rng")
        mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
        self._cache = mask
        return x * mask

    def backward(self, grad):
        return grad * self._require_cache()


class Reshape(Layer):
    """Folds (batch, input_dim) into (batch * input_dim / output_dim, output_dim)."""

    def forward(self, x, mode="eval", rng=None):
        x = np.asarray(x, dtype=np.float64)
        self._check_last_dim(x)
        if mode == "train":
            self._cache = x.shape
        return x.reshape(-1, self.spec.output_dim)

    def backward(self, grad):
        return np.asarray(grad).reshape(self._require_cache())


class Multiply(Layer):
    """Elementwise product of two equally shaped inputs."""

    def forward(self, x, other=None, mode="eval", rng=None):
        a = np.asarray(x, dtype=np.float64)
        b = np.asarray(other, dtype=np.float64)
        if a.shape != b.shape:
            raise RejectedInputError(f"Multiply inputs differ: {a.shape} vs {b.shape}")
        self._check_last_dim(a)
        if mode == "train":
            self._cache = (a, b)
        return a * b

    def backward(self, grad):
        a, b = self._require_cache()
        return grad * b, grad * a


def build_layer(spec, rng):
    """Instantiate the layer class for a spec."""
    if spec.kind == "dense":
        return Dense(spec, rng)
    if spec.kind == "lstm":
        return LSTM(spec, rng)
    if spec.kind == "embedding":
        return Embedding(spec, rng)
    if spec.kind == "dropout":
        return Dropout(spec)
    if spec.kind == "reshape":
        return Reshape(spec)
    return Multiply(spec)
