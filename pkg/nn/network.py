"""
Sequential networks built from a NetworkSpec.
"""

import logging
from dataclasses import dataclass

import numpy as np

from core.exceptions import RejectedInputError, TrainingError

from .layers import LayerSpec, build_layer
from .losses import LOSSES, get_loss
from .optimizers import apply_update

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered layers plus the training loss."""

    layers: tuple
    loss: str = "mse"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise RejectedInputError("A network needs at least one layer")
        if self.loss not in LOSSES:
            raise RejectedInputError(f"Unknown loss '{self.loss}'")
        for i, (current, following) in enumerate(zip(self.layers, self.layers[1:])):
            if current.output_dim != following.input_dim:
                raise RejectedInputError(
                    f"Layer {i} output_dim {current.output_dim} != layer {i + 1} "
                    f"input_dim {following.input_dim}"
                )
        if any(layer.kind == "multiply" for layer in self.layers):
            raise RejectedInputError("multiply layers take two inputs; compose them by hand")
        last = self.layers[-1]
        if self.loss == "binary_cross_entropy" and (
            last.output_dim != 1 or last.activation.name != "sigmoid"
        ):
            raise RejectedInputError("binary_cross_entropy needs one sigmoid output")
        if self.loss == "cross_entropy" and (
            last.output_dim < 2 or last.activation.name != "softmax"
        ):
            raise RejectedInputError("cross_entropy needs a softmax output over >= 2 classes")

    @property
    def input_dim(self):
        return self.layers[0].input_dim

    @property
    def output_dim(self):
        return self.layers[-1].output_dim

    def to_dict(self):
        return {"loss": self.loss, "layers": [layer.to_dict() for layer in self.layers]}

    @classmethod
    def from_dict(cls, data):
        return cls(
            layers=tuple(LayerSpec.from_dict(item) for item in data["layers"]),
            loss=data["loss"],
        )


class Sequential:
    """
    A stack of layers applied in order.

    Parameters are exposed under stable names ``layer{i}.{param}``.
    """

    def __init__(self, spec, rng):
        self.spec = spec
        self.layers = [build_layer(layer_spec, rng) for layer_spec in spec.layers]
        self._loss = get_loss(spec.loss)

    def forward(self, x, mode="eval", rng=None):
        out = x
        for layer in self.layers:
            out = layer.forward(out, mode=mode, rng=rng)
        return out

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def loss(self, output, target):
        """Loss value including every l1 penalty, and its gradient w.r.t. output."""
        value, grad = self._loss(output, target)
        return value + self.l1_penalty(), grad

    def l1_penalty(self):
        return sum(layer.l1_penalty() for layer in self.layers)

    def parameters(self):
        return {
            f"layer{i}.{name}": value
            for i, layer in enumerate(self.layers)
            for name, value in layer.params.items()
        }

    def gradients(self):
        return {
            f"layer{i}.{name}": value
            for i, layer in enumerate(self.layers)
            for name, value in layer.grads.items()
        }

    def load_parameters(self, arrays):
        params = self.parameters()
        if set(arrays) != set(params):
            raise RejectedInputError("Parameter names do not match the network layout")
        for name, value in params.items():
            if arrays[name].shape != value.shape:
                raise RejectedInputError(f"Parameter {name} has the wrong shape")
            value[...] = arrays[name]

    def train_batch(self, x, target, state, rng=None):
        """One forward/backward/update pass. Returns the loss before the update."""
        output = self.forward(x, mode="train", rng=rng)
        value, grad = self.loss(output, target)
        if not np.isfinite(value):
            raise TrainingError(
                "Non-finite training loss", diagnostics={"loss": value, "step": state.step}
            )
        self.backward(grad)
        apply_update(self.parameters(), self.gradients(), state)
        return value
