"""
Optimizers: plain SGD with a decaying step size and Adam.

Updates mutate the parameter arrays in place (networks hold references to the
same arrays) and return them together with the state.
"""

from dataclasses import dataclass, field

import numpy as np

from core.exceptions import ProtocolError, RejectedInputError

OPTIMIZER_KINDS = ("sgd_decaying", "adam")
DECAY_MODES = ("multiplicative", "absolute", "scale")


@dataclass
class OptimizerState:
    """
    Mutable optimizer state of one network.

    ``decay_mode`` selects how ``decay_step_size`` reads the decay factor:
    multiplicative a*(1-d), absolute a-d, scale a*d. The result never goes
    below ``floor``.
    """

    kind: str
    step_size: float
    decay_factor: float = 0.003
    floor: float = 1e-4
    decay_mode: str = "multiplicative"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict, repr=False)
    v: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise RejectedInputError(f"Unknown optimizer kind '{self.kind}'")
        if self.decay_mode not in DECAY_MODES:
            raise RejectedInputError(f"Unknown step size decay mode '{self.decay_mode}'")
        if not self.step_size > 0:
            raise RejectedInputError("Optimizer step size must be positive")
        if self.step < 0:
            raise RejectedInputError("Optimizer step counter must be >= 0")

    @classmethod
    def adam(cls, step_size, beta1=0.9, beta2=0.999, epsilon=1e-8):
        return cls(kind="adam", step_size=step_size, beta1=beta1, beta2=beta2, epsilon=epsilon)

    @classmethod
    def sgd_decaying(cls, step_size, decay_factor=0.003, floor=1e-4, decay_mode="multiplicative"):
        return cls(
            kind="sgd_decaying",
            step_size=step_size,
            decay_factor=decay_factor,
            floor=floor,
            decay_mode=decay_mode,
        )

    def scalars(self):
        """Scalar fields for checkpoint headers."""
        return {
            "kind": self.kind,
            "step_size": self.step_size,
            "decay_factor": self.decay_factor,
            "floor": self.floor,
            "decay_mode": self.decay_mode,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "step": self.step,
        }

    def moment_arrays(self):
        arrays = {f"m.{name}": value for name, value in self.m.items()}
        arrays.update({f"v.{name}": value for name, value in self.v.items()})
        return arrays

    @classmethod
    def restore(cls, scalars, arrays):
        state = cls(**scalars)
        for key, value in arrays.items():
            bucket, _, name = key.partition(".")
            if bucket == "m":
                state.m[name] = value
            elif bucket == "v":
                state.v[name] = value
        return state


def _check_shapes(params, grads):
    if set(params) != set(grads):
        raise RejectedInputError(
            f"Gradient names {sorted(grads)} do not match parameters {sorted(params)}"
        )
    for name, value in params.items():
        if np.shape(grads[name]) != value.shape:
            raise RejectedInputError(
                f"Gradient for {name} has shape {np.shape(grads[name])}, expected {value.shape}"
            )


def adam_update(params, grads, state):
    """Apply one bias-corrected Adam step."""
    _check_shapes(params, grads)
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**state.step
    correction2 = 1.0 - b2**state.step
    for name, value in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(value)
            v = np.zeros_like(value)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[name] = m
        state.v[name] = v
        value -= state.step_size * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)
    return params, state


def sgd_update(params, grads, state):
    """Plain gradient step with the current step size (no decay)."""
    _check_shapes(params, grads)
    for name, value in params.items():
        value -= state.step_size * np.asarray(grads[name], dtype=np.float64)
    state.step += 1
    return params, state


def decay_step_size(state):
    """Shrink the step size once, never below the floor."""
    if state.kind != "sgd_decaying":
        raise ProtocolError("Step size decay applies to sgd_decaying optimizers only")
    alpha, d = state.step_size, state.decay_factor
    if state.decay_mode == "multiplicative":
        decayed = alpha * (1.0 - d)
    elif state.decay_mode == "absolute":
        decayed = alpha - d
    else:
        decayed = alpha * d
    if alpha > state.floor:
        state.step_size = max(min(decayed, alpha), state.floor)
    return state


def apply_update(params, grads, state):
    if state.kind == "adam":
        return adam_update(params, grads, state)
    return sgd_update(params, grads, state)
