"""
Q-network bank: one Q approximator per stage combination.

Networks and lookup tables share the ``values`` / ``update`` interface, so
the Bellman update can be checked against value iteration on a table.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from core.exceptions import CheckpointError, ProtocolError, RejectedInputError, TrainingError
from line.state import ALL_COMBINATIONS
from nn.activations import Activation
from nn.checkpoint import read_checkpoint, write_checkpoint
from nn.layers import LayerSpec
from nn.network import NetworkSpec, Sequential
from nn.optimizers import OptimizerState, apply_update, decay_step_size

from .variants import AgentVariantConfig

logger = logging.getLogger(__name__)

BANK_MAGIC = b"PKLB"
BANK_KIND = "q_network_bank"


def q_network_spec(variant, l1=0.0):
    """ReLU hidden layers and a linear output per action, trained on squared error."""
    sizes = (variant.input_dim,) + tuple(variant.hidden)
    layers = [
        LayerSpec("dense", n_in, n_out, activation=Activation("relu"), l1_coefficient=l1)
        for n_in, n_out in zip(sizes, sizes[1:])
    ]
    layers.append(LayerSpec("dense", sizes[-1], variant.action_count, l1_coefficient=l1))
    return NetworkSpec(layers=tuple(layers), loss="mse")


class QNetwork:
    def __init__(self, network, optimizer):
        self.network = network
        self.optimizer = optimizer

    @classmethod
    def create(cls, variant, rng, optimizer, l1=0.0):
        return cls(Sequential(q_network_spec(variant, l1), rng), optimizer)

    def values(self, row):
        return self.network.forward(np.asarray(row, dtype=np.float64)[None, :], mode="eval")[0]

    def update(self, row, action_index, target):
        """
        One SGD step on the squared error of the taken action, then a step size decay.

        Returns:
            the squared error before the update
        """
        x = np.asarray(row, dtype=np.float64)[None, :]
        output = self.network.forward(x, mode="train")
        error = float((target - output[0, action_index]) ** 2)
        if not np.isfinite(error):
            raise TrainingError(
                "Non-finite Q loss",
                diagnostics={"target": target, "step": self.optimizer.step},
            )
        wanted = output.copy()
        wanted[0, action_index] = target
        _, grad = self.network.loss(output, wanted)
        self.network.backward(grad)
        apply_update(self.network.parameters(), self.network.gradients(), self.optimizer)
        decay_step_size(self.optimizer)
        return error


class TabularQ:
    """Lookup-table Q function keyed by the (rounded) state row."""

    def __init__(self, action_count, step_size=0.5, decimals=9):
        self.action_count = action_count
        self.step_size = step_size
        self.decimals = decimals
        self.table = {}

    def _key(self, row):
        return tuple(np.round(np.asarray(row, dtype=np.float64), self.decimals))

    def values(self, row):
        return self.table.setdefault(self._key(row), np.zeros(self.action_count)).copy()

    def update(self, row, action_index, target):
        q = self.table.setdefault(self._key(row), np.zeros(self.action_count))
        error = float((target - q[action_index]) ** 2)
        q[action_index] += self.step_size * (target - q[action_index])
        return error


@dataclass
class PendingTransition:
    """An activation waiting for the next activation of the same combination."""

    combination: str
    state: np.ndarray
    action_index: int
    rewards: list = field(default_factory=list)
    died: bool = False


@dataclass(frozen=True)
class Transition:
    combination: str
    state: np.ndarray
    action_index: int
    reward: float
    next_state: np.ndarray = None
    terminal: bool = False


@dataclass
class BankEntry:
    q: object
    active_time: int = 0
    pending: PendingTransition = None


class QNetworkBank:
    """Sixteen Q approximators keyed by stage combination code."""

    def __init__(self, variant, entries):
        if set(entries) != set(ALL_COMBINATIONS):
            raise RejectedInputError("A bank needs exactly one entry per stage combination")
        self.variant = variant
        self.entries = {code: entries[code] for code in ALL_COMBINATIONS}

    @classmethod
    def create(cls, variant, rng, step_size=0.01, decay_factor=0.003, floor=1e-4,
               decay_mode="multiplicative", l1=0.0):
        entries = {}
        for code in ALL_COMBINATIONS:
            optimizer = OptimizerState.sgd_decaying(
                step_size, decay_factor=decay_factor, floor=floor, decay_mode=decay_mode
            )
            entries[code] = BankEntry(QNetwork.create(variant, rng, optimizer, l1))
        return cls(variant, entries)

    @classmethod
    def from_run_config(cls, variant, config, rng):
        return cls.create(
            variant,
            rng,
            step_size=config["rl_step_size"],
            decay_factor=config["step_size_decay"],
            floor=config["step_size_floor"],
            decay_mode=config["step_size_decay_mode"],
            l1=config["rl_l1"],
        )

    @classmethod
    def tabular(cls, variant, step_size=0.5):
        return cls(
            variant,
            {
                code: BankEntry(TabularQ(variant.action_count, step_size))
                for code in ALL_COMBINATIONS
            },
        )

    def entry(self, combination):
        try:
            return self.entries[combination]
        except KeyError:
            raise ProtocolError(f"Unknown stage combination '{combination}'")

    def values(self, combination, row):
        return self.entry(combination).q.values(row)

    def active_times(self):
        return {code: entry.active_time for code, entry in self.entries.items()}

    def clear_pending(self):
        for entry in self.entries.values():
            entry.pending = None

    def network_bytes(self, combination):
        """Checkpoint bytes of one combination's parameters."""
        q = self.entry(combination).q
        return write_checkpoint({"combination": combination}, q.network.parameters())

    def to_bytes(self):
        meta = {"kind": BANK_KIND, "variant": self.variant.to_dict(), "entries": {}}
        arrays = {}
        for code, entry in self.entries.items():
            if not isinstance(entry.q, QNetwork):
                raise CheckpointError("Only network banks can be checkpointed")
            meta["entries"][code] = {
                "spec": entry.q.network.spec.to_dict(),
                "optimizer": entry.q.optimizer.scalars(),
                "active_time": entry.active_time,
            }
            for name, value in entry.q.network.parameters().items():
                arrays[f"{code}.{name}"] = value
        return write_checkpoint(meta, arrays, magic=BANK_MAGIC)

    @classmethod
    def from_bytes(cls, data):
        meta, arrays = read_checkpoint(data, magic=BANK_MAGIC)
        if meta.get("kind") != BANK_KIND:
            raise CheckpointError("Checkpoint does not hold a Q-network bank")
        variant = AgentVariantConfig.from_dict(meta["variant"])
        entries = {}
        for code, info in meta["entries"].items():
            network = Sequential(NetworkSpec.from_dict(info["spec"]), np.random.default_rng(0))
            prefix = f"{code}."
            network.load_parameters(
                {
                    name[len(prefix) :]: value
                    for name, value in arrays.items()
                    if name.startswith(prefix)
                }
            )
            optimizer = OptimizerState.restore(info["optimizer"], {})
            entries[code] = BankEntry(QNetwork(network, optimizer), int(info["active_time"]))
        return cls(variant, entries)

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        logger.info("Wrote %s bank checkpoint %s", self.variant.name, path)
        return path

    @classmethod
    def load(cls, path):
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise CheckpointError(f"Cannot read bank checkpoint {path}: {exc}")
        return cls.from_bytes(data)
