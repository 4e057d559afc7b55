"""
Grade sequence model.

An LSTM language model over steel grades. The token stream marks the end of
every processing batch (a run of strips with identical grade, width and
thickness) with END, so sampled sequences come out batch-structured.
"""

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from core.exceptions import CheckpointError, RejectedInputError, TrainingError
from nn.activations import Activation
from nn.checkpoint import read_checkpoint, write_checkpoint
from nn.layers import LayerSpec
from nn.network import NetworkSpec, Sequential
from nn.optimizers import OptimizerState
from nn.sampling import apply_temperature, sample_categorical
from strips.domain import GradeVocabulary

logger = logging.getLogger(__name__)

GRADE_MODEL_KIND = "grade_model"


@dataclass(frozen=True)
class GradeModelConfig:
    hidden_units: int = 512
    dropout_rate: float = 0.2
    sequence_length: int = 20
    batch_size: int = 256
    epochs: int = 500
    learning_rate: float = 0.001
    sampling_temperature: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.hidden_units < 1:
            raise RejectedInputError("hidden_units must be >= 1")
        if self.sequence_length < 2:
            raise RejectedInputError("sequence_length must be >= 2")
        if self.batch_size < 1 or self.epochs < 0:
            raise RejectedInputError("batch_size must be >= 1 and epochs >= 0")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise RejectedInputError("dropout_rate must lie in [0, 1)")
        if self.sampling_temperature < 0:
            raise RejectedInputError("sampling_temperature must be >= 0")

    @classmethod
    def from_run_config(cls, config):
        return cls(
            hidden_units=config["grade_hidden_units"],
            dropout_rate=config["grade_dropout"],
            sequence_length=config["grade_sequence_length"],
            batch_size=config["grade_batch_size"],
            epochs=config["grade_epochs"],
            learning_rate=config["grade_learning_rate"],
            sampling_temperature=config["grade_temperature"],
            beta1=config["adam_beta1"],
            beta2=config["adam_beta2"],
            epsilon=config["adam_epsilon"],
        )


def build_token_stream(strips, vocabulary):
    """Grade ids in processing order with END after every batch."""
    if not strips:
        raise RejectedInputError("Cannot build a token stream from no strips")
    stream = []
    for i, strip in enumerate(strips):
        stream.append(vocabulary.id_of(strip.grade))
        if i + 1 == len(strips) or strips[i + 1].batch_key != strip.batch_key:
            stream.append(vocabulary.end_id)
    return stream


@dataclass
class TrainingSequences:
    """Sliding windows of token ids and their next-token targets."""

    windows: np.ndarray
    targets: np.ndarray
    vocabulary_size: int
    stream: list = field(repr=False, default_factory=list)

    def __len__(self):
        return len(self.targets)

    @property
    def inputs(self):
        """One-hot windows, shape (count, sequence_length, vocabulary_size)."""
        return np.eye(self.vocabulary_size)[self.windows]

    @property
    def target_rows(self):
        return np.eye(self.vocabulary_size)[self.targets]

    def subset(self, index):
        return TrainingSequences(
            self.windows[index], self.targets[index], self.vocabulary_size, self.stream
        )


def windows_from_stream(stream, sequence_length, end_id):
    """
    Every window of ``sequence_length`` tokens with the token that follows it.

    Streams too short for one window are left-padded with END.
    """
    stream = list(stream)
    if len(stream) < sequence_length + 1:
        stream = [end_id] * (sequence_length + 1 - len(stream)) + stream
    count = len(stream) - sequence_length
    windows = np.array([stream[i : i + sequence_length] for i in range(count)], dtype=np.int64)
    targets = np.array(stream[sequence_length:], dtype=np.int64)
    return windows, targets


def build_training_sequences(strips, vocabulary, sequence_length=20):
    stream = build_token_stream(strips, vocabulary)
    windows, targets = windows_from_stream(stream, sequence_length, vocabulary.end_id)
    return TrainingSequences(windows, targets, vocabulary.size, stream)


class GradeModel:
    """LSTM -> dropout -> softmax dense over the vocabulary including END."""

    def __init__(self, vocabulary, config, rng, network=None):
        self.vocabulary = vocabulary
        self.config = config
        v = vocabulary.size
        spec = NetworkSpec(
            layers=(
                LayerSpec("lstm", v, config.hidden_units),
                LayerSpec(
                    "dropout",
                    config.hidden_units,
                    config.hidden_units,
                    dropout_rate=config.dropout_rate,
                ),
                LayerSpec("dense", config.hidden_units, v, activation=Activation("softmax")),
            ),
            loss="cross_entropy",
        )
        self.network = network or Sequential(spec, rng)
        self.seed_window = [vocabulary.end_id] * config.sequence_length
        self.loss_history = []

    def next_token_probabilities(self, windows):
        """Softmax rows for a batch of id windows (eval mode)."""
        windows = np.atleast_2d(np.asarray(windows, dtype=np.int64))
        return self.network.forward(np.eye(self.vocabulary.size)[windows], mode="eval")

    def mean_cross_entropy(self, sequences):
        probabilities = self.next_token_probabilities(sequences.windows)
        picked = probabilities[np.arange(len(sequences)), sequences.targets]
        return float(-np.mean(np.log(np.clip(picked, 1e-12, None))))

    def perplexity(self, sequences):
        return math.exp(self.mean_cross_entropy(sequences))


def train_grade_model(sequences, vocabulary, config, rng):
    """
    Fit a GradeModel with Adam on shuffled mini-batches.

    Raises:
        TrainingError: if a batch loss becomes non-finite, or the final epoch
            loss is not below the uniform baseline ln(V)
    """
    if len(sequences) == 0:
        raise RejectedInputError("No training windows")
    model = GradeModel(vocabulary, config, rng)
    state = OptimizerState.adam(
        config.learning_rate, beta1=config.beta1, beta2=config.beta2, epsilon=config.epsilon
    )
    inputs = sequences.inputs
    targets = sequences.target_rows
    for epoch in range(config.epochs):
        order = rng.permutation(len(sequences))
        losses = []
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            loss = model.network.train_batch(inputs[batch], targets[batch], state, rng)
            losses.append(loss * len(batch))
        epoch_loss = float(sum(losses) / len(order))
        model.loss_history.append(epoch_loss)
        logger.debug("Grade model epoch %d loss %.6f", epoch + 1, epoch_loss)
        if (epoch + 1) % 10 == 0:
            logger.info("Grade model epoch %d/%d loss %.4f", epoch + 1, config.epochs, epoch_loss)

    baseline = math.log(vocabulary.size)
    final_loss = model.loss_history[-1] if model.loss_history else None
    if final_loss is None or final_loss >= baseline:
        raise TrainingError(
            f"Grade model did not beat the uniform baseline {baseline:.4f}",
            diagnostics={
                "final_loss": final_loss,
                "baseline": baseline,
                "epochs": len(model.loss_history),
                "learning_rate": config.learning_rate,
            },
        )
    model.seed_window = list(sequences.stream[-config.sequence_length :])
    if len(model.seed_window) < config.sequence_length:
        pad = config.sequence_length - len(model.seed_window)
        model.seed_window = [vocabulary.end_id] * pad + model.seed_window
    return model


def sample_grades(model, count, rng, temperature=None):
    """
    Sample ``count`` grades; END tokens separate batches and are not returned.

    Two ENDs in a row carry no information, so END is masked right after END.
    """
    if count < 1:
        raise RejectedInputError("count must be >= 1")
    if temperature is None:
        temperature = model.config.sampling_temperature
    end_id = model.vocabulary.end_id
    window = list(model.seed_window)
    grades = []
    while len(grades) < count:
        probabilities = model.next_token_probabilities(window)[0].copy()
        if window[-1] == end_id:
            probabilities[end_id] = 0.0
            probabilities = probabilities / probabilities.sum()
        token = sample_categorical(apply_temperature(probabilities, temperature), rng)
        window = window[1:] + [token]
        if token != end_id:
            grades.append(model.vocabulary.token_of(token))
    return grades


def grade_model_to_bytes(model):
    meta = {
        "kind": GRADE_MODEL_KIND,
        "config": asdict(model.config),
        "spec": model.network.spec.to_dict(),
        "grades": list(model.vocabulary.grades),
        "seed_window": [int(token) for token in model.seed_window],
        "loss_history": model.loss_history,
    }
    return write_checkpoint(meta, model.network.parameters())


def grade_model_from_bytes(data):
    meta, arrays = read_checkpoint(data)
    if meta.get("kind") != GRADE_MODEL_KIND:
        raise CheckpointError("Checkpoint does not hold a grade model")
    vocabulary = GradeVocabulary(meta["grades"])
    config = GradeModelConfig(**meta["config"])
    network = Sequential(NetworkSpec.from_dict(meta["spec"]), np.random.default_rng(0))
    network.load_parameters(arrays)
    model = GradeModel(vocabulary, config, None, network=network)
    model.seed_window = list(meta["seed_window"])
    model.loss_history = list(meta["loss_history"])
    return model
