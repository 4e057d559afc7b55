"""
Conditional GAN over windows of consecutive strips.

A window of ``window_length`` standardized strips is treated as a small image
of shape (window_length, numeric columns). Both networks condition on the
first grade of the window through an embedding multiplied into their input.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from core.exceptions import CheckpointError, RejectedInputError, TrainingError
from nn.activations import Activation
from nn.checkpoint import read_checkpoint, write_checkpoint
from nn.layers import Embedding, LayerSpec, Multiply
from nn.losses import binary_cross_entropy
from nn.network import NetworkSpec, Sequential
from nn.optimizers import OptimizerState, apply_update
from strips.domain import (
    INTEGER_COLUMNS,
    NUMERIC_COLUMNS,
    STEEL_DENSITY,
    GradeVocabulary,
    StandardizationStats,
    Strip,
    derive_length,
    strips_to_matrix,
    validate_strip,
)

logger = logging.getLogger(__name__)

CGAN_KIND = "cgan"
HIDDEN_SIZES = (256, 128, 64)


@dataclass(frozen=True)
class CganConfig:
    noise_length: int = 32
    window_length: int = 16
    numeric_columns: int = len(NUMERIC_COLUMNS)
    discriminator_ratio: int = 2
    label_smoothing: float = 0.9
    epochs: int = 2000
    batch_size: int = 64
    learning_rate: float = 2e-4
    leaky_slope: float = 0.2
    collapse_ratio: float = 0.1
    collapse_patience: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if min(self.noise_length, self.window_length, self.numeric_columns) < 1:
            raise RejectedInputError("CGAN dimensions must be positive")
        if self.discriminator_ratio < 1 or self.batch_size < 1 or self.epochs < 0:
            raise RejectedInputError("discriminator_ratio and batch_size must be >= 1")
        if not 0.0 < self.label_smoothing <= 1.0:
            raise RejectedInputError("label_smoothing must lie in (0, 1]")

    @classmethod
    def from_run_config(cls, config):
        return cls(
            noise_length=config["cgan_noise_length"],
            window_length=config["cgan_window_length"],
            discriminator_ratio=config["cgan_discriminator_ratio"],
            label_smoothing=config["cgan_label_smoothing"],
            epochs=config["cgan_epochs"],
            batch_size=config["cgan_batch_size"],
            learning_rate=config["cgan_learning_rate"],
            leaky_slope=config["leaky_relu_slope"],
            collapse_ratio=config["cgan_collapse_ratio"],
            collapse_patience=config["cgan_collapse_patience"],
            beta1=config["adam_beta1"],
            beta2=config["adam_beta2"],
            epsilon=config["adam_epsilon"],
        )


def _dense_stack(sizes, activation):
    return tuple(
        LayerSpec("dense", n_in, n_out, activation=activation)
        for n_in, n_out in zip(sizes, sizes[1:])
    )


def _condition_ids(grade_ids):
    ids = np.asarray(grade_ids)
    # a window of ids conditions on its first grade
    return ids[:, 0] if ids.ndim == 2 else ids


class ConditionedNetwork:
    """
    Embedding(grade) multiplied into the input, followed by a Sequential trunk.

    Exposes the same forward/backward/loss/parameters/gradients surface as
    Sequential so it can be trained with apply_update and checked with
    gradient_check.
    """

    def __init__(self, grades, input_length, trunk_spec, rng):
        self.embedding = Embedding(LayerSpec("embedding", grades, input_length), rng)
        self.multiply = Multiply(LayerSpec("multiply", input_length, input_length))
        self.trunk = Sequential(trunk_spec, rng)
        self.input_length = input_length
        self.grade_ids = None

    def forward(self, x, mode="eval", rng=None, grade_ids=None):
        ids = _condition_ids(self.grade_ids if grade_ids is None else grade_ids)
        x = np.asarray(x, dtype=np.float64).reshape(len(ids), self.input_length)
        product = self.multiply.forward(
            x, self.embedding.forward(ids, mode=mode), mode=mode
        )
        return self.trunk.forward(product, mode=mode, rng=rng)

    def backward(self, grad):
        d_product = self.trunk.backward(grad)
        d_input, d_embedded = self.multiply.backward(d_product)
        self.embedding.backward(d_embedded)
        return d_input

    def loss(self, output, target):
        return self.trunk.loss(output, target)

    def parameters(self):
        params = {f"embedding.{k}": v for k, v in self.embedding.params.items()}
        params.update(self.trunk.parameters())
        return params

    def gradients(self):
        grads = {f"embedding.{k}": v for k, v in self.embedding.grads.items()}
        grads.update(self.trunk.gradients())
        return grads


class Generator(ConditionedNetwork):
    """noise * E(grade) -> 256 -> 128 -> 64 -> n*W -> reshape (W, n) -> dense to columns."""

    def __init__(self, config, grades, rng):
        n, w, c = config.noise_length, config.window_length, config.numeric_columns
        leaky = Activation("leaky_relu", slope=config.leaky_slope)
        trunk = NetworkSpec(
            layers=_dense_stack((n,) + HIDDEN_SIZES + (n * w,), leaky)
            + (
                LayerSpec("reshape", n * w, n),
                LayerSpec("dense", n, c),
            ),
            loss="mse",
        )
        super().__init__(grades, n, trunk, rng)
        self.window_length = w
        self.columns = c

    def forward(self, x, mode="eval", rng=None, grade_ids=None):
        out = super().forward(x, mode=mode, rng=rng, grade_ids=grade_ids)
        return out.reshape(-1, self.window_length, self.columns)

    def backward(self, grad):
        return super().backward(np.asarray(grad).reshape(-1, self.columns))


class Discriminator(ConditionedNetwork):
    """flatten(window) * E(grade) -> 256 -> 128 -> 64 -> 1 sigmoid."""

    def __init__(self, config, grades, rng):
        flat = config.window_length * config.numeric_columns
        leaky = Activation("leaky_relu", slope=config.leaky_slope)
        trunk = NetworkSpec(
            layers=_dense_stack((flat,) + HIDDEN_SIZES, leaky)
            + (LayerSpec("dense", HIDDEN_SIZES[-1], 1, activation=Activation("sigmoid")),),
            loss="binary_cross_entropy",
        )
        super().__init__(grades, flat, trunk, rng)
        self.window_shape = (config.window_length, config.numeric_columns)

    def backward(self, grad):
        return super().backward(grad).reshape((-1,) + self.window_shape)


@dataclass
class CganModel:
    config: CganConfig
    vocabulary: GradeVocabulary
    stats: StandardizationStats
    generator: Generator
    discriminator: Discriminator
    generator_losses: list = field(default_factory=list)
    discriminator_losses: list = field(default_factory=list)
    collapse_epochs: list = field(default_factory=list)

    @classmethod
    def create(cls, config, vocabulary, stats, rng):
        return cls(
            config=config,
            vocabulary=vocabulary,
            stats=stats,
            generator=Generator(config, len(vocabulary), rng),
            discriminator=Discriminator(config, len(vocabulary), rng),
        )


def generator_forward(model, noise, grade_ids, rng=None, mode="eval"):
    """Standardized window(s) of shape (batch, window_length, columns)."""
    noise = np.atleast_2d(np.asarray(noise, dtype=np.float64))
    ids = np.asarray(grade_ids)
    if ids.ndim == 0:
        ids = ids.reshape(1)
    if ids.ndim == 1 and noise.shape[0] == 1 and ids.shape[0] == model.config.window_length:
        # a single window of per-strip grades
        ids = ids.reshape(1, -1)
    return model.generator.forward(noise, mode=mode, rng=rng, grade_ids=ids)


def build_windows(strips, vocabulary, stats, window_length):
    """
    Consecutive strip windows (stride one), standardized, with window grade ids.

    Returns:
        (windows (count, window_length, columns), grade ids (count, window_length))
    """
    if len(strips) < window_length:
        raise RejectedInputError(
            f"Need at least {window_length} strips to build windows, got {len(strips)}"
        )
    matrix = stats.standardize(strips_to_matrix(strips))
    ids = np.array([vocabulary.id_of(strip.grade) for strip in strips], dtype=np.int64)
    count = len(strips) - window_length + 1
    windows = np.stack([matrix[i : i + window_length] for i in range(count)])
    grade_windows = np.stack([ids[i : i + window_length] for i in range(count)])
    return windows, grade_windows


def discriminator_targets(real, fake, label_smoothing):
    """Column of targets: smoothed real label then zeros for fakes."""
    return np.concatenate([np.full(real, label_smoothing), np.zeros(fake)]).reshape(-1, 1)


def discriminator_accuracy(model, real_windows, grade_ids, rng):
    """Accuracy of D at threshold 0.5 on the real windows and as many fakes."""
    conditions = _condition_ids(grade_ids)
    noise = rng.standard_normal((len(conditions), model.config.noise_length))
    fake = model.generator.forward(noise, grade_ids=conditions)
    d_real = model.discriminator.forward(real_windows, grade_ids=conditions)
    d_fake = model.discriminator.forward(fake, grade_ids=conditions)
    correct = np.sum(d_real >= 0.5) + np.sum(d_fake < 0.5)
    return float(correct / (2 * len(conditions)))


def _check_finite(value, epoch, which, diagnostics):
    if not np.isfinite(value):
        raise TrainingError(
            f"Non-finite {which} loss at epoch {epoch}",
            diagnostics=dict(diagnostics, epoch=epoch, which=which, loss=value),
        )


def _discriminator_step(model, windows, conditions, state, rng):
    config = model.config
    batch = len(conditions) * config.discriminator_ratio
    real_index = rng.integers(0, len(windows), size=batch)
    noise = rng.standard_normal((batch, config.noise_length))
    fake_conditions = conditions[rng.integers(0, len(conditions), size=batch)]
    fake = model.generator.forward(noise, grade_ids=fake_conditions)

    inputs = np.concatenate([windows[real_index], fake])
    ids = np.concatenate([conditions[real_index], fake_conditions])
    targets = discriminator_targets(batch, batch, config.label_smoothing)
    output = model.discriminator.forward(inputs, mode="train", rng=rng, grade_ids=ids)
    value, grad = binary_cross_entropy(output, targets)
    model.discriminator.backward(grad)
    apply_update(model.discriminator.parameters(), model.discriminator.gradients(), state)
    return value


def _generator_step(model, conditions, state, rng):
    config = model.config
    noise = rng.standard_normal((len(conditions), config.noise_length))
    fake = model.generator.forward(noise, mode="train", rng=rng, grade_ids=conditions)
    # the discriminator only propagates gradients here; its weights stay frozen
    output = model.discriminator.forward(fake, mode="train", rng=rng, grade_ids=conditions)
    value, grad = binary_cross_entropy(output, np.ones_like(output))
    d_fake = model.discriminator.backward(grad)
    model.generator.backward(d_fake)
    apply_update(model.generator.parameters(), model.generator.gradients(), state)
    return value, fake


def train_cgan(windows, grade_ids, vocabulary, stats, config, rng):
    """
    Alternate discriminator and generator updates for ``config.epochs`` epochs.

    Raises:
        TrainingError: on a non-finite loss
    """
    windows = np.asarray(windows, dtype=np.float64)
    conditions = _condition_ids(grade_ids)
    if len(windows) == 0:
        raise RejectedInputError("No training windows")
    model = CganModel.create(config, vocabulary, stats, rng)
    d_state = OptimizerState.adam(config.learning_rate, config.beta1, config.beta2, config.epsilon)
    g_state = OptimizerState.adam(config.learning_rate, config.beta1, config.beta2, config.epsilon)
    real_sd = windows.reshape(-1, config.numeric_columns).std(axis=0)
    streak = 0
    logger.info(
        "Discriminator accuracy before training %.3f",
        discriminator_accuracy(model, windows, conditions, rng),
    )

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(windows))
        d_losses, g_losses = [], []
        fake = None
        for start in range(0, len(order), config.batch_size):
            batch_conditions = conditions[order[start : start + config.batch_size]]
            d_losses.append(_discriminator_step(model, windows, batch_conditions, d_state, rng))
            g_loss, fake = _generator_step(model, batch_conditions, g_state, rng)
            g_losses.append(g_loss)

        d_loss, g_loss = float(np.mean(d_losses)), float(np.mean(g_losses))
        diagnostics = {"discriminator_loss": d_loss, "generator_loss": g_loss}
        _check_finite(d_loss, epoch, "discriminator", diagnostics)
        _check_finite(g_loss, epoch, "generator", diagnostics)
        model.discriminator_losses.append(d_loss)
        model.generator_losses.append(g_loss)
        logger.debug("CGAN epoch %d D %.5f G %.5f", epoch, d_loss, g_loss)
        if epoch % 50 == 0:
            logger.info("CGAN epoch %d/%d D %.4f G %.4f", epoch, config.epochs, d_loss, g_loss)

        fake_sd = fake.reshape(-1, config.numeric_columns).std(axis=0)
        if np.any(fake_sd < config.collapse_ratio * real_sd):
            streak += 1
            if streak == config.collapse_patience:
                model.collapse_epochs.append(epoch)
                logger.warning(
                    "Possible mode collapse: generated sd below %.0f%% of real for %d epochs",
                    100 * config.collapse_ratio,
                    streak,
                )
        else:
            streak = 0
    logger.info(
        "Discriminator accuracy after %d epochs %.3f",
        config.epochs,
        discriminator_accuracy(model, windows, conditions, rng),
    )
    return model


@dataclass
class GenerationResult:
    strips: list
    repairs: dict

    @property
    def repair_count(self):
        return sum(self.repairs.values())


def _segments(ids, window_length):
    """Split grade ids into same-grade segments no longer than one window."""
    segments = []
    start = 0
    for i in range(1, len(ids) + 1):
        if i == len(ids) or ids[i] != ids[start] or i - start == window_length:
            segments.append((start, i))
            start = i
    return segments


def generate_strips(model, grades, rng, density=STEEL_DENSITY, length_min=None, length_max=None):
    """
    Generate one Strip per requested grade.

    Values are destandardized, integer columns rounded, everything clipped to
    the observed historical range and resulting_width forced <= original_width.
    Repairs are counted per column.
    """
    if not grades:
        raise RejectedInputError("No grades to generate strips for")
    config = model.config
    ids = np.array([model.vocabulary.id_of(grade) for grade in grades], dtype=np.int64)
    rows = np.zeros((len(ids), config.numeric_columns))
    for start, stop in _segments(ids, config.window_length):
        noise = rng.standard_normal((1, config.noise_length))
        window = model.generator.forward(noise, grade_ids=ids[start : start + 1])[0]
        rows[start:stop] = window[: stop - start]

    values = model.stats.destandardize(rows)
    repairs = {column: 0 for column in NUMERIC_COLUMNS}
    repairs["width_order"] = 0
    for j, column in enumerate(NUMERIC_COLUMNS):
        if column in INTEGER_COLUMNS:
            values[:, j] = np.round(values[:, j])
        low, high = model.stats.minimum[j], model.stats.maximum[j]
        if column in INTEGER_COLUMNS:
            low, high = max(np.ceil(low), 1.0), np.floor(high)
        outside = (values[:, j] < low) | (values[:, j] > high)
        repairs[column] += int(outside.sum())
        values[:, j] = np.clip(values[:, j], low, high)

    original = NUMERIC_COLUMNS.index("original_width")
    resulting = NUMERIC_COLUMNS.index("resulting_width")
    too_wide = values[:, resulting] > values[:, original]
    repairs["width_order"] = int(too_wide.sum())
    values[too_wide, resulting] = values[too_wide, original]

    strips = []
    for grade, row in zip(grades, values):
        record = dict(zip(NUMERIC_COLUMNS, row))
        for column in INTEGER_COLUMNS:
            record[column] = int(record[column])
        strip = Strip(
            grade=grade,
            length=derive_length(
                record["weight"],
                record["original_width"],
                record["thickness"],
                density,
                length_min,
                length_max,
            ),
            **record,
        )
        validate_strip(strip, model.vocabulary)
        strips.append(strip)
    if any(repairs.values()):
        logger.info("Generated %d strips with repairs %s", len(strips), repairs)
    return GenerationResult(strips=strips, repairs=repairs)


def cgan_to_bytes(model):
    meta = {
        "kind": CGAN_KIND,
        "config": asdict(model.config),
        "grades": list(model.vocabulary.grades),
        "columns": list(model.stats.columns),
        "generator_losses": model.generator_losses,
        "discriminator_losses": model.discriminator_losses,
        "collapse_epochs": model.collapse_epochs,
    }
    arrays = {f"G.{k}": v for k, v in model.generator.parameters().items()}
    arrays.update({f"D.{k}": v for k, v in model.discriminator.parameters().items()})
    arrays.update(
        {
            "stats.mean": model.stats.mean,
            "stats.sd": model.stats.sd,
            "stats.minimum": model.stats.minimum,
            "stats.maximum": model.stats.maximum,
        }
    )
    return write_checkpoint(meta, arrays)


def _load_into(network, arrays, prefix):
    params = network.parameters()
    for name, value in params.items():
        key = f"{prefix}.{name}"
        if key not in arrays or arrays[key].shape != value.shape:
            raise CheckpointError(f"Checkpoint lacks a matching array for {key}")
        value[...] = arrays[key]


def cgan_from_bytes(data):
    meta, arrays = read_checkpoint(data)
    if meta.get("kind") != CGAN_KIND:
        raise CheckpointError("Checkpoint does not hold a CGAN")
    config = CganConfig(**meta["config"])
    vocabulary = GradeVocabulary(meta["grades"])
    stats = StandardizationStats(
        mean=arrays["stats.mean"],
        sd=arrays["stats.sd"],
        minimum=arrays["stats.minimum"],
        maximum=arrays["stats.maximum"],
        columns=tuple(meta["columns"]),
    )
    model = CganModel.create(config, vocabulary, stats, np.random.default_rng(0))
    _load_into(model.generator, arrays, "G")
    _load_into(model.discriminator, arrays, "D")
    model.generator_losses = list(meta["generator_losses"])
    model.discriminator_losses = list(meta["discriminator_losses"])
    model.collapse_epochs = list(meta["collapse_epochs"])
    return model
