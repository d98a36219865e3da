"""Pair construction, the training loop, evaluation, and the gradient-check
harness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    SiameseModel,
    distance,
    embed,
    init_model,
    pair_grad,
    pair_loss,
    score,
)
from .rng import Rng

DECISION_THRESHOLD = 0.5  # midpoint of the 0/1 label scale


@dataclass
class LabeledPair:
    a: np.ndarray  # reference image
    b: np.ndarray  # positive or negative sample
    label: int  # 0 = similar, 1 = dissimilar

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 16
    max_epochs: int = 100
    target_accuracy: float = 0.95
    val_fraction: float = 0.2
    seed: int = 0
    margin: float = 1.0
    warm_start: str | None = None  # path to an existing model file

    def __post_init__(self):
        if not 0 < self.target_accuracy <= 1:
            raise ValueError(f"target_accuracy must be in (0, 1], got {self.target_accuracy}")
        if not 0 < self.val_fraction < 1:
            raise ValueError(f"val_fraction must be in (0, 1), got {self.val_fraction}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    val_accuracy: float


@dataclass
class EvalReport:
    accuracy: float
    mean_distance_similar: float
    mean_distance_dissimilar: float
    confusion: tuple[int, int, int, int]  # (tp, tn, fp, fn); positive = dissimilar


def build_pairs(
    benchmarks: list[np.ndarray],
    positives: list[np.ndarray],
    negatives: list[np.ndarray],
) -> list[LabeledPair]:
    """For each benchmark in order, alternate positive (label 0) and negative
    (label 1) samples; when one list runs out, the rest of the other follows."""
    if not benchmarks or not positives or not negatives:
        raise ValueError("benchmarks, positives, and negatives must all be non-empty")
    pairs = []
    for bench in benchmarks:
        i = 0
        while i < len(positives) and i < len(negatives):
            pairs.append(LabeledPair(bench, positives[i], 0))
            pairs.append(LabeledPair(bench, negatives[i], 1))
            i += 1
        pairs.extend(LabeledPair(bench, p, 0) for p in positives[i:])
        pairs.extend(LabeledPair(bench, n, 1) for n in negatives[i:])
    return pairs


def split_train_val(pairs: list[LabeledPair], val_fraction: float, rng: Rng):
    """Fisher-Yates shuffle, then the last ceil(n * val_fraction) pairs become
    the validation set."""
    if not 0 < val_fraction < 1:
        raise ValueError(f"val_fraction must be in (0, 1), got {val_fraction}")
    if len(pairs) < 2:
        raise ValueError(f"need at least 2 pairs to split, got {len(pairs)}")
    shuffled = list(pairs)
    rng.shuffle(shuffled)
    n_val = math.ceil(len(shuffled) * val_fraction)
    return shuffled[:-n_val], shuffled[-n_val:]


def evaluate(model: SiameseModel, pairs: list[LabeledPair]) -> EvalReport:
    """Score every pair; predicted dissimilar iff score >= 0.5.

    Embeddings are memoized per image object within the call, so repeated
    reference images are embedded once. A label class with no pairs reports a
    mean distance of 0.0.
    """
    if not pairs:
        raise ValueError("cannot evaluate an empty pair list")
    cache: dict[int, np.ndarray] = {}

    def cached_embed(img):
        e = cache.get(id(img))
        if e is None:
            e = embed(model, img)
            cache[id(img)] = e
        return e

    tp = tn = fp = fn = 0
    dist_sums = [0.0, 0.0]
    counts = [0, 0]
    for pair in pairs:
        d = distance(cached_embed(pair.a), cached_embed(pair.b))
        dissimilar = score(d, model.margin) >= DECISION_THRESHOLD
        dist_sums[pair.label] += d
        counts[pair.label] += 1
        if pair.label == 1:
            tp, fn = tp + dissimilar, fn + (not dissimilar)
        else:
            fp, tn = fp + dissimilar, tn + (not dissimilar)
    return EvalReport(
        accuracy=(tp + tn) / len(pairs),
        mean_distance_similar=dist_sums[0] / counts[0] if counts[0] else 0.0,
        mean_distance_dissimilar=dist_sums[1] / counts[1] if counts[1] else 0.0,
        confusion=(tp, tn, fp, fn),
    )


def train(config: TrainConfig, pairs: list[LabeledPair], on_epoch=None):
    """SGD with momentum over minibatches of pair gradients.

    Per step: v <- momentum*v - lr*g, theta <- theta + v, with g averaged over
    the batch. Pairs are reshuffled every epoch from the run's Rng. Training
    stops at the end of the first epoch whose validation accuracy reaches the
    target, else after max_epochs. Deterministic given (config, pairs).

    Returns (model, history) where history is a list of EpochStats; on_epoch,
    if given, is called with each EpochStats as it completes.
    """
    rng = Rng(config.seed)
    if config.warm_start is not None:
        from .persistence import load_model

        model = load_model(config.warm_start)
    else:
        model = init_model(rng, margin=config.margin)

    train_pairs, val_pairs = split_train_val(pairs, config.val_fraction, rng)
    labels = {p.label for p in train_pairs}
    if labels != {0, 1}:
        raise ValueError(
            "training split needs at least one pair of each label, "
            f"got only label(s) {sorted(labels)}"
        )

    param_idx = [i for i, layer in enumerate(model.layers) if layer.has_params]
    velocity = {
        i: (np.zeros_like(model.layers[i].weights), np.zeros_like(model.layers[i].bias))
        for i in param_idx
    }

    history: list[EpochStats] = []
    lr, mu = config.learning_rate, config.momentum
    for epoch in range(1, config.max_epochs + 1):
        rng.shuffle(train_pairs)
        loss_total = 0.0
        for start in range(0, len(train_pairs), config.batch_size):
            batch = train_pairs[start : start + config.batch_size]
            accum = {
                i: (np.zeros_like(v[0]), np.zeros_like(v[1]))
                for i, v in velocity.items()
            }
            for pair in batch:
                loss, grads = pair_grad(model, pair)
                loss_total += loss
                for i in param_idx:
                    accum[i][0][:] += grads[i][0]
                    accum[i][1][:] += grads[i][1]
            scale = 1.0 / len(batch)
            for i in param_idx:
                vw, vb = velocity[i]
                vw[:] = mu * vw - lr * (accum[i][0] * scale)
                vb[:] = mu * vb - lr * (accum[i][1] * scale)
                model.layers[i].weights += vw
                model.layers[i].bias += vb
        report = evaluate(model, val_pairs)
        stats = EpochStats(epoch, loss_total / len(train_pairs), report.accuracy)
        history.append(stats)
        if on_epoch is not None:
            on_epoch(stats)
        if report.accuracy >= config.target_accuracy:
            break
    return model, history


def write_history(history: list[EpochStats], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("epoch,mean_loss,val_accuracy\n")
        for row in history:
            f.write(f"{row.epoch},{row.mean_loss:.17e},{row.val_accuracy:.17e}\n")


# -- gradient checking ---------------------------------------------------------

GRADCHECK_EPSILON = 1e-6
GRADCHECK_TOLERANCE = 1e-5


def relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(1e-12, abs(a) + abs(b))


def gradcheck(
    model: SiameseModel, pair: LabeledPair, sample_size: int, rng: Rng | None = None
) -> float:
    """Max relative error between pair_grad and central finite differences,
    over sample_size sampled weights plus every bias.

    Weight samples are spread evenly across the weight tensors so every layer
    kind is exercised (a uniform draw over all coordinates would almost always
    land in the big dense matrix).
    """
    if sample_size < 1:
        raise ValueError(f"sample_size must be >= 1, got {sample_size}")
    rng = rng if rng is not None else Rng(0)
    _, analytic = pair_grad(model, pair)

    param_idx = [i for i, layer in enumerate(model.layers) if layer.has_params]
    coords: list[tuple[int, int, int]] = []  # (layer index, 0=weights/1=bias, flat index)
    base, extra = divmod(sample_size, len(param_idx))
    for k, i in enumerate(param_idx):
        n_here = base + (1 if k < extra else 0)
        size = model.layers[i].weights.size
        coords.extend((i, 0, rng.below(size)) for _ in range(n_here))
    for i in param_idx:
        coords.extend((i, 1, j) for j in range(model.layers[i].bias.size))

    worst = 0.0
    for i, which, j in coords:
        layer = model.layers[i]
        flat = (layer.weights if which == 0 else layer.bias).reshape(-1)
        saved = flat[j]
        flat[j] = saved + GRADCHECK_EPSILON
        loss_plus = pair_loss(model, pair)
        flat[j] = saved - GRADCHECK_EPSILON
        loss_minus = pair_loss(model, pair)
        flat[j] = saved
        numeric = (loss_plus - loss_minus) / (2.0 * GRADCHECK_EPSILON)
        g = analytic[i][which].reshape(-1)[j]
        worst = max(worst, relative_error(g, numeric))
    return worst


def standard_gradcheck(seed: int, sample_size: int = 200) -> float:
    """The CLI's gradcheck: He-init model and a random similar pair, all
    derived from one seed."""
    rng = Rng(seed)
    model = init_model(rng)
    img_a = rng.uniform_block(64 * 64).reshape(64, 64)
    img_b = rng.uniform_block(64 * 64).reshape(64, 64)
    return gradcheck(model, LabeledPair(img_a, img_b, 0), sample_size, rng)
