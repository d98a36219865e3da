"""Twin-branch embedding model: one shared parameter set read by both branches.

The network maps a 64x64 grayscale image to a 64-d embedding:
conv 1->8, relu, pool, conv 8->16, relu, pool, conv 16->32, relu, pool,
flatten, dense 2048->64 (linear head, so distances are unbounded above and
the margin hinge stays meaningful). Weight sharing is structural: there is a
single LayerParams list, so the two branches cannot diverge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .layers import (
    LayerParams,
    conv_layer,
    dense_layer,
    he_init,
    run_backward,
    run_forward,
    run_forward_training,
)
from .rng import Rng

INPUT_SHAPE = (1, 64, 64)
EMBEDDING_DIM = 64


def make_layers() -> list[LayerParams]:
    return [
        conv_layer(8, 1),
        LayerParams("relu"),
        LayerParams("maxpool"),
        conv_layer(16, 8),
        LayerParams("relu"),
        LayerParams("maxpool"),
        conv_layer(32, 16),
        LayerParams("relu"),
        LayerParams("maxpool"),
        LayerParams("flatten"),
        dense_layer(64, 2048),
    ]


@dataclass
class SiameseModel:
    layers: list[LayerParams] = field(default_factory=make_layers)
    margin: float = 1.0
    input_shape: tuple[int, int, int] = INPUT_SHAPE
    embedding_dim: int = EMBEDDING_DIM

    def __post_init__(self):
        if not self.margin > 0:
            raise ValueError(f"margin must be positive, got {self.margin}")


def new_model(margin: float = 1.0) -> SiameseModel:
    """All-zero parameters (embeds everything to the zero vector)."""
    return SiameseModel(margin=margin)


def init_model(rng: Rng, margin: float = 1.0) -> SiameseModel:
    """He-uniform initialization, layers drawn in network order."""
    model = SiameseModel(margin=margin)
    for layer in model.layers:
        if layer.has_params:
            he_init(layer, rng)
    return model


def _as_input(model: SiameseModel, image: np.ndarray) -> np.ndarray:
    img = np.asarray(image, dtype=np.float64)
    c, h, w = model.input_shape
    if img.shape != (h, w):
        raise ShapeError(f"expected a {h}x{w} image, got shape {tuple(img.shape)}")
    return img.reshape(c, h, w)


def embed(model: SiameseModel, image: np.ndarray) -> np.ndarray:
    """Forward one image to its embedding. Deterministic: same image + same
    model gives bit-identical output."""
    return run_forward(model.layers, _as_input(model, image))


def distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance. Accumulated sequentially in index order so that
    d(a, b) == d(b, a) bit-exactly and d(a, a) == 0.0 exactly."""
    if len(a) != len(b):
        raise ShapeError(f"embedding lengths differ: {len(a)} vs {len(b)}")
    total = 0.0
    for av, bv in zip(a, b):
        diff = av - bv
        total += diff * diff
    return math.sqrt(total)


def contrastive_loss(d: float, label: int, margin: float) -> tuple[float, float]:
    """Margin loss on an embedding distance.

    label 0 (similar):    L = d^2 / 2
    label 1 (dissimilar): L = max(0, margin - d)^2 / 2

    Returns (loss, dL/dd).
    """
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    if not margin > 0:
        raise ValueError(f"margin must be positive, got {margin}")
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    if label == 0:
        return 0.5 * d * d, d
    slack = max(0.0, margin - d)
    return 0.5 * slack * slack, -slack


def score(d: float, margin: float) -> float:
    """Dissimilarity score in [0, 1]: linear in d up to the margin, then 1."""
    return min(d, margin) / margin


def pair_grad(model: SiameseModel, pair):
    """Loss and parameter gradients for one labeled pair.

    Both images run through the same parameters; the returned gradient for
    each parameter tensor is the sum of the two branches' contributions.
    Returns (loss, grads) with grads aligned to model.layers as in
    layers.run_backward.
    """
    emb_a, caches_a = run_forward_training(model.layers, _as_input(model, pair.a))
    emb_b, caches_b = run_forward_training(model.layers, _as_input(model, pair.b))
    d = distance(emb_a, emb_b)
    loss, dloss_dd = contrastive_loss(d, pair.label, model.margin)
    if d == 0.0:
        # identical embeddings: the distance gradient direction is undefined
        # and the loss is stationary for label 0, so propagate zeros
        grad_a = np.zeros_like(emb_a)
    else:
        grad_a = (dloss_dd / d) * (emb_a - emb_b)
    grad_b = -grad_a
    _, grads_a = run_backward(model.layers, caches_a, grad_a)
    _, grads_b = run_backward(model.layers, caches_b, grad_b)
    grads = []
    for ga, gb in zip(grads_a, grads_b):
        if ga is None:
            grads.append(None)
        else:
            grads.append((ga[0] + gb[0], ga[1] + gb[1]))
    return loss, grads


def pair_loss(model: SiameseModel, pair) -> float:
    """Forward-only pair loss (used by the finite-difference harness)."""
    d = distance(embed(model, pair.a), embed(model, pair.b))
    loss, _ = contrastive_loss(d, pair.label, model.margin)
    return loss
